#pragma once

// Trajectory tables and their CSV form: one `# {json}` header line, a column
// line, then one row per sample.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hesim/dynamics.hpp"
#include "hesim/nh_composite.hpp"

namespace hesim {

struct TrajectoryTable {
  std::string header;  // JSON object, single line
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Throws InvalidArgument for an unknown column.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  std::vector<double> series(std::string_view name) const;
};

/// Columns: t, then per sector K = 1..M `L.alpha_K L.beta_K L.p_K L.E_K L.S_K`,
/// then `L.alpha L.beta L.E L.S`, then `alpha beta E_total S_total dS_dt`.
TrajectoryTable tabulate(const Trajectory& trajectory, const std::string& label);

/// As above for every subsystem, followed by `E_flow.X.Y S_flow.X.Y T_Q.X.Y`
/// per flow and `S_irr.X` per subsystem for the coupled kinds. Quantities that
/// do not apply to the kind are NaN.
TrajectoryTable tabulate(const CompositeTrajectory& trajectory);

void write_csv(std::ostream& out, const TrajectoryTable& table);
void write_csv(const std::string& path, const TrajectoryTable& table);

/// Throws ParseError on ragged rows, bad numbers or non-monotone t.
TrajectoryTable read_csv(std::istream& in);
TrajectoryTable read_csv(const std::string& path);

/// (α_K, β_K) of one subsystem at every row.
std::vector<HEState> states_from_table(const TrajectoryTable& table, std::string_view label,
                                       double kB = 1.0);

}  // namespace hesim
