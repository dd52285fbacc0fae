#include "hesim/trajectory_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "hesim/error.hpp"

namespace hesim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void sector_columns(std::vector<std::string>& cols, const std::string& label, std::size_t m) {
  for (std::size_t k = 1; k <= m; ++k) {
    const std::string K = std::to_string(k);
    for (const char* q : {"alpha_", "beta_", "p_", "E_", "S_"}) cols.push_back(label + "." + q + K);
  }
  for (const char* q : {"alpha", "beta", "E", "S"}) cols.push_back(label + "." + q);
}

void global_columns(std::vector<std::string>& cols) {
  for (const char* q : {"alpha", "beta", "E_total", "S_total", "dS_dt"}) cols.emplace_back(q);
}

void sector_values(std::vector<double>& row, const HEState& h, std::span<const double> p,
                   std::span<const double> E, std::span<const double> S) {
  for (std::size_t k = 0; k < h.alpha.size(); ++k) {
    row.insert(row.end(), {h.alpha[k], h.beta[k], p[k], E[k], S[k]});
  }
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_number(std::string_view cell, std::size_t line) {
  if (cell == "nan") return kNaN;
  if (cell == "inf") return std::numeric_limits<double>::infinity();
  if (cell == "-inf") return -std::numeric_limits<double>::infinity();
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line) + ": bad number '" + std::string(cell) + "'");
  }
  return x;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::size_t TrajectoryTable::column(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) {
    throw Error(ErrorCode::InvalidArgument, "no column '" + std::string(name) + "'");
  }
  return static_cast<std::size_t>(it - columns.begin());
}

bool TrajectoryTable::has_column(std::string_view name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::vector<double> TrajectoryTable::series(std::string_view name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

TrajectoryTable tabulate(const Trajectory& trajectory, const std::string& label) {
  TrajectoryTable table;
  if (trajectory.samples.empty()) return table;
  table.columns.emplace_back("t");
  sector_columns(table.columns, label, trajectory.front().p_K.size());
  global_columns(table.columns);
  for (const Sample& s : trajectory.samples) {
    std::vector<double> row{s.t};
    sector_values(row, s.state, s.p_K, s.E_K, s.S_K);
    row.insert(row.end(), {s.potentials.alpha, s.potentials.beta, s.energy, s.entropy});
    row.insert(row.end(), {s.potentials.alpha, s.potentials.beta, s.energy, s.entropy,
                           s.entropy_production});
    table.rows.push_back(std::move(row));
  }
  return table;
}

TrajectoryTable tabulate(const CompositeTrajectory& trajectory) {
  TrajectoryTable table;
  if (trajectory.samples.empty()) return table;
  const CompositeSample& first = trajectory.samples.front();
  table.columns.emplace_back("t");
  for (std::size_t j = 0; j < trajectory.labels.size(); ++j) {
    sector_columns(table.columns, trajectory.labels[j], first.states[j].alpha.size());
  }
  global_columns(table.columns);
  if (first.flows) {
    for (const Flow& f : first.flows->flows) {
      const std::string pair = f.from + "." + f.to;
      for (const char* q : {"E_flow.", "S_flow.", "T_Q."}) table.columns.push_back(q + pair);
    }
    for (const auto& [who, _] : first.flows->irreversibility) table.columns.push_back("S_irr." + who);
  }
  if (first.three) table.columns.emplace_back("beta_eff");

  for (const CompositeSample& c : trajectory.samples) {
    std::vector<double> row{c.t};
    for (std::size_t j = 0; j < c.states.size(); ++j) {
      const SubsystemObservables& o = c.subsystems[j];
      sector_values(row, c.states[j], o.p_K, o.E_K, o.S_K);
      row.insert(row.end(), {o.alpha, o.beta, o.energy, o.entropy});
    }
    row.insert(row.end(), {kNaN, c.beta.value_or(kNaN), c.energy, c.entropy, c.entropy_production});
    if (c.flows) {
      for (const Flow& f : c.flows->flows) row.insert(row.end(), {f.energy, f.entropy, f.temperature});
      for (const auto& [_, value] : c.flows->irreversibility) row.push_back(value);
    }
    if (c.three) row.push_back(c.three->beta_eff);
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_csv(std::ostream& out, const TrajectoryTable& table) {
  out << "# " << (table.header.empty() ? "{}" : table.header) << '\n';
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    out << (c ? "," : "") << table.columns[c];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
    out << '\n';
  }
}

void write_csv(const std::string& path, const TrajectoryTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  write_csv(out, table);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

TrajectoryTable read_csv(std::istream& in) {
  TrajectoryTable table;
  std::string line;
  std::size_t number = 0;
  if (!std::getline(in, line) || !line.starts_with("# ")) {
    throw Error(ErrorCode::ParseError, "line 1: expected a '# {header}' line");
  }
  ++number;
  table.header = line.substr(2);
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "line 2: missing column names");
  ++number;
  for (auto name : split(line)) table.columns.emplace_back(name);

  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != table.columns.size()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(number) + ": expected " +
                                             std::to_string(table.columns.size()) + " values");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (auto cell : cells) row.push_back(parse_number(cell, number));
    table.rows.push_back(std::move(row));
  }

  if (table.rows.size() > 2) {
    const double dir = table.rows[1][0] - table.rows[0][0];
    for (std::size_t r = 1; r < table.rows.size(); ++r) {
      const double step = table.rows[r][0] - table.rows[r - 1][0];
      if (step == 0.0 || (step > 0.0) != (dir > 0.0)) {
        throw Error(ErrorCode::ParseError, "row " + std::to_string(r + 1) + ": t is not monotone");
      }
    }
  }
  return table;
}

TrajectoryTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  return read_csv(in);
}

std::vector<HEState> states_from_table(const TrajectoryTable& table, std::string_view label,
                                       double kB) {
  const std::string prefix = std::string(label) + ".";
  std::vector<std::size_t> a_cols, b_cols;
  for (std::size_t k = 1; table.has_column(prefix + "alpha_" + std::to_string(k)); ++k) {
    a_cols.push_back(table.column(prefix + "alpha_" + std::to_string(k)));
    b_cols.push_back(table.column(prefix + "beta_" + std::to_string(k)));
  }
  if (a_cols.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no sector columns for '" + std::string(label) + "'");
  }
  std::vector<HEState> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    HEState h;
    h.kB = kB;
    for (std::size_t k = 0; k < a_cols.size(); ++k) {
      h.alpha.push_back(row[a_cols[k]]);
      h.beta.push_back(row[b_cols[k]]);
    }
    out.push_back(std::move(h));
  }
  return out;
}

}  // namespace hesim
