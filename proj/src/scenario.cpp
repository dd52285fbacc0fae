#include "hesim/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hesim/detail/compensated.hpp"
#include "hesim/error.hpp"

namespace hesim {

using nlohmann::json;

namespace {

constexpr double kNormalizationTol = 1e-9;

struct KindName {
  ScenarioKind kind;
  std::string_view name;
};

constexpr KindName kKinds[] = {
    {ScenarioKind::Isolated, "isolated"},
    {ScenarioKind::CompositeIndependent, "composite_independent"},
    {ScenarioKind::NhGeneral, "nh_general"},
    {ScenarioKind::NhTwo, "nh_two"},
    {ScenarioKind::NhThree, "nh_three"},
};

[[noreturn]] void parse_fail(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ParseError, field + ": " + what);
}

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::ValidationError, what);
}

// Typed accessors that carry the dotted path of the value they read.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return j_; }

  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

  Node at(const char* key) const {
    if (!j_.is_object()) parse_fail(path_, "expected an object");
    const auto it = j_.find(key);
    if (it == j_.end()) parse_fail(child(key), "missing required field");
    return Node(*it, child(key));
  }

  double number() const {
    if (!j_.is_number()) parse_fail(path_, "expected a number");
    return j_.get<double>();
  }

  long long integer() const {
    if (j_.is_number_integer()) return j_.get<long long>();
    if (j_.is_number_float()) {
      const double x = j_.get<double>();
      if (std::floor(x) == x && std::fabs(x) < 9e15) return static_cast<long long>(x);
    }
    parse_fail(path_, "expected an integer");
  }

  std::string string() const {
    if (!j_.is_string()) parse_fail(path_, "expected a string");
    return j_.get<std::string>();
  }

  bool boolean() const {
    if (!j_.is_boolean()) parse_fail(path_, "expected true or false");
    return j_.get<bool>();
  }

  std::size_t size() const {
    if (!j_.is_array()) parse_fail(path_, "expected an array");
    return j_.size();
  }

  Node operator[](std::size_t i) const {
    return Node(j_[i], path_ + "[" + std::to_string(i) + "]");
  }

  std::vector<double> numbers() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)[i].number();
    return out;
  }

  template <class Int>
  std::vector<Int> integers() const {
    std::vector<Int> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const long long v = (*this)[i].integer();
      if constexpr (std::is_unsigned_v<Int>) {
        if (v < 0) parse_fail((*this)[i].path(), "expected a non-negative integer");
      }
      out[i] = static_cast<Int>(v);
    }
    return out;
  }

 private:
  std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
};

ScenarioKind parse_kind(const Node& n) {
  const std::string s = n.string();
  for (const auto& k : kKinds) {
    if (k.name == s) return k.kind;
  }
  parse_fail(n.path(), "unknown kind '" + s + "'");
}

std::vector<EnergyLevel> parse_levels(const Node& levels) {
  std::vector<EnergyLevel> out(levels.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Node lv = levels[i];
    out[i].energy = lv.at("energy").number();
    if (lv.has("degeneracy")) {
      const long long g = lv.at("degeneracy").integer();
      if (g > 1'000'000'000 || g < -1'000'000'000) {
        parse_fail(lv.at("degeneracy").path(), "out of range");
      }
      out[i].degeneracy = static_cast<int>(g);
    }
  }
  return out;
}

void parse_partition(const Node& n, std::optional<std::vector<std::size_t>>& cuts,
                     std::optional<std::vector<int>>& assignment) {
  if (!n.has("partition")) return;
  const Node part = n.at("partition");
  const bool has_cuts = part.has("cuts");
  const bool has_assignment = part.has("assignment");
  if (has_cuts == has_assignment) parse_fail(part.path(), "expected exactly one of cuts, assignment");
  if (has_cuts) cuts = part.at("cuts").integers<std::size_t>();
  if (has_assignment) assignment = part.at("assignment").integers<int>();
}

SubsystemSpec parse_subsystem(const Node& n) {
  SubsystemSpec out;
  out.label = n.at("label").string();
  out.levels = parse_levels(n.at("levels"));
  parse_partition(n, out.cuts, out.assignment);

  const Node init = n.at("initial");
  if (init.has("alpha")) {
    if (init.has("p")) parse_fail(init.path(), "give either p or alpha, not both");
    out.initial.alpha = init.at("alpha").numbers();
  } else {
    out.initial.p = init.at("p").numbers();
  }
  out.initial.beta = init.at("beta").numbers();
  out.tau = n.at("tau").numbers();
  return out;
}

IntegratorConfig parse_integrator(const Node& n) {
  IntegratorConfig c;
  if (n.has("method")) {
    const std::string m = n.at("method").string();
    if (m == "rk45") {
      c.method = Method::Rk45Adaptive;
    } else if (m == "rk4") {
      c.method = Method::Rk4Fixed;
    } else {
      parse_fail(n.at("method").path(), "expected rk45 or rk4");
    }
  }
  if (n.has("rel_tol")) c.rel_tol = n.at("rel_tol").number();
  if (n.has("abs_tol")) c.abs_tol = n.at("abs_tol").number();
  if (n.has("t_end")) c.t_end = n.at("t_end").number();
  if (n.has("sample_every")) c.sample_every = n.at("sample_every").number();
  if (n.has("dt_init")) c.dt_init = n.at("dt_init").number();
  if (n.has("dt_max")) c.dt_max = n.at("dt_max").number();
  if (n.has("max_steps")) c.max_steps = static_cast<long>(n.at("max_steps").integer());
  if (n.has("direction")) {
    const std::string d = n.at("direction").string();
    if (d == "forward") {
      c.direction = Direction::Forward;
    } else if (d == "backward") {
      c.direction = Direction::Backward;
    } else {
      parse_fail(n.at("direction").path(), "expected forward or backward");
    }
  }
  if (n.has("renormalize")) c.renormalize = n.at("renormalize").boolean();
  return c;
}

Scenario from_json(const json& doc) {
  const Node root(doc, "");
  Scenario s;
  s.kind = parse_kind(root.at("kind"));
  if (root.has("kB")) s.kB = root.at("kB").number();

  const Node subs = root.at("subsystems");
  s.subsystems.reserve(subs.size());
  for (std::size_t i = 0; i < subs.size(); ++i) s.subsystems.push_back(parse_subsystem(subs[i]));

  if (s.kind == ScenarioKind::NhThree || root.has("coupling")) {
    const Node c = root.at("coupling");
    Coupling cp;
    cp.tau_JA = c.at("tau_JA").number();
    cp.tau_JB = c.at("tau_JB").number();
    if (c.has("omega_A")) cp.omega_A = c.at("omega_A").number();
    if (c.has("omega_B")) cp.omega_B = c.at("omega_B").number();
    s.coupling = cp;
  }

  if (root.has("integrator")) s.integrator = parse_integrator(root.at("integrator"));
  if (root.has("mode")) {
    const std::string m = root.at("mode").string();
    if (m == "reduced") {
      s.mode = Mode::Reduced;
    } else if (m == "full") {
      s.mode = Mode::Full;
    } else {
      parse_fail("mode", "expected reduced or full");
    }
  }
  return s;
}

json to_json(const Scenario& s) {
  json doc;
  doc["kind"] = std::string(to_string(s.kind));
  doc["kB"] = s.kB;
  doc["mode"] = s.mode == Mode::Full ? "full" : "reduced";
  json subs = json::array();
  for (const auto& sub : s.subsystems) {
    json j;
    j["label"] = sub.label;
    json levels = json::array();
    for (const auto& lv : sub.levels) {
      levels.push_back({{"energy", lv.energy}, {"degeneracy", lv.degeneracy}});
    }
    j["levels"] = std::move(levels);
    if (sub.cuts) j["partition"] = {{"cuts", *sub.cuts}};
    if (sub.assignment) j["partition"] = {{"assignment", *sub.assignment}};
    json init;
    if (sub.initial.alpha.empty()) {
      init["p"] = sub.initial.p;
    } else {
      init["alpha"] = sub.initial.alpha;
    }
    init["beta"] = sub.initial.beta;
    j["initial"] = std::move(init);
    j["tau"] = sub.tau;
    subs.push_back(std::move(j));
  }
  doc["subsystems"] = std::move(subs);
  if (s.coupling) {
    json c = {{"tau_JA", s.coupling->tau_JA}, {"tau_JB", s.coupling->tau_JB}};
    if (s.coupling->omega_A) c["omega_A"] = *s.coupling->omega_A;
    if (s.coupling->omega_B) c["omega_B"] = *s.coupling->omega_B;
    doc["coupling"] = std::move(c);
  }
  const IntegratorConfig& c = s.integrator;
  doc["integrator"] = {
      {"method", c.method == Method::Rk4Fixed ? "rk4" : "rk45"},
      {"rel_tol", c.rel_tol},
      {"abs_tol", c.abs_tol},
      {"t_end", c.t_end},
      {"sample_every", c.sample_every},
      {"dt_init", c.dt_init},
      {"dt_max", c.dt_max},
      {"max_steps", c.max_steps},
      {"direction", c.direction == Direction::Backward ? "backward" : "forward"},
      {"renormalize", c.renormalize},
  };
  return doc;
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) line += text[i] == '\n';
  return line;
}

template <class Doc>
SectorPartition build_partition(const Doc& doc, const Spectrum& spectrum) {
  if (doc.assignment) return SectorPartition::arbitrary(spectrum, *doc.assignment);
  if (doc.cuts) return SectorPartition::contiguous(spectrum, *doc.cuts);
  return SectorPartition::contiguous(spectrum, {});
}

void check_levels_ascending(std::span<const EnergyLevel> levels, const std::string& who) {
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (!(levels[i].energy > levels[i - 1].energy)) {
      invalid(who + "levels must be listed in strictly ascending energy");
    }
  }
}

Subsystem build_subsystem(const SubsystemSpec& spec, double kB) {
  const std::string who = "subsystem '" + spec.label + "': ";
  check_levels_ascending(spec.levels, who);
  Spectrum spectrum = Spectrum::build(spec.levels);
  SectorPartition partition = build_partition(spec, spectrum);
  const std::size_t m = partition.sector_count();

  if (spec.initial.beta.size() != m) {
    invalid(who + "initial.beta has " + std::to_string(spec.initial.beta.size()) +
            " entries for " + std::to_string(m) + " sectors");
  }
  if (spec.tau.size() != m) {
    invalid(who + "tau has " + std::to_string(spec.tau.size()) + " entries for " +
            std::to_string(m) + " sectors");
  }

  HEState state;
  if (spec.initial.alpha.empty()) {
    if (spec.initial.p.size() != m) {
      invalid(who + "initial.p has " + std::to_string(spec.initial.p.size()) + " entries for " +
              std::to_string(m) + " sectors");
    }
    detail::CompensatedSum total;
    for (double p : spec.initial.p) {
      if (!(p > 0.0)) invalid(who + "initial sector probabilities must be positive");
      total += p;
    }
    if (std::fabs(total.value() - 1.0) > kNormalizationTol) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", total.value());
      invalid(who + "normalization: sector probabilities sum to " + buf);
    }
    state = from_p_beta(spec.initial.p, spec.initial.beta, spectrum, partition, kB);
  } else {
    if (spec.initial.alpha.size() != m) {
      invalid(who + "initial.alpha has " + std::to_string(spec.initial.alpha.size()) +
              " entries for " + std::to_string(m) + " sectors");
    }
    state.alpha = spec.initial.alpha;
    state.beta = spec.initial.beta;
    state.kB = kB;
    detail::CompensatedSum total;
    for (double p : sector_probabilities(state, spectrum, partition)) total += p;
    if (std::fabs(total.value() - 1.0) > kNormalizationTol) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", total.value());
      invalid(who + "normalization: sector probabilities sum to " + buf);
    }
  }
  return Subsystem{spec.label, System(std::move(spectrum), std::move(partition), spec.tau),
                   std::move(state)};
}

// Library errors raised while building a model are reported as validation errors.
template <class F>
auto as_validation(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ValidationError || !is_validation_error(e.code())) throw;
    invalid(where + ": " + e.what());
  }
}

json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line_of(text, e.byte == 0 ? 0 : e.byte - 1)) + ": " +
                    e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

Scenario parse_scenario_text(std::string_view text) {
  Scenario s = from_json(parse_document(text));
  validate(s);
  return s;
}

Scenario parse_scenario(const std::string& path) { return parse_scenario_text(read_file(path)); }

PopulationsDocument parse_populations_text(std::string_view text) {
  const json doc = parse_document(text);
  const Node root(doc, "");
  PopulationsDocument out;
  if (root.has("kB")) out.kB = root.at("kB").number();
  out.levels = parse_levels(root.at("levels"));
  parse_partition(root, out.cuts, out.assignment);
  out.populations = root.at("populations").numbers();
  if (!(out.kB > 0.0)) invalid("kB must be positive");
  check_levels_ascending(out.levels, "");
  if (out.populations.size() != out.levels.size()) {
    invalid("populations has " + std::to_string(out.populations.size()) + " entries for " +
            std::to_string(out.levels.size()) + " levels");
  }
  for (double p : out.populations) {
    if (!(p >= 0.0) || !std::isfinite(p)) invalid("populations must be finite and non-negative");
  }
  return out;
}

PopulationsDocument parse_populations(const std::string& path) {
  return parse_populations_text(read_file(path));
}

Spectrum populations_spectrum(const PopulationsDocument& doc) {
  return as_validation("levels", [&] { return Spectrum::build(doc.levels); });
}

SectorPartition populations_partition(const PopulationsDocument& doc, const Spectrum& spectrum) {
  return as_validation("partition", [&] { return build_partition(doc, spectrum); });
}

std::string serialize_scenario(const Scenario& scenario) { return to_json(scenario).dump(2) + "\n"; }

std::string scenario_hash(const Scenario& scenario) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize_scenario(scenario)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Subsystem materialize(const SubsystemSpec& spec, double kB) {
  return as_validation("subsystem '" + spec.label + "'", [&] { return build_subsystem(spec, kB); });
}

std::vector<Subsystem> materialize_all(const Scenario& scenario) {
  std::vector<Subsystem> out;
  out.reserve(scenario.subsystems.size());
  for (const auto& s : scenario.subsystems) out.push_back(materialize(s, scenario.kB));
  return out;
}

ThreeSystemModel three_system_model(const Scenario& scenario) {
  if (scenario.kind != ScenarioKind::NhThree) invalid("scenario is not nh_three");
  std::vector<Subsystem> subs = materialize_all(scenario);
  auto take = [&](const char* label) -> Subsystem {
    for (auto& s : subs) {
      if (s.label == label) return std::move(s);
    }
    invalid(std::string("nh_three needs a subsystem labelled ") + label);
  };
  const Coupling c = scenario.coupling.value_or(Coupling{1.0, 1.0, {}, {}});
  Subsystem a = take("A");
  Subsystem j = take("J");
  Subsystem b = take("B");
  ThreeSystemModel model{std::move(a), std::move(j), std::move(b), c.tau_JA, c.tau_JB,
                         c.omega_A, c.omega_B};
  as_validation("coupling", [&] {
    validate(model);
    return 0;
  });
  return model;
}

void validate(const Scenario& s) {
  if (!(s.kB > 0.0) || !std::isfinite(s.kB)) invalid("kB must be positive");
  if (s.subsystems.empty()) invalid("at least one subsystem is required");

  std::set<std::string> labels;
  for (const auto& sub : s.subsystems) {
    if (sub.label.empty()) invalid("subsystem labels must be non-empty");
    if (!labels.insert(sub.label).second) invalid("duplicate subsystem label '" + sub.label + "'");
  }

  const std::size_t n = s.subsystems.size();
  switch (s.kind) {
    case ScenarioKind::Isolated:
      if (n != 1) invalid("isolated scenarios have exactly one subsystem");
      break;
    case ScenarioKind::CompositeIndependent:
      break;
    case ScenarioKind::NhGeneral:
      if (n < 2) invalid("nh_general needs at least two subsystems");
      break;
    case ScenarioKind::NhTwo:
      if (n != 2) invalid("nh_two needs exactly two subsystems");
      break;
    case ScenarioKind::NhThree:
      if (n != 3 || !labels.contains("A") || !labels.contains("J") || !labels.contains("B")) {
        invalid("nh_three needs subsystems labelled A, J and B");
      }
      break;
  }
  if (s.mode == Mode::Full && s.kind != ScenarioKind::Isolated) {
    invalid("full mode is only available for isolated scenarios");
  }
  if (s.coupling && s.kind != ScenarioKind::NhThree) {
    invalid("coupling is only meaningful for nh_three");
  }

  as_validation("integrator", [&] {
    validate(s.integrator);
    return 0;
  });

  const std::vector<Subsystem> subs = materialize_all(s);
  if (s.kind == ScenarioKind::NhTwo) {
    for (const auto& sub : subs) {
      if (sub.system.sector_count() != 1) {
        invalid("nh_two subsystem '" + sub.label + "' must have a single sector");
      }
    }
  }
  if (s.kind == ScenarioKind::NhThree) three_system_model(s);
}

}  // namespace hesim
