#include "uavflow/scenario_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "uavflow/errors.hpp"

namespace uavflow {

using nlohmann::json;

double dbm_to_w(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double w_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

NodeRole Scenario::node_role(int i) const {
  if (i == source()) return NodeRole::Ground;
  if (i == sink()) return ue_role;
  return NodeRole::Aerial;
}

double Scenario::p_max_w() const { return dbm_to_w(power.p_max_dbm); }
double Scenario::i_max_w() const { return dbm_to_w(power.i_max_dbm); }
double Scenario::interferer_power_w(int m) const { return dbm_to_w(interferers[m].power_dbm); }

void finalize(Scenario& scenario) {
  if (scenario.eta_from_carrier) {
    const double eta = reference_loss_db(scenario.channel.carrier_hz);
    scenario.channel.eta_a2a_db = eta;
    scenario.channel.eta_a2g_db = eta;
  }
  if (scenario.even_relay_count) {
    const int k = *scenario.even_relay_count;
    scenario.relays.clear();
    for (int r = 1; r <= k; ++r) {
      scenario.relays.push_back(scenario.bs + (scenario.ue - scenario.bs) * (static_cast<double>(r) / (k + 1)));
    }
  }
  scenario.fading.seed = scenario.seed.value_or(0);
}

Scenario default_scenario() {
  Scenario s;
  s.even_relay_count = 8;
  finalize(s);
  return s;
}

// ---------------------------------------------------------------------------
// Enum names

namespace {

template <typename E>
struct EnumName {
  E value;
  const char* name;
};

constexpr EnumName<Mode> kModes[] = {{Mode::RecklessCooperative, "reckless-coop"},
                                     {Mode::RecklessNonCooperative, "reckless-noncoop"},
                                     {Mode::Smart, "smart"}};
constexpr EnumName<Topology> kTopologies[] = {{Topology::Line, "line"}, {Topology::Mesh, "mesh"}};
constexpr EnumName<Axes> kAxes[] = {{Axes::XY, "xy"}, {Axes::XZ, "xz"}, {Axes::YZ, "yz"}, {Axes::XYZ, "xyz"}};
constexpr EnumName<LaplacianKind> kLaplacians[] = {{LaplacianKind::Normalized, "normalized"},
                                                   {LaplacianKind::Combinatorial, "combinatorial"}};
constexpr EnumName<PolicyKind> kPolicies[] = {{PolicyKind::Naive, "naive"},
                                              {PolicyKind::RecklessMobile, "reckless-mobile"},
                                              {PolicyKind::Smart, "smart"}};
constexpr EnumName<NodeRole> kRoles[] = {{NodeRole::Ground, "ground"}, {NodeRole::Aerial, "aerial"}};
constexpr EnumName<FadingModel::Kind> kFading[] = {{FadingModel::Kind::Unit, "unit"},
                                                   {FadingModel::Kind::ComplexGaussian, "rayleigh"}};

template <typename E, std::size_t N>
const char* name_of(const EnumName<E> (&table)[N], E value) {
  for (const auto& entry : table)
    if (entry.value == value) return entry.name;
  return "?";
}

// Reads one JSON object, tracking the path for error messages and rejecting
// unknown keys.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw SchemaError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return as_number(at(key), field(key));
  }

  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_integer()) throw SchemaError(field(key), "expected an integer");
    return v.get<int>();
  }

  template <typename E, std::size_t N>
  E choice(const std::string& key, const EnumName<E> (&table)[N], E fallback) {
    if (!has(key)) return fallback;
    return as_choice(at(key), field(key), table);
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) throw SchemaError(field(key), "unknown field");
    }
  }

  static double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw SchemaError(where, "expected a number");
    return v.get<double>();
  }

  template <typename E, std::size_t N>
  static E as_choice(const json& v, const std::string& where, const EnumName<E> (&table)[N]) {
    if (!v.is_string()) throw SchemaError(where, "expected a string");
    const std::string s = v.get<std::string>();
    for (const auto& entry : table)
      if (s == entry.name) return entry.value;
    std::string allowed;
    for (const auto& entry : table) allowed += std::string(allowed.empty() ? "" : ", ") + entry.name;
    throw SchemaError(where, "unknown value \"" + s + "\" (expected one of " + allowed + ")");
  }

  static Position as_position(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) throw SchemaError(where, "expected [x, y, z]");
    Position p;
    for (int k = 0; k < 3; ++k) p[k] = as_number(v[k], where + "[" + std::to_string(k) + "]");
    if (!p.allFinite()) throw RangeError(where, "coordinates must be finite");
    return p;
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& where, const std::string& what) {
  if (!ok) throw RangeError(where, what);
}

json position_json(const Position& p) { return json::array({p.x(), p.y(), p.z()}); }

std::vector<Position> position_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw SchemaError(where, "expected a list of [x, y, z]");
  std::vector<Position> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(Reader::as_position(v[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

InterfererSpec parse_interferer(const json& v, const std::string& where) {
  Reader r(v, where);
  InterfererSpec spec;
  if (r.has("position")) spec.position = Reader::as_position(r.at("position"), r.field("position"));
  spec.power_dbm = r.number("power_dbm", spec.power_dbm);
  spec.role = r.choice("role", kRoles, spec.role);
  spec.policy.kind = r.choice("policy", kPolicies, spec.policy.kind);
  spec.policy.tau = r.integer("tau", spec.policy.tau);
  require(spec.policy.tau >= 1, r.field("tau"), "must be a positive integer");
  if (r.has("waypoints")) spec.policy.waypoints = position_list(r.at("waypoints"), r.field("waypoints"));
  spec.policy.speed_m = r.number("speed_m", spec.policy.speed_m);
  require(spec.policy.speed_m >= 0.0, r.field("speed_m"), "must be non-negative");
  r.finish();
  return spec;
}

}  // namespace

// ---------------------------------------------------------------------------
// Scenario <-> JSON

Scenario scenario_from_json(const json& doc) {
  Reader root(doc, "");
  Scenario s;
  if (!root.has("schema_version")) throw SchemaError("schema_version", "missing");
  s.schema_version = root.integer("schema_version", 0);
  if (s.schema_version != kSchemaVersion) {
    throw SchemaError("schema_version", "unsupported version " + std::to_string(s.schema_version));
  }
  if (root.has("seed")) {
    const json& v = root.at("seed");
    if (!v.is_number_unsigned()) throw SchemaError("seed", "expected a non-negative integer");
    s.seed = v.get<std::uint64_t>();
  }
  s.mode = root.choice("mode", kModes, s.mode);
  s.topology = root.choice("topology", kTopologies, s.topology);
  s.laplacian = root.choice("laplacian", kLaplacians, s.laplacian);

  s.even_relay_count = 8;
  if (root.has("nodes")) {
    Reader r(root.at("nodes"), "nodes");
    if (r.has("bs")) s.bs = Reader::as_position(r.at("bs"), "nodes.bs");
    const bool has_ue = r.has("ue");
    const bool has_alt = r.has("ue_altitude_m");
    if (has_ue && has_alt) throw SchemaError("nodes.ue_altitude_m", "conflicts with nodes.ue");
    if (has_ue) s.ue = Reader::as_position(r.at("ue"), "nodes.ue");
    if (has_alt) s.ue.z() = r.number("ue_altitude_m", s.ue.z());
    s.ue_role = r.choice("ue_role", kRoles, s.ue_role);
    const bool has_list = r.has("relays");
    const bool has_count = r.has("relay_count");
    if (has_list && has_count) throw SchemaError("nodes.relay_count", "conflicts with nodes.relays");
    if (has_list) {
      s.relays = position_list(r.at("relays"), "nodes.relays");
      s.even_relay_count.reset();
      require(!s.relays.empty(), "nodes.relays", "at least one relay is required");
    }
    if (has_count) {
      s.even_relay_count = r.integer("relay_count", 8);
      require(*s.even_relay_count >= 1, "nodes.relay_count", "at least one relay is required");
    }
    r.finish();
  }

  if (root.has("interferers")) {
    const json& list = root.at("interferers");
    if (!list.is_array()) throw SchemaError("interferers", "expected a list");
    for (std::size_t k = 0; k < list.size(); ++k) {
      s.interferers.push_back(parse_interferer(list[k], "interferers[" + std::to_string(k) + "]"));
    }
  }
  if (root.has("primary_ues")) s.primary_ues = position_list(root.at("primary_ues"), "primary_ues");

  if (root.has("channel")) {
    Reader r(root.at("channel"), "channel");
    ChannelParams& c = s.channel;
    c.alpha_a2a = r.number("alpha_a2a", c.alpha_a2a);
    c.alpha_a2g = r.number("alpha_a2g", c.alpha_a2g);
    c.carrier_hz = r.number("carrier_hz", c.carrier_hz);
    c.bandwidth_hz = r.number("bandwidth_hz", c.bandwidth_hz);
    c.noise_w = r.number("noise_w", c.noise_w);
    const bool a2a = r.has("eta_a2a_db");
    const bool a2g = r.has("eta_a2g_db");
    if (a2a != a2g) throw SchemaError(r.field(a2a ? "eta_a2g_db" : "eta_a2a_db"), "both reference losses must be given together");
    if (a2a) {
      s.eta_from_carrier = false;
      c.eta_a2a_db = r.number("eta_a2a_db", 0.0);
      c.eta_a2g_db = r.number("eta_a2g_db", 0.0);
    }
    if (r.has("fading")) s.fading.kind = Reader::as_choice(r.at("fading"), "channel.fading", kFading);
    r.finish();
    require(c.alpha_a2a > 0.0, "channel.alpha_a2a", "must be positive");
    require(c.alpha_a2g > 0.0, "channel.alpha_a2g", "must be positive");
    require(c.carrier_hz > 0.0, "channel.carrier_hz", "must be positive");
    require(c.bandwidth_hz > 0.0, "channel.bandwidth_hz", "must be positive");
    require(c.noise_w >= 0.0, "channel.noise_w", "must be non-negative");
  }

  if (root.has("safety")) {
    Reader r(root.at("safety"), "safety");
    SafetyParams& p = s.safety;
    p.chi_w = r.number("chi_w", p.chi_w);
    p.zeta = r.number("zeta", p.zeta);
    p.kappa = r.number("kappa", p.kappa);
    p.y0 = r.number("y0", p.y0);
    p.r_int_m = r.number("r_int_m", p.r_int_m);
    r.finish();
    require(p.chi_w >= 0.0, "safety.chi_w", "must be non-negative");
    require(p.zeta >= 0.0, "safety.zeta", "must be non-negative");
    require(p.kappa > 0.0, "safety.kappa", "must be positive");
    require(p.y0 > 0.0, "safety.y0", "must be positive");
    require(p.r_int_m > 0.0, "safety.r_int_m", "must be positive");
  }

  if (root.has("weights")) {
    const json& v = root.at("weights");
    if (v.is_string()) {
      if (v.get<std::string>() != "uniform") throw SchemaError("weights", "expected an object or \"uniform\"");
      s.weights = WeightSpec{1.0, 1.0, 1.0, {}};
    } else {
      Reader r(v, "weights");
      s.weights.source = r.number("source", s.weights.source);
      s.weights.sink = r.number("sink", s.weights.sink);
      s.weights.relay = r.number("relay", s.weights.relay);
      if (r.has("values")) {
        const json& list = r.at("values");
        if (!list.is_array()) throw SchemaError("weights.values", "expected a list");
        for (std::size_t k = 0; k < list.size(); ++k) {
          s.weights.values.push_back(Reader::as_number(list[k], "weights.values[" + std::to_string(k) + "]"));
        }
      }
      r.finish();
    }
    for (double w : s.weights.values) require(w > 0.0, "weights.values", "weights must be positive");
    require(s.weights.source > 0.0 && s.weights.sink > 0.0 && s.weights.relay > 0.0, "weights",
            "weights must be positive");
  }

  if (root.has("power")) {
    Reader r(root.at("power"), "power");
    s.power.p_max_dbm = r.number("p_max_dbm", s.power.p_max_dbm);
    s.power.i_max_dbm = r.number("i_max_dbm", s.power.i_max_dbm);
    s.power.r_th_bps = r.number("r_th_bps", s.power.r_th_bps);
    r.finish();
    require(s.power.r_th_bps >= 0.0, "power.r_th_bps", "must be non-negative");
  }

  if (root.has("motion")) {
    Reader r(root.at("motion"), "motion");
    s.motion.dt = r.number("dt", s.motion.dt);
    s.motion.dims = r.choice("dims", kAxes, s.motion.dims);
    s.motion.z_min_m = r.number("z_min_m", s.motion.z_min_m);
    s.motion.max_step_m = r.number("max_step_m", s.motion.max_step_m);
    r.finish();
    require(s.motion.dt >= 0.0, "motion.dt", "must be non-negative");
    require(s.motion.max_step_m > 0.0, "motion.max_step_m", "must be positive");
  }

  if (root.has("solver")) {
    Reader r(root.at("solver"), "solver");
    s.solver.eps_bps = r.number("eps_bps", s.solver.eps_bps);
    s.solver.max_iters = r.integer("max_iters", s.solver.max_iters);
    s.solver.sca_eps_bps = r.number("sca_eps_bps", s.solver.sca_eps_bps);
    s.solver.sca_max_iters = r.integer("sca_max_iters", s.solver.sca_max_iters);
    r.finish();
    require(s.solver.eps_bps > 0.0, "solver.eps_bps", "must be positive");
    require(s.solver.max_iters >= 1, "solver.max_iters", "must be at least 1");
    require(s.solver.sca_eps_bps > 0.0, "solver.sca_eps_bps", "must be positive");
    require(s.solver.sca_max_iters >= 1, "solver.sca_max_iters", "must be at least 1");
  }
  root.finish();

  finalize(s);
  if (!s.weights.values.empty() && static_cast<int>(s.weights.values.size()) != s.node_count()) {
    throw SchemaError("weights.values", "expected one weight per node (" + std::to_string(s.node_count()) + ")");
  }
  return s;
}

json scenario_to_json(const Scenario& s) {
  json doc;
  doc["schema_version"] = s.schema_version;
  if (s.seed) doc["seed"] = *s.seed;
  doc["mode"] = name_of(kModes, s.mode);
  doc["topology"] = name_of(kTopologies, s.topology);
  doc["laplacian"] = name_of(kLaplacians, s.laplacian);

  json nodes;
  nodes["bs"] = position_json(s.bs);
  nodes["ue"] = position_json(s.ue);
  nodes["ue_role"] = name_of(kRoles, s.ue_role);
  if (s.even_relay_count) {
    nodes["relay_count"] = *s.even_relay_count;
  } else {
    nodes["relays"] = json::array();
    for (const Position& p : s.relays) nodes["relays"].push_back(position_json(p));
  }
  doc["nodes"] = nodes;

  doc["interferers"] = json::array();
  for (const InterfererSpec& spec : s.interferers) {
    json j;
    j["position"] = position_json(spec.position);
    j["power_dbm"] = spec.power_dbm;
    j["role"] = name_of(kRoles, spec.role);
    j["policy"] = name_of(kPolicies, spec.policy.kind);
    j["tau"] = spec.policy.tau;
    j["waypoints"] = json::array();
    for (const Position& p : spec.policy.waypoints) j["waypoints"].push_back(position_json(p));
    j["speed_m"] = spec.policy.speed_m;
    doc["interferers"].push_back(j);
  }
  doc["primary_ues"] = json::array();
  for (const Position& p : s.primary_ues) doc["primary_ues"].push_back(position_json(p));

  json channel;
  channel["alpha_a2a"] = s.channel.alpha_a2a;
  channel["alpha_a2g"] = s.channel.alpha_a2g;
  channel["carrier_hz"] = s.channel.carrier_hz;
  channel["bandwidth_hz"] = s.channel.bandwidth_hz;
  channel["noise_w"] = s.channel.noise_w;
  if (!s.eta_from_carrier) {
    channel["eta_a2a_db"] = s.channel.eta_a2a_db;
    channel["eta_a2g_db"] = s.channel.eta_a2g_db;
  }
  channel["fading"] = name_of(kFading, s.fading.kind);
  doc["channel"] = channel;

  doc["safety"] = {{"chi_w", s.safety.chi_w},
                   {"zeta", s.safety.zeta},
                   {"kappa", s.safety.kappa},
                   {"y0", s.safety.y0},
                   {"r_int_m", s.safety.r_int_m}};
  json weights = {{"source", s.weights.source}, {"sink", s.weights.sink}, {"relay", s.weights.relay}};
  if (!s.weights.values.empty()) weights["values"] = s.weights.values;
  doc["weights"] = weights;
  doc["power"] = {{"p_max_dbm", s.power.p_max_dbm}, {"i_max_dbm", s.power.i_max_dbm}, {"r_th_bps", s.power.r_th_bps}};
  doc["motion"] = {{"dt", s.motion.dt},
                   {"dims", name_of(kAxes, s.motion.dims)},
                   {"z_min_m", s.motion.z_min_m},
                   {"max_step_m", s.motion.max_step_m}};
  doc["solver"] = {{"eps_bps", s.solver.eps_bps},
                   {"max_iters", s.solver.max_iters},
                   {"sca_eps_bps", s.solver.sca_eps_bps},
                   {"sca_max_iters", s.solver.sca_max_iters}};
  return doc;
}

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("<document>", e.what());
  }
  return scenario_from_json(doc);
}

std::string serialize_scenario(const Scenario& scenario) { return scenario_to_json(scenario).dump(2) + "\n"; }

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::uint64_t scenario_hash(const Scenario& scenario) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : scenario_to_json(scenario).dump()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Overrides

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

const std::pair<const char*, const char*> kAliases[] = {
    {"i_max_dbm", "power.i_max_dbm"}, {"p_max_dbm", "power.p_max_dbm"}, {"r_th_bps", "power.r_th_bps"},
    {"h_ue_m", "nodes.ue.2"},         {"dt", "motion.dt"},              {"dims", "motion.dims"},
    {"max_step_m", "motion.max_step_m"}, {"iters", "solver.max_iters"},
};

json parse_value(const std::string& value) {
  try {
    return json::parse(value);
  } catch (const json::parse_error&) {
    return value;
  }
}

}  // namespace

Scenario apply_override(const Scenario& scenario, const std::string& field, const std::string& value) {
  std::string path = lower(field);
  json doc = scenario_to_json(scenario);

  if (path == "tau") {
    bool any = false;
    for (json& j : doc["interferers"]) {
      if (j["policy"] != "smart") continue;
      any = true;
      if (lower(value) == "naive") {
        j["policy"] = "naive";
      } else {
        j["tau"] = parse_value(value);
      }
    }
    if (!any) throw SchemaError("tau", "scenario has no smart interferer");
    return scenario_from_json(doc);
  }
  if (path == "weights" && lower(value) == "role") {
    doc["weights"] = {{"source", WeightSpec{}.source}, {"sink", WeightSpec{}.sink}, {"relay", WeightSpec{}.relay}};
    return scenario_from_json(doc);
  }
  for (const auto& [alias, target] : kAliases) {
    if (path == alias) path = target;
  }

  json* node = &doc;
  std::stringstream parts(path);
  std::string part;
  std::vector<std::string> keys;
  while (std::getline(parts, part, '.')) keys.push_back(part);
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const std::string& key = keys[k];
    const bool last = k + 1 == keys.size();
    if (node->is_array()) {
      std::size_t idx = 0;
      const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), idx);
      if (ec != std::errc() || ptr != key.data() + key.size() || idx >= node->size()) {
        throw SchemaError(field, "bad index \"" + key + "\"");
      }
      node = &(*node)[idx];
    } else if (node->is_object()) {
      if (!last && !node->contains(key)) throw SchemaError(field, "unknown field \"" + key + "\"");
      node = &(*node)[key];
    } else {
      throw SchemaError(field, "cannot descend into a scalar");
    }
  }
  *node = parse_value(value);
  return scenario_from_json(doc);
}

// ---------------------------------------------------------------------------
// Trace CSV

namespace {

void put_number(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

double get_number(std::string_view s, int line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw SchemaError("trace line " + std::to_string(line), "bad number \"" + std::string(s) + "\"");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  const auto res = std::to_chars(buf, buf + 16, v, 16);
  std::string digits(buf, res.ptr);
  return std::string(16 - digits.size(), '0') + digits;
}

}  // namespace

std::string format_trace(const SimulationTrace& trace) {
  std::string out;
  out += "# uavflow trace\n";
  out += std::string("# tool_version: ") + kToolVersion + "\n";
  out += "# scenario_hash: " + hex64(trace.scenario_hash) + "\n";
  out += "# seed: " + std::to_string(trace.seed) + "\n";
  out += std::string("# converged: ") + (trace.converged ? "1" : "0") + "\n";
  out += "# error_family: " + one_line(trace.error_family) + "\n";
  out += "# error: " + one_line(trace.error) + "\n";
  for (const TraceEvent& e : trace.events) out += "# event: " + std::to_string(e.t) + " " + one_line(e.what) + "\n";

  const std::size_t n = trace.records.empty() ? 0 : trace.records.front().nodes.size();
  const std::size_t m = trace.records.empty() ? 0 : trace.records.front().interferers.size();
  out += "t,flow_bps,lambda2,eta_bps";
  for (std::size_t i = 0; i < n; ++i) {
    const std::string p = ",n" + std::to_string(i) + "_";
    out += p + "x" + p + "y" + p + "z" + p + "p_w";
  }
  for (std::size_t j = 0; j < m; ++j) {
    const std::string p = ",j" + std::to_string(j) + "_";
    out += p + "x" + p + "y" + p + "z" + p + "p_w";
  }
  out += ",imax_slack_w,qos_slack_bps,cut\n";

  for (const TraceRecord& r : trace.records) {
    out += std::to_string(r.t);
    for (double v : {r.flow_bps, r.lambda2, r.eta_bps}) {
      out += ',';
      put_number(out, v);
    }
    auto put_entities = [&](const std::vector<Position>& pos, const std::vector<double>& pw) {
      for (std::size_t k = 0; k < pos.size(); ++k) {
        for (double v : {pos[k].x(), pos[k].y(), pos[k].z(), pw[k]}) {
          out += ',';
          put_number(out, v);
        }
      }
    };
    put_entities(r.nodes, r.p_w);
    put_entities(r.interferers, r.pj_w);
    out += ',';
    put_number(out, r.imax_slack_w);
    out += ',';
    put_number(out, r.qos_slack_bps);
    out += ',';
    for (std::size_t k = 0; k < r.cut_edges.size(); ++k) {
      if (k) out += ';';
      out += std::to_string(r.cut_edges[k].first) + "-" + std::to_string(r.cut_edges[k].second);
    }
    out += '\n';
  }
  return out;
}

SimulationTrace parse_trace(std::string_view text) {
  SimulationTrace trace;
  std::size_t n = 0;
  std::size_t m = 0;
  bool have_columns = false;
  int line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "trace line " + std::to_string(line_no);
    if (line.front() == '#') {
      const std::size_t colon = line.find(": ");
      const std::string_view key = line.substr(2, colon == std::string_view::npos ? 0 : colon - 2);
      const std::string value = colon == std::string_view::npos ? "" : std::string(line.substr(colon + 2));
      if (key == "scenario_hash") {
        std::from_chars(value.data(), value.data() + value.size(), trace.scenario_hash, 16);
      } else if (key == "seed") {
        std::from_chars(value.data(), value.data() + value.size(), trace.seed);
      } else if (key == "converged") {
        trace.converged = value == "1";
      } else if (key == "error_family") {
        trace.error_family = value;
      } else if (key == "error") {
        trace.error = value;
      } else if (key == "event") {
        const std::size_t sp = value.find(' ');
        TraceEvent e;
        e.t = static_cast<int>(get_number(std::string_view(value).substr(0, sp), line_no));
        e.what = sp == std::string::npos ? "" : value.substr(sp + 1);
        trace.events.push_back(e);
      }
      continue;
    }
    const std::vector<std::string_view> cells = split(line, ',');
    if (!have_columns) {
      for (std::string_view c : cells) {
        if (c.size() > 4 && c.substr(c.size() - 4) == "_p_w") (c.front() == 'n' ? n : m) += 1;
      }
      if (cells.size() != 7 + 4 * (n + m)) throw SchemaError(where, "unexpected column header");
      have_columns = true;
      continue;
    }
    if (cells.size() != 7 + 4 * (n + m)) throw SchemaError(where, "wrong number of cells");
    TraceRecord r;
    std::size_t c = 0;
    r.t = static_cast<int>(get_number(cells[c++], line_no));
    r.flow_bps = get_number(cells[c++], line_no);
    r.lambda2 = get_number(cells[c++], line_no);
    r.eta_bps = get_number(cells[c++], line_no);
    auto read_entities = [&](std::size_t count, std::vector<Position>& pos, std::vector<double>& pw) {
      for (std::size_t k = 0; k < count; ++k) {
        Position p;
        for (int a = 0; a < 3; ++a) p[a] = get_number(cells[c++], line_no);
        pos.push_back(p);
        pw.push_back(get_number(cells[c++], line_no));
      }
    };
    read_entities(n, r.nodes, r.p_w);
    read_entities(m, r.interferers, r.pj_w);
    r.imax_slack_w = get_number(cells[c++], line_no);
    r.qos_slack_bps = get_number(cells[c++], line_no);
    if (!cells[c].empty()) {
      for (std::string_view edge : split(cells[c], ';')) {
        const std::size_t dash = edge.find('-');
        if (dash == std::string_view::npos) throw SchemaError(where, "bad cut edge");
        r.cut_edges.emplace_back(static_cast<int>(get_number(edge.substr(0, dash), line_no)),
                                 static_cast<int>(get_number(edge.substr(dash + 1), line_no)));
      }
    }
    trace.records.push_back(std::move(r));
  }
  if (!have_columns) throw SchemaError("trace", "missing column header");
  return trace;
}

void export_trace(const SimulationTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << format_trace(trace);
  if (!out) throw std::runtime_error("write failed: " + path);
}

SimulationTrace import_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace(buf.str());
}

}  // namespace uavflow
