#include "zonenet/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace zonenet {

using nlohmann::json;

namespace {

// Object reader that remembers which keys were consumed so leftovers can be
// reported as unknown.
class Obj {
 public:
  Obj(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_.empty() ? "/" : where_, "expected an object");
  }
  ~Obj() = default;

  const std::string& where() const { return where_; }
  std::string path(const std::string& key) const { return where_ + "/" + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) throw ConfigError(path(key), "required key is missing");
    return *it;
  }

  double num(const std::string& key) { return as_num(at(key), path(key)); }
  double num(const std::string& key, double fallback) { return has(key) ? num(key) : fallback; }
  std::optional<double> maybe_num(const std::string& key) {
    return has(key) ? std::optional<double>(num(key)) : std::nullopt;
  }
  std::uint64_t uint(const std::string& key) { return as_uint(at(key), path(key)); }
  std::uint64_t uint(const std::string& key, std::uint64_t fallback) { return has(key) ? uint(key) : fallback; }
  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) throw ConfigError(path(key), "expected true or false");
    return v.get<bool>();
  }
  std::string str(const std::string& key) { return as_str(at(key), path(key)); }
  std::string str(const std::string& key, const std::string& fallback) { return has(key) ? str(key) : fallback; }
  Obj obj(const std::string& key) { return Obj(at(key), path(key)); }
  const json& arr(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array()) throw ConfigError(path(key), "expected an array");
    return v;
  }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(path(it.key()), "unknown key");
  }

  static double as_num(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where, "expected a number");
    return v.get<double>();
  }
  static std::uint64_t as_uint(const json& v, const std::string& where) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      throw ConfigError(where, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  static std::string as_str(const json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError(where, "expected a string");
    return v.get<std::string>();
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

std::vector<std::string> str_list(Obj& o, const std::string& key) {
  std::vector<std::string> out;
  if (!o.has(key)) return out;
  const json& a = o.arr(key);
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(Obj::as_str(a[i], o.path(key) + "/" + std::to_string(i)));
  return out;
}

std::map<std::string, double> read_num_map(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "expected an object of numbers");
  std::map<std::string, double> out;
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = Obj::as_num(it.value(), where + "/" + it.key());
  return out;
}

std::map<std::string, std::string> read_str_map(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "expected an object of strings");
  std::map<std::string, std::string> out;
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = Obj::as_str(it.value(), where + "/" + it.key());
  return out;
}

std::pair<double, double> read_interval(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(where, "expected [start, end]");
  const double a = Obj::as_num(j[0], where + "/0");
  const double b = Obj::as_num(j[1], where + "/1");
  if (!(b > a)) throw ConfigError(where, "interval end must exceed its start");
  return {a, b};
}

NetworkConfig read_network(Obj o) {
  NetworkConfig n;
  const json& zones = o.arr("zones");
  for (std::size_t i = 0; i < zones.size(); ++i) {
    Obj z(zones[i], o.path("zones") + "/" + std::to_string(i));
    NetworkConfig::ZoneSpec s;
    s.id = z.str("id");
    s.kind = z.flag("boundary", false) ? ZoneKind::boundary : ZoneKind::interior;
    s.volume = z.num("volume", 0.0);
    z.done();
    n.zones.push_back(s);
  }
  const json& flows = o.arr("flow_edges");
  for (std::size_t i = 0; i < flows.size(); ++i) {
    Obj e(flows[i], o.path("flow_edges") + "/" + std::to_string(i));
    n.flow_edges.push_back({e.str("id"), e.str("from"), e.str("to")});
    e.done();
  }
  const json& thermal = o.arr("thermal_edges");
  for (std::size_t i = 0; i < thermal.size(); ++i) {
    Obj e(thermal[i], o.path("thermal_edges") + "/" + std::to_string(i));
    n.thermal_edges.push_back({e.str("id"), e.str("a"), e.str("b")});
    e.done();
  }
  n.constrained = str_list(o, "constrained");
  n.preferred_independent = str_list(o, "independent");
  o.done();
  return n;
}

PriorSpec read_prior(Obj o) {
  const double mu = o.num("mu");
  const double sigma = o.num("sigma");
  if (!(sigma > 0.0)) throw ConfigError(o.path("sigma"), "must be positive");
  const bool bounded = o.has("lower") || o.has("upper");
  PriorSpec s = PriorSpec::normal(mu, sigma);
  if (bounded) {
    const double lo = o.num("lower", -std::numeric_limits<double>::infinity());
    const double hi = o.num("upper", std::numeric_limits<double>::infinity());
    if (!(hi > lo)) throw ConfigError(o.where(), "upper bound must exceed lower bound");
    s = PriorSpec::truncated(mu, sigma, lo, hi);
  }
  o.done();
  return s;
}

BlockPrior read_block_prior(Obj o) {
  BlockPrior b;
  b.base = read_prior(o.obj("default"));
  if (o.has("overrides")) {
    const json& ov = o.at("overrides");
    if (!ov.is_object()) throw ConfigError(o.path("overrides"), "expected an object");
    for (auto it = ov.begin(); it != ov.end(); ++it)
      b.overrides[it.key()] = read_prior(Obj(it.value(), o.path("overrides") + "/" + it.key()));
  }
  o.done();
  return b;
}

PriorConfig read_priors(Obj o) {
  PriorConfig p;
  p.occupancy = read_block_prior(o.obj("occupancy"));
  p.flows = read_block_prior(o.obj("flows"));
  p.resistances = read_block_prior(o.obj("resistances"));
  p.capacitances = read_block_prior(o.obj("capacitances"));
  p.sigma_co2 = read_block_prior(o.obj("sigma_co2"));
  p.sigma_temp = read_block_prior(o.obj("sigma_temp"));
  const std::string a = o.str("anchor_sigma", "sampled");
  if (a == "sampled") p.anchor_sigma = AnchorSigma::sampled;
  else if (a == "fixed") p.anchor_sigma = AnchorSigma::fixed;
  else throw ConfigError(o.path("anchor_sigma"), "expected \"sampled\" or \"fixed\"");
  o.done();
  return p;
}

TruthSpec read_truth(Obj o) {
  TruthSpec t;
  const json& sched = o.arr("occupancy_schedule");
  for (std::size_t i = 0; i < sched.size(); ++i) {
    Obj piece(sched[i], o.path("occupancy_schedule") + "/" + std::to_string(i));
    const double time = piece.num("t");
    auto occ = read_num_map(piece.at("occupancy"), piece.path("occupancy"));
    piece.done();
    t.schedule.emplace_back(time, std::move(occ));
  }
  t.independent_flows = read_num_map(o.at("independent_flows"), o.path("independent_flows"));
  t.resistances = read_num_map(o.at("resistances"), o.path("resistances"));
  t.capacitances = read_num_map(o.at("capacitances"), o.path("capacitances"));
  t.co2_initial = o.num("co2_initial", t.co2_initial);
  t.temp_initial = o.num("temp_initial", t.temp_initial);
  o.done();
  return t;
}

json prior_json(const PriorSpec& s) {
  json j{{"mu", s.mu}, {"sigma", s.sigma}};
  if (s.bounded()) {
    if (std::isfinite(s.lower)) j["lower"] = s.lower;
    if (std::isfinite(s.upper)) j["upper"] = s.upper;
  }
  return j;
}

json block_json(const BlockPrior& b) {
  json j{{"default", prior_json(b.base)}};
  if (!b.overrides.empty()) {
    json ov = json::object();
    for (const auto& [k, v] : b.overrides) ov[k] = prior_json(v);
    j["overrides"] = ov;
  }
  return j;
}

}  // namespace

ProjectConfig parse_config(const json& j) {
  Obj root(j, "");
  ProjectConfig c;
  if (!root.has("schema_version")) throw ConfigError("/schema_version", "required key is missing");
  c.schema_version = static_cast<int>(root.uint("schema_version"));
  if (c.schema_version != kSchemaVersion)
    throw ConfigError("/schema_version", "unsupported version " + std::to_string(c.schema_version) +
                                             " (this build reads " + std::to_string(kSchemaVersion) + ")");
  c.name = root.str("name", "");
  c.network = read_network(root.obj("network"));

  if (root.has("knowns")) {
    Obj k = root.obj("knowns");
    c.knowns.air.q_exh = k.num("q_exh", c.knowns.air.q_exh);
    c.knowns.air.c_exh = k.num("c_exh", c.knowns.air.c_exh);
    c.knowns.thermal.q_ppl = k.num("q_ppl", c.knowns.thermal.q_ppl);
    c.knowns.thermal.cp_air = k.num("cp_air", c.knowns.thermal.cp_air);
    c.knowns.thermal.rho_air = k.num("rho_air", c.knowns.thermal.rho_air);
    k.done();
  }
  c.substep = root.num("substep", c.substep);
  if (!(c.substep > 0.0)) throw ConfigError("/substep", "must be positive");

  if (root.has("ambient")) {
    Obj a = root.obj("ambient");
    c.ambient.co2 = a.num("co2", c.ambient.co2);
    c.ambient.temp = a.num("temp", c.ambient.temp);
    a.done();
  }
  if (root.has("truth")) c.truth = read_truth(root.obj("truth"));

  if (root.has("generation")) {
    Obj g = root.obj("generation");
    c.generation.duration = g.num("duration", c.generation.duration);
    c.generation.sample_dt = g.num("sample_dt", c.generation.sample_dt);
    if (g.has("noise")) {
      Obj n = g.obj("noise");
      c.generation.noise.sigma_co2 = n.num("sigma_co2", c.generation.noise.sigma_co2);
      c.generation.noise.sigma_temp = n.num("sigma_temp", c.generation.noise.sigma_temp);
      c.generation.noise.seed = n.uint("seed", c.generation.noise.seed);
      n.done();
    }
    g.done();
  }

  c.priors = read_priors(root.obj("priors"));

  if (root.has("initial_guess")) {
    Obj g = root.obj("initial_guess");
    auto& ig = c.initial_guess;
    ig.occupancy = g.maybe_num("occupancy");
    ig.flows = g.maybe_num("flows");
    if (g.has("co2_initial")) ig.co2_initial = g.num("co2_initial");
    if (g.has("temp_initial")) ig.temp_initial = g.num("temp_initial");
    ig.resistances = g.maybe_num("resistances");
    ig.capacitances = g.maybe_num("capacitances");
    ig.sigma_co2 = g.maybe_num("sigma_co2");
    ig.sigma_temp = g.maybe_num("sigma_temp");
    g.done();
  }

  if (root.has("sampler")) {
    Obj s = root.obj("sampler");
    auto& r = c.ram;
    r.iterations = s.uint("iterations", r.iterations);
    r.burn_in = s.uint("burn_in", r.burn_in);
    r.target_accept = s.num("target_accept", r.target_accept);
    r.adapt_exponent = s.num("adapt_exponent", r.adapt_exponent);
    r.adapt_scale = s.num("adapt_scale", r.adapt_scale);
    r.initial_scale = s.num("initial_scale", r.initial_scale);
    r.freeze_after_burn_in = s.flag("freeze_after_burn_in", r.freeze_after_burn_in);
    r.seed = s.uint("seed", r.seed);
    s.done();
    try {
      r.validate();
    } catch (const std::exception& e) {
      throw ConfigError("/sampler", e.what());
    }
  }

  if (root.has("windows")) {
    Obj w = root.obj("windows");
    auto& ws = c.windows;
    ws.size = w.uint("size", ws.size);
    ws.step = w.uint("step", ws.step);
    ws.horizon = w.uint("horizon", ws.horizon);
    ws.n_draws = w.uint("n_draws", ws.n_draws);
    ws.max_stored_samples = w.uint("max_stored_samples", ws.max_stored_samples);
    ws.scale_floor_fraction = w.num("scale_floor_fraction", ws.scale_floor_fraction);
    w.done();
    if (ws.size < 2) throw ConfigError("/windows/size", "must be at least 2");
    if (ws.step < 1) throw ConfigError("/windows/step", "must be at least 1");
  }

  if (root.has("sweep")) {
    Obj s = root.obj("sweep");
    auto& sw = c.sweep;
    if (s.has("window_sizes")) {
      const json& a = s.arr("window_sizes");
      for (std::size_t i = 0; i < a.size(); ++i)
        sw.window_sizes.push_back(Obj::as_uint(a[i], s.path("window_sizes") + "/" + std::to_string(i)));
    }
    if (s.has("noise_pairs")) {
      const json& a = s.arr("noise_pairs");
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string w = s.path("noise_pairs") + "/" + std::to_string(i);
        if (!a[i].is_array() || a[i].size() != 2) throw ConfigError(w, "expected [sigma_co2, sigma_temp]");
        sw.noise_pairs.emplace_back(Obj::as_num(a[i][0], w + "/0"), Obj::as_num(a[i][1], w + "/1"));
      }
    }
    sw.eval_start = s.num("eval_start", sw.eval_start);
    sw.eval_end = s.num("eval_end", sw.eval_end);
    sw.lead_windows = s.uint("lead_windows", sw.lead_windows);
    sw.lead_step = s.uint("lead_step", sw.lead_step);
    s.done();
  }

  if (root.has("forecast")) {
    Obj f = root.obj("forecast");
    c.forecast.horizon = f.uint("horizon", c.forecast.horizon);
    c.forecast.include_truncated = f.flag("include_truncated", c.forecast.include_truncated);
    f.done();
  }

  if (root.has("sensors")) {
    Obj s = root.obj("sensors");
    c.sensors.time_column = s.str("time_column", c.sensors.time_column);
    if (s.has("co2_columns")) c.sensors.co2_columns = read_str_map(s.at("co2_columns"), s.path("co2_columns"));
    if (s.has("temp_columns")) c.sensors.temp_columns = read_str_map(s.at("temp_columns"), s.path("temp_columns"));
    s.done();
  }

  if (root.has("calibration")) {
    Obj k = root.obj("calibration");
    if (k.has("baseline")) c.calibration.baseline = read_interval(k.at("baseline"), k.path("baseline"));
    if (k.has("extract")) c.calibration.extract = read_interval(k.at("extract"), k.path("extract"));
    c.calibration.include_boundary = k.flag("include_boundary", c.calibration.include_boundary);
    k.done();
  }

  root.done();
  return c;
}

ProjectConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), std::string("not valid JSON: ") + e.what());
  }
  try {
    return parse_config(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + "#" + e.where(), e.message());
  }
}

json to_json(const ProjectConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  if (!c.name.empty()) j["name"] = c.name;

  json net;
  net["zones"] = json::array();
  for (const auto& z : c.network.zones) {
    json zj{{"id", z.id}, {"volume", z.volume}};
    if (z.kind == ZoneKind::boundary) zj["boundary"] = true;
    net["zones"].push_back(zj);
  }
  net["flow_edges"] = json::array();
  for (const auto& e : c.network.flow_edges) net["flow_edges"].push_back({{"id", e.id}, {"from", e.from}, {"to", e.to}});
  net["thermal_edges"] = json::array();
  for (const auto& e : c.network.thermal_edges) net["thermal_edges"].push_back({{"id", e.id}, {"a", e.a}, {"b", e.b}});
  net["constrained"] = c.network.constrained;
  if (!c.network.preferred_independent.empty()) net["independent"] = c.network.preferred_independent;
  j["network"] = net;

  j["knowns"] = {{"q_exh", c.knowns.air.q_exh},
                 {"c_exh", c.knowns.air.c_exh},
                 {"q_ppl", c.knowns.thermal.q_ppl},
                 {"cp_air", c.knowns.thermal.cp_air},
                 {"rho_air", c.knowns.thermal.rho_air}};
  j["substep"] = c.substep;
  j["ambient"] = {{"co2", c.ambient.co2}, {"temp", c.ambient.temp}};

  if (c.truth) {
    json t;
    t["occupancy_schedule"] = json::array();
    for (const auto& [time, occ] : c.truth->schedule) t["occupancy_schedule"].push_back({{"t", time}, {"occupancy", occ}});
    t["independent_flows"] = c.truth->independent_flows;
    t["resistances"] = c.truth->resistances;
    t["capacitances"] = c.truth->capacitances;
    t["co2_initial"] = c.truth->co2_initial;
    t["temp_initial"] = c.truth->temp_initial;
    j["truth"] = t;
  }

  j["generation"] = {{"duration", c.generation.duration},
                     {"sample_dt", c.generation.sample_dt},
                     {"noise",
                      {{"sigma_co2", c.generation.noise.sigma_co2},
                       {"sigma_temp", c.generation.noise.sigma_temp},
                       {"seed", c.generation.noise.seed}}}};

  j["priors"] = {{"occupancy", block_json(c.priors.occupancy)},
                 {"flows", block_json(c.priors.flows)},
                 {"resistances", block_json(c.priors.resistances)},
                 {"capacitances", block_json(c.priors.capacitances)},
                 {"sigma_co2", block_json(c.priors.sigma_co2)},
                 {"sigma_temp", block_json(c.priors.sigma_temp)},
                 {"anchor_sigma", c.priors.anchor_sigma == AnchorSigma::sampled ? "sampled" : "fixed"}};

  json ig = json::object();
  auto put = [&ig](const char* k, const std::optional<double>& v) {
    if (v) ig[k] = *v;
  };
  put("occupancy", c.initial_guess.occupancy);
  put("flows", c.initial_guess.flows);
  put("co2_initial", c.initial_guess.co2_initial);
  put("temp_initial", c.initial_guess.temp_initial);
  put("resistances", c.initial_guess.resistances);
  put("capacitances", c.initial_guess.capacitances);
  put("sigma_co2", c.initial_guess.sigma_co2);
  put("sigma_temp", c.initial_guess.sigma_temp);
  j["initial_guess"] = ig;

  j["sampler"] = {{"iterations", c.ram.iterations},
                  {"burn_in", c.ram.burn_in},
                  {"target_accept", c.ram.target_accept},
                  {"adapt_exponent", c.ram.adapt_exponent},
                  {"adapt_scale", c.ram.adapt_scale},
                  {"initial_scale", c.ram.initial_scale},
                  {"freeze_after_burn_in", c.ram.freeze_after_burn_in},
                  {"seed", c.ram.seed}};
  j["windows"] = {{"size", c.windows.size},
                  {"step", c.windows.step},
                  {"horizon", c.windows.horizon},
                  {"n_draws", c.windows.n_draws},
                  {"max_stored_samples", c.windows.max_stored_samples},
                  {"scale_floor_fraction", c.windows.scale_floor_fraction}};

  json pairs = json::array();
  for (const auto& [a, b] : c.sweep.noise_pairs) pairs.push_back({a, b});
  j["sweep"] = {{"window_sizes", c.sweep.window_sizes},
                {"noise_pairs", pairs},
                {"eval_start", c.sweep.eval_start},
                {"eval_end", c.sweep.eval_end},
                {"lead_windows", c.sweep.lead_windows},
                {"lead_step", c.sweep.lead_step}};
  j["forecast"] = {{"horizon", c.forecast.horizon}, {"include_truncated", c.forecast.include_truncated}};
  j["sensors"] = {{"time_column", c.sensors.time_column},
                  {"co2_columns", c.sensors.co2_columns},
                  {"temp_columns", c.sensors.temp_columns}};
  json cal{{"include_boundary", c.calibration.include_boundary}};
  if (c.calibration.baseline) cal["baseline"] = {c.calibration.baseline->first, c.calibration.baseline->second};
  if (c.calibration.extract) cal["extract"] = {c.calibration.extract->first, c.calibration.extract->second};
  j["calibration"] = cal;
  return j;
}

}  // namespace zonenet
