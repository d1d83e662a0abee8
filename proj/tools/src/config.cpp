#include "cpelt/cli/config.hpp"

#include <set>
#include <string>

#include "cpelt/errors.hpp"

namespace cpelt::cli {

namespace {

template <class T>
T get(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::schema, std::string("config key '") + key + "': " + e.what());
  }
}

Vector get_vector(const Json& j, const char* key) {
  const auto v = get<std::vector<double>>(j, key);
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

Json vec(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

}  // namespace

SimRequest parse_sim_config(const Json& j) {
  if (!j.is_object()) fail(Errc::schema, "config must be a JSON object");
  static const std::set<std::string> known = {
      "scenario", "n",     "k0",        "k1",         "k2",     "k12",          "beta1",
      "beta2",    "model", "dist",      "reps",       "alpha",  "seed",         "x_divisor",
      "noise",    "noise_sd", "theta1", "theta2",     "epidemic_trim", "bootstrap_reps",
      "detector", "gumbel_tail", "tol", "max_iter"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) fail(Errc::schema, "unknown config key '" + key + "'");
  }

  SimRequest req;
  SimConfig& c = req.cfg;
  if (j.contains("scenario")) c.scenario = parse_scenario(get<std::string>(j, "scenario"));
  if (j.contains("n")) c.n = get<Eigen::Index>(j, "n");
  if (j.contains("k0") && !j.at("k0").is_null()) c.k0 = get<Eigen::Index>(j, "k0");
  if (j.contains("k12")) {
    const auto pair = get<std::vector<Eigen::Index>>(j, "k12");
    if (pair.size() != 2) fail(Errc::schema, "config key 'k12' must hold two integers");
    c.k12 = {pair[0], pair[1]};
  } else if (j.contains("k1") || j.contains("k2")) {
    c.k12 = {get<Eigen::Index>(j, "k1"), get<Eigen::Index>(j, "k2")};
  }
  // A change index implies the scenario when it is left out.
  if (!j.contains("scenario")) {
    if (c.k0) c.scenario = Scenario::single;
    if (c.k12) c.scenario = Scenario::epidemic;
  }
  if (j.contains("beta1")) c.beta1 = get_vector(j, "beta1");
  if (j.contains("beta2")) c.beta2 = get_vector(j, "beta2");
  if (j.contains("model")) c.model = get<std::string>(j, "model");
  if (j.contains("dist")) c.dist = parse_distribution(get<std::string>(j, "dist"));
  if (j.contains("reps")) c.reps = get<int>(j, "reps");
  if (j.contains("alpha")) c.alpha = get<double>(j, "alpha");
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed");
  if (j.contains("x_divisor")) c.x_divisor = get<double>(j, "x_divisor");
  if (j.contains("noise")) c.noise = get<bool>(j, "noise");
  if (j.contains("noise_sd")) c.noise_sd = get<double>(j, "noise_sd");
  if (j.contains("theta1")) c.theta1 = get<double>(j, "theta1");
  if (j.contains("theta2")) c.theta2 = get<double>(j, "theta2");
  if (j.contains("epidemic_trim")) {
    const auto t = get<std::vector<Eigen::Index>>(j, "epidemic_trim");
    if (t.size() != 2) fail(Errc::schema, "config key 'epidemic_trim' must hold two integers");
    c.epidemic_trim = EpidemicTrim{t[0], t[1]};
  }
  if (j.contains("bootstrap_reps")) c.bootstrap_reps = get<int>(j, "bootstrap_reps");
  if (j.contains("tol")) c.fit_opts.tol = get<double>(j, "tol");
  if (j.contains("max_iter")) c.fit_opts.max_iter = get<int>(j, "max_iter");
  if (j.contains("gumbel_tail")) {
    const auto tail = get<std::string>(j, "gumbel_tail");
    if (tail == "lower") c.gumbel_tail = GumbelTail::lower;
    else if (tail == "upper") c.gumbel_tail = GumbelTail::upper;
    else fail(Errc::schema, "config key 'gumbel_tail' must be 'lower' or 'upper'");
  }
  if (j.contains("detector")) req.detector = parse_detector(get<std::string>(j, "detector"));
  return req;
}

Json to_json(const SimConfig& c) {
  Json j;
  j["scenario"] = scenario_name(c.scenario);
  j["n"] = c.n;
  if (c.k0) j["k0"] = *c.k0;
  if (c.k12) j["k12"] = {c.k12->first, c.k12->second};
  j["beta1"] = vec(c.beta1);
  j["beta2"] = vec(c.beta2);
  j["model"] = c.model;
  j["dist"] = distribution_name(c.dist);
  j["reps"] = c.reps;
  j["alpha"] = c.alpha;
  j["seed"] = c.seed;
  j["x_divisor"] = c.x_divisor;
  j["noise"] = c.noise;
  j["noise_sd"] = c.noise_sd;
  if (c.theta1) j["theta1"] = *c.theta1;
  if (c.theta2) j["theta2"] = *c.theta2;
  if (c.epidemic_trim) j["epidemic_trim"] = {c.epidemic_trim->lead, c.epidemic_trim->tail};
  j["bootstrap_reps"] = c.bootstrap_reps;
  j["gumbel_tail"] = c.gumbel_tail == GumbelTail::upper ? "upper" : "lower";
  return j;
}

Json to_json(const KhatSummary& s) {
  return Json{{"min", s.min}, {"max", s.max}, {"mean", s.mean}, {"sd", s.sd}, {"median", s.median}};
}

Json to_json(const SimReport& r, const SimConfig& cfg) {
  Json j;
  j["detector"] = detector_name(r.detector);
  j["config"] = to_json(cfg);
  j["rejections"] = r.rejections;
  j["reps_done"] = r.reps_done;
  j["empirical_rate"] = r.empirical_rate;
  j["failures"] = r.failures;
  if (r.khat_summary) j["khat_summary"] = to_json(*r.khat_summary);
  if (r.k2hat_summary) j["k2hat_summary"] = to_json(*r.k2hat_summary);
  j["wall_time_ms"] = r.wall_time_ms;
  return j;
}

Json make_report(const std::string& command, const std::string& digest, Json payload, double timing_ms) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["inputs_digest"] = digest;
  j["payload"] = std::move(payload);
  j["timing_ms"] = timing_ms;
  return j;
}

}  // namespace cpelt::cli
