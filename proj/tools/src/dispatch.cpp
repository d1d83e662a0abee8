#include "cpelt/cli/dispatch.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include "cpelt/cli/config.hpp"
#include "cpelt/cli/io.hpp"
#include "cpelt/cpelt.hpp"

#ifndef CPELT_VERSION
#define CPELT_VERSION "0.0.0"
#endif

namespace cpelt::cli {

namespace {

using Clock = std::chrono::steady_clock;

Json vec(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector to_vector(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

struct DataArgs {
  std::string data;
  std::string model = "ratio_power";
  std::string report;
  double tol = 1e-8;
  int max_iter = 200;
  std::vector<double> init;
};

void add_data_args(CLI::App* cmd, DataArgs& a) {
  cmd->add_option("--data", a.data, "CSV file with header x1,...,xp,y")->required()->check(CLI::ExistingFile);
  cmd->add_option("--model", a.model, "built-in model id")
      ->check(CLI::IsMember({"ratio_power", "linear"}))
      ->capture_default_str();
  cmd->add_option("--report", a.report, "write the JSON report here instead of stdout");
  cmd->add_option("--tol", a.tol, "least-squares tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--max-iter", a.max_iter, "least-squares iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--init", a.init, "initial parameter, comma separated")->delimiter(',');
}

struct Loaded {
  ModelSpec model;
  DataSet data;
  SolverOptions opts;
  std::optional<Vector> init;
};

Loaded load(const DataArgs& a) {
  const int p = a.model == "linear" ? csv_covariates(a.data) : 1;
  if (p < 1) fail(Errc::schema, a.data + ": header must name at least one covariate and y");
  ModelSpec model = builtin_model(a.model, p);
  DataSet data = ingest_csv(a.data, p);
  SolverOptions opts;
  opts.tol = a.tol;
  opts.max_iter = a.max_iter;
  std::optional<Vector> init;
  if (!a.init.empty()) {
    require(static_cast<Eigen::Index>(a.init.size()) == model.dim_beta(),
            "--init needs " + std::to_string(model.dim_beta()) + " values");
    init = to_vector(a.init);
  }
  return {std::move(model), std::move(data), opts, std::move(init)};
}

FitResult fit_h0(const Loaded& in) {
  FitResult fit = in.init ? fit_nls(in.data, in.model, *in.init, in.opts) : fit_nls(in.data, in.model, in.opts);
  return fit;
}

Json fit_json(const FitResult& fit) {
  return Json{{"beta_hat", vec(fit.beta_hat)},
              {"sigma2_hat", fit.sigma2_hat},
              {"converged", fit.converged},
              {"iterations", fit.iterations}};
}

Json exact_json(const ExactELState& st) {
  return Json{{"ok", true},
              {"t_nk", st.t_nk},
              {"beta", vec(st.beta)},
              {"lambda", vec(st.lambda)},
              {"lambda_right", vec(st.lambda_right)},
              {"iterations", st.iterations},
              {"beta_score_norm", st.beta_score_norm},
              {"lambda_score_norm", st.lambda_score_norm}};
}

template <class Solve>
Json exact_or_error(Solve&& solve) {
  try {
    return exact_json(solve());
  } catch (const Error& e) {
    return Json{{"ok", false}, {"error", e.what()}};
  }
}

TrimmingPlan plan_from(Eigen::Index n, int d, const std::optional<double>& t1, const std::optional<double>& t2) {
  if (!t1 && !t2) return trimming_default(n, d);
  const double def = 2.0 / std::sqrt(static_cast<double>(n));
  return make_plan(n, t1.value_or(def), t2.value_or(1.0 - def), d);
}

std::uint64_t parse_seed(const std::string& text, const char* what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw CLI::ValidationError(what, "'" + text + "' is not an unsigned 64-bit integer");
  }
  return v;
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("CPELT_SEED");
  if (!s || !*s) return std::nullopt;
  return parse_seed(s, "CPELT_SEED");
}

struct Emitter {
  std::ostream& out;
  std::string command;
  Fnv1a digest;
  Clock::time_point start = Clock::now();

  void emit(Json payload, const std::string& path) {
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    const Json report = make_report(command, digest.hex(), std::move(payload), ms);
    if (path.empty()) {
      out << report.dump(2) << '\n';
      return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(Errc::parse, "cannot write report '" + path + "'");
    f << report.dump(2) << '\n';
  }
};

}  // namespace

std::string version_string() { return std::string("cpelt ") + CPELT_VERSION; }

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Empirical-likelihood change-point tests for nonlinear regression", "cpelt"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(0, 1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker thread cap (0 = hardware)");

  // detect
  DataArgs det;
  double det_alpha = 0.05;
  std::optional<double> det_t1, det_t2;
  bool det_exact = false, det_upper = false;
  CLI::App* detect = app.add_subcommand("detect", "single change-point test");
  add_data_args(detect, det);
  detect->add_option("--alpha", det_alpha, "test level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  detect->add_option("--trim-theta1", det_t1, "lower split fraction (default 2/sqrt(n))");
  detect->add_option("--trim-theta2", det_t2, "upper split fraction (default 1-2/sqrt(n))");
  detect->add_flag("--exact", det_exact, "also solve the exact statistic at k_hat");
  detect->add_flag("--gumbel-upper", det_upper, "use the upper Gumbel quantile for c_alpha");

  // epidemic
  DataArgs epi;
  double epi_alpha = 0.05;
  std::vector<Eigen::Index> epi_trim;
  int epi_boot = 200;
  std::string epi_seed;
  bool epi_exact = false;
  CLI::App* epidemic = app.add_subcommand("epidemic", "two change-point (epidemic) test");
  add_data_args(epidemic, epi);
  epidemic->add_option("--alpha", epi_alpha, "test level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  epidemic->add_option("--trim", epi_trim, "observations trimmed at each end (one value or lead,tail)")
      ->delimiter(',')
      ->expected(1, 2);
  epidemic->add_option("--bootstrap-reps", epi_boot, "bootstrap replicates")
      ->check(CLI::Range(50, 1000000))
      ->capture_default_str();
  epidemic->add_option("--seed", epi_seed, "bootstrap seed (default CPELT_SEED or 1)");
  epidemic->add_flag("--exact", epi_exact, "also solve the exact statistic at the estimated pair");

  // supf
  DataArgs sf;
  std::optional<double> sf_t1, sf_t2;
  CLI::App* supf = app.add_subcommand("supf", "least-squares sup-F baseline");
  add_data_args(supf, sf);
  supf->add_option("--trim-theta1", sf_t1, "lower split fraction");
  supf->add_option("--trim-theta2", sf_t2, "upper split fraction");

  // simulate
  std::string sim_config, sim_csv, sim_data_out, sim_report, sim_detector, sim_seed;
  CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo replications");
  simulate->add_option("--config", sim_config, "JSON configuration")->required()->check(CLI::ExistingFile);
  simulate->add_option("--detector", sim_detector, "overrides the config detector")
      ->check(CLI::IsMember({"el", "supf", "epidemic"}));
  simulate->add_option("--seed", sim_seed, "overrides CPELT_SEED and the config seed");
  simulate->add_option("--csv", sim_csv, "per-replication CSV (rep,reject,k_hat,t_max,k2_hat,ok)");
  simulate->add_option("--data-out", sim_data_out, "write the first replication's data set as CSV");
  simulate->add_option("--report", sim_report, "write the JSON report here instead of stdout");

  // critical-value
  Eigen::Index cv_n = 0;
  double cv_alpha = 0.05;
  std::optional<double> cv_t1, cv_t2;
  bool cv_upper = false;
  CLI::App* critical = app.add_subcommand("critical-value", "print the asymptotic critical value");
  critical->add_option("--n", cv_n, "sample size")->required()->check(CLI::PositiveNumber);
  critical->add_option("--alpha", cv_alpha, "test level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  critical->add_option("--theta1", cv_t1, "lower split fraction");
  critical->add_option("--theta2", cv_t2, "upper split fraction");
  critical->add_flag("--gumbel-upper", cv_upper, "use the upper Gumbel quantile");

  // gradcheck
  std::string gc_model = "ratio_power", gc_report;
  std::vector<double> gc_x, gc_beta;
  double gc_step = 1e-6;
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "compare the analytic gradient with central differences");
  gradcheck->add_option("--model", gc_model, "built-in model id")
      ->check(CLI::IsMember({"ratio_power", "linear"}))
      ->capture_default_str();
  gradcheck->add_option("--x", gc_x, "covariate, comma separated")->required()->delimiter(',');
  gradcheck->add_option("--beta", gc_beta, "parameter, comma separated")->required()->delimiter(',');
  gradcheck->add_option("--step", gc_step, "difference step")->check(CLI::PositiveNumber)->capture_default_str();
  gradcheck->add_option("--report", gc_report, "write the JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  if (app.get_subcommands().empty()) {
    err << app.help();
    return kUsage;
  }
  if (threads > 0) set_thread_count(threads);

  CLI::App* cmd = app.get_subcommands().front();
  Emitter emitter{out, cmd->get_name(), {}};
  emitter.digest.update(cmd->get_name());
  for (int i = 1; i < argc; ++i) {
    emitter.digest.update("\x1f");
    emitter.digest.update(argv[i]);
  }

  try {
    if (cmd == detect) {
      emitter.digest.update_file(det.data);
      const Loaded in = load(det);
      const TrimmingPlan plan = plan_from(in.data.n(), in.model.dim_beta(), det_t1, det_t2);
      const GumbelTail tail = det_upper ? GumbelTail::upper : GumbelTail::lower;
      const ScanResult r = scan_with_fit(in.data, in.model, fit_h0(in), det_alpha, plan, tail);
      Json p;
      p["n"] = in.data.n();
      p["d"] = in.model.dim_beta();
      p["beta_hat"] = vec(r.fit.beta_hat);
      p["sigma2_hat"] = r.fit.sigma2_hat;
      p["fit_converged"] = r.fit.converged;
      p["t_max"] = r.t_max;
      p["sqrt_t_max"] = std::sqrt(r.t_max);
      p["c_alpha"] = r.c_alpha;
      p["gumbel_tail"] = det_upper ? "upper" : "lower";
      p["reject"] = r.reject;
      p["k_hat"] = r.k_hat;
      p["theta_hat"] = r.theta_hat;
      p["k_lo"] = plan.k_lo;
      p["k_hi"] = plan.k_hi;
      p["stats"] = r.stats;
      if (det_exact) {
        p["exact"] = exact_or_error([&] { return exact_statistic(in.data, in.model, r.k_hat, r.fit.beta_hat); });
      }
      emitter.emit(std::move(p), det.report);
    } else if (cmd == epidemic) {
      emitter.digest.update_file(epi.data);
      const Loaded in = load(epi);
      EpidemicTrim trim = epidemic_trim_default(in.data.n());
      if (epi_trim.size() == 1) trim = {epi_trim[0], epi_trim[0]};
      if (epi_trim.size() == 2) trim = {epi_trim[0], epi_trim[1]};
      CalibrationOptions calib;
      calib.reps = epi_boot;
      calib.seed = epi_seed.empty() ? env_seed().value_or(1) : parse_seed(epi_seed, "--seed");
      calib.fit_opts = in.opts;
      const EpidemicScanResult r = epidemic_scan_with_fit(in.data, in.model, fit_h0(in), epi_alpha, trim, calib);
      Json p;
      p["n"] = in.data.n();
      p["d"] = in.model.dim_beta();
      p["beta_hat"] = vec(r.fit.beta_hat);
      p["sigma2_hat"] = r.fit.sigma2_hat;
      p["fit_converged"] = r.fit.converged;
      p["stat_max"] = r.stat_max;
      p["k1_hat"] = r.k1_hat;
      p["k2_hat"] = r.k2_hat;
      p["theta_hat"] = r.theta_hat;
      p["threshold"] = r.threshold;
      p["threshold_method"] = "parametric-bootstrap";
      p["bootstrap_reps"] = r.bootstrap_reps;
      p["bootstrap_failures"] = r.bootstrap_failures;
      p["seed"] = calib.seed;
      p["trim"] = {trim.lead, trim.tail};
      p["reject"] = r.reject;
      if (epi_exact) {
        p["exact"] = exact_or_error(
            [&] { return exact_epidemic_statistic(in.data, in.model, r.k1_hat, r.k2_hat, r.fit.beta_hat); });
      }
      emitter.emit(std::move(p), epi.report);
    } else if (cmd == supf) {
      emitter.digest.update_file(sf.data);
      const Loaded in = load(sf);
      const TrimmingPlan plan = plan_from(in.data.n(), in.model.dim_beta(), sf_t1, sf_t2);
      const SupFResult r = sup_f_with_fit(in.data, in.model, fit_h0(in), plan, in.opts);
      Json p;
      p["n"] = in.data.n();
      p["d"] = in.model.dim_beta();
      p["f_max"] = r.f_max;
      p["k_at_max"] = r.k_at_max;
      p["critical"] = kSupFCritical;
      p["reject"] = r.reject;
      p["per_k_failures"] = r.per_k_failures;
      p["splits_tried"] = r.splits_tried;
      p["ssr0"] = r.ssr0;
      emitter.emit(std::move(p), sf.report);
    } else if (cmd == simulate) {
      const std::string text = read_file(sim_config);
      emitter.digest.update(text);
      Json j;
      try {
        j = Json::parse(text);
      } catch (const nlohmann::json::parse_error& e) {
        fail(Errc::parse, sim_config + ": " + e.what());
      }
      SimRequest req = parse_sim_config(j);
      if (!sim_seed.empty()) req.cfg.seed = parse_seed(sim_seed, "--seed");
      else if (const auto s = env_seed()) req.cfg.seed = *s;
      if (!sim_detector.empty()) req.detector = parse_detector(sim_detector);
      const SimReport r = run_replications(req.cfg, req.detector);
      if (!sim_data_out.empty()) write_csv(sim_data_out, generate(req.cfg, 0));
      if (!sim_csv.empty()) {
        std::ofstream f(sim_csv, std::ios::binary);
        if (!f) fail(Errc::parse, "cannot write '" + sim_csv + "'");
        f << "rep,reject,k_hat,t_max,k2_hat,ok\n" << std::setprecision(17);
        for (const ReplicationRecord& rec : r.records) {
          f << rec.rep << ',' << int(rec.reject) << ',' << rec.k_hat << ',' << rec.stat << ',' << rec.k2_hat << ','
            << int(rec.ok) << '\n';
        }
      }
      emitter.emit(to_json(r, req.cfg), sim_report);
    } else if (cmd == critical) {
      const int d = 2;
      const TrimmingPlan plan = plan_from(cv_n, d, cv_t1, cv_t2);
      out << std::fixed << std::setprecision(6)
          << critical_value(cv_alpha, plan, cv_upper ? GumbelTail::upper : GumbelTail::lower) << '\n';
    } else if (cmd == gradcheck) {
      const ModelSpec model = builtin_model(gc_model, static_cast<int>(gc_x.size()));
      const Vector x = to_vector(gc_x);
      const Vector beta = to_vector(gc_beta);
      require(beta.size() == model.dim_beta(), "--beta needs " + std::to_string(model.dim_beta()) + " values");
      const double worst = check_gradient(model, x, beta, gc_step);
      Json p;
      p["model"] = gc_model;
      p["x"] = gc_x;
      p["beta"] = gc_beta;
      p["step"] = gc_step;
      p["gradient"] = vec(eval_grad(model, x, beta));
      p["max_rel_error"] = worst;
      emitter.emit(std::move(p), gc_report);
    }
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kComputation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kComputation;
  }
  return kOk;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const std::string& a : args) argv.push_back(a.c_str());
  return dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace cpelt::cli
