#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cpelt/cli/config.hpp"
#include "cpelt/cli/dispatch.hpp"
#include "cpelt/cli/io.hpp"
#include "cpelt/cpelt.hpp"

namespace fs = std::filesystem;
using cpelt::Errc;
using cpelt::cli::Json;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("cpelt_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "cpelt");
    out_.str("");
    err_.str("");
    return cpelt::cli::dispatch(args, out_, err_);
  }

  Json report() const { return Json::parse(out_.str()); }

  Errc ingest_error(const std::string& path, int p) {
    try {
      cpelt::cli::ingest_csv(path, p);
    } catch (const cpelt::Error& e) {
      last_message_ = e.what();
      return e.code();
    }
    ADD_FAILURE() << "no error";
    return Errc::precondition;
  }

  fs::path dir_;
  std::ostringstream out_, err_;
  std::string last_message_;
};

}  // namespace

TEST_F(CliTest, IngestSmallFile) {
  const auto d = cpelt::cli::ingest_csv(write("a.csv", "x1,y\n0.1,1\n0.2,2\n0.3,3\n"), 1);
  EXPECT_EQ(d.n(), 3);
  EXPECT_EQ(d.p(), 1);
  EXPECT_DOUBLE_EQ(d.x(2, 0), 0.3);
  EXPECT_DOUBLE_EQ(d.y[1], 2.0);
}

TEST_F(CliTest, IngestBadHeaderIsSchemaError) {
  EXPECT_EQ(ingest_error(write("b.csv", "a,b\n1,2\n"), 1), Errc::schema);
  EXPECT_EQ(ingest_error(write("c.csv", "x1,y\n1,2,3\n"), 1), Errc::schema);
}

TEST_F(CliTest, IngestInfIsParseErrorWithLine) {
  EXPECT_EQ(ingest_error(write("d.csv", "x1,y\n0.1,1\ninf,2\n"), 1), Errc::parse);
  EXPECT_NE(last_message_.find("line 3"), std::string::npos) << last_message_;
  EXPECT_EQ(ingest_error(write("e.csv", "x1,y\n0.1,nan\n"), 1), Errc::parse);
  EXPECT_EQ(ingest_error(write("f.csv", "x1,y\n0.1,abc\n"), 1), Errc::parse);
}

TEST_F(CliTest, CriticalValuePrintsNumberAlone) {
  ASSERT_EQ(run({"critical-value", "--n", "600", "--alpha", "0.05"}), 0);
  EXPECT_NEAR(std::stod(out_.str()), 1.434, 0.002);
  ASSERT_EQ(run({"critical-value", "--n", "400", "--alpha", "0.05"}), 0);
  EXPECT_NEAR(std::stod(out_.str()), 1.340, 0.002);
  ASSERT_EQ(run({"critical-value", "--n", "400", "--theta1", "0.1", "--theta2", "0.9"}), 0);
  EXPECT_NEAR(std::stod(out_.str()), 1.340, 0.002);
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run({}), 1);
  EXPECT_NE(err_.str().find("Usage"), std::string::npos);
  EXPECT_EQ(run({"detect", "--bogus"}), 1);
  EXPECT_EQ(run({"frobnicate"}), 1);
  EXPECT_EQ(run({"critical-value"}), 1);
  EXPECT_EQ(run({"--version"}), 0);
  EXPECT_NE(out_.str().find("cpelt"), std::string::npos);
}

TEST_F(CliTest, ComputationErrorsExitTwo) {
  EXPECT_EQ(run({"detect", "--data", write("s.csv", "x1,y\n0.1,1\n0.2,2\n0.3,3\n")}), 2);
  EXPECT_EQ(run({"detect", "--data", write("h.csv", "a,b\n1,2\n")}), 2);
  EXPECT_EQ(run({"critical-value", "--n", "100", "--theta1", "0.5", "--theta2", "0.5"}), 2);
}

TEST_F(CliTest, SimulateRoundTripReproducesDetection) {
  const std::string cfg = write("c.json", R"({"scenario":"single","n":500,"k0":300,"reps":3,"seed":5})");
  const std::string data = (dir_ / "rep0.csv").string();
  const std::string reps = (dir_ / "reps.csv").string();
  ASSERT_EQ(run({"simulate", "--config", cfg, "--data-out", data, "--csv", reps}), 0) << err_.str();
  const Json sim = report();
  EXPECT_EQ(sim["command"], "simulate");
  EXPECT_EQ(sim["payload"]["reps_done"], 3);
  ASSERT_TRUE(sim["payload"].contains("khat_summary"));

  cpelt::SimConfig c;
  c.scenario = cpelt::Scenario::single;
  c.n = 500;
  c.k0 = 300;
  c.seed = 5;
  const cpelt::DataSet direct = cpelt::generate(c, 0);
  const cpelt::DataSet back = cpelt::cli::ingest_csv(data, 1);
  EXPECT_EQ(direct.x, back.x);
  EXPECT_EQ(direct.y, back.y);

  ASSERT_EQ(run({"detect", "--data", data}), 0) << err_.str();
  const Json det = report();
  const cpelt::ScanResult r =
      cpelt::scan(direct, cpelt::ratio_power_model(), 0.05, cpelt::trimming_default(500));
  EXPECT_EQ(det["payload"]["t_max"].get<double>(), r.t_max);
  EXPECT_EQ(det["payload"]["k_hat"].get<long>(), r.k_hat);
  EXPECT_EQ(det["payload"]["reject"].get<bool>(), r.reject);

  std::ifstream in(reps);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("rep,reject,k_hat,t_max", 0), 0u);
}

TEST_F(CliTest, DetectReportKeysAreStable) {
  cpelt::SimConfig c;
  c.n = 200;
  const std::string data = (dir_ / "d.csv").string();
  cpelt::cli::write_csv(data, cpelt::generate(c, 1));
  const std::string path = (dir_ / "r.json").string();
  ASSERT_EQ(run({"detect", "--data", data, "--exact", "--report", path}), 0) << err_.str();
  EXPECT_TRUE(out_.str().empty());
  const Json j = Json::parse(cpelt::cli::read_file(path));
  std::vector<std::string> keys;
  for (const auto& [k, _] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"schema_version", "command", "inputs_digest", "payload", "timing_ms"}));
  for (const char* key : {"n", "d", "beta_hat", "sigma2_hat", "t_max", "sqrt_t_max", "c_alpha", "reject", "k_hat",
                          "theta_hat", "stats", "exact"})
    EXPECT_TRUE(j["payload"].contains(key)) << key;
  EXPECT_EQ(j["inputs_digest"].get<std::string>().size(), 16u);
  // Same inputs, same digest.
  const std::string first = j["inputs_digest"];
  ASSERT_EQ(run({"detect", "--data", data, "--exact", "--report", path}), 0);
  EXPECT_EQ(Json::parse(cpelt::cli::read_file(path))["inputs_digest"], first);
}

TEST_F(CliTest, LinearModelTakesCovariatesFromHeader) {
  std::string csv = "x1,x2,y\n";
  for (int i = 0; i < 40; ++i) csv += "1," + std::to_string(i * 0.05) + "," + std::to_string(1 + 0.1 * i + (i % 3) * 0.2) + "\n";
  ASSERT_EQ(run({"detect", "--data", write("l.csv", csv), "--model", "linear"}), 0) << err_.str();
  EXPECT_EQ(report()["payload"]["d"], 2);
  ASSERT_EQ(run({"supf", "--data", write("l2.csv", csv), "--model", "linear"}), 0) << err_.str();
  for (const char* key : {"f_max", "k_at_max", "reject", "per_k_failures"}) EXPECT_TRUE(report()["payload"].contains(key));
}

TEST_F(CliTest, SeedEnvironmentOverridesConfig) {
  const std::string cfg = write("c.json", R"({"n":200,"reps":2,"seed":5})");
  ::setenv("CPELT_SEED", "77", 1);
  ASSERT_EQ(run({"simulate", "--config", cfg}), 0) << err_.str();
  EXPECT_EQ(report()["payload"]["config"]["seed"], 77);
  ASSERT_EQ(run({"simulate", "--config", cfg, "--seed", "9"}), 0);
  EXPECT_EQ(report()["payload"]["config"]["seed"], 9);
  ::setenv("CPELT_SEED", "nonsense", 1);
  EXPECT_EQ(run({"simulate", "--config", cfg}), 1);
  ::unsetenv("CPELT_SEED");
  ASSERT_EQ(run({"simulate", "--config", cfg}), 0);
  EXPECT_EQ(report()["payload"]["config"]["seed"], 5);
}

TEST_F(CliTest, ConfigSchemaErrors) {
  EXPECT_EQ(run({"simulate", "--config", write("u.json", R"({"n":200,"colour":1})")}), 2);
  EXPECT_NE(err_.str().find("colour"), std::string::npos);
  EXPECT_EQ(run({"simulate", "--config", write("t.json", R"({"n":"many"})")}), 2);
  EXPECT_EQ(run({"simulate", "--config", write("p.json", "{not json")}), 2);
}

TEST_F(CliTest, ConfigParsesEveryField) {
  const Json j = Json::parse(R"({"scenario":"epidemic","n":900,"k1":100,"k2":300,"beta1":[10,2],"beta2":[8,1.5],
    "model":"ratio_power","dist":"student6","reps":7,"alpha":0.1,"seed":3,"x_divisor":500,"noise":true,
    "noise_sd":0.5,"epidemic_trim":[20,30],"bootstrap_reps":80,"detector":"epidemic","gumbel_tail":"upper"})");
  const auto req = cpelt::cli::parse_sim_config(j);
  EXPECT_EQ(req.detector, cpelt::Detector::epidemic);
  EXPECT_EQ(req.cfg.k12->second, 300);
  EXPECT_EQ(req.cfg.dist, cpelt::ErrorDistribution::ScaledT6);
  EXPECT_EQ(req.cfg.epidemic_trim->tail, 30);
  EXPECT_EQ(req.cfg.gumbel_tail, cpelt::GumbelTail::upper);
  EXPECT_DOUBLE_EQ(req.cfg.beta2[1], 1.5);
}

TEST_F(CliTest, GradcheckAndEpidemic) {
  ASSERT_EQ(run({"gradcheck", "--x", "0.5", "--beta", "10,2"}), 0);
  EXPECT_LE(report()["payload"]["max_rel_error"].get<double>(), 1e-5);

  cpelt::SimConfig c;
  c.n = 300;
  c.scenario = cpelt::Scenario::epidemic;
  c.k12 = {100, 160};
  const std::string data = (dir_ / "e.csv").string();
  cpelt::cli::write_csv(data, cpelt::generate(c, 0));
  ASSERT_EQ(run({"epidemic", "--data", data, "--bootstrap-reps", "50", "--seed", "4"}), 0) << err_.str();
  const Json p = report()["payload"];
  for (const char* key : {"k1_hat", "k2_hat", "threshold", "bootstrap_reps", "stat_max", "reject"})
    EXPECT_TRUE(p.contains(key)) << key;
  EXPECT_EQ(p["bootstrap_reps"], 50);
  EXPECT_EQ(run({"epidemic", "--data", data, "--bootstrap-reps", "10"}), 1);
}
