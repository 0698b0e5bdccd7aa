#include <gtest/gtest.h>

#include <unistd.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = ONESHOT_CLI_PATH;
const fs::path kSrc = ONESHOT_SOURCE_DIR;

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("oneshot_cli_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>" + (scratch() / "err.txt").string();
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

std::size_t commas(const std::string& s) { return std::count(s.begin(), s.end(), ','); }

fs::path write_config(const std::string& name, const json& j) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << j.dump();
  return p;
}

json small_dme() {
  return {{"n", 20}, {"d", 6}, {"trials", 5}, {"eps", {0.5, 1.0}}, {"bit_budget", {30, "inf"}},
          {"seed", 3}};
}

// Runs a subcommand and returns the CSV text.
std::string csv_of(const std::string& sub, const json& cfg, const std::string& extra = "") {
  const fs::path c = write_config(sub + ".json", cfg);
  const fs::path out = scratch() / (sub + ".csv");
  fs::remove(out);
  EXPECT_EQ(run(sub + " --config " + c.string() + " --out " + out.string() + " " + extra), 0)
      << slurp(scratch() / "err.txt");
  return slurp(out);
}

}  // namespace

TEST(Cli, DmeHeaderAndRows) {
  const auto rows = lines(csv_of("dme", small_dme()));
  ASSERT_EQ(rows.size(), 1u + 2 * 2 * 2);
  EXPECT_EQ(rows[0],
            "experiment,seed,mechanism,n,d,C,eps,delta,alpha,chunk_dim,bit_budget,trials,mse,"
            "mse_stderr,mse_theory,bits_mean,bits_bound,eps_used,sigma,central_eps,"
            "central_delta,local_eps,local_delta,local_route,metric_coefficient,bias,"
            "points_mean,points_max");
  for (const auto& r : rows) EXPECT_EQ(commas(r), commas(rows[0]));
  EXPECT_EQ(rows[1].rfind("dme,3,ppr_gaussian,20,6,1,0.5,", 0), 0u) << rows[1];
  EXPECT_NE(rows[2].find(",inf,"), std::string::npos);
  EXPECT_EQ(rows[5].rfind("dme,3,csgm,", 0), 0u);
}

TEST(Cli, OtherHeaders) {
  const json metric = {{"d", 3}, {"C", 2.0}, {"bits", 20}, {"trials", 50}};
  const auto m = lines(csv_of("metric", metric));
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m[1].rfind("metric,1,ppr_laplace,", 0), 0u);
  EXPECT_EQ(m[2].rfind("metric,1,discrete_laplace,", 0), 0u);

  const json adn = {{"presets", {"p2p", "relay"}}, {"trials", 200}};
  const auto a = lines(csv_of("adn", adn));
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a[0],
            "experiment,seed,preset,noise,L,trials,mc_samples,failure,failure_stderr,"
            "error_set_hits,misdecodes,bound,bound_stderr,corollary");

  const json sec = {{"instances", 2}, {"trials", 50}};
  const auto s = lines(csv_of("secrecy", sec));
  ASSERT_EQ(s.size(), 5u);
  EXPECT_EQ(s[0],
            "experiment,seed,kind,instance,trials,error,error_stderr,tv,tv_stderr,bound,"
            "cover_a,cover_b");
  for (const auto& r : s) EXPECT_EQ(commas(r), commas(s[0]));

  const json bench = {{"d", 8}, {"reps", 3}};
  const auto b = lines(csv_of("ppr-bench", bench, "--alpha 2 --chunk 4 --chunk 2"));
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0],
            "experiment,seed,eps,chunk_dim,alpha,reps,time_mean,time_stderr,points_mean,"
            "log2_r_star");
  EXPECT_EQ(b[1].rfind("ppr-bench,1,1,4,2,3,", 0), 0u) << b[1];
}

TEST(Cli, SummaryJson) {
  csv_of("adn", {{"presets", {"p2p"}}, {"trials", 100}, {"seed", 9}});
  const json j = json::parse(slurp(scratch() / "adn.csv.json"));
  EXPECT_EQ(j["experiment"], "adn");
  EXPECT_EQ(j["seed"], 9);
  ASSERT_EQ(j["results"].size(), 1u);
  EXPECT_EQ(j["results"][0]["preset"], "p2p");
  EXPECT_NEAR(j["results"][0]["bound"].get<double>(), 0.5, 0.5);
}

TEST(Cli, SeedDeterminism) {
  const json cfg = small_dme();
  const std::string a = csv_of("dme", cfg);
  const std::string b = csv_of("dme", cfg);
  EXPECT_EQ(a, b);
  const std::string c = csv_of("dme", cfg, "--seed 4");
  EXPECT_NE(a, c);
  json cfg4 = cfg;
  cfg4["seed"] = 4;
  EXPECT_EQ(csv_of("dme", cfg4), c);
}

TEST(Cli, Errors) {
  const fs::path good = write_config("good.json", small_dme());
  EXPECT_NE(run(""), 0);
  EXPECT_NE(run("frobnicate"), 0);
  EXPECT_NE(run("dme --config " + good.string() + " --bogus"), 0);
  EXPECT_NE(run("dme --config /nonexistent/cfg.json"), 0);

  const fs::path bad = scratch() / "bad.json";
  std::ofstream(bad) << "{\"n\": 20,";
  EXPECT_NE(run("dme --config " + bad.string()), 0);
  EXPECT_NE(slurp(scratch() / "err.txt").find("malformed config"), std::string::npos);

  json unknown = small_dme();
  unknown["epsilon"] = 1.0;
  EXPECT_NE(run("dme --config " + write_config("u.json", unknown).string()), 0);
  EXPECT_NE(slurp(scratch() / "err.txt").find("unknown key"), std::string::npos);

  json tiny = small_dme();
  tiny["bit_budget"] = 1;
  EXPECT_NE(run("dme --config " + write_config("t.json", tiny).string()), 0);
  EXPECT_NE(slurp(scratch() / "err.txt").find("infeasible"), std::string::npos);

  json neg = small_dme();
  neg["trials"] = -3;
  EXPECT_NE(run("dme --config " + write_config("n.json", neg).string()), 0);

  EXPECT_NE(run("adn --config " + write_config("a.json", {{"presets", {"nope"}}}).string()), 0);
  EXPECT_NE(run("secrecy --config " + write_config("s.json", {{"kinds", {"x"}}}).string()), 0);
}

TEST(Cli, ShippedConfigs) {
  const json fig = json::parse(slurp(kSrc / "configs" / "paper_fig.json"));
  EXPECT_EQ(fig["n"], 500);
  EXPECT_EQ(fig["d"], 1000);
  EXPECT_DOUBLE_EQ(fig["delta"].get<double>(), 1e-6);
  EXPECT_DOUBLE_EQ(fig["eps"].front().get<double>(), 0.05);
  EXPECT_DOUBLE_EQ(fig["eps"].back().get<double>(), 6.0);
  for (const char* name : {"dme_quick", "metric", "adn", "secrecy", "bench"})
    EXPECT_NO_THROW(json::parse(slurp(kSrc / "configs" / (std::string(name) + ".json"))))
        << name;

  // The quick config runs end to end.
  const fs::path out = scratch() / "quick.csv";
  EXPECT_EQ(run("dme --config " + (kSrc / "configs" / "dme_quick.json").string() + " --out " +
                out.string()),
            0);
  EXPECT_EQ(lines(slurp(out)).size(), 1u + 2 * 2 * 2);
}
