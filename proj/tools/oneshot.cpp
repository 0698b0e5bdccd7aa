// Command-line front end. See README.md for the config schema of each
// subcommand and the CSV / JSON summary formats.

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oneshot/adn.hpp"
#include "oneshot/dme.hpp"
#include "oneshot/secrecy.hpp"

using json = nlohmann::json;
using namespace oneshot;

namespace {

constexpr int kFormatVersion = 1;

// Locale-independent shortest round-trip formatting.
std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, 10);
  return std::string(buf.data(), res.ptr);
}

std::string fmt(uint64_t v) { return std::to_string(v); }
std::string fmt(const std::string& s) { return s; }

json num(double v) {
  if (std::isfinite(v)) return v;
  return fmt(v);
}

class CsvWriter {
 public:
  CsvWriter(std::ostream& os, std::vector<std::string> header)
      : os_(os), width_(header.size()) {
    write(header);
  }
  void write(const std::vector<std::string>& row) {
    if (row.size() != width_) throw std::logic_error("csv: row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) os_ << (i ? "," : "") << row[i];
    os_ << '\n';
  }

 private:
  std::ostream& os_;
  std::size_t width_;
};

// ---- config helpers ----

void check_keys(const json& cfg, const std::set<std::string>& allowed) {
  if (!cfg.is_object()) throw std::invalid_argument("config: top level must be an object");
  for (const auto& [k, v] : cfg.items())
    if (!allowed.count(k)) throw std::invalid_argument("config: unknown key '" + k + "'");
}

double as_double(const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string() && (v == "inf" || v == "infinity"))
    return std::numeric_limits<double>::infinity();
  throw std::invalid_argument("config: '" + key + "' must be a number");
}

template <class T>
T get(const json& cfg, const std::string& key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  const json& v = cfg.at(key);
  if constexpr (std::is_same_v<T, double>) {
    return as_double(v, key);
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw std::invalid_argument("config: '" + key + "' must be a string");
    return v.get<std::string>();
  } else {
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw std::invalid_argument("config: '" + key + "' must be a non-negative integer");
    return static_cast<T>(v.get<unsigned long long>());
  }
}

// A scalar or a list of scalars.
template <class T>
std::vector<T> get_list(const json& cfg, const std::string& key, std::vector<T> fallback) {
  if (!cfg.contains(key)) return fallback;
  const json& v = cfg.at(key);
  std::vector<T> out;
  if (v.is_array()) {
    if (v.empty()) throw std::invalid_argument("config: '" + key + "' is empty");
    for (const auto& e : v) out.push_back(get<T>(json{{key, e}}, key, T{}));
  } else {
    out.push_back(get<T>(cfg, key, T{}));
  }
  return out;
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed config: ") + e.what());
  }
}

struct Common {
  std::string config;
  std::string out;
  std::string summary;
  std::optional<uint64_t> seed;
};

// Routes CSV and summary output. With --out the summary defaults to
// <out>.json; without it the CSV goes to stdout and the summary to stderr.
class Output {
 public:
  explicit Output(const Common& c) {
    if (!c.out.empty()) {
      file_.open(c.out);
      if (!file_) throw std::runtime_error("cannot write " + c.out);
    }
    summary_path_ = !c.summary.empty() ? c.summary : (c.out.empty() ? "" : c.out + ".json");
  }
  std::ostream& csv() { return file_.is_open() ? file_ : std::cout; }
  void summary(const json& j) {
    if (summary_path_.empty()) {
      std::cerr << j.dump(2) << '\n';
      return;
    }
    std::ofstream s(summary_path_);
    if (!s) throw std::runtime_error("cannot write " + summary_path_);
    s << j.dump(2) << '\n';
  }

 private:
  std::ofstream file_;
  std::string summary_path_;
};

json summary_head(const std::string& experiment, uint64_t seed, const json& cfg) {
  return {{"format_version", kFormatVersion},
          {"experiment", experiment},
          {"seed", seed},
          {"config", cfg},
          {"results", json::array()}};
}

// ---- dme / metric ----

const std::vector<std::string> kReportHeader = {
    "experiment", "seed", "mechanism", "n", "d", "C", "eps", "delta", "alpha",
    "chunk_dim", "bit_budget", "trials", "mse", "mse_stderr", "mse_theory",
    "bits_mean", "bits_bound", "eps_used", "sigma", "central_eps", "central_delta",
    "local_eps", "local_delta", "local_route", "metric_coefficient", "bias",
    "points_mean", "points_max"};

json report_json(const TrialReport& r) {
  return {{"mechanism", r.mechanism},       {"trials", r.trials},
          {"mse", num(r.mse)},              {"mse_stderr", num(r.mse_stderr)},
          {"mse_theory", num(r.mse_theory)}, {"bits_mean", num(r.bits_mean)},
          {"bits_bound", num(r.bits_bound)}, {"eps_used", num(r.eps_used)},
          {"sigma", num(r.sigma)},          {"central_eps", num(r.central.eps)},
          {"central_delta", num(r.central.delta)}, {"local_eps", num(r.local.eps)},
          {"local_delta", num(r.local.delta)}, {"local_route", r.local_route},
          {"metric_coefficient", num(r.metric_coefficient)}, {"bias", num(r.bias)},
          {"points_mean", num(r.points_mean)}, {"points_max", num(r.points_max)},
          {"wall_time", r.wall_time}};
}

std::vector<std::string> report_tail(const TrialReport& r) {
  return {fmt(r.trials), fmt(r.mse), fmt(r.mse_stderr), fmt(r.mse_theory),
          fmt(r.bits_mean), fmt(r.bits_bound), fmt(r.eps_used), fmt(r.sigma),
          fmt(r.central.eps), fmt(r.central.delta), fmt(r.local.eps),
          fmt(r.local.delta), r.local_route, fmt(r.metric_coefficient), fmt(r.bias),
          fmt(r.points_mean), fmt(r.points_max)};
}

int run_dme_cmd(const Common& c) {
  const json cfg = load_config(c.config);
  check_keys(cfg, {"n", "d", "C", "eps", "delta", "alpha", "chunk_dim", "bit_budget",
                   "trials", "seed", "mechanisms"});
  DmeConfig base;
  base.n = get<std::size_t>(cfg, "n", base.n);
  base.d = get<std::size_t>(cfg, "d", base.d);
  base.C = get<double>(cfg, "C", base.C);
  base.delta = get<double>(cfg, "delta", base.delta);
  base.alpha = get<double>(cfg, "alpha", base.alpha);
  base.chunk_dim = get<std::size_t>(cfg, "chunk_dim", base.chunk_dim);
  base.trials = get<uint64_t>(cfg, "trials", base.trials);
  base.seed = c.seed.value_or(get<uint64_t>(cfg, "seed", base.seed));
  const auto mechs = get_list<std::string>(cfg, "mechanisms", {"ppr_gaussian", "csgm"});
  const auto epss = get_list<double>(cfg, "eps", {base.eps});
  const auto budgets = get_list<double>(cfg, "bit_budget", {base.bit_budget});

  std::vector<DmeConfig> grid;
  for (const auto& m : mechs)
    for (double e : epss)
      for (double b : budgets) {
        DmeConfig g = base;
        g.mechanism = parse_mechanism(m);
        if (g.mechanism != DmeMechanism::ppr_gaussian && g.mechanism != DmeMechanism::csgm)
          throw std::invalid_argument("dme: mechanism must be ppr_gaussian or csgm");
        g.eps = e;
        g.bit_budget = b;
        validate(g);
        grid.push_back(g);
      }

  Output out(c);
  CsvWriter csv(out.csv(), kReportHeader);
  json sum = summary_head("dme", base.seed, cfg);
  for (const auto& g : grid) {
    const TrialReport r = run_dme(g);
    std::vector<std::string> row = {"dme", fmt(g.seed), to_string(g.mechanism), fmt(uint64_t{g.n}),
                                    fmt(uint64_t{g.d}), fmt(g.C), fmt(g.eps), fmt(g.delta),
                                    fmt(g.alpha), fmt(uint64_t{g.chunk_dim}), fmt(g.bit_budget)};
    for (auto& s : report_tail(r)) row.push_back(std::move(s));
    csv.write(row);
    json j = report_json(r);
    j["eps"] = g.eps;
    j["bit_budget"] = num(g.bit_budget);
    sum["results"].push_back(j);
  }
  out.summary(sum);
  return 0;
}

int run_metric_cmd(const Common& c) {
  const json cfg = load_config(c.config);
  check_keys(cfg, {"d", "C", "eps", "alpha", "bits", "x_radius", "trials", "seed"});
  MetricConfig base;
  base.d = get<std::size_t>(cfg, "d", base.d);
  base.C = get<double>(cfg, "C", base.C);
  base.alpha = get<double>(cfg, "alpha", base.alpha);
  base.x_radius = get<double>(cfg, "x_radius", base.x_radius);
  base.trials = get<uint64_t>(cfg, "trials", base.trials);
  base.seed = c.seed.value_or(get<uint64_t>(cfg, "seed", base.seed));
  const auto epss = get_list<double>(cfg, "eps", {base.eps});
  const auto bitss = get_list<double>(cfg, "bits", {base.bits});

  std::vector<MetricConfig> grid;
  for (double e : epss)
    for (double b : bitss) {
      MetricConfig g = base;
      g.eps = e;
      g.bits = b;
      validate(g);
      grid.push_back(g);
    }

  Output out(c);
  CsvWriter csv(out.csv(), kReportHeader);
  json sum = summary_head("metric", base.seed, cfg);
  for (const auto& g : grid) {
    const auto [ppr, disc] = run_metric_experiment(g);
    for (const TrialReport* r : {&ppr, &disc}) {
      std::vector<std::string> row = {"metric", fmt(g.seed), r->mechanism, "", fmt(uint64_t{g.d}),
                                      fmt(g.C), fmt(g.eps), "", fmt(g.alpha), "", fmt(g.bits)};
      for (auto& s : report_tail(*r)) row.push_back(std::move(s));
      csv.write(row);
      json j = report_json(*r);
      j["eps"] = g.eps;
      j["bits"] = g.bits;
      sum["results"].push_back(j);
    }
  }
  out.summary(sum);
  return 0;
}

// ---- adn ----

int run_adn_cmd(const Common& c) {
  const json cfg = load_config(c.config);
  check_keys(cfg, {"presets", "noise", "L", "trials", "mc_samples", "seed"});
  const auto presets = get_list<std::string>(cfg, "presets", adn_preset_names());
  const double noise = get<double>(cfg, "noise", 0.1);
  const auto L = get<std::size_t>(cfg, "L", 1);
  const auto trials = get<uint64_t>(cfg, "trials", 100000);
  const auto mc = get<uint64_t>(cfg, "mc_samples", 0);
  const uint64_t seed = c.seed.value_or(get<uint64_t>(cfg, "seed", 1));
  if (trials == 0) throw std::invalid_argument("adn: trials must be >= 1");
  std::vector<AdnPreset> built;
  for (const auto& p : presets) built.push_back(adn_preset(p, noise, L));

  Output out(c);
  CsvWriter csv(out.csv(), {"experiment", "seed", "preset", "noise", "L", "trials",
                            "mc_samples", "failure", "failure_stderr", "error_set_hits",
                            "misdecodes", "bound", "bound_stderr", "corollary"});
  json sum = summary_head("adn", seed, cfg);
  for (std::size_t i = 0; i < built.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const AdnScheme scheme(built[i].problem);
    const AdnRunResult run = scheme.run(trials, seed);
    const BoundResult bound = scheme.bound_total(mc, seed);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    csv.write({"adn", fmt(seed), presets[i], fmt(noise), fmt(uint64_t{L}), fmt(trials),
               fmt(mc), fmt(run.failure.mean), fmt(run.failure.stderr_),
               fmt(run.error_set_hits), fmt(run.misdecodes), fmt(bound.value),
               fmt(bound.stderr_), fmt(built[i].corollary)});
    sum["results"].push_back({{"preset", presets[i]},
                              {"failure", run.failure.mean},
                              {"failure_stderr", run.failure.stderr_},
                              {"bound", bound.value},
                              {"bound_stderr", bound.stderr_},
                              {"corollary", num(built[i].corollary)},
                              {"wall_time", secs}});
  }
  out.summary(sum);
  return 0;
}

// ---- secrecy ----

int run_secrecy_cmd(const Common& c) {
  const json cfg = load_config(c.config);
  check_keys(cfg, {"kinds", "instances", "trials", "cover_eps", "seed"});
  const auto kinds = get_list<std::string>(cfg, "kinds", {"hiding", "wiretap"});
  const auto instances = get<uint64_t>(cfg, "instances", 20);
  const auto trials = get<uint64_t>(cfg, "trials", 2000);
  const double cover_eps = get<double>(cfg, "cover_eps", 0.05);
  const uint64_t seed = c.seed.value_or(get<uint64_t>(cfg, "seed", 1));
  for (const auto& k : kinds)
    if (k != "hiding" && k != "wiretap")
      throw std::invalid_argument("secrecy: unknown kind '" + k + "'");
  if (trials == 0) throw std::invalid_argument("secrecy: trials must be >= 1");
  if (!(cover_eps > 0.0)) throw std::invalid_argument("secrecy: cover_eps must be > 0");

  Output out(c);
  CsvWriter csv(out.csv(), {"experiment", "seed", "kind", "instance", "trials", "error",
                            "error_stderr", "tv", "tv_stderr", "bound", "cover_a",
                            "cover_b"});
  json sum = summary_head("secrecy", seed, cfg);
  for (const auto& kind : kinds) {
    for (uint64_t i = 0; i < instances; ++i) {
      const uint64_t inst_seed = derive(seed, i);
      if (kind == "hiding") {
        const HidingSpec spec = random_hiding_instance(inst_seed);
        const HidingRun run = hiding_run_worst(spec, trials, inst_seed);
        const double bound = hiding_bound(spec, cover_eps);
        const auto cover = greedy_cover(spec.attacks, cover_eps).size();
        csv.write({"secrecy", fmt(seed), kind, fmt(i), fmt(trials), fmt(run.failure.mean),
                   fmt(run.failure.stderr_), "", "", fmt(bound), fmt(uint64_t{cover}), ""});
        sum["results"].push_back({{"kind", kind}, {"instance", i},
                                  {"failure", run.failure.mean}, {"bound", bound}});
      } else {
        const WiretapSpec spec = random_wiretap_instance(inst_seed);
        const WiretapRun run = wiretap_run_worst(spec, trials, inst_seed);
        const WiretapBound bound = wiretap_bound(spec);
        csv.write({"secrecy", fmt(seed), kind, fmt(i), fmt(trials), fmt(run.error.mean),
                   fmt(run.error.stderr_), fmt(run.tv.mean), fmt(run.tv.stderr_),
                   fmt(bound.total), fmt(uint64_t{bound.cover_legit}),
                   fmt(uint64_t{bound.cover_eaves})});
        sum["results"].push_back({{"kind", kind}, {"instance", i},
                                  {"error", run.error.mean}, {"tv", run.tv.mean},
                                  {"error_bound", bound.error_term},
                                  {"secrecy_bound", bound.secrecy_term},
                                  {"bound", bound.total}});
      }
    }
  }
  out.summary(sum);
  return 0;
}

// ---- ppr-bench ----

struct BenchFlags {
  std::vector<double> alpha;
  std::vector<std::size_t> chunk;
  std::vector<double> eps;
  std::optional<uint64_t> reps;
};

int run_bench_cmd(const Common& c, const BenchFlags& f) {
  const json cfg = load_config(c.config);
  check_keys(cfg, {"n", "d", "C", "delta", "eps", "alpha", "chunk_dim", "reps", "seed"});
  DmeConfig base;
  base.n = get<std::size_t>(cfg, "n", base.n);
  base.d = get<std::size_t>(cfg, "d", base.d);
  base.C = get<double>(cfg, "C", base.C);
  base.delta = get<double>(cfg, "delta", base.delta);
  base.seed = c.seed.value_or(get<uint64_t>(cfg, "seed", base.seed));
  const auto alphas = !f.alpha.empty() ? f.alpha : get_list<double>(cfg, "alpha", {2.0});
  const auto chunks = !f.chunk.empty() ? f.chunk : get_list<std::size_t>(cfg, "chunk_dim", {4});
  const auto epss = !f.eps.empty() ? f.eps : get_list<double>(cfg, "eps", {1.0});
  const uint64_t reps = f.reps.value_or(get<uint64_t>(cfg, "reps", 200));

  std::vector<DmeConfig> grid;
  for (double e : epss)
    for (std::size_t k : chunks)
      for (double a : alphas) {
        DmeConfig g = base;
        g.eps = e;
        g.chunk_dim = k;
        g.alpha = a;
        validate(g);
        grid.push_back(g);
      }

  Output out(c);
  CsvWriter csv(out.csv(), {"experiment", "seed", "eps", "chunk_dim", "alpha", "reps",
                            "time_mean", "time_stderr", "points_mean", "log2_r_star"});
  json sum = summary_head("ppr-bench", base.seed, cfg);
  for (const auto& g : grid) {
    const PprBenchRow r = ppr_bench(g, reps);
    csv.write({"ppr-bench", fmt(g.seed), fmt(r.eps), fmt(uint64_t{r.chunk_dim}), fmt(r.alpha),
               fmt(r.reps), fmt(r.time_mean), fmt(r.time_stderr), fmt(r.points_mean),
               fmt(r.log2_r_star)});
    sum["results"].push_back({{"eps", r.eps}, {"chunk_dim", r.chunk_dim}, {"alpha", r.alpha},
                              {"time_mean", r.time_mean}, {"points_mean", r.points_mean}});
  }
  out.summary(sum);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-shot coding, PPR and private mean estimation experiments"};
  app.require_subcommand(1);

  Common common;
  BenchFlags bench;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON config file");
    sub->add_option("--out", common.out, "CSV output path (default stdout)");
    sub->add_option("--summary", common.summary, "JSON summary path (default <out>.json)");
    sub->add_option("--seed", common.seed, "Master seed, overrides the config");
  };
  auto* dme = app.add_subcommand("dme", "Distributed mean estimation grid");
  auto* metric = app.add_subcommand("metric", "Metric privacy: PPR-Laplace vs discrete Laplace");
  auto* adn = app.add_subcommand("adn", "One-shot network coding presets");
  auto* secrecy = app.add_subcommand("secrecy", "Information hiding and wiretap instances");
  auto* pb = app.add_subcommand("ppr-bench", "PPR encoder timing");
  for (auto* s : {dme, metric, adn, secrecy, pb}) add_common(s);
  pb->add_option("--alpha", bench.alpha, "PPR alpha (repeatable)");
  pb->add_option("--chunk", bench.chunk, "Chunk dimension (repeatable)");
  pb->add_option("--eps", bench.eps, "Privacy level (repeatable)");
  pb->add_option("--reps", bench.reps, "Encodes per row");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (dme->parsed()) return run_dme_cmd(common);
    if (metric->parsed()) return run_metric_cmd(common);
    if (adn->parsed()) return run_adn_cmd(common);
    if (secrecy->parsed()) return run_secrecy_cmd(common);
    if (pb->parsed()) return run_bench_cmd(common, bench);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
