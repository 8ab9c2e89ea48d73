// pitos: command-line front end for the PITOS library.
//
// Subcommands: test, pairs, sample, scenarios, power, calibrate, study.
// Run `pitos <subcommand> --help` for flags.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pitos/classic_tests.hpp"
#include "pitos/distributions.hpp"
#include "pitos/harness.hpp"
#include "pitos/pitos.hpp"
#include "pitos/quasirandom.hpp"
#include "pitos/rosenblatt.hpp"

namespace {

using nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) { return pitos::format_number(v); }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// One value per line; '#' starts a comment; blank lines are skipped.
std::vector<double> read_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError("cannot read input file '" + path + "'");
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string text = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (text.empty()) continue;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
      throw CliError(path + ": line " + std::to_string(line_no) + ": cannot parse '" + text + "' as a number");
    }
    values.push_back(v);
  }
  if (values.empty()) throw CliError(path + ": no values");
  return values;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CliError("cannot write '" + path + "'");
  return out;
}

void write_sidecar(const std::string& out_path, const ordered_json& config) {
  auto os = open_out(out_path + ".json");
  os << config.dump(2) << '\n';
}

ordered_json params_json(const std::vector<std::pair<std::string, double>>& params) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : params) j[k] = v;
  return j;
}

std::optional<pitos::BetaParams> parse_warp(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw CliError("--warp expects 'a,b'");
  const double a = pitos::detail::parse_real(text.substr(0, comma), "--warp");
  const double b = pitos::detail::parse_real(text.substr(comma + 1), "--warp");
  if (!(a > 0.0 && b > 0.0)) throw CliError("--warp shapes must be positive");
  return pitos::BetaParams{a, b};
}

pitos::PairSequence pairs_for(std::size_t n, const std::optional<pitos::BetaParams>& warp) {
  if (!warp) return pitos::generate_pairs(n);
  std::cerr << "warning: non-default pair sequence (Beta(" << num(warp->a) << "," << num(warp->b)
            << ") warp); the 1.15 correction was calibrated for the default Beta(0.7,0.7) warp only\n";
  const pitos::BetaParams w = *warp;
  return pitos::generate_pairs(n, [w](double u) { return pitos::beta_inv_cdf(u, w); });
}

// Zoo name or scenario name (one draw from the scenario).
pitos::DistributionSpec resolve_distribution(const std::string& name, std::uint64_t seed) {
  if (auto scenario = pitos::parse_scenario(name)) {
    return pitos::draw_scenario_distribution(pitos::ScenarioSampler{*scenario, seed});
  }
  return pitos::zoo_lookup(name);
}

struct Global {
  unsigned threads = 1;
  std::string cache_dir;
};

pitos::HarnessConfig harness_config(const Global& g, std::size_t null_b, bool random_pairs) {
  pitos::HarnessConfig cfg;
  cfg.threads = g.threads;
  cfg.null_replicates = null_b;
  cfg.random_pairs = random_pairs;
  if (!g.cache_dir.empty()) cfg.cache = pitos::NullCache(g.cache_dir);
  if (random_pairs) {
    std::cerr << "warning: random pair sequence in use; the 1.15 correction was calibrated for the default "
                 "Halton pairs only\n";
  }
  return cfg;
}

// ---------------------------------------------------------------------------

struct TestArgs {
  std::string input;
  std::string method = "pitos";
  std::string null_cdf;
  std::string emit_detail;
  std::size_t null_b = 20'000;
  std::uint64_t seed = 1;
  std::string warp;
};

int run_test(const TestArgs& a, const Global& g) {
  std::vector<double> values = read_values(a.input);
  if (!a.null_cdf.empty()) {
    const pitos::DistributionSpec spec = pitos::zoo_lookup(a.null_cdf);
    pitos::Rng rng(pitos::derive_stream(a.seed, pitos::tag("rosenblatt")));
    values = pitos::probability_integral_transform(values, spec, rng);
  }
  const pitos::OrderedSample sample(std::move(values));
  const std::string method = pitos::canonical_test_name(a.method);

  ordered_json out;
  if (method == "pitos") {
    pitos::PitosOptions opts;
    opts.keep_detail = !a.emit_detail.empty();
    const pitos::PitosTest test(pairs_for(sample.size(), parse_warp(a.warp)), opts);
    const pitos::TestVerdict v = test.evaluate(sample);
    out["test"] = v.test_name;
    out["n"] = v.n;
    out["m"] = v.m;
    out["statistic"] = v.statistic;
    out["p_value"] = *v.p_uncorrected;
    out["p_star"] = v.p_value;
    out["default_pairs"] = test.pairs().is_default;
    if (!a.emit_detail.empty()) {
      auto os = open_out(a.emit_detail);
      os << "k,i,j,p\n";
      std::size_t k = 0;
      for (const auto& d : *v.detail) os << ++k << ',' << d.i << ',' << d.j << ',' << num(d.p) << '\n';
    }
  } else {
    if (!a.warp.empty()) throw CliError("--warp applies to --method pitos only");
    if (!a.emit_detail.empty()) throw CliError("--emit-detail applies to --method pitos only");
    pitos::NullCache cache = g.cache_dir.empty() ? pitos::NullCache() : pitos::NullCache(g.cache_dir);
    const pitos::EmpiricalNull null = cache.load_or_build(method, sample.size(), a.null_b, a.seed, g.threads);
    const pitos::TestVerdict v = pitos::classic_test(sample, null);
    out["test"] = v.test_name;
    out["n"] = v.n;
    out["statistic"] = v.statistic;
    out["p_value"] = v.p_value;
    out["null_b"] = a.null_b;
    out["seed"] = a.seed;
  }
  if (!a.null_cdf.empty()) out["null_cdf"] = a.null_cdf;
  std::cout << out.dump() << '\n';
  return 0;
}

int run_pairs(std::size_t n, const std::string& warp) {
  const pitos::PairSequence seq = pairs_for(n, parse_warp(warp));
  std::ostringstream os;
  os << "k,i,j\n";
  for (std::size_t k = 0; k < seq.pairs.size(); ++k) os << k + 1 << ',' << seq.pairs[k].i << ',' << seq.pairs[k].j << '\n';
  std::cout << os.str();
  return 0;
}

int run_sample(const std::string& dist_name, std::size_t n, std::uint64_t seed, const std::string& out_path) {
  const pitos::DistributionSpec dist = pitos::zoo_lookup(dist_name);
  // Same stream as replicate 0 of a power run.
  pitos::Rng rng(pitos::derive_stream(seed, pitos::tag(dist.name), n, std::size_t{0}));
  std::ostringstream os;
  for (double v : dist.sample(rng, n)) os << num(v) << '\n';
  if (out_path.empty()) {
    std::cout << os.str();
  } else {
    auto f = open_out(out_path);
    f << os.str();
  }
  return 0;
}

int run_scenarios(const std::string& name, std::size_t count, std::uint64_t seed, const std::string& out_path) {
  const auto scenario = pitos::parse_scenario(name);
  if (!scenario) throw CliError("unknown scenario '" + name + "'");
  const std::uint64_t scenario_tag = pitos::tag(name);
  std::ostringstream os;
  for (std::size_t d = 0; d < count; ++d) {
    // Same draws as `study` with the same seed.
    pitos::Rng rng(pitos::derive_stream(seed, scenario_tag, d, pitos::tag("draw")));
    const pitos::DistributionSpec dist = pitos::draw_scenario_distribution(*scenario, rng);
    if (d == 0) {
      os << "index,scenario,distribution";
      for (const auto& [k, v] : dist.parameters) os << ',' << k;
      os << '\n';
    }
    os << d << ',' << name << ',' << '"' << dist.name << '"';
    for (const auto& [k, v] : dist.parameters) os << ',' << num(v);
    os << '\n';
  }
  if (out_path.empty()) {
    std::cout << os.str();
  } else {
    auto f = open_out(out_path);
    f << os.str();
  }
  return 0;
}

struct PowerArgs {
  std::string dist;
  std::vector<std::string> tests = pitos::default_test_roster();
  std::vector<std::size_t> n_grid;
  double alpha = 0.05;
  std::size_t reps = 2'000;
  std::uint64_t seed = 1;
  std::string out;
  std::size_t null_b = 20'000;
  bool random_pairs = false;
};

int run_power(const PowerArgs& a, const Global& g) {
  const pitos::HarnessConfig cfg = harness_config(g, a.null_b, a.random_pairs);
  const pitos::DistributionSpec dist = resolve_distribution(a.dist, a.seed);
  const auto reports = pitos::power_curve(dist, a.tests, a.n_grid, a.alpha, a.reps, a.seed, cfg);

  auto os = open_out(a.out);
  os << "distribution,test,n,alpha,replicates,rejections,failures,rejection_rate,mc_std_err\n";
  for (const auto& r : reports) {
    os << '"' << r.distribution << "\"," << r.test << ',' << r.n << ',' << num(r.alpha) << ',' << r.replicates << ','
       << r.rejections << ',' << r.failures << ',' << num(r.rejection_rate) << ',' << num(r.mc_std_err) << '\n';
  }

  ordered_json side;
  side["command"] = "power";
  side["version"] = kVersion;
  side["dist"] = a.dist;
  side["distribution"] = dist.name;
  side["parameters"] = params_json(dist.parameters);
  side["tests"] = a.tests;
  side["n"] = a.n_grid;
  side["alpha"] = a.alpha;
  side["replicates"] = a.reps;
  side["seed"] = a.seed;
  side["null_b"] = a.null_b;
  side["null_seed"] = a.seed;
  side["random_pairs"] = a.random_pairs;
  side["columns"] = {"distribution", "test", "n", "alpha", "replicates", "rejections", "failures", "rejection_rate",
                     "mc_std_err"};
  write_sidecar(a.out, side);
  return 0;
}

struct CalibrateArgs {
  std::string test = "pitos";
  std::size_t n = 30;
  std::size_t reps = 10'000;
  std::uint64_t seed = 1;
  std::string out;
  std::vector<double> grid;
  std::size_t null_b = 20'000;
};

std::vector<double> default_calibration_grid() {
  std::vector<double> g = {0.001, 0.005};
  for (int k = 1; k <= 10; ++k) g.push_back(0.01 * k);
  for (int k = 2; k <= 10; ++k) g.push_back(0.1 * k);
  return g;
}

int run_calibrate(const CalibrateArgs& a, const Global& g) {
  const pitos::HarnessConfig cfg = harness_config(g, a.null_b, false);
  const std::vector<double> grid = a.grid.empty() ? default_calibration_grid() : a.grid;
  const auto points = pitos::null_pvalue_cdf(a.test, a.n, a.reps, a.seed, grid, cfg);

  auto os = open_out(a.out);
  os << "threshold,cdf,cdf_uncorrected\n";
  for (const auto& p : points) {
    os << num(p.threshold) << ',' << num(p.cdf) << ',';
    if (p.cdf_uncorrected) os << num(*p.cdf_uncorrected);
    os << '\n';
  }

  ordered_json side;
  side["command"] = "calibrate";
  side["version"] = kVersion;
  side["test"] = pitos::test_label(a.test);
  side["n"] = a.n;
  side["replicates"] = a.reps;
  side["seed"] = a.seed;
  side["grid"] = grid;
  side["null_b"] = a.null_b;
  side["null_seed"] = a.seed;
  side["columns"] = {"threshold", "cdf", "cdf_uncorrected"};
  write_sidecar(a.out, side);
  return 0;
}

struct StudyArgs {
  std::string scenario;
  std::size_t dists = 100;
  std::size_t reps = 500;
  std::size_t n = 100;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::string out;
  std::string powers_out;
  std::size_t null_b = 20'000;
};

int run_study(const StudyArgs& a, const Global& g) {
  const auto scenario = pitos::parse_scenario(a.scenario);
  if (!scenario) throw CliError("unknown scenario '" + a.scenario + "'");
  const pitos::HarnessConfig cfg = harness_config(g, a.null_b, false);
  const pitos::RankSummary s = pitos::scenario_study(*scenario, a.dists, a.reps, a.n, a.alpha, a.seed, cfg);
  const std::size_t k = s.tests.size();

  auto os = open_out(a.out);
  os << "scenario,test,average_power,mean_rank";
  for (std::size_t r = 1; r <= k; ++r) os << ",rank_" << r;
  os << '\n';
  for (std::size_t t = 0; t < k; ++t) {
    os << s.scenario << ',' << s.tests[t] << ',' << num(s.average_power[t]) << ',' << num(s.mean_rank[t]);
    for (double f : s.rank_frequency[t]) os << ',' << num(f);
    os << '\n';
  }

  if (!a.powers_out.empty()) {
    auto ps = open_out(a.powers_out);
    ps << "index,distribution";
    for (const auto& t : s.tests) ps << ',' << t;
    ps << '\n';
    for (std::size_t d = 0; d < s.distributions.size(); ++d) {
      ps << d << ",\"" << s.distributions[d].name << '"';
      for (double p : s.power[d]) ps << ',' << num(p);
      ps << '\n';
    }
  }

  ordered_json side;
  side["command"] = "study";
  side["version"] = kVersion;
  side["scenario"] = s.scenario;
  side["distributions"] = a.dists;
  side["replicates_per_distribution"] = a.reps;
  side["n"] = a.n;
  side["alpha"] = a.alpha;
  side["seed"] = a.seed;
  side["null_b"] = a.null_b;
  side["null_seed"] = a.seed;
  side["tests"] = s.tests;
  side["powers_out"] = a.powers_out;
  write_sidecar(a.out, side);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PITOS goodness-of-fit test, benchmark tests and simulation harness"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Global g;
  app.add_option("--threads", g.threads, "Worker threads for simulations (0 = all cores)")
      ->capture_default_str();
  app.add_option("--cache-dir", g.cache_dir, "Directory for cached empirical nulls")->envname("PITOS_CACHE_DIR");

  TestArgs test_args;
  auto* test = app.add_subcommand("test", "Test a sample against Uniform(0,1) (or a named null)");
  test->add_option("--input", test_args.input, "File with one value per line ('#' comments allowed)")->required();
  test->add_option("--method", test_args.method, "Test to run")
      ->check(CLI::IsMember({"pitos", "ad", "nb", "ks", "cvm"}, CLI::ignore_case))
      ->capture_default_str();
  test->add_option("--null-cdf", test_args.null_cdf,
                   "Zoo distribution to map the data through first (randomized PIT if discrete)");
  test->add_option("--emit-detail", test_args.emit_detail, "Write per-pair p-values (k,i,j,p) to this CSV");
  test->add_option("--null-b", test_args.null_b, "Empirical null size for ad/nb/ks/cvm")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  test->add_option("--seed", test_args.seed, "Seed for empirical nulls and randomized PIT")->capture_default_str();
  test->add_option("--warp", test_args.warp, "Use a Beta(a,b) warp 'a,b' for the pairs (non-default)");

  std::size_t pairs_n = 0;
  std::string pairs_warp;
  auto* pairs = app.add_subcommand("pairs", "Print the PITOS pair sequence as CSV (k,i,j)");
  pairs->add_option("--n", pairs_n, "Sample size")->required()->check(CLI::PositiveNumber);
  pairs->add_option("--warp", pairs_warp, "Use a Beta(a,b) warp 'a,b' (non-default)");

  std::string sample_dist;
  std::size_t sample_n = 0;
  std::uint64_t sample_seed = 1;
  std::string sample_out;
  auto* sample = app.add_subcommand("sample", "Draw a sample from a zoo distribution, one value per line");
  sample->add_option("--dist", sample_dist, "Distribution, e.g. uniform, beta(1.2,0.8), bump(0.5,0.001,0.08)")
      ->required();
  sample->add_option("--n", sample_n, "Sample size")->required()->check(CLI::PositiveNumber);
  sample->add_option("--seed", sample_seed, "Seed")->capture_default_str();
  sample->add_option("--out", sample_out, "Output file (default: standard output)");

  std::string scen_name;
  std::size_t scen_count = 1;
  std::uint64_t scen_seed = 1;
  std::string scen_out;
  auto* scen = app.add_subcommand("scenarios", "Draw distributions from a randomized scenario; CSV of parameters");
  scen->add_option("--name", scen_name, "Scenario name")->required();
  scen->add_option("--count", scen_count, "Number of draws")->check(CLI::PositiveNumber)->capture_default_str();
  scen->add_option("--seed", scen_seed, "Seed")->capture_default_str();
  scen->add_option("--out", scen_out, "Output file (default: standard output)");

  PowerArgs power_args;
  auto* power = app.add_subcommand("power", "Estimate power on a distribution over a grid of n");
  power->add_option("--dist", power_args.dist, "Zoo distribution or scenario name (one draw)")->required();
  power->add_option("--tests", power_args.tests, "Comma-separated tests (pitos,ad,nb,ks,cvm,lrt)")
      ->delimiter(',')
      ->capture_default_str();
  power->add_option("--n", power_args.n_grid, "Comma-separated sample sizes")
      ->delimiter(',')
      ->required()
      ->check(CLI::PositiveNumber);
  power->add_option("--alpha", power_args.alpha, "Level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  power->add_option("--reps", power_args.reps, "Replicates per n")->check(CLI::PositiveNumber)->capture_default_str();
  power->add_option("--seed", power_args.seed, "Seed")->capture_default_str();
  power->add_option("--out", power_args.out, "Output CSV (a .json sidecar is written next to it)")->required();
  power->add_option("--null-b", power_args.null_b, "Empirical null size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  power->add_flag("--random-pairs", power_args.random_pairs, "Experiment: random instead of Halton pairs");

  CalibrateArgs cal_args;
  std::string cal_grid;
  auto* cal = app.add_subcommand("calibrate", "Empirical CDF of null p-values");
  cal->add_option("--test", cal_args.test, "Test")
      ->check(CLI::IsMember({"pitos", "ad", "nb", "ks", "cvm"}, CLI::ignore_case))
      ->capture_default_str();
  cal->add_option("--n", cal_args.n, "Sample size")->required()->check(CLI::PositiveNumber);
  cal->add_option("--reps", cal_args.reps, "Null replicates")->check(CLI::PositiveNumber)->capture_default_str();
  cal->add_option("--seed", cal_args.seed, "Seed")->capture_default_str();
  cal->add_option("--out", cal_args.out, "Output CSV (a .json sidecar is written next to it)")->required();
  cal->add_option("--grid", cal_args.grid, "Comma-separated thresholds in [0,1]")->delimiter(',');
  cal->add_option("--null-b", cal_args.null_b, "Empirical null size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  StudyArgs study_args;
  auto* study = app.add_subcommand("study", "Rank tests by power over random draws from a scenario");
  study->add_option("--scenario", study_args.scenario, "Scenario name")->required();
  study->add_option("--dists", study_args.dists, "Number of distributions")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  study->add_option("--reps", study_args.reps, "Replicates per distribution")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  study->add_option("--n", study_args.n, "Sample size")->check(CLI::PositiveNumber)->capture_default_str();
  study->add_option("--alpha", study_args.alpha, "Level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  study->add_option("--seed", study_args.seed, "Seed")->capture_default_str();
  study->add_option("--out", study_args.out, "Summary CSV (a .json sidecar is written next to it)")->required();
  study->add_option("--powers-out", study_args.powers_out, "Optional CSV of per-distribution powers");
  study->add_option("--null-b", study_args.null_b, "Empirical null size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*test) return run_test(test_args, g);
    if (*pairs) return run_pairs(pairs_n, pairs_warp);
    if (*sample) return run_sample(sample_dist, sample_n, sample_seed, sample_out);
    if (*scen) return run_scenarios(scen_name, scen_count, scen_seed, scen_out);
    if (*power) return run_power(power_args, g);
    if (*cal) return run_calibrate(cal_args, g);
    if (*study) return run_study(study_args, g);
  } catch (const std::exception& e) {
    std::cerr << "pitos: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
