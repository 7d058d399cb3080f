// lcband: confidence bands for log-concave densities.
//
//   lcband band --input data.txt --output band.json
//   lcband simulate --dist gaussian,uniform --n 100 --reps 200 --output study.json
//   lcband selftest
//
// Exit codes: 0 ok, 1 selftest failure, 2 bad input / spec / I/O,
// 3 too few samples, 4 band written but some points did not converge.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "lcband/lcband.hpp"
#include "lcband/oracles.hpp"

namespace fs = std::filesystem;
using namespace lcband;

namespace {

constexpr int kOk = 0;
constexpr int kSelftestFailed = 1;
constexpr int kBadInput = 2;
constexpr int kTooFewSamples = 3;
constexpr int kNotConverged = 4;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  double alpha = 0.1;
  double subset_frac = 1.0;
  double tau0 = CcpConfig{}.tau0;
  double kappa = CcpConfig{}.kappa;
  double tau_max = CcpConfig{}.tau_max;
  std::size_t kmax = CcpConfig{}.k_max;
  std::string init = "data";
  std::uint64_t seed = 1;
  std::string mode = "guaranteed";
  std::size_t threads = 1;

  CcpConfig ccp() const {
    CcpConfig c;
    c.tau0 = tau0;
    c.kappa = kappa;
    c.tau_max = tau_max;
    c.k_max = kmax;
    c.seed = seed;
    c.init = init == "random" ? InitStrategy::Random : InitStrategy::Data;
    return c;
  }
};

std::vector<double> read_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file '" + path + "'");
  std::vector<double> x;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const char* b = line.data() + first;
    const char* e = line.data() + last + 1;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e || !std::isfinite(v)) {
      std::ostringstream os;
      os << path << ":" << lineno << ": cannot parse '" << std::string(b, e) << "' as a number";
      throw InputError(os.str());
    }
    x.push_back(v);
  }
  if (in.bad()) throw InputError("error reading '" + path + "'");
  return x;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write '" + p.string() + "'");
  out << s;
  if (!out) throw InputError("error writing '" + p.string() + "'");
}

std::string band_csv(const ConfidenceBand& b, std::size_t points) {
  const double lo = b.knots.front();
  const double hi = b.knots.back();
  const double pad = 0.1 * (hi - lo);
  std::ostringstream os;
  os << "x,lower_density,upper_density,lower_log,upper_log\n";
  for (std::size_t j = 0; j < points; ++j) {
    const double t = points == 1 ? lo
                                 : (lo - pad) + (hi - lo + 2.0 * pad) * static_cast<double>(j) /
                                                    static_cast<double>(points - 1);
    const auto d = eval_density_band(b, t);
    const double ll = eval_lower(b, t);
    const double ul = b.mode == BandMode::Guaranteed ? eval_upper(b, t) : std::log(d.upper);
    os << fmt(t) << ',' << fmt(d.lower) << ',' << fmt(d.upper) << ',' << fmt(ll) << ',' << fmt(ul)
       << '\n';
  }
  return os.str();
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--alpha", o.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--subset-frac", o.subset_frac, "Fraction of design points solved");
  cmd->add_option("--tau0", o.tau0, "Initial penalty");
  cmd->add_option("--kappa", o.kappa, "Penalty growth factor");
  cmd->add_option("--tau-max", o.tau_max, "Penalty cap");
  cmd->add_option("--kmax", o.kmax, "Maximum iterations per point");
  cmd->add_option("--init", o.init, "Starting point")->check(CLI::IsMember({"data", "random"}));
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--mode", o.mode, "Upper band mode")
      ->check(CLI::IsMember({"guaranteed", "interpolated"}));
  cmd->add_option("--threads", o.threads, "Worker threads (output does not depend on it)")
      ->check(CLI::PositiveNumber);
}

int cmd_band(const CommonOptions& o, const std::string& input, const std::string& output,
             std::size_t grid, double jitter) {
  auto x = read_samples(input);
  if (jitter > 0.0) {
    CounterRng rng(derive_key(o.seed, {0x6a}));
    std::uniform_real_distribution<double> u(-jitter, jitter);
    for (auto& v : x) v += u(rng);
  }
  BandOptions opts;
  opts.alpha = o.alpha;
  opts.subset_frac = o.subset_frac;
  opts.ccp = o.ccp();
  opts.mode = band_mode_from_string(o.mode);
  opts.threads = o.threads;
  const auto res = compute_band(x, opts);

  auto j = band_to_json(res.band);
  auto failed = nlohmann::json::array();
  for (std::size_t q = 0; q < res.intervals.indices.size(); ++q) {
    if (res.intervals.lo_diag[q].status != PointStatus::Converged ||
        res.intervals.hi_diag[q].status != PointStatus::Converged) {
      failed.push_back(res.intervals.indices[q]);
    }
  }
  j["failed_points"] = failed;

  const fs::path json_path(output);
  fs::path csv_path = json_path;
  csv_path.replace_extension(".csv");
  write_text(json_path, j.dump(2) + "\n");
  write_text(csv_path, band_csv(res.band, grid));

  if (res.band.partial) {
    std::cerr << "warning: " << failed.size()
              << " design point(s) did not converge; band marked partial\n";
    return kNotConverged;
  }
  std::cout << "band with " << res.band.m() << " knots written to " << json_path.string() << " and "
            << csv_path.string() << "\n";
  return kOk;
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

int cmd_simulate(const CommonOptions& o, const std::vector<std::string>& dists,
                 const std::vector<std::size_t>& ns, std::size_t reps, std::size_t grid,
                 const std::string& output) {
  std::vector<StudySpec> specs;
  for (const auto& name : split_list(dists)) {
    for (std::size_t n : ns) {
      StudySpec s;
      s.distribution = distribution_from_string(name);
      s.n = n;
      s.reps = reps;
      s.alpha = o.alpha;
      s.subset_frac = o.subset_frac;
      s.seed = o.seed;
      s.grid_points = grid;
      s.mode = band_mode_from_string(o.mode);
      s.ccp = o.ccp();
      s.threads = o.threads;
      s.validate();
      specs.push_back(s);
    }
  }
  if (specs.empty()) throw DomainError("no distributions given");

  std::vector<StudyReport> reports;
  auto arr = nlohmann::json::array();
  for (const auto& s : specs) {
    reports.push_back(run_study(s));
    arr.push_back(report_to_json(reports.back()));
  }
  const std::string table = report_table(reports);
  std::cout << table;

  const fs::path json_path(output);
  fs::path txt_path = json_path;
  txt_path.replace_extension(".txt");
  write_text(json_path, nlohmann::json{{"studies", arr}}.dump(2) + "\n");
  write_text(txt_path, table);
  return kOk;
}

int cmd_selftest(std::uint64_t seed, bool full) {
  const std::size_t scale = full ? 1000 : 200;
  std::vector<oracle::CheckResult> checks;
  checks.push_back(oracle::check_sandwich(scale, seed));
  checks.push_back(oracle::check_gradients(scale, seed));
  checks.push_back(oracle::check_tangent_dominance(scale, seed));
  checks.push_back(oracle::check_lp_oracle(full ? 100 : 10, seed));
  checks.push_back(oracle::check_beta_functions(full ? 200 : 40, seed));
  checks.push_back(oracle::check_quantile_deviation(scale, seed));
  bool ok = true;
  for (const auto& c : checks) {
    std::cout << oracle::summarize(c) << "\n";
    ok = ok && c.passed();
  }
  std::cout << (ok ? "selftest passed" : "selftest FAILED") << "\n";
  return ok ? kOk : kSelftestFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Confidence bands for log-concave densities"};
  app.require_subcommand(1);

  CommonOptions band_opts;
  std::string input;
  std::string band_out = "band.json";
  std::size_t band_grid = 1000;
  double jitter = 0.0;
  auto* band = app.add_subcommand("band", "Compute a band from a sample file");
  add_common(band, band_opts);
  band->add_option("--input", input, "Sample file, one value per line, # comments")->required();
  band->add_option("--output", band_out, "Band JSON path; the CSV uses the same stem");
  band->add_option("--grid", band_grid, "Number of CSV evaluation points")->check(CLI::PositiveNumber);
  band->add_option("--jitter", jitter, "Add uniform noise of this half-width to break ties")
      ->check(CLI::NonNegativeNumber);

  CommonOptions sim_opts;
  sim_opts.subset_frac = 0.3;
  sim_opts.mode = "interpolated";
  std::vector<std::string> dists{"gaussian"};
  std::vector<std::size_t> ns{100};
  std::size_t reps = 200;
  std::size_t sim_grid = 10000;
  std::string sim_out = "study.json";
  auto* sim = app.add_subcommand("simulate", "Run a coverage study");
  add_common(sim, sim_opts);
  sim->add_option("--dist", dists, "gaussian, uniform, chisq, gamma (comma separated or repeated)");
  sim->add_option("--n", ns, "Sample size(s)");
  sim->add_option("--reps", reps, "Repetitions per study");
  sim->add_option("--grid", sim_grid, "Coverage-check grid points");
  sim->add_option("--output", sim_out, "Report JSON path; the table uses the same stem");

  std::uint64_t st_seed = 1;
  bool st_full = false;
  auto* st = app.add_subcommand("selftest", "Run the reference-oracle checks");
  st->add_option("--seed", st_seed, "Random seed");
  st->add_flag("--full", st_full, "Use the full trial counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  }

  try {
    if (band->parsed()) return cmd_band(band_opts, input, band_out, band_grid, jitter);
    if (sim->parsed()) return cmd_simulate(sim_opts, dists, ns, reps, sim_grid, sim_out);
    if (st->parsed()) return cmd_selftest(st_seed, st_full);
  } catch (const TooFewSamples& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kTooFewSamples;
  } catch (const DuplicateDesignPoint& e) {
    std::cerr << "error: " << e.what() << "\n"
              << "hint: the sample has ties; rerun with --jitter <half-width> to break them\n";
    return kBadInput;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
  return kBadInput;
}
