#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "relukit/errors.hpp"
#include "relukit/experiments.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size() || !std::isfinite(v)) throw relukit::PreconditionError("bad list entry '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw relukit::PreconditionError("empty list");
  return out;
}

// Writes to `path`, or stdout when it is empty or "-".
template <class F>
void emit(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw relukit::PreconditionError("cannot open '" + path + "' for writing");
  write(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit ReLU constructions and conditional class probability checks"};
  app.require_subcommand(1);

  double build_beta = 1.0, build_m = 10.0;
  std::string build_out;
  auto* build = app.add_subcommand("build", "Build the log network G and write it as JSON");
  build->add_option("--beta", build_beta, "Smoothness index")->required();
  build->add_option("--m", build_m, "Accuracy parameter M >= 2")->required();
  build->add_option("--out", build_out, "Output path")->required();

  std::string suite;
  relukit::SuiteOptions sopt;
  std::string verify_out;
  auto* verify = app.add_subcommand("verify", "Run a property suite; exit 0 iff no violations");
  verify->add_option("suite", suite, "Suite name")->required();
  verify->add_option("--seed", sopt.seed, "Random seed");
  verify->add_option("--beta", sopt.beta, "beta for the log-net suite");
  verify->add_option("--m", sopt.M, "M for the log-net suite");
  verify->add_option("--trials", sopt.trials, "Trials per fuzz configuration")->check(CLI::PositiveNumber);
  verify->add_option("--out", verify_out, "CSV output path (default stdout)");

  relukit::RateStudyConfig rcfg;
  std::string m_grid, rate_out;
  auto* rate = app.add_subcommand("rate-study", "KL risk of the softmax network against M");
  rate->add_option("--alpha", rcfg.alpha, "SVB index of the p_alpha family");
  rate->add_option("--beta", rcfg.beta, "Hoelder smoothness (at most 1)");
  rate->add_option("--k", rcfg.K, "Number of classes");
  rate->add_option("--m-grid", m_grid, "Comma-separated M values");
  rate->add_option("--seed", rcfg.seed, "Random seed");
  rate->add_option("--out", rate_out, "CSV output path (default stdout)");

  relukit::InfiniteRiskConfig icfg;
  std::string b_grid, inf_out;
  auto* inf = app.add_subcommand("infinite-risk", "Truncated KL risk of an interpolating estimator against B");
  inf->add_option("--b-grid", b_grid, "Comma-separated truncation levels");
  inf->add_option("--n", icfg.n, "Sample size")->check(CLI::PositiveNumber);
  inf->add_option("--d", icfg.d, "Input dimension")->check(CLI::PositiveNumber);
  inf->add_option("--seed", icfg.seed, "Random seed");
  inf->add_option("--out", inf_out, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*build) {
      const auto s = relukit::build_and_save(build_beta, build_m, build_out);
      std::cout << relukit::to_json(s) << '\n';
      const bool within = s.depth <= s.depth_budget && s.width <= s.width_budget &&
                          static_cast<double>(s.sparsity) <= s.sparsity_budget && s.valid;
      return within ? kOk : kViolation;
    }
    if (*verify) {
      if (!relukit::is_suite(suite)) {
        std::cerr << "unknown suite '" << suite << "'; available:";
        for (const auto& n : relukit::suite_names()) std::cerr << ' ' << n;
        std::cerr << '\n';
        return kUsage;
      }
      const auto r = relukit::run_suite(suite, sopt);
      emit(verify_out, [&](std::ostream& os) { relukit::write_csv(os, r.rows); });
      std::cerr << suite << ": " << r.rows.size() << " checks, " << r.violations() << " violations, " << std::fixed
                << std::setprecision(1) << r.seconds << " s\n";
      return r.ok() ? kOk : kViolation;
    }
    if (*rate) {
      if (!m_grid.empty()) rcfg.m_grid = parse_list(m_grid);
      rcfg.quadrature_points = relukit::grid_points(rcfg.quadrature_points);
      const auto r = relukit::rate_study(rcfg);
      emit(rate_out, [&](std::ostream& os) { relukit::write_csv(os, r); });
      std::cerr << "slope " << r.slope << " (bound " << r.slope_bound << "), below theorem rhs: "
                << (r.below_rhs() ? "yes" : "no") << '\n';
      return r.slope_ok() && r.below_rhs() && r.nonnegative() && r.crosscheck_ok() ? kOk : kViolation;
    }
    if (*inf) {
      if (!b_grid.empty()) icfg.b_grid = parse_list(b_grid);
      icfg.quadrature_points = relukit::grid_points(icfg.quadrature_points);
      const auto r = relukit::infinite_risk(icfg);
      emit(inf_out, [&](std::ostream& os) { relukit::write_csv(os, r); });
      std::cerr << "slope " << r.slope << " (closed form " << r.closed_form_slope << "), attempts " << r.attempts
                << '\n';
      return r.slope_ok() && r.control_zero() ? kOk : kViolation;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
