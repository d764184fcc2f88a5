#ifndef FBDETECT_CLI_HPP
#define FBDETECT_CLI_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fbdetect/architectures.hpp"
#include "fbdetect/evaluator.hpp"
#include "fbdetect/fixtures.hpp"
#include "fbdetect/io.hpp"

namespace fbdetect::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2 };

struct RunConfig {
  std::string subcommand;
  std::string model_path;
  std::string arch = "parallel-1";
  std::optional<double> r;
  std::optional<int> d;
  std::string formulation = "bayesian";
  bool exhaustive = false;
  std::string quantizer;
  double t_min = -3.0;
  double t_max = 3.0;
  int points = 601;
  std::optional<int> n;
  std::optional<int> m;
  std::string gamma;
  std::string delta0;
  std::string delta1;
  std::optional<double> t;
  std::string n_grid;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
  std::size_t count = 20;
  std::string format;  // empty: json for reports, csv for simulate and fit
  std::string output;
};

namespace detail {

inline Formulation parse_formulation(const std::string& s) {
  if (s == "bayesian") return Formulation::Bayesian;
  if (s == "neyman-pearson") return Formulation::NeymanPearson;
  throw Error(ErrorKind::InvalidArgument, "unknown formulation '" + s + "'");
}

inline QuantizerSearch search_mode(const RunConfig& c) {
  return c.exhaustive ? QuantizerSearch::Exhaustive : QuantizerSearch::LlrMonotone;
}

inline ModelFile load(const RunConfig& c) {
  if (c.model_path.empty()) throw Error(ErrorKind::InvalidArgument, "--model is required");
  return read_model_file(c.model_path);
}

inline int message_levels(const RunConfig& c, const ModelFile& mf) { return c.d.value_or(mf.message_alphabet_size); }

inline ArchitectureSpec spec_from(const RunConfig& c, const ModelFile& mf) {
  ArchitectureSpec spec;
  spec.kind = parse_architecture(c.arch);
  spec.formulation = parse_formulation(c.formulation);
  spec.message_alphabet_size = message_levels(c, mf);
  spec.search = search_mode(c);
  if (uses_stage_fraction(spec.kind)) spec.r = c.r;
  return spec;
}

inline std::vector<int> parse_n_grid(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "bad --n-grid entry '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "--n-grid is empty");
  return out;
}

// Strategy for n sensors: explicit flags win, the rest comes from the
// optimal strategy of the exponent report.
class StrategyBuilder {
 public:
  StrategyBuilder(const RunConfig& c, const ModelFile& mf) : c_(c), model_(mf.model), d_(message_levels(c, mf)) {
    kind_ = parse_architecture(c.arch);
    if (is_two_stage(kind_) && !c.m && !c.r) {
      throw Error(ErrorKind::InvalidArgument, std::string(to_string(kind_)) + " needs --m or --r");
    }
    if (c.r && !(*c.r > 0.0 && *c.r < 1.0)) throw Error(ErrorKind::InvalidArgument, "--r must lie in (0, 1)");
    const bool need_report = c.gamma.empty() || (sends_two_messages(kind_) && c.delta0.empty()) ||
                             (is_two_stage(kind_) && (c.delta0.empty() || !c.t));
    if (need_report) {
      ArchitectureSpec spec = spec_from(c, mf);
      spec.formulation = Formulation::Bayesian;
      if (uses_stage_fraction(kind_)) spec.r = c.r.value_or(0.5);
      report_ = exponent(model_, spec);
    }
    gamma_ = pick(c.gamma, report_ ? report_->gamma : std::nullopt, std::nullopt);
    const auto d0 = pick(c.delta0, report_ ? report_->delta0 : std::nullopt, gamma_);
    const auto d1 = pick(c.delta1, report_ ? report_->delta1 : std::nullopt, d0);
    delta_ = {d0, kind_ == ArchitectureKind::Tree && c.delta1.empty() ? d0 : d1};
    threshold_ = c.t.value_or(report_ && report_->t ? *report_->t : 0.0);
  }

  Strategy operator()(int n) const {
    Strategy s;
    s.architecture = kind_;
    s.n = n;
    s.m = n;
    s.first_stage = gamma_;
    s.second_stage = delta_;
    s.aggregator_threshold = threshold_;
    if (is_two_stage(kind_)) {
      s.m = c_.m ? *c_.m : static_cast<int>(std::lround(*c_.r * n));
    } else if (kind_ == ArchitectureKind::Parallel1) {
      s.second_stage = {gamma_, gamma_};
    }
    return s;
  }

 private:
  Quantizer pick(const std::string& flag, const std::optional<Quantizer>& reported,
                 const std::optional<Quantizer>& fallback) const {
    if (!flag.empty()) return io::parse_quantizer(flag, d_);
    if (reported) return *reported;
    if (fallback) return *fallback;
    throw Error(ErrorKind::InvalidArgument, "no quantizer available for the strategy");
  }

  const RunConfig& c_;
  const HypothesisModel& model_;
  int d_;
  ArchitectureKind kind_;
  std::optional<ExponentReport> report_;
  Quantizer gamma_;
  std::array<Quantizer, 2> delta_;
  double threshold_ = 0.0;
};

inline void require_format(const RunConfig& c, bool csv_allowed) {
  if (c.format == "json" || (csv_allowed && c.format == "csv")) return;
  throw Error(ErrorKind::InvalidArgument, "unsupported --format '" + c.format + "'");
}

inline std::string dump(const io::Json& j) { return j.dump(2) + '\n'; }

inline io::Json model_json(const HypothesisModel& m) {
  io::Json j;
  io::Json p0 = io::Json::array();
  io::Json p1 = io::Json::array();
  for (double v : m.pmf0) p0.push_back(io::number(v));
  for (double v : m.pmf1) p1.push_back(io::number(v));
  j["pmf0"] = p0;
  j["pmf1"] = p1;
  return j;
}

struct CheckList {
  io::Json items = io::Json::array();
  bool pass = true;

  void add(const std::string& name, bool ok, io::Json detail = nullptr) {
    io::Json j;
    j["name"] = name;
    j["pass"] = ok;
    if (!detail.is_null()) j["detail"] = std::move(detail);
    items.push_back(std::move(j));
    pass = pass && ok;
  }
};

}  // namespace detail

inline std::string cmd_exponent(const RunConfig& c) {
  detail::require_format(c, false);
  const auto mf = detail::load(c);
  return detail::dump(io::to_json(exponent(mf.model, detail::spec_from(c, mf))));
}

inline std::string cmd_curve(const RunConfig& c) {
  const auto mf = detail::load(c);
  const Quantizer q = c.quantizer.empty() ? identity_quantizer(mf.model.alphabet_size())
                                          : io::parse_quantizer(c.quantizer, detail::message_levels(c, mf));
  return io::curve_csv(induce(mf.model, q), c.t_min, c.t_max, c.points);
}

inline std::string cmd_simulate(const RunConfig& c) {
  detail::require_format(c, true);
  if (!c.n) throw Error(ErrorKind::InvalidArgument, "--n is required");
  const auto mf = detail::load(c);
  const detail::StrategyBuilder build(c, mf);
  const auto e = simulate(mf.model, build(*c.n), c.samples, c.seed);
  if (c.format == "json") return detail::dump(io::to_json(e));
  return std::string(io::kEstimateCsvHeader) + '\n' + io::csv_row(e) + '\n';
}

inline std::string cmd_fit(const RunConfig& c) {
  detail::require_format(c, true);
  const auto grid = detail::parse_n_grid(c.n_grid);
  const auto mf = detail::load(c);
  const detail::StrategyBuilder build(c, mf);
  const auto fit = fit_exponent(mf.model, build, grid);
  if (c.format == "json") return detail::dump(io::to_json(fit));
  std::string out = std::string(io::kEstimateCsvHeader) + '\n';
  for (const auto& p : fit.points) out += io::csv_row(p.estimate) + '\n';
  return out;
}

struct CommandResult {
  std::string text;
  int exit_code = kOk;
};

inline constexpr double kExampleDaisy = -0.365;
inline constexpr double kExampleTree = -0.356;
inline constexpr double kExampleTolerance = 1e-3;

inline CommandResult cmd_example1(const RunConfig& c) {
  detail::require_format(c, false);
  const auto m = ternary_model();
  const double r = 0.5;
  const auto both = exponent_two_stage(m, r, 2);
  const auto parallel = exponent_parallel(m, 2, 1, Formulation::Bayesian);
  const auto sym = check_symmetric_rate_condition(m, r, 2);
  const auto g1 = ternary_gamma1();
  const auto g2 = ternary_gamma2();

  detail::CheckList checks;
  checks.add("daisy_exponent", std::abs(both.daisy.exponent - kExampleDaisy) <= kExampleTolerance,
             io::number(both.daisy.exponent));
  checks.add("daisy_second_stage", both.daisy.delta0 == g2 && both.daisy.delta1 == g1);
  checks.add("tree_exponent", std::abs(both.tree.exponent - kExampleTree) <= kExampleTolerance,
             io::number(both.tree.exponent));
  checks.add("tree_second_stage", both.tree.delta0 == g2);
  checks.add("feedback_strictly_better", both.daisy.exponent < both.tree.exponent);
  checks.add("symmetric_rate_condition_fails", !sym.applies);
  bool ordering = false;
  try {
    ordering = check_ordering(m, r, 2).holds;
  } catch (const Error&) {
    ordering = false;
  }
  checks.add("ordering", ordering);

  io::Json j;
  j["model"] = detail::model_json(m);
  j["r"] = io::number(r);
  j["daisy_restricted"] = io::to_json(both.daisy);
  j["tree"] = io::to_json(both.tree);
  j["parallel"] = io::to_json(parallel);
  io::Json s;
  s["applies"] = sym.applies;
  s["witness"] = io::quantizer_json(sym.witness);
  j["symmetric_rate_condition"] = s;
  j["checks"] = checks.items;
  j["pass"] = checks.pass;
  return {detail::dump(j), checks.pass ? kOk : kCheckFailed};
}

/// Ordering, symmetric-rate and SGB sweep over seeded random ternary models.
inline CommandResult cmd_check(const RunConfig& c) {
  detail::require_format(c, false);
  const auto models = random_models(c.seed, c.count, 3);
  std::size_t ordering_ok = 0;
  std::size_t symmetric_applies = 0;
  std::size_t sgb_ok = 0;
  std::size_t sgb_total = 0;
  for (const auto& m : models) {
    bool ok = true;
    for (double r : {0.25, 0.5, 0.75}) {
      try {
        ok = check_ordering(m, r, 2).holds && ok;
      } catch (const Error&) {
        ok = false;
      }
    }
    ordering_ok += ok ? 1 : 0;
    symmetric_applies += check_symmetric_rate_condition(m, 0.5, 2).applies ? 1 : 0;
    const auto best = exponent_parallel(m, 2, 1, Formulation::Bayesian);
    const auto two = exponent_daisy_restricted(m, 0.5, 2);
    const std::array<Strategy, 2> strategies{
        parallel_strategy(*best.gamma, 10),
        two_stage_strategy(ArchitectureKind::DaisyRestricted, 10, 5, *two.gamma, *two.delta0, *two.delta1, *two.t)};
    for (const auto& s : strategies) {
      ++sgb_total;
      if (satisfies_sgb(sgb_lower_bound(full_llr_model(m, s)), exact_error(m, s))) ++sgb_ok;
    }
  }
  detail::CheckList checks;
  checks.add("ordering", ordering_ok == models.size(), io::Json(ordering_ok));
  checks.add("sgb_lower_bound", sgb_ok == sgb_total, io::Json(sgb_ok));
  io::Json j;
  j["seed"] = c.seed;
  j["models"] = models.size();
  j["symmetric_rate_condition_applies"] = symmetric_applies;
  j["checks"] = checks.items;
  j["pass"] = checks.pass;
  return {detail::dump(j), checks.pass ? kOk : kCheckFailed};
}

inline int write_output(const RunConfig& c, const std::string& text, std::ostream& out, std::ostream& err) {
  if (c.output.empty()) {
    out << text;
    return kOk;
  }
  std::ofstream f(c.output, std::ios::binary);
  if (!f || !(f << text)) {
    err << "error: Io: cannot write '" << c.output << "'\n";
    return kUsage;
  }
  return kOk;
}

/// Parses argv, runs one subcommand and returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig c;
  CLI::App app{"Error exponents and finite-n error evaluation for decentralized detection networks", "fbdetect"};
  app.require_subcommand(1);

  auto model_opt = [&](CLI::App* s) { s->add_option("--model", c.model_path, "Model file ('K D', pmf0, pmf1)"); };
  auto search_opts = [&](CLI::App* s) {
    s->add_option("--d", c.d, "Message alphabet size (default: D from the model file)")->check(CLI::Range(2, 64));
    s->add_flag("--exhaustive", c.exhaustive, "Search every quantizer instead of LLR threshold rules");
  };
  auto arch_opts = [&](CLI::App* s) {
    s->add_option("--arch", c.arch, "Architecture")
        ->check(CLI::IsMember({"parallel-1", "parallel-2", "seq-feedback", "full-feedback", "restricted-feedback",
                               "one-msg-sequential", "daisy-full", "daisy-restricted", "tree"}));
    s->add_option("--r", c.r, "First-stage fraction in (0, 1)");
  };
  auto strategy_opts = [&](CLI::App* s) {
    s->add_option("--m", c.m, "First-stage sensor count");
    s->add_option("--gamma", c.gamma, "First-stage quantizer, e.g. 001");
    s->add_option("--delta0", c.delta0, "Second quantizer (after feedback 0)");
    s->add_option("--delta1", c.delta1, "Second quantizer after feedback 1");
    s->add_option("--t", c.t, "Aggregator LLR threshold per first-stage message");
  };
  auto format_opts = [&](CLI::App* s) {
    s->add_option("--format", c.format, "Output format (json or csv)");
    s->add_option("--output", c.output, "Write to this file instead of stdout");
  };

  auto* exp = app.add_subcommand("exponent", "Optimal error exponent and achieving strategy");
  model_opt(exp);
  search_opts(exp);
  arch_opts(exp);
  exp->add_option("--formulation", c.formulation, "bayesian or neyman-pearson");
  exp->add_option("--format", c.format, "Output format (json)");
  exp->add_option("--output", c.output, "Write to this file instead of stdout");

  auto* curve = app.add_subcommand("curve", "Rate functions of both hypotheses on a t-grid (CSV)");
  model_opt(curve);
  curve->add_option("--d", c.d, "Message alphabet size for --quantizer");
  curve->add_option("--quantizer", c.quantizer, "Quantizer (default: identity)");
  curve->add_option("--t-min", c.t_min, "Grid start");
  curve->add_option("--t-max", c.t_max, "Grid end");
  curve->add_option("--points", c.points, "Grid size");
  curve->add_option("--output", c.output, "Write to this file instead of stdout");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo error estimate of one strategy");
  model_opt(sim);
  search_opts(sim);
  arch_opts(sim);
  strategy_opts(sim);
  sim->add_option("--n", c.n, "Sensor count")->check(CLI::PositiveNumber);
  sim->add_option("--samples", c.samples, "Samples per hypothesis")->check(CLI::PositiveNumber);
  sim->add_option("--seed", c.seed, "Seed");
  format_opts(sim);

  auto* fit = app.add_subcommand("fit", "Exact (1/n) log p_e along an n-grid");
  model_opt(fit);
  search_opts(fit);
  arch_opts(fit);
  strategy_opts(fit);
  fit->add_option("--n-grid", c.n_grid, "Comma-separated sensor counts")->required();
  format_opts(fit);

  auto* ex1 = app.add_subcommand("example1", "Reproduce the ternary two-stage example");
  ex1->add_option("--output", c.output, "Write to this file instead of stdout");

  auto* check = app.add_subcommand("check", "Ordering, symmetric-rate and SGB sweep over random models");
  check->add_option("--seed", c.seed, "Seed of the model bundle");
  check->add_option("--count", c.count, "Number of random models")->check(CLI::PositiveNumber);
  check->add_option("--output", c.output, "Write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  c.subcommand = app.get_subcommands().front()->get_name();
  if (c.format.empty()) c.format = c.subcommand == "simulate" || c.subcommand == "fit" ? "csv" : "json";

  try {
    CommandResult result;
    if (c.subcommand == "exponent") {
      result.text = cmd_exponent(c);
    } else if (c.subcommand == "curve") {
      result.text = cmd_curve(c);
    } else if (c.subcommand == "simulate") {
      result.text = cmd_simulate(c);
    } else if (c.subcommand == "fit") {
      result.text = cmd_fit(c);
    } else if (c.subcommand == "example1") {
      c.format = "json";
      result = cmd_example1(c);
    } else {
      c.format = "json";
      result = cmd_check(c);
    }
    const int written = write_output(c, result.text, out, err);
    return written != kOk ? written : result.exit_code;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::OrderingViolation ? kCheckFailed : kUsage;
  }
}

}  // namespace fbdetect::cli

#endif  // FBDETECT_CLI_HPP
