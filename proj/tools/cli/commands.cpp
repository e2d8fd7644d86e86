#include "cli/commands.hpp"

#include "cli/csv_io.hpp"
#include "cli/render.hpp"

#include "mmdtest/error.hpp"
#include "mmdtest/normality_test.hpp"
#include "mmdtest/null_approx.hpp"
#include "mmdtest/parallel.hpp"
#include "mmdtest/simulation.hpp"
#include "mmdtest/statistic.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <ostream>

#ifndef MMDTEST_VERSION
#define MMDTEST_VERSION "0.0.0"
#endif

namespace mmdtest::cli {

namespace {

using nlohmann::json;

enum class OutputFormat { text, json, csv };

struct CommonFlags {
  std::uint64_t seed = 0;
  CLI::Option* seed_option = nullptr;
  unsigned threads = 0;
  bool json = false;
  bool csv = false;

  OutputFormat format() const {
    if (json) return OutputFormat::json;
    if (csv) return OutputFormat::csv;
    return OutputFormat::text;
  }
};

struct DataFlags {
  std::string input;
  bool header = false;
  bool transpose = false;
  std::string dump;
};

void add_common(CLI::App& cmd, CommonFlags& flags) {
  flags.seed_option =
      cmd.add_option("--seed", flags.seed, "Master seed (falls back to $MMDTEST_SEED, then 0)");
  cmd.add_option("--threads", flags.threads, "Cap on worker threads (0 = all cores)");
  auto* json_flag = cmd.add_flag("--json", flags.json, "Emit one JSON object");
  auto* csv_flag = cmd.add_flag("--csv", flags.csv, "Emit flat CSV rows");
  json_flag->excludes(csv_flag);
}

void add_data(CLI::App& cmd, DataFlags& flags, bool required) {
  auto* input = cmd.add_option("-i,--input", flags.input, "CSV file, one observation per row");
  if (required) input->required();
  input->check(CLI::ExistingFile);
  cmd.add_flag("--header", flags.header, "Skip the first line of the CSV");
  cmd.add_flag("--transpose", flags.transpose, "CSV rows are features, columns are samples");
  cmd.add_option("--dump", flags.dump, "Write the parsed dataset back out as CSV");
}

std::uint64_t resolve_seed(const CommonFlags& flags) {
  if (flags.seed_option && flags.seed_option->count() > 0) return flags.seed;
  if (const char* env = std::getenv("MMDTEST_SEED")) {
    std::uint64_t value = 0;
    const std::string_view text(env);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw InvalidArgument("MMDTEST_SEED is not an unsigned integer");
    }
    return value;
  }
  return 0;
}

Dataset load_dataset(const DataFlags& flags) {
  Matrix values = read_csv(flags.input, {flags.header, flags.transpose});
  if (!flags.dump.empty()) write_csv(flags.dump, values);
  return Dataset(std::move(values));
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("--alpha must lie in (0, 1)");
}

json envelope(std::string_view command, json config, json result, std::uint64_t seed) {
  return json{{"command", command},
              {"config", std::move(config)},
              {"result", std::move(result)},
              {"seed", seed},
              {"version", MMDTEST_VERSION}};
}

// ---- test -----------------------------------------------------------------

struct TestFlags {
  CommonFlags common;
  DataFlags data;
  std::string sigma = "median";
  std::string engine = "moment-chisq";
  double alpha = 0.05;
  EngineOptions engine_options;
  bool exit_code = false;
};

int cmd_test(const TestFlags& f, std::ostream& out) {
  require_alpha(f.alpha);
  const auto engine = parse_engine(f.engine);
  if (!engine) throw InvalidArgument("unknown engine '" + f.engine + "'");
  const std::uint64_t seed = resolve_seed(f.common);
  const Dataset data = load_dataset(f.data);
  const BandwidthSpec bandwidth = parse_bandwidth(f.sigma);
  const KernelConfig kernel = resolve_kernel(bandwidth, data);
  const TestResult result = run_test(data, kernel, *engine, f.alpha, f.engine_options, seed);

  switch (f.common.format()) {
    case OutputFormat::text: render_text(out, result); break;
    case OutputFormat::csv: render_csv(out, result); break;
    case OutputFormat::json: {
      json config{{"input", f.data.input},
                  {"sigma", format_bandwidth(bandwidth)},
                  {"engine", to_string(*engine)},
                  {"alpha", f.alpha},
                  {"l_ii", f.engine_options.l_ii},
                  {"l_spec", f.engine_options.l_spec},
                  {"spec_draws", f.engine_options.spec_draws},
                  {"iterations", f.engine_options.mc_iterations}};
      out << envelope("test", std::move(config), to_json(result), seed).dump(2) << '\n';
      break;
    }
  }
  return (f.exit_code && result.reject) ? kExitRejected : kExitOk;
}

// ---- moments --------------------------------------------------------------

struct MomentsFlags {
  CommonFlags common;
  DataFlags data;
  std::string sigma = "median";
};

int cmd_moments(const MomentsFlags& f, std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = resolve_seed(f.common);
  const Dataset data = load_dataset(f.data);
  const BandwidthSpec bandwidth = parse_bandwidth(f.sigma);
  MomentsReport report;
  report.n = data.n();
  report.d = data.d();
  report.kernel = resolve_kernel(bandwidth, data);
  const GaussianParams estimate = sample_moments(data);
  report.moments = asymptotic_moments(estimate, report.kernel.sigma);
  report.fit = moment_fit(estimate, report.kernel.sigma);
  if (!report.fit) {
    err << "warning: estimated covariance is (numerically) zero; the null is a point mass and "
           "the chi-squared fit is degenerate\n";
  }

  switch (f.common.format()) {
    case OutputFormat::text: render_text(out, report); break;
    case OutputFormat::csv: render_csv(out, report); break;
    case OutputFormat::json: {
      json config{{"input", f.data.input}, {"sigma", format_bandwidth(bandwidth)}};
      out << envelope("moments", std::move(config), to_json(report), seed).dump(2) << '\n';
      break;
    }
  }
  return kExitOk;
}

// ---- null-quantile --------------------------------------------------------

struct NullQuantileFlags {
  CommonFlags common;
  DataFlags data;
  long d = 0;
  long n = 0;
  std::string sigma = "dim-power:1";
  int iterations = 2000;
  std::vector<double> alphas{0.05};
  bool samples = false;
};

int cmd_null_quantile(const NullQuantileFlags& f, std::ostream& out) {
  for (double alpha : f.alphas) require_alpha(alpha);
  const std::uint64_t seed = resolve_seed(f.common);
  const BandwidthSpec bandwidth = parse_bandwidth(f.sigma);

  std::optional<GaussianParams> reference;
  KernelConfig kernel{1.0};
  Eigen::Index n = f.n;
  if (!f.data.input.empty()) {
    const Dataset data = load_dataset(f.data);
    reference = sample_moments(data);
    kernel = resolve_kernel(bandwidth, data);
    if (n == 0) n = data.n();
  } else {
    if (f.d < 1) throw InvalidArgument("--d is required (>= 1) without --input");
    reference = GaussianParams::standard(f.d);
    kernel = resolve_kernel(bandwidth, f.d);
  }
  if (n < 1) throw InvalidArgument("--n is required (>= 1)");

  const auto sample = monte_carlo_null(*reference, n, kernel.sigma, f.iterations, seed);
  std::vector<double> quantiles;
  for (double alpha : f.alphas) quantiles.push_back(empirical_upper_quantile(sample, alpha));

  switch (f.common.format()) {
    case OutputFormat::text: {
      out << "Monte-Carlo null of n*Delta^2: d = " << reference->dim() << ", n = " << n
          << ", sigma = " << fmt6(kernel.sigma) << ", iterations = " << f.iterations << '\n';
      TextTable table({"alpha", "t_alpha"});
      for (std::size_t i = 0; i < f.alphas.size(); ++i) {
        table.add_row({fmt6(f.alphas[i]), fmt6(quantiles[i])});
      }
      table.print(out);
      if (f.samples) {
        out << "samples:\n";
        for (double v : sample) out << fmt6(v) << '\n';
      }
      break;
    }
    case OutputFormat::csv:
      out << std::setprecision(17);
      if (f.samples) {
        out << "statistic\n";
        for (double v : sample) out << v << '\n';
      } else {
        out << "d,n,sigma,iterations,alpha,quantile\n";
        for (std::size_t i = 0; i < f.alphas.size(); ++i) {
          out << reference->dim() << ',' << n << ',' << kernel.sigma << ',' << f.iterations << ','
              << f.alphas[i] << ',' << quantiles[i] << '\n';
        }
      }
      break;
    case OutputFormat::json: {
      json config{{"d", reference->dim()},
                  {"n", n},
                  {"sigma", format_bandwidth(bandwidth)},
                  {"iterations", f.iterations},
                  {"alphas", f.alphas},
                  {"input", f.data.input.empty() ? json(nullptr) : json(f.data.input)}};
      json result{{"kernel", to_json(kernel)}, {"quantiles", quantiles}};
      if (f.samples) result["samples"] = sample;
      out << envelope("null-quantile", std::move(config), std::move(result), seed).dump(2) << '\n';
      break;
    }
  }
  return kExitOk;
}

// ---- power-sim ------------------------------------------------------------

struct PowerFlags {
  CommonFlags common;
  std::string family = "exponential";
  std::string correlation = "independent";
  long d = 10;
  std::vector<long> ns{200};
  std::vector<std::string> sigmas{"dim-power:1"};
  int replications = 200;
  int null_iterations = 2000;
  double alpha = 0.05;
  std::string threshold = "monte-carlo";
};

int cmd_power(const PowerFlags& f, std::ostream& out) {
  require_alpha(f.alpha);
  const auto family = parse_family(f.family);
  if (!family) throw InvalidArgument("unknown family '" + f.family + "'");
  const auto correlation = parse_correlation(f.correlation);
  if (!correlation) throw InvalidArgument("unknown correlation '" + f.correlation + "'");
  if (f.d < 1) throw InvalidArgument("--d must be >= 1");
  PowerOptions options;
  options.replications = f.replications;
  options.null_iterations = f.null_iterations;
  options.alpha = f.alpha;
  if (f.threshold == "monte-carlo") {
    options.threshold_source = ThresholdSource::monte_carlo;
  } else if (f.threshold == "moment-chisq") {
    options.threshold_source = ThresholdSource::moment_chisq;
  } else {
    throw InvalidArgument("--threshold must be monte-carlo or moment-chisq");
  }
  const std::uint64_t seed = resolve_seed(f.common);
  const AlternativeSpec spec{*family, f.d, *correlation};

  std::vector<BandwidthSpec> bandwidths;
  for (const auto& s : f.sigmas) {
    bandwidths.push_back(parse_bandwidth(s));
    if (bandwidths.back().rule == BandwidthRule::median_heuristic) {
      throw InvalidArgument("power-sim needs a data-independent bandwidth");
    }
  }
  std::vector<PowerReport> reports;
  for (const auto& bandwidth : bandwidths) {
    const KernelConfig kernel = resolve_kernel(bandwidth, f.d);
    for (long n : f.ns) {
      if (n < 1) throw InvalidArgument("--n values must be >= 1");
      reports.push_back(power_experiment(spec, n, kernel, options, seed));
    }
  }

  switch (f.common.format()) {
    case OutputFormat::text: render_text(out, reports); break;
    case OutputFormat::csv: render_csv(out, reports); break;
    case OutputFormat::json: {
      json result = json::array();
      for (const auto& r : reports) result.push_back(to_json(r));
      json config{{"family", to_string(*family)},
                  {"correlation", to_string(*correlation)},
                  {"d", f.d},
                  {"n", f.ns},
                  {"sigma", f.sigmas},
                  {"replications", f.replications},
                  {"null_iterations", f.null_iterations},
                  {"alpha", f.alpha},
                  {"threshold", f.threshold}};
      out << envelope("power-sim", std::move(config), std::move(result), seed).dump(2) << '\n';
      break;
    }
  }
  return kExitOk;
}

// ---- accuracy -------------------------------------------------------------

struct AccuracyFlags {
  CommonFlags common;
  long d = 10;
  std::vector<long> ns{500};
  std::vector<std::string> sigmas{"dim-power:1"};
  std::vector<std::string> engines{"moment-chisq", "gram-chisq", "spec"};
  AccuracyOptions options;
  std::string moment_mode = "single";
  bool timing = false;
};

int cmd_accuracy(AccuracyFlags f, std::ostream& out) {
  if (f.d < 1) throw InvalidArgument("--d must be >= 1");
  for (double alpha : f.options.alphas) require_alpha(alpha);
  std::vector<Engine> engines;
  for (const auto& name : f.engines) {
    const auto engine = parse_engine(name);
    if (!engine) throw InvalidArgument("unknown engine '" + name + "'");
    engines.push_back(*engine);
  }
  if (f.moment_mode == "single") {
    f.options.moment_mode = MomentMode::single_dataset;
  } else if (f.moment_mode == "per-replication") {
    f.options.moment_mode = MomentMode::per_replication;
  } else {
    throw InvalidArgument("--moment-mode must be single or per-replication");
  }
  if (!f.timing) f.options.timing_runs = 1;
  const std::uint64_t seed = resolve_seed(f.common);

  std::vector<AccuracyReport> reports;
  for (const auto& s : f.sigmas) {
    const BandwidthSpec bandwidth = parse_bandwidth(s);
    if (bandwidth.rule == BandwidthRule::median_heuristic) {
      throw InvalidArgument("accuracy needs a data-independent bandwidth");
    }
    const KernelConfig kernel = resolve_kernel(bandwidth, f.d);
    for (long n : f.ns) {
      if (n < 1) throw InvalidArgument("--n values must be >= 1");
      reports.push_back(accuracy_experiment(f.d, n, kernel.sigma, engines, f.options, seed));
    }
  }

  switch (f.common.format()) {
    case OutputFormat::text: render_text(out, reports); break;
    case OutputFormat::csv: render_csv(out, reports, f.timing); break;
    case OutputFormat::json: {
      json result = json::array();
      for (const auto& r : reports) result.push_back(to_json(r, f.timing));
      json config{{"d", f.d},
                  {"n", f.ns},
                  {"sigma", f.sigmas},
                  {"engines", f.engines},
                  {"iterations", f.options.iterations},
                  {"l_ii", f.options.l_ii},
                  {"l_spec", f.options.l_spec},
                  {"spec_draws", f.options.spec_draws},
                  {"mc_iterations", f.options.mc_iterations},
                  {"alphas", f.options.alphas},
                  {"moment_mode", f.moment_mode}};
      out << envelope("accuracy", std::move(config), std::move(result), seed).dump(2) << '\n';
      break;
    }
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kernel MMD test of multivariate normality", "mmdtest"};
  app.set_version_flag("--version", MMDTEST_VERSION);
  app.require_subcommand(1);

  TestFlags test_flags;
  auto* test = app.add_subcommand("test", "Test a CSV dataset for normality");
  add_common(*test, test_flags.common);
  add_data(*test, test_flags.data, true);
  test->add_option("--sigma", test_flags.sigma, "median | dim-power:<e> | explicit:<sigma>")
      ->capture_default_str();
  test->add_option("--engine", test_flags.engine, "moment-chisq | gram-chisq | spec | monte-carlo")
      ->capture_default_str();
  test->add_option("--alpha", test_flags.alpha, "Significance level")->capture_default_str();
  test->add_option("--l-ii", test_flags.engine_options.l_ii, "Gram size for gram-chisq")
      ->capture_default_str();
  test->add_option("--l-spec", test_flags.engine_options.l_spec, "Gram size for spec")
      ->capture_default_str();
  test->add_option("--spec-draws", test_flags.engine_options.spec_draws, "Draws for spec")
      ->capture_default_str();
  test->add_option("--iters", test_flags.engine_options.mc_iterations,
                   "Bootstrap iterations for monte-carlo")
      ->capture_default_str();
  test->add_flag("--exit-code", test_flags.exit_code, "Exit with status 2 when H0 is rejected");

  MomentsFlags moments_flags;
  auto* moments = app.add_subcommand("moments", "Asymptotic null moments and chi-squared fit");
  add_common(*moments, moments_flags.common);
  add_data(*moments, moments_flags.data, true);
  moments->add_option("--sigma", moments_flags.sigma, "median | dim-power:<e> | explicit:<sigma>")
      ->capture_default_str();

  NullQuantileFlags null_flags;
  auto* null_quantile =
      app.add_subcommand("null-quantile", "Monte-Carlo critical points of n*Delta^2");
  add_common(*null_quantile, null_flags.common);
  add_data(*null_quantile, null_flags.data, false);
  null_quantile->add_option("--d", null_flags.d, "Dimension of the N(0, I_d) reference");
  null_quantile->add_option("--n", null_flags.n, "Sample size");
  null_quantile->add_option("--sigma", null_flags.sigma, "median | dim-power:<e> | explicit:<sigma>")
      ->capture_default_str();
  null_quantile->add_option("--iters", null_flags.iterations, "Monte-Carlo iterations")
      ->capture_default_str();
  null_quantile->add_option("--alpha", null_flags.alphas, "Upper tail levels")
      ->delimiter(',')
      ->capture_default_str();
  null_quantile->add_flag("--samples", null_flags.samples, "Also emit the sorted statistics");

  PowerFlags power_flags;
  auto* power = app.add_subcommand("power-sim", "Empirical power against standardized alternatives");
  add_common(*power, power_flags.common);
  power->add_option("--family", power_flags.family, "gaussian | uniform | exponential")
      ->capture_default_str();
  power->add_option("--correlation", power_flags.correlation, "independent | banded")
      ->capture_default_str();
  power->add_option("--d", power_flags.d, "Dimension")->capture_default_str();
  power->add_option("--n", power_flags.ns, "Sample sizes")->delimiter(',')->capture_default_str();
  power->add_option("--sigma", power_flags.sigmas, "Bandwidth rules")
      ->delimiter(',')
      ->capture_default_str();
  power->add_option("--reps", power_flags.replications, "Replications per configuration")
      ->capture_default_str();
  power->add_option("--null-iters", power_flags.null_iterations, "Monte-Carlo null iterations")
      ->capture_default_str();
  power->add_option("--alpha", power_flags.alpha, "Significance level")->capture_default_str();
  power->add_option("--threshold", power_flags.threshold, "monte-carlo | moment-chisq")
      ->capture_default_str();

  AccuracyFlags accuracy_flags;
  auto* accuracy = app.add_subcommand("accuracy", "Compare approximate critical points with the Monte-Carlo null");
  add_common(*accuracy, accuracy_flags.common);
  accuracy->add_option("--d", accuracy_flags.d, "Dimension")->capture_default_str();
  accuracy->add_option("--n", accuracy_flags.ns, "Sample sizes")->delimiter(',')->capture_default_str();
  accuracy->add_option("--sigma", accuracy_flags.sigmas, "Bandwidth rules")
      ->delimiter(',')
      ->capture_default_str();
  accuracy->add_option("--engines", accuracy_flags.engines, "Engines to compare")
      ->delimiter(',')
      ->capture_default_str();
  accuracy->add_option("--iters", accuracy_flags.options.iterations, "Reference iterations")
      ->capture_default_str();
  accuracy->add_option("--l-ii", accuracy_flags.options.l_ii, "Gram size for gram-chisq")
      ->capture_default_str();
  accuracy->add_option("--l-spec", accuracy_flags.options.l_spec, "Gram size for spec")
      ->capture_default_str();
  accuracy->add_option("--spec-draws", accuracy_flags.options.spec_draws, "Draws for spec")
      ->capture_default_str();
  accuracy->add_option("--mc-iters", accuracy_flags.options.mc_iterations,
                       "Bootstrap iterations for the monte-carlo engine")
      ->capture_default_str();
  accuracy->add_option("--alpha", accuracy_flags.options.alphas, "Upper tail levels")
      ->delimiter(',')
      ->capture_default_str();
  accuracy->add_option("--moment-mode", accuracy_flags.moment_mode,
                       "single | per-replication covariance for moment-chisq")
      ->capture_default_str();
  accuracy->add_flag("--timing", accuracy_flags.timing,
                     "Time each engine (median of 3) and include seconds in JSON/CSV");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << MMDTEST_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    if (auto* selected = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      err << "run 'mmdtest " << selected->get_name() << " --help' for usage\n";
    } else {
      err << "run 'mmdtest --help' for usage\n";
    }
    return kExitError;
  }

  try {
    auto apply_threads = [](const CommonFlags& c) { set_max_threads(c.threads); };
    if (*test) {
      apply_threads(test_flags.common);
      return cmd_test(test_flags, out);
    }
    if (*moments) {
      apply_threads(moments_flags.common);
      return cmd_moments(moments_flags, out, err);
    }
    if (*null_quantile) {
      apply_threads(null_flags.common);
      return cmd_null_quantile(null_flags, out);
    }
    if (*power) {
      apply_threads(power_flags.common);
      return cmd_power(power_flags, out);
    }
    if (*accuracy) {
      apply_threads(accuracy_flags.common);
      return cmd_accuracy(accuracy_flags, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace mmdtest::cli
