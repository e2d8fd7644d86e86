#include "cli/render.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

namespace mmdtest::cli {

using nlohmann::json;

std::string fmt6(double value) {
  std::ostringstream out;
  out << std::setprecision(6) << value;
  return out.str();
}

void TextTable::print(std::ostream& out) const {
  std::vector<std::size_t> width(header_.size(), 0);
  auto widen = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size() && i < width.size(); ++i) {
      width[i] = std::max(width[i], row[i].size());
    }
  };
  widen(header_);
  for (const auto& row : rows_) widen(row);

  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < width.size(); ++i) {
      const std::string cell = i < row.size() ? row[i] : "";
      if (i > 0) out << "  ";
      if (i == 0) {
        out << std::left << std::setw(static_cast<int>(width[i])) << cell;
      } else {
        out << std::right << std::setw(static_cast<int>(width[i])) << cell;
      }
    }
    out << '\n';
  };
  emit(header_);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
  for (const auto& row : rows_) emit(row);
}

std::string_view to_string(BandwidthRule rule) {
  switch (rule) {
    case BandwidthRule::explicit_value: return "explicit";
    case BandwidthRule::median_heuristic: return "median";
    case BandwidthRule::dim_power: return "dim-power";
  }
  return "unknown";
}

std::string_view to_string(MomentMode mode) {
  return mode == MomentMode::single_dataset ? "single" : "per-replication";
}

namespace {

std::string rule_label(const KernelConfig& kernel) {
  switch (kernel.rule) {
    case BandwidthRule::dim_power: return "d^-" + fmt6(kernel.exponent);
    case BandwidthRule::median_heuristic: return "median";
    case BandwidthRule::explicit_value: return "sigma=" + fmt6(kernel.sigma);
  }
  return "?";
}

std::string percent(double alpha) { return fmt6(100.0 * alpha) + "%"; }

}  // namespace

json to_json(const KernelConfig& kernel) {
  json j{{"sigma", kernel.sigma}, {"rule", to_string(kernel.rule)}};
  if (kernel.rule == BandwidthRule::dim_power) j["exponent"] = kernel.exponent;
  return j;
}

json to_json(const TestResult& r) {
  json j{{"statistic", r.statistic},
         {"delta_sq", r.delta_sq},
         {"n", r.n},
         {"d", r.d},
         {"kernel", to_json(r.kernel)},
         {"engine", to_string(r.engine)},
         {"critical_value", r.critical_value},
         {"alpha", r.alpha},
         {"p_value", r.p_value},
         {"reject", r.reject},
         {"degenerate_null", r.degenerate_null}};
  j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
  return j;
}

json to_json(const MomentsReport& r) {
  json j{{"n", r.n},
         {"d", r.d},
         {"kernel", to_json(r.kernel)},
         {"e_z", r.moments.e_z},
         {"v_z", r.moments.v_z},
         {"degenerate", !r.fit.has_value()}};
  j["c"] = r.fit ? json(r.fit->c) : json(nullptr);
  j["r"] = r.fit ? json(r.fit->r) : json(nullptr);
  return j;
}

json to_json(const PowerReport& r) {
  json j{{"family", to_string(r.spec.family)},
         {"correlation", to_string(r.spec.correlation)},
         {"d", r.spec.d},
         {"n", r.n},
         {"kernel", to_json(r.kernel)},
         {"alpha", r.alpha},
         {"rejections", r.rejections},
         {"replications", r.replications},
         {"power", r.power},
         {"threshold_source", to_string(r.threshold_source)}};
  j["threshold"] = r.threshold ? json(*r.threshold) : json(nullptr);
  return j;
}

json to_json(const AccuracyReport& r, bool with_timing) {
  json engines = json::array();
  for (const auto& e : r.engines) {
    json row{{"engine", to_string(e.engine)}, {"quantiles", e.quantiles}, {"d_metric", e.d_metric}};
    if (with_timing) row["seconds"] = e.seconds;
    engines.push_back(std::move(row));
  }
  return json{{"d", r.d},
              {"n", r.n},
              {"sigma", r.sigma},
              {"iterations", r.iterations},
              {"moment_mode", to_string(r.moment_mode)},
              {"alphas", r.alphas},
              {"reference_quantiles", r.reference_quantiles},
              {"engines", std::move(engines)}};
}

void render_text(std::ostream& out, const TestResult& r) {
  TextTable table({"quantity", "value"});
  table.add_row({"n", std::to_string(r.n)});
  table.add_row({"d", std::to_string(r.d)});
  table.add_row({"sigma", fmt6(r.kernel.sigma) + " (" + std::string(to_string(r.kernel.rule)) + ")"});
  table.add_row({"n*Delta^2", fmt6(r.statistic)});
  table.add_row({"engine", std::string(to_string(r.engine))});
  table.add_row({"alpha", fmt6(r.alpha)});
  table.add_row({"critical value", fmt6(r.critical_value)});
  table.add_row({"p-value", fmt6(r.p_value)});
  table.add_row({"reject H0", r.reject ? "yes" : "no"});
  if (r.degenerate_null) table.add_row({"note", "degenerate null (zero covariance)"});
  table.print(out);
}

void render_text(std::ostream& out, const MomentsReport& r) {
  TextTable table({"quantity", "value"});
  table.add_row({"n", std::to_string(r.n)});
  table.add_row({"d", std::to_string(r.d)});
  table.add_row({"sigma", fmt6(r.kernel.sigma) + " (" + std::string(to_string(r.kernel.rule)) + ")"});
  table.add_row({"E[Z]", fmt6(r.moments.e_z)});
  table.add_row({"V[Z]", fmt6(r.moments.v_z)});
  table.add_row({"c", r.fit ? fmt6(r.fit->c) : "n/a"});
  table.add_row({"r", r.fit ? fmt6(r.fit->r) : "n/a"});
  table.print(out);
}

void render_text(std::ostream& out, const std::vector<PowerReport>& reports) {
  // Group by (family, correlation, d); rows are bandwidth rules, columns n.
  std::map<std::tuple<std::string, std::string, Eigen::Index>, std::vector<const PowerReport*>> groups;
  for (const auto& r : reports) {
    groups[{std::string(to_string(r.spec.family)), std::string(to_string(r.spec.correlation)),
            r.spec.d}]
        .push_back(&r);
  }
  bool first = true;
  for (const auto& [key, members] : groups) {
    if (!first) out << '\n';
    first = false;
    const auto& [family, correlation, d] = key;
    out << "Power: " << family << " (" << correlation << "), d = " << d
        << ", threshold = " << to_string(members.front()->threshold_source)
        << ", replications = " << members.front()->replications << '\n';

    std::vector<Eigen::Index> ns;
    std::vector<std::string> rules;
    for (const auto* r : members) {
      if (std::find(ns.begin(), ns.end(), r->n) == ns.end()) ns.push_back(r->n);
      const auto label = rule_label(r->kernel);
      if (std::find(rules.begin(), rules.end(), label) == rules.end()) rules.push_back(label);
    }
    std::vector<std::string> header{"sigma \\ n"};
    for (auto n : ns) header.push_back(std::to_string(n));
    TextTable table(header);
    for (const auto& label : rules) {
      std::vector<std::string> row{label};
      for (auto n : ns) {
        std::string cell = "-";
        for (const auto* r : members) {
          if (r->n == n && rule_label(r->kernel) == label) cell = fmt6(r->power);
        }
        row.push_back(cell);
      }
      table.add_row(std::move(row));
    }
    table.print(out);
  }
}

void render_text(std::ostream& out, const std::vector<AccuracyReport>& reports) {
  bool first = true;
  for (const auto& r : reports) {
    if (!first) out << '\n';
    first = false;
    out << "Critical points: d = " << r.d << ", n = " << r.n << ", sigma = " << fmt6(r.sigma)
        << ", reference iterations = " << r.iterations
        << ", moment mode = " << to_string(r.moment_mode) << '\n';
    std::vector<std::string> header{"alpha", "n*Delta^2"};
    for (const auto& e : r.engines) header.emplace_back(to_string(e.engine));
    TextTable table(header);
    for (std::size_t a = 0; a < r.alphas.size(); ++a) {
      std::vector<std::string> row{percent(r.alphas[a]), fmt6(r.reference_quantiles[a])};
      for (const auto& e : r.engines) row.push_back(fmt6(e.quantiles[a]));
      table.add_row(std::move(row));
    }
    std::vector<std::string> metric{"D", ""};
    std::vector<std::string> seconds{"time (s)", ""};
    for (const auto& e : r.engines) {
      metric.push_back(fmt6(e.d_metric));
      seconds.push_back(fmt6(e.seconds));
    }
    table.add_row(std::move(metric));
    table.add_row(std::move(seconds));
    table.print(out);
  }
}

void render_csv(std::ostream& out, const TestResult& r) {
  out << "statistic,delta_sq,n,d,sigma,engine,alpha,critical_value,p_value,reject\n";
  out << std::setprecision(17) << r.statistic << ',' << r.delta_sq << ',' << r.n << ',' << r.d
      << ',' << r.kernel.sigma << ',' << to_string(r.engine) << ',' << r.alpha << ','
      << r.critical_value << ',' << r.p_value << ',' << (r.reject ? 1 : 0) << '\n';
}

void render_csv(std::ostream& out, const MomentsReport& r) {
  out << "n,d,sigma,e_z,v_z,c,r\n";
  out << std::setprecision(17) << r.n << ',' << r.d << ',' << r.kernel.sigma << ','
      << r.moments.e_z << ',' << r.moments.v_z << ',';
  if (r.fit) {
    out << r.fit->c << ',' << r.fit->r << '\n';
  } else {
    out << ",\n";
  }
}

void render_csv(std::ostream& out, const std::vector<PowerReport>& reports) {
  out << "family,correlation,d,n,sigma,rule,alpha,threshold_source,threshold,rejections,"
         "replications,power\n";
  out << std::setprecision(17);
  for (const auto& r : reports) {
    out << to_string(r.spec.family) << ',' << to_string(r.spec.correlation) << ',' << r.spec.d
        << ',' << r.n << ',' << r.kernel.sigma << ',' << rule_label(r.kernel) << ',' << r.alpha
        << ',' << to_string(r.threshold_source) << ',';
    if (r.threshold) out << *r.threshold;
    out << ',' << r.rejections << ',' << r.replications << ',' << r.power << '\n';
  }
}

void render_csv(std::ostream& out, const std::vector<AccuracyReport>& reports, bool with_timing) {
  out << "d,n,sigma,alpha,method,quantile,d_metric";
  if (with_timing) out << ",seconds";
  out << '\n' << std::setprecision(17);
  for (const auto& r : reports) {
    for (std::size_t a = 0; a < r.alphas.size(); ++a) {
      out << r.d << ',' << r.n << ',' << r.sigma << ',' << r.alphas[a] << ",reference,"
          << r.reference_quantiles[a] << ",0";
      if (with_timing) out << ',';
      out << '\n';
      for (const auto& e : r.engines) {
        out << r.d << ',' << r.n << ',' << r.sigma << ',' << r.alphas[a] << ','
            << to_string(e.engine) << ',' << e.quantiles[a] << ',' << e.d_metric;
        if (with_timing) out << ',' << e.seconds;
        out << '\n';
      }
    }
  }
}

}  // namespace mmdtest::cli
