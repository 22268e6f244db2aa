#pragma once

#include <atomic>
#include <cstdio>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "seqdevid/error.hpp"
#include "seqdevid/models.hpp"
#include "seqdevid/stats.hpp"

namespace seqdevid::experiment {

using models::Arch;
using models::ModelSpec;
using models::TrainConfig;
using features::SessionMatrix;

inline constexpr double kAlphaAnova = 0.05;

/// Accuracy samples indexed [architecture][repeat]. Empty cells mark
/// failed runs.
struct RunMatrix {
  std::vector<Arch> archs;
  std::size_t repeats = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<std::optional<double>>> samples;
  std::vector<std::string> failures;

  bool complete() const {
    for (const auto& row : samples) {
      for (const auto& s : row) {
        if (!s) return false;
      }
    }
    return !samples.empty();
  }

  std::vector<double> column(std::size_t arch_index) const {
    std::vector<double> out;
    for (const auto& s : samples.at(arch_index)) {
      if (!s) throw Error(Errc::IncompleteRuns, std::string(models::arch_display_name(archs[arch_index])) + " has missing runs");
      out.push_back(*s);
    }
    return out;
  }
};

inline std::uint64_t repeat_seed(std::uint64_t master, std::size_t repeat) { return derive_seed(master, repeat); }

using ProgressFn = std::function<void(Arch, std::size_t repeat, double accuracy)>;

/// Trains every spec once per repeat. All specs in repeat r share the seed
/// derived from (master_seed, r), hence the same split and init stream.
/// Runs are distributed over `jobs` threads; results do not depend on it.
inline RunMatrix run_experiment(const std::vector<ModelSpec>& specs, const std::vector<SessionMatrix>& data,
                                const TrainConfig& cfg_template, std::size_t repeats, std::uint64_t master_seed,
                                std::size_t jobs = 1, const ProgressFn& progress = {}) {
  if (repeats < 2) throw Error(Errc::BadConfig, "need at least 2 repeats");
  if (specs.empty()) throw Error(Errc::BadConfig, "no architectures to compare");
  cfg_template.validate();
  for (const auto& s : specs) s.validate();

  RunMatrix rm;
  rm.repeats = repeats;
  rm.master_seed = master_seed;
  for (const auto& s : specs) rm.archs.push_back(s.arch);
  for (std::size_t r = 0; r < repeats; ++r) rm.seeds.push_back(repeat_seed(master_seed, r));
  rm.samples.assign(specs.size(), std::vector<std::optional<double>>(repeats));

  const std::size_t total = specs.size() * repeats;
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::vector<std::optional<std::string>> errors(total);

  auto worker = [&]() {
    for (std::size_t task = next++; task < total; task = next++) {
      const std::size_t r = task / specs.size();
      const std::size_t a = task % specs.size();
      TrainConfig cfg = cfg_template;
      cfg.seed = rm.seeds[r];
      try {
        const auto tm = models::train(specs[a], data, cfg);
        const double acc = models::evaluate_holdout(tm, data).accuracy;
        rm.samples[a][r] = acc;
        if (progress) {
          std::lock_guard lock(mu);
          progress(specs[a].arch, r, acc);
        }
      } catch (const std::exception& e) {
        errors[task] = std::string(models::arch_display_name(specs[a].arch)) + " repeat " + std::to_string(r) + ": " +
                       e.what();
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(jobs, total));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) rm.failures.push_back(std::move(*e));
  }
  return rm;
}

// ---------------------------------------------------------------------------

struct ArchSummary {
  Arch arch = Arch::VanillaLstm;
  std::string name;
  double mean = 0.0;
  stats::Quartiles quartiles;
  std::vector<double> samples;
};

struct PairwiseResult {
  std::string a, b;
  stats::UTestResult test;
  bool significant = false;
};

struct ComparisonReport {
  std::vector<ArchSummary> archs;  // report column order
  stats::AnovaResult anova;
  bool anova_significant = false;
  std::vector<PairwiseResult> pairwise;
  double alpha_anova = kAlphaAnova;
  double alpha_pairwise = kAlphaAnova;
  std::size_t repeats = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> seeds;
};

inline double bonferroni_alpha(std::size_t groups, double alpha = kAlphaAnova) {
  const std::size_t pairs = groups * (groups - 1) / 2;
  return pairs ? alpha / static_cast<double>(pairs) : alpha;
}

/// Recomputes the significance flags from the stored p-values.
inline void flag_significance(ComparisonReport& r) {
  r.alpha_pairwise = bonferroni_alpha(r.archs.size(), r.alpha_anova);
  r.anova_significant = r.anova.p < r.alpha_anova;
  for (auto& pw : r.pairwise) pw.significant = pw.test.p < r.alpha_pairwise;
}

inline std::size_t display_rank(Arch a) {
  for (std::size_t i = 0; i < std::size(models::kAllArchs); ++i) {
    if (models::kAllArchs[i] == a) return i;
  }
  return std::size(models::kAllArchs);
}

/// Means, quartiles, one-way ANOVA and all pairwise U tests at the
/// Bonferroni-adjusted level. Columns follow CNN, ED, Stacked, Vanilla.
inline ComparisonReport compare_architectures(const RunMatrix& rm) {
  if (!rm.complete()) {
    throw Error(Errc::IncompleteRuns, std::to_string(rm.failures.size()) + " run(s) failed; statistics need every cell");
  }
  std::vector<std::size_t> order(rm.archs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return display_rank(rm.archs[i]) < display_rank(rm.archs[j]); });

  ComparisonReport rep;
  rep.repeats = rm.repeats;
  rep.master_seed = rm.master_seed;
  rep.seeds = rm.seeds;
  std::vector<std::vector<double>> groups;
  for (std::size_t i : order) {
    ArchSummary s;
    s.arch = rm.archs[i];
    s.name = models::arch_display_name(s.arch);
    s.samples = rm.column(i);
    s.mean = stats::mean(s.samples);
    s.quartiles = stats::quartiles(s.samples);
    groups.push_back(s.samples);
    rep.archs.push_back(std::move(s));
  }
  if (groups.size() >= 2) rep.anova = stats::anova_oneway(groups);
  for (std::size_t i = 0; i < rep.archs.size(); ++i) {
    for (std::size_t j = i + 1; j < rep.archs.size(); ++j) {
      rep.pairwise.push_back({rep.archs[i].name, rep.archs[j].name,
                              stats::mann_whitney_u(rep.archs[i].samples, rep.archs[j].samples), false});
    }
  }
  flag_significance(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// Rendering

inline nlohmann::json report_to_json(const ComparisonReport& r) {
  nlohmann::json j;
  j["format"] = "seqdevid-comparison";
  j["version"] = 1;
  j["repeats"] = r.repeats;
  j["master_seed"] = r.master_seed;
  j["seeds"] = r.seeds;
  j["alpha_anova"] = r.alpha_anova;
  j["alpha_pairwise"] = r.alpha_pairwise;
  j["architectures"] = nlohmann::json::array();
  for (const auto& a : r.archs) {
    j["architectures"].push_back({{"id", models::arch_id(a.arch)},
                                  {"name", a.name},
                                  {"mean_accuracy", a.mean},
                                  {"quartiles",
                                   {{"min", a.quartiles.min},
                                    {"q1", a.quartiles.q1},
                                    {"median", a.quartiles.median},
                                    {"q3", a.quartiles.q3},
                                    {"max", a.quartiles.max}}},
                                  {"samples", a.samples}});
  }
  nlohmann::json anova{{"groups", nlohmann::json::array()},
                       {"f", r.anova.f},
                       {"p", r.anova.p},
                       {"df_between", r.anova.df_between},
                       {"df_within", r.anova.df_within},
                       {"significant", r.anova_significant}};
  if (std::isinf(r.anova.f)) anova["f"] = nullptr;
  for (const auto& a : r.archs) anova["groups"].push_back(a.name);
  j["anova"] = anova;
  j["pairwise"] = nlohmann::json::array();
  for (const auto& pw : r.pairwise) {
    j["pairwise"].push_back({{"a", pw.a},
                             {"b", pw.b},
                             {"u", pw.test.u},
                             {"u_a", pw.test.u_a},
                             {"u_b", pw.test.u_b},
                             {"z", pw.test.z},
                             {"p", pw.test.p},
                             {"method", pw.test.exact ? "exact" : "normal"},
                             {"significant", pw.significant}});
  }
  return j;
}

inline ComparisonReport report_from_json(const nlohmann::json& j) {
  try {
    ComparisonReport r;
    r.repeats = j.at("repeats").get<std::size_t>();
    r.master_seed = j.at("master_seed").get<std::uint64_t>();
    r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    r.alpha_anova = j.at("alpha_anova").get<double>();
    r.alpha_pairwise = j.at("alpha_pairwise").get<double>();
    for (const auto& a : j.at("architectures")) {
      ArchSummary s;
      s.arch = models::parse_arch(a.at("id").get<std::string>());
      s.name = a.at("name").get<std::string>();
      s.mean = a.at("mean_accuracy").get<double>();
      const auto& q = a.at("quartiles");
      s.quartiles = {q.at("min").get<double>(), q.at("q1").get<double>(), q.at("median").get<double>(),
                     q.at("q3").get<double>(), q.at("max").get<double>()};
      s.samples = a.at("samples").get<std::vector<double>>();
      r.archs.push_back(std::move(s));
    }
    const auto& an = j.at("anova");
    r.anova.f = an.at("f").is_null() ? std::numeric_limits<double>::infinity() : an.at("f").get<double>();
    r.anova.p = an.at("p").get<double>();
    r.anova.df_between = an.at("df_between").get<std::size_t>();
    r.anova.df_within = an.at("df_within").get<std::size_t>();
    r.anova_significant = an.at("significant").get<bool>();
    for (const auto& p : j.at("pairwise")) {
      PairwiseResult pw;
      pw.a = p.at("a").get<std::string>();
      pw.b = p.at("b").get<std::string>();
      pw.test.u = p.at("u").get<double>();
      pw.test.u_a = p.at("u_a").get<double>();
      pw.test.u_b = p.at("u_b").get<double>();
      pw.test.z = p.at("z").get<double>();
      pw.test.p = p.at("p").get<double>();
      pw.test.exact = p.at("method").get<std::string>() == "exact";
      pw.significant = p.at("significant").get<bool>();
      r.pairwise.push_back(std::move(pw));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::SchemaMismatch, std::string("comparison report: ") + e.what());
  }
}

/// 0.0083-style display of a threshold: four decimals.
inline std::string format_alpha(double a) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", a);
  std::string s(buf);
  while (s.size() > 3 && s.back() == '0') s.pop_back();
  return s;
}

inline std::string format_p(double p) {
  char buf[32];
  if (p != 0.0 && p < 1e-3) {
    std::snprintf(buf, sizeof(buf), "%.2E", p);
  } else {
    std::snprintf(buf, sizeof(buf), "%.9f", p);
    std::string s(buf);
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s;
  }
  return buf;
}

inline std::string format_acc(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

/// Accuracy table followed by the statistical test table.
inline std::string render_markdown(const ComparisonReport& r) {
  std::ostringstream os;
  os << "## Accuracy (mean of " << r.repeats << " repeats)\n\n";
  os << "| ";
  for (const auto& a : r.archs) os << " | " << a.name;
  os << " |\n|---";
  for (std::size_t i = 0; i < r.archs.size(); ++i) os << "|---";
  os << "|\n| Accuracy";
  for (const auto& a : r.archs) os << " | " << format_acc(a.mean);
  os << " |\n\n";

  os << "## Statistical tests\n\n";
  os << "| Test | P Value | Significant |\n|---|---|---|\n";
  os << "| ANOVA(";
  for (std::size_t i = 0; i < r.archs.size(); ++i) os << (i ? "," : "") << r.archs[i].name;
  os << ") | " << format_p(r.anova.p) << " | " << (r.anova_significant ? "yes" : "no") << " |\n";
  for (const auto& pw : r.pairwise) {
    os << "| U(" << pw.a << ", " << pw.b << ") | " << format_p(pw.test.p) << " | " << (pw.significant ? "yes" : "no")
       << " |\n";
  }
  os << "\nU: Mann-Whitney U test (two-sided). Significance level: " << format_alpha(r.alpha_anova)
     << " for ANOVA, " << format_alpha(r.alpha_pairwise) << " for the Mann-Whitney U test (Bonferroni over "
     << r.pairwise.size() << " pairs).\n";
  return os.str();
}

inline std::string render_quartile_csv(const ComparisonReport& r) {
  std::ostringstream os;
  os << "architecture,min,q1,median,q3,max,mean\n";
  for (const auto& a : r.archs) {
    os << a.name << ',' << csv::format_double(a.quartiles.min) << ',' << csv::format_double(a.quartiles.q1) << ','
       << csv::format_double(a.quartiles.median) << ',' << csv::format_double(a.quartiles.q3) << ','
       << csv::format_double(a.quartiles.max) << ',' << csv::format_double(a.mean) << '\n';
  }
  return os.str();
}

/// Standalone SVG box plot of the accuracy distribution per architecture.
inline std::string render_boxplot_svg(const ComparisonReport& r) {
  constexpr double kWidth = 640, kHeight = 400, kLeft = 60, kRight = 20, kTop = 30, kBottom = 50;
  double lo = 1.0, hi = 0.0;
  for (const auto& a : r.archs) {
    lo = std::min(lo, a.quartiles.min);
    hi = std::max(hi, a.quartiles.max);
  }
  if (r.archs.empty()) lo = 0.0, hi = 1.0;
  const double pad = std::max(0.01, (hi - lo) * 0.1);
  lo = std::max(0.0, lo - pad);
  hi = std::min(1.0, hi + pad);
  if (hi <= lo) hi = lo + 0.01;
  const double plot_h = kHeight - kTop - kBottom;
  auto y = [&](double v) { return kTop + (hi - v) / (hi - lo) * plot_h; };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<title>Distribution of accuracy values</title>\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kHeight - kBottom
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = lo + (hi - lo) * i / 5.0;
    os << "<line x1=\"" << kLeft - 4 << "\" y1=\"" << num(y(v)) << "\" x2=\"" << kLeft << "\" y2=\"" << num(y(v))
       << "\" stroke=\"black\"/>";
    os << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(y(v) + 4) << "\" text-anchor=\"end\">" << num(v) << "</text>\n";
  }
  const double slot = (kWidth - kLeft - kRight) / static_cast<double>(std::max<std::size_t>(1, r.archs.size()));
  for (std::size_t i = 0; i < r.archs.size(); ++i) {
    const auto& a = r.archs[i];
    const auto& q = a.quartiles;
    const double cx = kLeft + slot * (static_cast<double>(i) + 0.5);
    const double bw = slot * 0.4;
    os << "<g class=\"box\" data-arch=\"" << a.name << "\">\n";
    os << "<line x1=\"" << num(cx) << "\" y1=\"" << num(y(q.max)) << "\" x2=\"" << num(cx) << "\" y2=\"" << num(y(q.q3))
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << num(cx) << "\" y1=\"" << num(y(q.q1)) << "\" x2=\"" << num(cx) << "\" y2=\"" << num(y(q.min))
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << num(cx - bw / 4) << "\" y1=\"" << num(y(q.max)) << "\" x2=\"" << num(cx + bw / 4)
       << "\" y2=\"" << num(y(q.max)) << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << num(cx - bw / 4) << "\" y1=\"" << num(y(q.min)) << "\" x2=\"" << num(cx + bw / 4)
       << "\" y2=\"" << num(y(q.min)) << "\" stroke=\"black\"/>\n";
    os << "<rect x=\"" << num(cx - bw / 2) << "\" y=\"" << num(y(q.q3)) << "\" width=\"" << num(bw) << "\" height=\""
       << num(std::max(0.0, y(q.q1) - y(q.q3))) << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << num(cx - bw / 2) << "\" y1=\"" << num(y(q.median)) << "\" x2=\"" << num(cx + bw / 2)
       << "\" y2=\"" << num(y(q.median)) << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(cx) << "\" y=\"" << num(kHeight - kBottom + 20) << "\" text-anchor=\"middle\">" << a.name
       << "</text>\n";
    os << "</g>\n";
  }
  os << "<text x=\"" << num(kWidth / 2) << "\" y=\"18\" text-anchor=\"middle\">Accuracy over " << r.repeats
     << " repeats</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace seqdevid::experiment
