// Acceptance run: one PASS/FAIL/SKIP line per criterion.
// Exit status is nonzero when any non-conditional criterion fails.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "seqdevid/cli.hpp"
#include "seqdevid/seqdevid.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

namespace {

using namespace seqdevid;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Tolerances and limits.
constexpr double kGradTol = 1e-4;
constexpr double kGradSuiteSeconds = 60.0;
constexpr double kSeparableMinAccuracy = 0.95;
constexpr std::size_t kSeparableRepeats = 5;
constexpr double kTrainSecondsLimit = 300.0;
constexpr double kExactPTol = 1e-12;
constexpr double kAnovaPTol = 1e-9;
constexpr double kAalto70 = 0.70;

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "seqdevid");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (rc != 0) std::fprintf(stderr, "%s", err.str().c_str());
  return rc;
}

// 1 ---------------------------------------------------------------------------

Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string where;
  std::size_t checked = 0;
  for (models::Arch arch : models::kAllArchs) {
    models::ModelSpec s;
    s.arch = arch;
    s.hidden = 8;
    s.seq_len = 6;
    s.features = 5;
    s.classes = 4;
    s.conv_kernels = 4;
    s.conv_width = 3;
    for (std::uint64_t trial = 0; trial < 3; ++trial) {
      models::Model m(s, 100 + trial);
      Rng rng(derive_seed(7, trial));
      nn::Tensor2 x(6, 5);
      for (double& v : x.data()) v = rng.uniform(0.0, 1.0);
      const auto res = models::gradient_check(m, x, trial % 4);
      checked += res.checked;
      if (res.max_rel_error >= worst) {
        worst = res.max_rel_error;
        where = std::string(models::arch_id(arch)) + ":" + res.worst_tensor;
      }
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = worst < kGradTol && secs < kGradSuiteSeconds;
  return {ok ? Verdict::Pass : Verdict::Fail,
          "max rel error " + fmt("%.3g", worst) + " (" + where + ") over " + std::to_string(checked) +
              " params, 4 archs x 3 inputs; " + fmt("%.2f", secs) + "s (tol " + fmt("%g", kGradTol) + ", limit " +
              fmt("%g", kGradSuiteSeconds) + "s)"};
}

// 2 ---------------------------------------------------------------------------

Outcome separable_benchmark() {
  const auto data = testing::mean_shift_dataset(27, 20, 12, 25, 2024, 1.0, 1.0);
  const models::TrainConfig base;  // defaults: 200 epochs, batch 16, lr 1e-3, patience 30
  std::string detail;
  bool ok = true;
  double slowest = 0.0;
  for (models::Arch arch : models::kAllArchs) {
    models::ModelSpec spec;  // defaults: H=64, 12x25 input, 27 classes
    spec.arch = arch;
    double sum = 0.0;
    for (std::size_t r = 0; r < kSeparableRepeats; ++r) {
      models::TrainConfig cfg = base;
      cfg.seed = experiment::repeat_seed(11, r);
      const auto t0 = Clock::now();
      const auto tm = models::train(spec, data, cfg);
      slowest = std::max(slowest, seconds_since(t0));
      sum += models::evaluate_holdout(tm, data).accuracy;
    }
    const double mean = sum / kSeparableRepeats;
    ok = ok && mean >= kSeparableMinAccuracy;
    detail += std::string(models::arch_display_name(arch)) + " " + fmt("%.3f", mean) + ", ";
  }
  ok = ok && slowest < kTrainSecondsLimit;
  detail += "slowest training " + fmt("%.1f", slowest) + "s (need mean >= " + fmt("%.2f", kSeparableMinAccuracy) +
            " over " + std::to_string(kSeparableRepeats) + " repeats, < " + fmt("%.0f", kTrainSecondsLimit) + "s each)";
  return {ok ? Verdict::Pass : Verdict::Fail, detail};
}

// 3 ---------------------------------------------------------------------------

Outcome pipeline_shape(const fs::path& work) {
  const fs::path root = work / "aalto_profile";
  const auto corpus = testing::write_capture_corpus(root, 27, 20, 3);
  const fs::path cfg = work / "extract.json";
  std::ofstream(cfg) << nlohmann::json{{"capture_root", root.string()},
                                       {"session_manifest", corpus.manifest.string()},
                                       {"output_dir", (work / "extract_out").string()}}
                            .dump();
  std::string summary;
  if (run_cli({"extract", "--config", cfg.string()}, &summary) != 0) return {Verdict::Fail, "extract failed"};
  const bool summary_ok = summary.find("540 sessions, 12x25") != std::string::npos;

  const auto data = features::load_dataset(work / "extract_out" / "dataset.csv", features::DatasetShape{12, 25});
  const auto sessions = capture::ingest_sessions(corpus.manifest, root);
  const auto manifest = features::iotdevid25();
  std::size_t padded = 0, truncated = 0, bad = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& m = data[i].values;
    if (m.rows() != 12 || m.cols() != 25) ++bad;
    const auto vecs = features::extract_features(sessions[i], manifest);
    const std::size_t n = corpus.packet_counts[i];
    if (vecs.size() != n) ++bad;
    for (std::size_t t = 0; t < 12; ++t) {
      for (std::size_t f = 0; f < 25; ++f) {
        const double want = t < n ? vecs[t][f] : 0.0;
        if (m(t, f) != want) ++bad;
      }
    }
    if (n == 11) {
      bool zero_row = true;
      for (double v : m.row(11)) zero_row = zero_row && v == 0.0;
      if (zero_row && data[i].length == 11) ++padded;
      else ++bad;
    }
    if (n > 12) ++truncated;
  }
  const bool ok = summary_ok && data.size() == 540 && bad == 0 && padded > 0 && truncated > 0;
  return {ok ? Verdict::Pass : Verdict::Fail,
          std::to_string(data.size()) + " matrices of 12x25 from 27 devices x 20 sessions; summary line " +
              (summary_ok ? "ok" : "missing") + "; " + std::to_string(padded) + " 11-packet sessions zero-padded, " +
              std::to_string(truncated) + " longer sessions truncated to 12; " + std::to_string(bad) +
              " mismatching cells"};
}

// 4 ---------------------------------------------------------------------------

Outcome statistics_oracles() {
  Rng rng(4242);
  double worst_p = 0.0;
  std::size_t pairs = 0, u_mismatch = 0;
  for (std::size_t n = 1; n <= 8; ++n) {
    for (std::size_t m = 1; m <= 8; ++m) {
      for (int trial = 0; trial < 3; ++trial) {
        std::vector<double> a(n), b(m);
        // trial 0 continuous, trials 1-2 drawn from a few levels so ties occur
        for (double& v : a) v = trial == 0 ? rng.normal() : static_cast<double>(rng.below(trial == 1 ? 4 : 2));
        for (double& v : b) v = trial == 0 ? rng.normal() : static_cast<double>(rng.below(trial == 1 ? 4 : 2));
        const auto r = stats::mann_whitney_u(a, b, stats::UMethod::Exact);
        worst_p = std::max(worst_p, std::abs(r.p - testing::exact_u_p_value(a, b)));
        if (r.u_a != testing::pair_count_u(a, b)) ++u_mismatch;
        ++pairs;
      }
    }
  }
  const auto an = stats::anova_oneway({{1, 2, 3}, {2, 3, 4}, {3, 4, 5}});
  const double oracle_p = testing::beta_cdf_quadrature(6.0 / (6.0 + 2.0 * 3.0), 3.0, 1.0);
  const double anova_err = std::abs(an.p - oracle_p);
  const bool ok = worst_p <= kExactPTol && u_mismatch == 0 && an.f == 3.0 && anova_err <= kAnovaPTol;
  return {ok ? Verdict::Pass : Verdict::Fail,
          "exact U p vs relabelling enumeration: max diff " + fmt("%.3g", worst_p) + " over " + std::to_string(pairs) +
              " sample pairs (n,m<=8), " + std::to_string(u_mismatch) + " U mismatches; ANOVA F=" +
              fmt("%.17g", an.f) + ", p=" + fmt("%.12f", an.p) + " vs quadrature " + fmt("%.12f", oracle_p) +
              " (tol " + fmt("%g", kAnovaPTol) + ")"};
}

// 5 ---------------------------------------------------------------------------

fs::path write_toy_config(const fs::path& work, const std::string& name, const std::string& out) {
  const auto data = testing::mean_shift_dataset(4, 8, 6, 5, 21, 1.5, 0.3);
  features::save_dataset(work / "toy.csv", data, 5);
  const fs::path p = work / name;
  std::ofstream(p) << nlohmann::json{{"dataset", "toy.csv"},
                                     {"model", {{"hidden", 8}, {"conv_kernels", 4}}},
                                     {"train", {{"epochs", 15}, {"batch_size", 8}, {"learning_rate", 0.02}}},
                                     {"repeats", 3},
                                     {"seed", 2024},
                                     {"output_dir", out}}
                          .dump(2);
  return p;
}

Outcome report_fidelity(const fs::path& work) {
  const auto cfg = write_toy_config(work, "compare.json", "compare_out");
  if (run_cli({"compare", "--config", cfg.string()}) != 0) return {Verdict::Fail, "compare failed"};
  const std::string md = slurp(work / "compare_out" / "report.md");

  const std::vector<std::string> expected_rows = {
      "|  | CNN-LSTM | ED-LSTM | Stacked-LSTM | Vanilla-LSTM |",
      "| Test | P Value | Significant |",
      "| ANOVA(CNN-LSTM,ED-LSTM,Stacked-LSTM,Vanilla-LSTM) |",
      "| U(CNN-LSTM, ED-LSTM) |",
      "| U(CNN-LSTM, Stacked-LSTM) |",
      "| U(CNN-LSTM, Vanilla-LSTM) |",
      "| U(ED-LSTM, Stacked-LSTM) |",
      "| U(ED-LSTM, Vanilla-LSTM) |",
      "| U(Stacked-LSTM, Vanilla-LSTM) |",
      "0.0083 for the Mann-Whitney U test"};
  std::size_t pos = 0;
  bool layout_ok = true;
  for (const auto& row : expected_rows) {
    const auto at = md.find(row, pos);
    if (at == std::string::npos) {
      layout_ok = false;
      break;
    }
    pos = at + row.size();
  }

  // Reference p-values, in pairwise row order.
  experiment::ComparisonReport rep;
  rep.repeats = 50;
  for (models::Arch a : models::kAllArchs) rep.archs.push_back({a, models::arch_display_name(a), 0.0, {}, {}});
  rep.anova.p = 1.32e-21;
  const double reference[6] = {3.42e-05, 8.02e-10, 0.007966986, 0.00066457, 3.07e-11, 1.16e-15};
  std::size_t k = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j, ++k) {
      experiment::PairwiseResult pw;
      pw.a = rep.archs[i].name;
      pw.b = rep.archs[j].name;
      pw.test.p = reference[k];
      rep.pairwise.push_back(pw);
    }
  }
  experiment::flag_significance(rep);
  bool flags_ok = rep.anova_significant;
  for (const auto& pw : rep.pairwise) flags_ok = flags_ok && pw.significant;
  const bool cnn_vanilla = rep.pairwise[2].a == "CNN-LSTM" && rep.pairwise[2].b == "Vanilla-LSTM" &&
                           rep.pairwise[2].significant;
  const std::string fixture_md = experiment::render_markdown(rep);
  const bool shown = fixture_md.find("| U(CNN-LSTM, Vanilla-LSTM) | 0.007966986 | yes |") != std::string::npos &&
                     fixture_md.find("| 1.32E-21 | yes |") != std::string::npos &&
                     experiment::format_alpha(rep.alpha_pairwise) == "0.0083";
  const bool ok = layout_ok && flags_ok && cnn_vanilla && shown;
  return {ok ? Verdict::Pass : Verdict::Fail,
          std::string("report.md column/row layout ") + (layout_ok ? "matches" : "differs") +
              "; reference p-values at alpha " + experiment::format_alpha(rep.alpha_pairwise) + ": " +
              (flags_ok ? "all 6 pairs + ANOVA significant" : "flag mismatch") + ", (CNN-LSTM, Vanilla-LSTM) p=0.007966986 " +
              (cnn_vanilla ? "significant" : "NOT significant")};
}

// 6 ---------------------------------------------------------------------------

Outcome aalto_accuracy(const fs::path& work) {
  const char* cfg = std::getenv("SEQDEVID_AALTO_CONFIG");
  if (!cfg || !*cfg) {
    return {Verdict::Skip, "set SEQDEVID_AALTO_CONFIG to an experiment config over the Aalto captures (50 repeats)"};
  }
  const fs::path out = work / "aalto_out";
  if (run_cli({"compare", "--config", cfg, "--out", out.string()}) != 0) return {Verdict::Fail, "compare failed"};
  const auto rep = experiment::report_from_json(nlohmann::json::parse(slurp(out / "report.json")));
  std::string detail = "measured means:";
  bool above = true;
  for (const auto& a : rep.archs) {
    detail += " " + a.name + " " + fmt("%.3f", a.mean);
    above = above && a.mean > kAalto70;
  }
  detail += " over " + std::to_string(rep.repeats) + " repeats";
  return {above ? Verdict::Pass : Verdict::Fail, detail};
}

// 7 ---------------------------------------------------------------------------

Outcome determinism(const fs::path& work) {
  const auto cfg = write_toy_config(work, "determinism.json", "det_a");
  if (run_cli({"compare", "--config", cfg.string()}) != 0) return {Verdict::Fail, "first compare failed"};
  if (run_cli({"compare", "--config", cfg.string(), "--out", (work / "det_b").string(), "--jobs", "3"}) != 0) {
    return {Verdict::Fail, "second compare failed"};
  }
  const auto a = slurp(work / "det_a" / "report.json");
  const auto b = slurp(work / "det_b" / "report.json");
  const bool ok = !a.empty() && a == b;
  return {ok ? Verdict::Pass : Verdict::Fail,
          "report.json " + std::to_string(a.size()) + " bytes, second run (--jobs 3) " +
              (ok ? "byte-identical" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = fs::temp_directory_path() / ("seqdevid_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(work);
  fs::create_directories(work);

  // optional filter: acceptance 1 4 5
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  auto selected = [&](int n) { return only.empty() || std::find(only.begin(), only.end(), n) != only.end(); };

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> fn;
    bool conditional;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient correctness", gradient_correctness, false},
      {2, "separable synthetic benchmark", separable_benchmark, false},
      {3, "pipeline shape reproduction", [&] { return pipeline_shape(work); }, false},
      {4, "statistics oracle equivalence", statistics_oracles, false},
      {5, "report fidelity", [&] { return report_fidelity(work); }, false},
      {6, "Aalto accuracy (conditional)", [&] { return aalto_accuracy(work); }, true},
      {7, "determinism", [&] { return determinism(work); }, false},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected(c.id)) continue;
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {Verdict::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Skip ? "SKIP" : "FAIL";
    std::printf("[%s] %d %s: %s\n", tag, c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
    if (o.verdict == Verdict::Fail && !c.conditional) ++failures;
  }
  fs::remove_all(work);
  return failures == 0 ? 0 : 1;
}
