#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "seqdevid/capture.hpp"
#include "seqdevid/error.hpp"
#include "seqdevid/experiment.hpp"
#include "seqdevid/features.hpp"
#include "seqdevid/models.hpp"

namespace seqdevid::cli {

namespace fs = std::filesystem;
using models::Arch;

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kRuntimeError = 3 };

struct ExperimentConfig {
  std::optional<fs::path> dataset;
  std::optional<fs::path> capture_root;
  std::optional<fs::path> session_manifest;
  std::string feature_manifest = "iotdevid25";
  std::vector<Arch> architectures{std::begin(models::kAllArchs), std::end(models::kAllArchs)};
  models::ModelSpec model;
  models::TrainConfig train;
  std::size_t repeats = 50;
  std::uint64_t seed = 42;
  fs::path output_dir = "out";
  std::size_t jobs = 1;

  bool has_capture_source() const { return capture_root.has_value() || session_manifest.has_value(); }

  void validate() const {
    if (dataset.has_value() == has_capture_source()) {
      throw Error(Errc::BadConfig, "config needs exactly one data source: `dataset` or `capture_root`+`session_manifest`");
    }
    if (has_capture_source() && !(capture_root && session_manifest)) {
      throw Error(Errc::BadConfig, "capture source needs both `capture_root` and `session_manifest`");
    }
    if (architectures.empty()) throw Error(Errc::BadConfig, "no architectures listed");
    train.validate();
  }
};

/// Relative paths inside the config resolve against the config's directory.
inline ExperimentConfig parse_config(const nlohmann::json& j, const fs::path& base_dir) {
  ExperimentConfig c;
  auto path_of = [&](const char* key) -> std::optional<fs::path> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    fs::path p = j.at(key).get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
  };
  try {
    c.dataset = path_of("dataset");
    c.capture_root = path_of("capture_root");
    c.session_manifest = path_of("session_manifest");
    if (j.contains("feature_manifest")) {
      const std::string m = j.at("feature_manifest").get<std::string>();
      c.feature_manifest = (m == "iotdevid25" || m == "lopez6" || fs::path(m).is_absolute()) ? m : (base_dir / m).string();
    }
    if (j.contains("architectures")) {
      c.architectures.clear();
      for (const auto& a : j.at("architectures")) c.architectures.push_back(models::parse_arch(a.get<std::string>()));
    }
    if (j.contains("model")) c.model = models::spec_from_json(j.at("model"), c.model);
    if (j.contains("train")) c.train = models::train_config_from_json(j.at("train"), c.train);
    c.repeats = j.value("repeats", c.repeats);
    c.seed = j.value("seed", c.seed);
    if (auto out = path_of("output_dir")) c.output_dir = *out;
    c.jobs = j.value("jobs", c.jobs);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadConfig, std::string("config: ") + e.what());
  }
  return c;
}

inline ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::BadConfig, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadConfig, path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path());
}

struct LoadedData {
  std::vector<features::SessionMatrix> matrices;
  features::DatasetShape shape;
  std::size_t classes = 0;
};

inline LoadedData extract_from_captures(const ExperimentConfig& cfg) {
  const auto manifest = features::resolve_manifest(cfg.feature_manifest);
  const auto sessions = capture::ingest_sessions(*cfg.session_manifest, *cfg.capture_root);
  features::LabelCodec codec;
  LoadedData d;
  d.matrices = features::build_dataset(sessions, manifest, &codec);
  d.shape = features::shape_of(manifest);
  d.classes = codec.size();
  return d;
}

inline LoadedData load_data(const ExperimentConfig& cfg) {
  if (cfg.dataset) {
    LoadedData d;
    d.matrices = features::load_dataset(*cfg.dataset, std::nullopt, &d.shape);
    if (d.matrices.empty()) throw Error(Errc::EmptyTestSet, "dataset " + cfg.dataset->string() + " has no sessions");
    d.classes = features::LabelCodec::from_dataset(d.matrices).size();
    return d;
  }
  return extract_from_captures(cfg);
}

inline models::ModelSpec spec_for(const ExperimentConfig& cfg, Arch arch, const LoadedData& d) {
  models::ModelSpec s = cfg.model;
  s.arch = arch;
  s.classes = d.classes;
  s.seq_len = d.shape.seq_len;
  s.features = d.shape.feature_count;
  return s;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << text;
}

// ---------------------------------------------------------------------------

inline int cmd_extract(const ExperimentConfig& cfg, std::ostream& out) {
  if (!cfg.has_capture_source()) throw Error(Errc::BadConfig, "extract needs `capture_root` and `session_manifest`");
  const LoadedData d = extract_from_captures(cfg);
  fs::create_directories(cfg.output_dir);
  const fs::path path = cfg.output_dir / "dataset.csv";
  features::save_dataset(path, d.matrices, d.shape.feature_count);

  std::map<std::string, std::size_t> per_device;
  for (const auto& m : d.matrices) ++per_device[m.device_name];
  for (const auto& [dev, n] : per_device) out << "  " << dev << ": " << n << " sessions\n";
  out << per_device.size() << " devices\n";
  out << d.matrices.size() << " sessions, " << d.shape.seq_len << 'x' << d.shape.feature_count << '\n';
  out << "wrote " << path.string() << '\n';
  return kOk;
}

inline int cmd_train(const ExperimentConfig& cfg, Arch arch, std::ostream& out) {
  const LoadedData d = load_data(cfg);
  const auto spec = spec_for(cfg, arch, d);
  models::TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  const auto tm = models::train(spec, d.matrices, tc);
  const auto ev = models::evaluate_holdout(tm, d.matrices);

  fs::create_directories(cfg.output_dir);
  const std::string id = models::arch_id(arch);
  const fs::path params = cfg.output_dir / ("model_" + id + ".bin");
  const fs::path sidecar = cfg.output_dir / ("model_" + id + ".json");
  const fs::path history = cfg.output_dir / ("history_" + id + ".csv");
  models::save_trained(tm, params, sidecar);
  std::string hist = "epoch,loss\n";
  for (std::size_t e = 0; e < tm.history.size(); ++e) {
    hist += std::to_string(e + 1) + ',' + csv::format_double(tm.history[e]) + '\n';
  }
  write_text(history, hist);

  out << models::arch_display_name(arch) << ": " << tm.history.size() << " epochs, final loss "
      << (tm.history.empty() ? 0.0 : tm.history.back()) << ", holdout accuracy " << experiment::format_acc(ev.accuracy)
      << " (" << ev.correct << '/' << ev.total << ")\n";
  out << "wrote " << params.string() << ", " << sidecar.string() << ", " << history.string() << '\n';
  return kOk;
}

inline void write_report_artifacts(const experiment::ComparisonReport& rep, const fs::path& dir) {
  fs::create_directories(dir);
  write_text(dir / "report.json", experiment::report_to_json(rep).dump(2) + "\n");
  write_text(dir / "report.md", experiment::render_markdown(rep));
  write_text(dir / "boxplot.svg", experiment::render_boxplot_svg(rep));
  write_text(dir / "quartiles.csv", experiment::render_quartile_csv(rep));
}

inline int cmd_compare(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.repeats < 2) throw Error(Errc::BadConfig, "compare needs repeats >= 2");
  const LoadedData d = load_data(cfg);
  std::vector<models::ModelSpec> specs;
  for (Arch a : cfg.architectures) specs.push_back(spec_for(cfg, a, d));

  const auto rm = experiment::run_experiment(specs, d.matrices, cfg.train, cfg.repeats, cfg.seed, cfg.jobs,
                                             [&err](Arch a, std::size_t r, double acc) {
                                               err << "  " << models::arch_display_name(a) << " repeat " << r
                                                   << ": " << experiment::format_acc(acc) << '\n';
                                             });
  fs::create_directories(cfg.output_dir);
  {
    std::string runs = "architecture,repeat,seed,accuracy\n";
    for (std::size_t a = 0; a < rm.archs.size(); ++a) {
      for (std::size_t r = 0; r < rm.repeats; ++r) {
        runs += std::string(models::arch_display_name(rm.archs[a])) + ',' + std::to_string(r) + ',' +
                std::to_string(rm.seeds[r]) + ',' + (rm.samples[a][r] ? csv::format_double(*rm.samples[a][r]) : "") +
                '\n';
      }
    }
    write_text(cfg.output_dir / "runs.csv", runs);
  }
  if (!rm.complete()) {
    for (const auto& f : rm.failures) err << "run failed: " << f << '\n';
    throw Error(Errc::IncompleteRuns, std::to_string(rm.failures.size()) + " run(s) failed");
  }
  const auto rep = experiment::compare_architectures(rm);
  write_report_artifacts(rep, cfg.output_dir);
  out << experiment::render_markdown(rep);
  out << "wrote report.json, report.md, boxplot.svg, quartiles.csv, runs.csv to " << cfg.output_dir.string() << '\n';
  return kOk;
}

/// Re-renders markdown, SVG and quartile CSV from an existing report.json.
inline int cmd_report(const fs::path& report_json, const fs::path& out_dir, std::ostream& out) {
  std::ifstream in(report_json);
  if (!in) throw Error(Errc::MissingFile, report_json.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::SchemaMismatch, report_json.string() + ": " + e.what());
  }
  auto rep = experiment::report_from_json(j);
  experiment::flag_significance(rep);
  fs::create_directories(out_dir);
  write_text(out_dir / "report.md", experiment::render_markdown(rep));
  write_text(out_dir / "boxplot.svg", experiment::render_boxplot_svg(rep));
  write_text(out_dir / "quartiles.csv", experiment::render_quartile_csv(rep));
  out << experiment::render_markdown(rep);
  return kOk;
}

// ---------------------------------------------------------------------------

inline int exit_code_for(const Error& e) {
  if (e.code() == Errc::BadConfig || e.code() == Errc::InvalidSpec || e.code() == Errc::KernelTooWide) return kUsage;
  if (e.is_data_error()) return kDataError;
  return kRuntimeError;
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Packet-sequence IoT device identification with LSTM-family classifiers"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::size_t> repeats, jobs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::string arch_name = "VanillaLstm";
  std::string report_path;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config_path, "Experiment config (JSON)");
    if (config_required) opt->required();
    sub->add_option("--seed", seed, "Master seed (overrides config and SEQDEVID_SEED)");
    sub->add_option("--out", out_dir, "Output directory");
  };
  auto* extract = app.add_subcommand("extract", "Ingest captures and write the feature dataset");
  add_common(extract, true);
  auto* train = app.add_subcommand("train", "Train one architecture on a holdout split");
  add_common(train, true);
  train->add_option("--arch", arch_name, "VanillaLstm | StackedLstm | CnnLstm | EncoderDecoderLstm");
  auto* compare = app.add_subcommand("compare", "Repeated training of all architectures plus statistics");
  add_common(compare, true);
  compare->add_option("--repeats", repeats, "Repeats per architecture");
  compare->add_option("--jobs", jobs, "Concurrent training runs");
  auto* report = app.add_subcommand("report", "Re-render markdown/SVG from report.json");
  add_common(report, false);
  report->add_option("--report", report_path, "Path to report.json (default: <out>/report.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int rc = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return rc == 0 ? kOk : kUsage;
  }

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (const char* env = std::getenv("SEQDEVID_SEED"); env && *env) {
      const auto v = csv::parse_int(env);
      if (!v || *v < 0) throw Error(Errc::BadConfig, std::string("SEQDEVID_SEED is not a non-negative integer: ") + env);
      cfg.seed = static_cast<std::uint64_t>(*v);
    }
    if (seed) cfg.seed = *seed;
    if (out_dir) cfg.output_dir = *out_dir;
    if (repeats) cfg.repeats = *repeats;
    if (jobs) cfg.jobs = *jobs;

    if (report->parsed()) {
      const fs::path rp = report_path.empty() ? cfg.output_dir / "report.json" : fs::path(report_path);
      return cmd_report(rp, cfg.output_dir, out);
    }
    cfg.validate();
    if (extract->parsed()) return cmd_extract(cfg, out);
    if (train->parsed()) return cmd_train(cfg, models::parse_arch(arch_name), out);
    return cmd_compare(cfg, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace seqdevid::cli
