#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "seqdevid/cli.hpp"
#include "support/synthetic.hpp"

namespace seqdevid::cli {
namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "seqdevid");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  testing::TempDir dir{"cli"};

  void SetUp() override { ::unsetenv("SEQDEVID_SEED"); }
  void TearDown() override { ::unsetenv("SEQDEVID_SEED"); }

  fs::path write_config(const nlohmann::json& j, const std::string& name = "config.json") {
    const fs::path p = dir.path() / name;
    std::ofstream(p) << j.dump(2);
    return p;
  }

  fs::path toy_dataset() {
    const auto data = testing::mean_shift_dataset(3, 8, 6, 5, 21, 1.5, 0.2);
    const fs::path p = dir.path() / "toy.csv";
    features::save_dataset(p, data, 5);
    return p;
  }

  nlohmann::json toy_config(const std::string& out) {
    return {{"dataset", toy_dataset().filename().string()},
            {"model", {{"hidden", 8}, {"conv_kernels", 4}}},
            {"train", {{"epochs", 20}, {"batch_size", 8}, {"learning_rate", 0.02}}},
            {"repeats", 2},
            {"seed", 5},
            {"output_dir", out}};
  }
};

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(invoke({}).code, kUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kUsage);
  EXPECT_EQ(invoke({"train"}).code, kUsage);
  EXPECT_EQ(invoke({"--help"}).code, kOk);
  const auto both = write_config({{"dataset", "a.csv"}, {"capture_root", "."}, {"session_manifest", "m.csv"}});
  EXPECT_EQ(invoke({"train", "--config", both.string()}).code, kUsage);
  EXPECT_EQ(invoke({"train", "--config", (dir.path() / "missing.json").string()}).code, kUsage);
  auto cfg = toy_config("out");
  cfg["train"]["epochs"] = 0;
  EXPECT_EQ(invoke({"train", "--config", write_config(cfg).string()}).code, kUsage);
}

TEST_F(CliTest, MissingDatasetIsDataError) {
  const auto p = write_config({{"dataset", "nope.csv"}});
  const auto r = invoke({"train", "--config", p.string()});
  EXPECT_EQ(r.code, kDataError);
  EXPECT_NE(r.err.find("nope.csv"), std::string::npos);
}

TEST_F(CliTest, ExtractSummaryAndEmptyManifest) {
  const auto corpus = testing::write_capture_corpus(dir.path() / "corpus", 3, 4, 1);
  const auto p = write_config({{"capture_root", "corpus"}, {"session_manifest", "corpus/sessions.csv"}, {"output_dir", "ex"}});
  const auto r = invoke({"extract", "--config", p.string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find("device00: 4 sessions"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("12 sessions, 12x25"), std::string::npos) << r.out;
  const auto data = features::load_dataset(dir.path() / "ex" / "dataset.csv", features::DatasetShape{12, 25});
  EXPECT_EQ(data.size(), 12u);

  std::ofstream(dir.path() / "empty.csv") << "file,device,session\n";
  const auto pe = write_config({{"capture_root", "corpus"}, {"session_manifest", "empty.csv"}, {"output_dir", "ex2"}},
                               "empty.json");
  const auto re = invoke({"extract", "--config", pe.string()});
  EXPECT_EQ(re.code, kOk) << re.err;
  EXPECT_NE(re.out.find("0 sessions, 12x25"), std::string::npos) << re.out;
}

TEST_F(CliTest, ExtractBadCaptureNamesFile) {
  const auto corpus = testing::write_capture_corpus(dir.path() / "corpus", 2, 2, 1);
  std::ofstream(dir.path() / "corpus" / "captures" / "device01_1.pcap", std::ios::binary) << "not a capture file at all";
  const auto p = write_config({{"capture_root", "corpus"}, {"session_manifest", "corpus/sessions.csv"}});
  const auto r = invoke({"extract", "--config", p.string()});
  EXPECT_EQ(r.code, kDataError);
  EXPECT_NE(r.err.find("device01_1.pcap"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("BadMagic"), std::string::npos) << r.err;
}

TEST_F(CliTest, TrainWritesArtifactsDeterministically) {
  const auto p = write_config(toy_config("t1"));
  const auto r1 = invoke({"train", "--config", p.string(), "--arch", "CnnLstm"});
  ASSERT_EQ(r1.code, kOk) << r1.err;
  for (const char* f : {"model_CnnLstm.bin", "model_CnnLstm.json", "history_CnnLstm.csv"}) {
    EXPECT_TRUE(fs::exists(dir.path() / "t1" / f)) << f;
  }
  const auto r2 = invoke({"train", "--config", p.string(), "--arch", "CnnLstm", "--out", (dir.path() / "t2").string()});
  ASSERT_EQ(r2.code, kOk) << r2.err;
  EXPECT_EQ(slurp(dir.path() / "t1" / "model_CnnLstm.bin"), slurp(dir.path() / "t2" / "model_CnnLstm.bin"));
  EXPECT_EQ(slurp(dir.path() / "t1" / "history_CnnLstm.csv"), slurp(dir.path() / "t2" / "history_CnnLstm.csv"));
  EXPECT_EQ(invoke({"train", "--config", p.string(), "--arch", "Transformer"}).code, kUsage);
}

TEST_F(CliTest, SeedPrecedence) {
  const auto p = write_config(toy_config("s"));
  auto train_with = [&](const std::string& out, std::vector<std::string> extra) {
    std::vector<std::string> args{"train", "--config", p.string(), "--out", (dir.path() / out).string()};
    args.insert(args.end(), extra.begin(), extra.end());
    EXPECT_EQ(invoke(args).code, kOk);
    return nlohmann::json::parse(slurp(dir.path() / out / "model_VanillaLstm.json")).at("seed").get<std::uint64_t>();
  };
  EXPECT_EQ(train_with("a", {}), 5u);
  ::setenv("SEQDEVID_SEED", "11", 1);
  EXPECT_EQ(train_with("b", {}), 11u);
  EXPECT_EQ(train_with("c", {"--seed", "13"}), 13u);
  ::setenv("SEQDEVID_SEED", "eleven", 1);
  EXPECT_EQ(invoke({"train", "--config", p.string()}).code, kUsage);
}

bool python_jsonschema_available() { return std::system("python3 -c 'import jsonschema' >/dev/null 2>&1") == 0; }

bool validates(const fs::path& doc, const fs::path& schema) {
  const std::string cmd = "python3 -c 'import json,sys,jsonschema; jsonschema.validate(json.load(open(sys.argv[1])), "
                          "json.load(open(sys.argv[2])))' '" +
                          doc.string() + "' '" + schema.string() + "'";
  return std::system(cmd.c_str()) == 0;
}

TEST_F(CliTest, CompareArtifactsAndReport) {
  const auto p = write_config(toy_config("c1"));
  const auto r1 = invoke({"compare", "--config", p.string(), "--jobs", "2"});
  ASSERT_EQ(r1.code, kOk) << r1.err;
  const fs::path out = dir.path() / "c1";
  for (const char* f : {"report.json", "report.md", "boxplot.svg", "quartiles.csv", "runs.csv"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const auto md = slurp(out / "report.md");
  EXPECT_NE(md.find("| CNN-LSTM | ED-LSTM | Stacked-LSTM | Vanilla-LSTM |"), std::string::npos);
  EXPECT_NE(md.find("0.0083"), std::string::npos);

  const auto r2 = invoke({"compare", "--config", p.string(), "--out", (dir.path() / "c2").string()});
  ASSERT_EQ(r2.code, kOk) << r2.err;
  EXPECT_EQ(slurp(out / "report.json"), slurp(dir.path() / "c2" / "report.json"));

  fs::remove(out / "report.md");
  const auto rr = invoke({"report", "--out", out.string()});
  EXPECT_EQ(rr.code, kOk) << rr.err;
  EXPECT_EQ(slurp(out / "report.md"), md);
  EXPECT_EQ(invoke({"report", "--report", (dir.path() / "none.json").string()}).code, kDataError);

  if (!python_jsonschema_available()) GTEST_SKIP() << "python3 jsonschema not installed";
  EXPECT_TRUE(validates(out / "report.json", fs::path(SEQDEVID_DOCS_DIR) / "report.schema.json"));
  EXPECT_TRUE(validates(p, fs::path(SEQDEVID_DOCS_DIR) / "config.schema.json"));
}

TEST_F(CliTest, CompareNeedsTwoRepeats) {
  const auto p = write_config(toy_config("c"));
  EXPECT_EQ(invoke({"compare", "--config", p.string(), "--repeats", "1"}).code, kUsage);
}

}  // namespace
}  // namespace seqdevid::cli
