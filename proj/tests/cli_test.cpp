#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "reqsmell/reqsmell.hpp"

using namespace reqsmell;
namespace fs = std::filesystem;

namespace {

const std::string kCli = REQSMELL_CLI;
const std::string kFixture = std::string(REQSMELL_TEST_DATA_DIR) + "/fixture.jsonl";
const std::string kGolden = std::string(REQSMELL_TEST_DATA_DIR) + "/golden";

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("reqsmell_cli_" + std::string(
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(const std::string& args) const {
    const std::string cmd = kCli + " " + args + " >" + path("stdout.txt") + " 2>" + path("stderr.txt");
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const std::string& name) const { return detail::read_file(path(name)); }

  void write(const std::string& name, const std::string& content) const { std::ofstream(path(name)) << content; }

  fs::path dir_;
};

} // namespace

TEST_F(Cli, LintFixtureFindsSmells) {
  EXPECT_EQ(run("lint --in " + kFixture + " --out " + path("f.json") + " --summary " + path("s.txt") + " --quiet"), 1);
  EXPECT_EQ(read("f.json"), detail::read_file(kGolden + "/fixture_findings.json"));
  EXPECT_NE(read("s.txt").find("finding(s) in 24 of 30 requirement(s)"), std::string::npos) << read("s.txt");
  EXPECT_TRUE(read("stdout.txt").empty());
  auto sidecar = nlohmann::json::parse(read("f.json.config.json"));
  EXPECT_EQ(sidecar["command"], "lint");
  EXPECT_EQ(sidecar["config_hash"].get<std::string>().size(), 16u);
  EXPECT_EQ(sidecar["config"]["seed"], 42);
}

TEST_F(Cli, LintCleanCorpusExitsZero) {
  write("clean.jsonl", "{\"id\":\"a\",\"text\":\"The vehicle shall stop within 10 m.\"}\n");
  EXPECT_EQ(run("lint --in " + path("clean.jsonl") + " --out " + path("f.json")), 0);
  EXPECT_EQ(read("f.json"), "[]\n");
}

TEST_F(Cli, ErrorsExitTwo) {
  EXPECT_EQ(run("lint --in " + path("missing.jsonl") + " --out " + path("f.json")), 2);
  EXPECT_NE(read("stderr.txt").find("missing.jsonl"), std::string::npos);
  EXPECT_EQ(run("lint --in " + kFixture), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("lint --in " + kFixture + " --out " + path("f.json") + " --mode psychic"), 2);
  write("bad.jsonl", "{\"id\":\"a\",\"text\":\"\"}\n");
  EXPECT_EQ(run("ingest --in " + path("bad.jsonl") + " --out " + path("o.jsonl")), 2);
  EXPECT_NE(read("stderr.txt").find("line 1"), std::string::npos) << read("stderr.txt");
}

TEST_F(Cli, AutolabelReproducesGoldenLabels) {
  EXPECT_EQ(run("autolabel --in " + kFixture + " --mode pos_proxy --out " + path("l.jsonl")), 0);
  EXPECT_EQ(read("l.jsonl"), detail::read_file(kGolden + "/fixture_labels.jsonl"));
  EXPECT_EQ(run("autolabel --in " + kFixture + " --drop-clean --out " + path("d.jsonl")), 0);
  EXPECT_EQ(load_corpus(path("d.jsonl"), CorpusFormat::jsonl).size(), 21u);
}

TEST_F(Cli, IngestConvertsFormats) {
  EXPECT_EQ(run("ingest --in " + kFixture + " --out " + path("c.csv") + " --out-format csv"), 0);
  EXPECT_EQ(run("ingest --in " + path("c.csv") + " --out " + path("back.jsonl")), 0);
  EXPECT_EQ(read("back.jsonl"), detail::read_file(kFixture));
}

TEST_F(Cli, StatsOnLabeledFixture) {
  EXPECT_EQ(run("stats --in " + kGolden + "/fixture_labels.jsonl --out " + path("s.json")), 0);
  auto j = nlohmann::json::parse(read("s.json"));
  EXPECT_EQ(j["total"], 30);
  EXPECT_EQ(j["label_count_histogram"], nlohmann::json::parse(R"({"0": 9, "1": 13, "2": 7, "3": 1})"));
  EXPECT_EQ(j["class_counts"]["SUBJECTIVE_LANGUAGE"], 12);
  EXPECT_EQ(j.at("config_hash").get<std::string>().size(), 16u);
  EXPECT_EQ(run("stats --in " + kFixture + " --out " + path("u.json")), 2);
}

TEST_F(Cli, TrainRejectsUnknownModel) {
  EXPECT_EQ(run("train --in " + kGolden + "/fixture_labels.jsonl --model forest --out " + path("m.json")), 2);
  EXPECT_NE(read("stderr.txt").find("forest"), std::string::npos);
}

TEST_F(Cli, InvalidConfigKeyIsNamed) {
  write("cfg.json", R"({"svm": {"lambd": 0.1}})");
  EXPECT_EQ(run("crossval --in " + kGolden + "/fixture_labels.jsonl --config " + path("cfg.json") + " --out " +
                path("cv.json")),
            2);
  EXPECT_NE(read("stderr.txt").find("svm.lambd"), std::string::npos) << read("stderr.txt");
}

TEST_F(Cli, TrainWritesLoadableModel) {
  write("cfg.json", R"({"mlp": {"hidden": 8, "epochs": 5}})");
  for (const std::string model : {"mlp", "svm", "nb", "ensemble"}) {
    ASSERT_EQ(run("train --in " + kGolden + "/fixture_labels.jsonl --config " + path("cfg.json") + " --model " +
                  model + " --out " + path(model + ".json")),
              0)
        << read("stderr.txt");
    auto j = nlohmann::ordered_json::parse(read(model + ".json"));
    auto loaded = model_from_json(j["model"]);
    EXPECT_EQ(loaded.label_names.size(), 5u);
    EXPECT_EQ(Vocabulary::from_json(j["vocabulary"]).size(), std::visit([](const auto& m) {
                if constexpr (std::is_same_v<std::decay_t<decltype(m)>, LinearOvrModel>) return m.input_dim;
                else return m.input_dim();
              }, loaded.model));
  }
}

TEST_F(Cli, CrossvalAndCurveAreReproducible) {
  write("cfg.json", R"({"model": "svm", "curve": {"fractions": [0.5, 0.75, 1.0]}})");
  const std::string in = kGolden + "/fixture_labels.jsonl";
  for (const std::string tag : {"a", "b"}) {
    ASSERT_EQ(run("crossval --in " + in + " --k 3 --config " + path("cfg.json") + " --out " + path("cv_" + tag + ".json")), 0)
        << read("stderr.txt");
    ASSERT_EQ(run("curve --in " + in + " --config " + path("cfg.json") + " --out " + path("curve_" + tag + ".csv")), 0)
        << read("stderr.txt");
  }
  EXPECT_EQ(read("cv_a.json"), read("cv_b.json"));
  EXPECT_EQ(read("curve_a.csv"), read("curve_b.csv"));
  EXPECT_EQ(read("curve_a.csv.summary.json"), read("curve_b.csv.summary.json"));
  EXPECT_EQ(nlohmann::json::parse(read("cv_a.json"))["k"], 3);
  EXPECT_EQ(run("crossval --in " + in + " --k 3 --seed 7 --config " + path("cfg.json") + " --out " + path("cv_c.json")), 0);
  EXPECT_NE(read("cv_a.json"), read("cv_c.json"));
}
