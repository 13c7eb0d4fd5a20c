// Copyright 2026 The guru Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <sstream>

#include "guru/cli/commands.hpp"
#include "guru/util/error.hpp"
#include "train_fixtures.hpp"

using namespace guru;
using namespace guru::cli;
using nlohmann::json;

namespace {

json tiny_experiment(const std::filesystem::path& out, int overlap = 20) {
  return {{"output", out.string()},
          {"data",
           {{"source", "synthetic"},
            {"synthetic",
             {{"users_per_domain", 60},
              {"items_per_domain", 40},
              {"overlap_count", overlap},
              {"latent_dim", 4},
              {"mean_len_a", 8},
              {"mean_len_b", 10},
              {"seed", 3}}}}},
          {"model",
           {{"network", {{"max_len", 10}, {"d", 8}, {"layers", 1}, {"heads", 2}, {"d_ff", 16}, {"dropout", 0.1}}},
            {"window", 5},
            {"n_sampled", 5},
            {"n_bpr_neg", 3},
            {"batch_size", 16},
            {"critic_hidden", 8},
            {"seed", 5},
            {"pretrain", {{"epochs", 1}, {"warmup", 10}}},
            {"adversarial", {{"iterations", 2}}},
            {"finetune", {{"epochs", 1}, {"cuts", 2}}}}},
          {"eval", {{"n_neg", 20}, {"baselines", {"POP"}}}},
          {"variant", "RecGURU"}};
}

std::filesystem::path write_config(const std::filesystem::path& dir, const json& j) {
  std::filesystem::create_directories(dir);
  const auto path = dir / "config.json";
  std::ofstream(path) << j.dump(2);
  return path;
}

struct CliResult {
  int code;
  std::string out, err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "guru");
  args.push_back("-q");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string config_error(const json& j) {
  try {
    parse_experiment_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config errors name the offending field") {
    const auto base = tiny_experiment("/tmp/unused");
    auto j = base;
    j["model"]["network"]["d"] = -4;
    CHECK(config_error(j).rfind("model.network.d", 0) == 0);
    j = base;
    j["colour"] = 1;
    CHECK(config_error(j) == "colour: unknown field");
    j = base;
    j["data"]["synthetic"]["users"] = 10;
    CHECK(config_error(j) == "data.synthetic.users: unknown field");
    j = base;
    j["data"]["overlap_rate"] = 1.5;
    CHECK(config_error(j).rfind("data.overlap_rate", 0) == 0);
    j = base;
    j["eval"]["baselines"] = {"ItemKNN"};
    CHECK(config_error(j).rfind("eval.baselines", 0) == 0);
    j = base;
    j["variant"] = "GRU4Rec";
    CHECK(config_error(j).rfind("variant", 0) == 0);
    j = base;
    j["data"]["source"] = "raw";
    CHECK(config_error(j).rfind("data.raw", 0) == 0);
    CHECK(config_error(base).empty());
  }

  TEST_CASE("relative output paths resolve against the output root") {
    auto j = tiny_experiment("runs/x");
    setenv(kOutputRootEnv, "/tmp/guru-root", 1);
    const auto cfg = parse_experiment_config(j);
    unsetenv(kOutputRootEnv);
    CHECK(cfg.output == std::filesystem::path("/tmp/guru-root/runs/x"));
    CHECK(cfg.data.dir == std::filesystem::path("/tmp/guru-root/runs/x/data"));
    CHECK(cfg.variant_dir(trainer::Variant::AutoRec) == std::filesystem::path("/tmp/guru-root/runs/x/AutoRec"));
  }

  TEST_CASE("exit codes") {
    const auto dir = testing::fresh_dir("guru_cli_exit");
    CHECK(run({"train", "-c", (dir / "missing.json").string()}).code == kExitInput);
    CHECK(run({"frobnicate"}).code == kExitInput);
    CHECK(run({"train"}).code == kExitInput);
    CHECK(run({"plot", "--traces", (dir / "nope").string()}).code == kExitArtifactMissing);

    std::filesystem::create_directories(dir);
    std::ofstream(dir / "broken.json") << "{ not json";
    CHECK(run({"train", "-c", (dir / "broken.json").string()}).code == kExitInput);

    auto j = tiny_experiment(dir / "out");
    j["model"]["window"] = 0;
    const auto bad = run({"train", "-c", write_config(dir / "bad", j).string()});
    CHECK(bad.code == kExitInput);
    CHECK(bad.err.find("model.window") != std::string::npos);

    const auto cfg = write_config(dir, tiny_experiment(dir / "out")).string();
    CHECK(run({"train", "-c", cfg}).code == kExitArtifactMissing);  // no data yet
    REQUIRE(run({"synth", "-c", cfg}).code == kExitOk);
    CHECK(run({"eval", "-c", cfg}).code == kExitArtifactMissing);  // not trained
    CHECK(run({"train", "-c", cfg, "--variant", "Nope"}).code == kExitInput);
    CHECK(run({"--help"}).code == kExitOk);
  }

  TEST_CASE("synth: seeds, determinism and an empty overlap") {
    const auto dir = testing::fresh_dir("guru_cli_synth");
    const auto cfg = parse_experiment_config(tiny_experiment(dir / "a"));
    const auto m1 = cmd_synth(cfg);
    const auto m2 = cmd_synth(cfg);
    CHECK(m1["manifest_hash"] == m2["manifest_hash"]);
    const auto m3 = cmd_synth(cfg, 99);
    CHECK(m3["manifest_hash"] != m1["manifest_hash"]);
    CHECK(m3["provenance"]["seed"] == 99);

    const auto zero = parse_experiment_config(tiny_experiment(dir / "b", 0));
    const auto m0 = cmd_synth(zero);
    CHECK(m0["counts"]["overlap"] == 0);
    CHECK(testing::read_file(zero.data.dir / "overlap.tsv").empty());
    CHECK(load_training_data(zero).data.overlap.empty());
  }

  TEST_CASE("overlap_rate subsamples the linked users") {
    const auto dir = testing::fresh_dir("guru_cli_rate");
    auto j = tiny_experiment(dir, 40);
    j["data"]["overlap_rate"] = 0.1;
    const auto cfg = parse_experiment_config(j);
    const auto m = cmd_synth(cfg);
    CHECK(m["counts"]["overlap_rate"].get<double>() < 0.25);
    CHECK(m["provenance"].contains("subsample"));
  }

  TEST_CASE("plot: empty traces fail, monotone traces stay monotone") {
    const auto dir = testing::fresh_dir("guru_cli_plot");
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "empty.log") << "";
    CHECK_THROWS_AS(cmd_plot(dir / "empty.log", dir / "plots"), InputError);
    CHECK(run({"plot", "--traces", (dir / "empty.log").string()}).code == kExitInput);

    {
      std::ofstream log(dir / "finetune_A.log");
      log << json{{"event", "meta"}, {"stage", "finetune_A"}}.dump() << '\n';
      for (int e = 1; e <= 6; ++e)
        log << json{{"event", "epoch"}, {"epoch", e}, {"loss", 1.0 / e}, {"val_hr@10", 0.1 * e}}.dump() << '\n';
    }
    const auto files = cmd_plot(dir / "finetune_A.log", dir / "plots");
    REQUIRE(files.size() == 2);
    std::istringstream csv(testing::read_file(files[0]));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "epoch,loss,val_hr@10");
    double prev = 1e9;
    int rows = 0;
    while (std::getline(csv, line)) {
      const auto a = line.find(','), b = line.find(',', a + 1);
      const double loss = std::stod(line.substr(a + 1, b - a - 1));
      CHECK(loss < prev);
      prev = loss;
      ++rows;
    }
    CHECK(rows == 6);
    CHECK(testing::read_file(files[1]).find("<svg") != std::string::npos);
  }

  TEST_CASE("the output directory lock is exclusive") {
    const auto dir = testing::fresh_dir("guru_cli_lock");
    {
      DirectoryLock held(dir);
      CHECK_THROWS_AS(DirectoryLock{dir}, InputError);
      const auto cfg = write_config(dir / "cfg", tiny_experiment(dir)).string();
      const auto r = run({"synth", "-c", cfg});
      CHECK(r.code == kExitInput);
      CHECK(r.err.find("in use") != std::string::npos);
    }
    CHECK_NOTHROW(DirectoryLock{dir});
  }

  TEST_CASE("train, eval and a checkpoint from another configuration") {
    const auto dir = testing::fresh_dir("guru_cli_train");
    const auto cfg = parse_experiment_config(tiny_experiment(dir));
    cmd_synth(cfg);
    const auto trained = cmd_train(cfg);
    REQUIRE(trained.complete);
    const auto report = cmd_eval(cfg);
    CHECK(report.has("A", "POP"));
    CHECK(std::filesystem::exists(cfg.variant_dir(trainer::Variant::RecGURU) / "eval" / "report.json"));
    // Evaluating the stored checkpoints reproduces the training report.
    CHECK(report.to_json()["results"]["A"]["RecGURU"] == trained.report.to_json()["results"]["A"]["RecGURU"]);

    const auto ckpt = trainer::latest_checkpoint(cfg.variant_dir(trainer::Variant::RecGURU) / "finetune_A");
    REQUIRE(!ckpt.empty());
    CHECK_NOTHROW(cmd_eval(cfg, ckpt));
    auto other_json = tiny_experiment(dir);
    other_json["model"]["seed"] = 6;
    const auto other = parse_experiment_config(other_json);
    CHECK_THROWS_AS(cmd_eval(other, ckpt), InputError);
    const auto pre = trainer::latest_checkpoint(cfg.variant_dir(trainer::Variant::RecGURU) / "pretrain");
    CHECK_THROWS_AS(cmd_eval(cfg, pre), InputError);
    // A changed config refuses the existing run directory.
    CHECK_THROWS_AS(cmd_train(other), InputError);
  }

  TEST_CASE("run-all reports every variant and baseline") {
    const auto dir = testing::fresh_dir("guru_cli_runall");
    const auto cfg_path = write_config(dir / "cfg", tiny_experiment(dir / "out")).string();
    const auto r = run({"run-all", "-c", cfg_path});
    REQUIRE(r.code == kExitOk);
    const auto report = json::parse(testing::read_file(dir / "out" / "report.json"));
    const auto text = report.dump();
    for (const char* name : {"SeqRec", "AutoRec", "RecGURU", "POP"}) CHECK(text.find(name) != std::string::npos);
    CHECK(report["meta"]["config_hashes"].size() == 3);
    const auto again = run({"run-all", "-c", cfg_path});
    CHECK(again.code == kExitOk);
    CHECK(testing::read_file(dir / "out" / "report.json") == report.dump(2) + "\n");
  }
}
