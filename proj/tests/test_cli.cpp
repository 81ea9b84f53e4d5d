#include "doctest.h"
#include "support.hpp"

#include "gas_sentinel/experiment.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace gas_sentinel;

namespace {

struct Outcome {
  int code = -1;
  std::string output;
};

Outcome cli(const std::string& args, const std::filesystem::path& dir) {
  const auto log = dir / "cli.log";
  const std::string cmd = std::string(GAS_SENTINEL_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Outcome out;
  out.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  out.output = ss.str();
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("command-line tool" * doctest::timeout(300)) {
  const auto dir = oracle::temp_dir("cli");
  const std::string data = (dir / "grid.csv").string();
  const std::string model = (dir / "model.txt").string();

  REQUIRE(cli("generate --out " + data + " --seed 3", dir).code == 0);
  const std::string first = slurp(data);
  CHECK(std::count(first.begin(), first.end(), '\n') == 244);
  CHECK(std::filesystem::exists(metadata_path(data)));
  REQUIRE(cli("generate --out " + data + " --seed 3", dir).code == 0);
  CHECK(slurp(data) == first);

  SUBCASE("train, predict, replay") {
    const auto trained = cli("train --dataset " + data + " --model " + model +
                                 " --layers 5-4-5 --epochs 30 --eta 0.3 --mode sequential --seed 2",
                             dir);
    REQUIRE(trained.code == 0);
    CHECK(std::filesystem::exists(run_record_path(model)));
    CHECK(std::filesystem::exists(model_scales_path(model)));
    const std::string weights = slurp(model);

    const auto predicted = cli("predict --model " + model + " --response 0.05,0.08,0.06,0.04,0.2", dir);
    CHECK(predicted.code == 0);
    CHECK(predicted.output.find("alarm:") != std::string::npos);
    CHECK(cli("predict --model " + model + " --ppm 50,100,100,100,2000", dir).code == 0);

    REQUIRE(cli("train --replay " + run_record_path(model) + " --model " + model, dir).code == 0);
    CHECK(slurp(model) == weights);
    REQUIRE(cli("train --dataset " + data + " --model " + model +
                    " --layers 5-4-5 --epochs 30 --eta 0.3 --mode sequential --seed 2",
                dir)
                .code == 0);
    CHECK(slurp(model) == weights);

    for (const char* kind : {"cg", "ga", "pso"}) {
      CHECK(cli(std::string("train --dataset ") + data + " --model " + model + " --trainer " + kind +
                    " --layers 5-3-5 --epochs 10",
                dir)
                .code == 0);
    }
  }
  SUBCASE("predict needs scales") {
    save_model(model, init_weights(NetworkConfig::uniform(2), -1, 1, 0));
    CHECK(cli("predict --model " + model + " --response 0.1,0.1,0.1,0.1,0.1", dir).code == 1);
    CHECK(cli("predict --model " + model +
                  " --response 0.1,0.1,0.1,0.1,0.1 --input-scale 0.6 --target-scale 5000",
              dir)
              .code == 0);
  }
  SUBCASE("a methane-saturated output reads as Warning") {
    // Output biases at +-40 saturate the sigmoid: 1.0 for CH4, ~0 elsewhere.
    const NetworkConfig cfg = NetworkConfig::uniform(1);
    std::vector<double> w(cfg.weight_count(), 0.0);
    for (std::size_t dst = 0; dst < 5; ++dst) w[oracle::weight_index(cfg.layer_sizes, 2, dst, 1)] = -40.0;
    w[oracle::weight_index(cfg.layer_sizes, 2, 4, 1)] = 40.0;
    save_model(model, Network(cfg, w));
    save_model_scales(model, {0.6, 10000.0});
    const auto r = cli("predict --model " + model + " --response 0.1,0.1,0.1,0.1,0.1", dir);
    CHECK(r.code == 0);
    CHECK(r.output.find("Warning") != std::string::npos);
    CHECK(r.output.find("10000") != std::string::npos);
    CHECK(r.output.find("alarm: none") != std::string::npos);

    const auto at_5000 = cli("predict --model " + model + " --response 0.1,0.1,0.1,0.1,0.1 --target-scale 5000", dir);
    CHECK(at_5000.code == 0);
    CHECK(at_5000.output.find("5000") != std::string::npos);
    CHECK(at_5000.output.find("Warning") != std::string::npos);
  }
  SUBCASE("an all-zero output reads as safe") {
    const NetworkConfig cfg = NetworkConfig::uniform(1);
    std::vector<double> w(cfg.weight_count(), 0.0);
    for (std::size_t dst = 0; dst < 5; ++dst) w[oracle::weight_index(cfg.layer_sizes, 2, dst, 1)] = -60.0;
    save_model(model, Network(cfg, w));
    save_model_scales(model, {0.6, 5000.0});
    const auto r = cli("predict --model " + model + " --response 0.1,0.1,0.1,0.1,0.1", dir);
    CHECK(r.code == 0);
    CHECK(r.output.find("Warning") == std::string::npos);
    CHECK(r.output.find("Unsafe") == std::string::npos);
    CHECK(r.output.find("alarm: none") != std::string::npos);
  }
  SUBCASE("sweep, compare and bench") {
    const std::string csv = (dir / "sweep.csv").string();
    CHECK(cli("sweep --dataset " + data + " --axis hidden_nodes --values 2,3 --repeats 2 --epochs 5 --out " + csv,
              dir)
              .code == 0);
    CHECK(slurp(csv).find("hidden_nodes,2,") != std::string::npos);
    const auto cmp = cli("compare --dataset " + data + " --trainers bp,pso --repeats 4 --budget 60", dir);
    CHECK(cmp.code == 0);
    CHECK(cmp.output.find("K_alpha") != std::string::npos);
    const auto bench = cli("bench --dataset " + data + " --epochs 5", dir);
    CHECK(bench.code == 0);
    CHECK(bench.output.find("identical results: yes") != std::string::npos);
  }
  SUBCASE("exit codes") {
    CHECK(cli("", dir).code == 1);
    CHECK(cli("frobnicate", dir).code == 1);
    CHECK(cli("train --dataset " + data + " --model " + model + " --eta -1", dir).code == 1);
    CHECK(cli("train --dataset " + data + " --model " + model + " --layers 5-x-5", dir).code == 1);
    CHECK(cli("train --dataset " + data + " --model " + model + " --trainer sgd", dir).code == 1);
    CHECK(cli("compare --dataset " + data + " --alpha 0.2", dir).code == 1);
    CHECK(cli("sweep --dataset " + data + " --axis volume --values 500 --out x.csv", dir).code == 1);
    CHECK(cli("train --dataset " + (dir / "missing.csv").string() + " --model " + model, dir).code == 2);
    const auto unwritable = cli("generate --out " + (dir / "no" / "such" / "dir.csv").string(), dir);
    CHECK(unwritable.code == 2);
    CHECK(unwritable.output.find("dir.csv") != std::string::npos);
    CHECK(cli("predict --model " + (dir / "none.txt").string() + " --response 0,0,0,0,0", dir).code == 2);
  }
}
