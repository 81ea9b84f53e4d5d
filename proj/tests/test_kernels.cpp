#include "doctest.h"
#include "support.hpp"

#include "gas_sentinel/errors.hpp"
#include "gas_sentinel/kernels.hpp"

#include <cstdlib>

using namespace gas_sentinel;

TEST_CASE("OpenMP kernels are bit-identical to the serial reference") {
  for (std::size_t h : {1u, 4u, 8u}) {
    const auto cfg = NetworkConfig::uniform(h, 2);
    const Network net = init_weights(cfg, -1.5, 1.5, h);
    const auto ps = oracle::random_patterns(97, h);

    std::vector<double> gs(cfg.weight_count()), go(cfg.weight_count());
    kernels::serial::batch_gradient(cfg, net.weights(), ps, gs);
    kernels::omp::batch_gradient(cfg, net.weights(), ps, go);
    CHECK(gs == go);

    CHECK(kernels::serial::dataset_sse(cfg, net.weights(), ps) ==
          kernels::omp::dataset_sse(cfg, net.weights(), ps));
    CHECK(kernels::serial::dataset_sse(cfg, net.weights(), ps) == sse(net, ps));

    std::vector<std::vector<double>> pop;
    for (std::uint64_t s = 0; s < 9; ++s) {
      const Network n = init_weights(cfg, -1, 1, 100 + s);
      pop.emplace_back(n.weights().begin(), n.weights().end());
    }
    std::vector<double> ss(pop.size()), so(pop.size());
    kernels::serial::population_sse(cfg, pop, ps, ss);
    kernels::omp::population_sse(cfg, pop, ps, so);
    CHECK(ss == so);
  }
}

TEST_CASE("kernel errors surface from parallel regions") {
  const auto cfg = NetworkConfig::uniform(3);
  const Network net = init_weights(cfg, -1, 1, 0);
  const auto ps = oracle::random_patterns(5, 0);
  std::vector<double> wrong(cfg.weight_count() + 1);
  CHECK_THROWS_AS(kernels::omp::batch_gradient(cfg, net.weights(), ps, wrong), ShapeError);
  std::vector<std::vector<double>> pop = {std::vector<double>(3)};
  std::vector<double> out(1);
  CHECK_THROWS_AS(kernels::omp::population_sse(cfg, pop, ps, out), ShapeError);
}

TEST_CASE("worker limit honours the environment") {
  ::setenv("GAS_SENTINEL_WORKERS", "3", 1);
  CHECK(kernels::worker_limit() == 3);
  ::setenv("GAS_SENTINEL_WORKERS", "0", 1);
  CHECK(kernels::worker_limit() >= 1);
  ::unsetenv("GAS_SENTINEL_WORKERS");
  CHECK(kernels::worker_limit() >= 1);
}
