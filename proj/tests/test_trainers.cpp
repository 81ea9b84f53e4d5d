#include "doctest.h"
#include "support.hpp"

#include "gas_sentinel/errors.hpp"
#include "gas_sentinel/experiment.hpp"
#include "gas_sentinel/trainer_spec.hpp"

using namespace gas_sentinel;

namespace {

// f(x) = 1/2 x'Ax - b'x + 1 with A = [[3, 1], [1, 2]], b = (1, 1); minimiser (0.2, 0.4),
// minimum 0.7.
class Quadratic final : public Objective {
 public:
  std::size_t dimension() const override { return 2; }
  double value(std::span<const double> x) override {
    return 0.5 * (3 * x[0] * x[0] + 2 * x[0] * x[1] + 2 * x[1] * x[1]) - x[0] - x[1] + 1.0;
  }
  double value_and_gradient(std::span<const double> x, std::span<double> g) override {
    g[0] = 3 * x[0] + x[1] - 1;
    g[1] = x[0] + 2 * x[1] - 1;
    return value(x);
  }
};

const std::vector<TrainingPattern>& fixture_patterns() {
  static const auto patterns = [] {
    const Dataset ds = generate_grid(default_levels(), table1_sensor_model(), kDefaultNoiseSigma, 0);
    return prepare_data(ds, default_sweep_request().data).train;
  }();
  return patterns;
}

std::vector<double> final_sses(TrainerSpec spec, std::size_t seeds) {
  return collect_sse_samples(spec, fixture_patterns(), seeds, 0).values;
}

}  // namespace

TEST_CASE("CG solves a 2-d quadratic in two iterations") {
  Quadratic q;
  CgParams params;
  const CgResult r = minimize_cg(q, {2.0, -3.0}, params);
  REQUIRE(r.values.size() <= 2);
  CHECK(std::abs(r.x[0] - 0.2) < 1e-8);
  CHECK(std::abs(r.x[1] - 0.4) < 1e-8);
}

TEST_CASE("CG stops at a stationary start") {
  const auto cfg = NetworkConfig::uniform(3);
  const Network start(cfg, std::vector<double>(cfg.weight_count(), 0.0));
  const std::vector<TrainingPattern> ps = {{{0.1, 0.2, 0.3, 0.4, 0.5}, {0.5, 0.5, 0.5, 0.5, 0.5}}};
  const auto t = train_cg(start, ps, CgParams{});
  CHECK(t.terminated_by == Termination::stationary_point);
  CHECK(t.sse.size() == 1);
  CHECK(t.final_sse() == sse(start, ps));
  CHECK(t.network() == start);
}

TEST_CASE("CG trace, budget and accounting") {
  const auto cfg = NetworkConfig::uniform(4);
  const Network start = init_weights(cfg, -1.5, 1.5, 3);
  const auto ps = oracle::random_patterns(30, 8);
  CgParams params;
  params.max_iterations = 40;
  const auto t = train_cg(start, ps, params);
  CHECK(t.final_sse() == sse(t.network(), ps));
  CHECK(t.epochs_run == t.sse.size());
  CHECK(t.final_sse() < sse(start, ps));
  for (std::size_t k = 1; k < t.sse.size(); ++k) CHECK(t.sse[k] <= t.sse[k - 1]);

  params.max_evaluations = 25;
  const auto capped = train_cg(start, ps, params);
  CHECK(capped.sse_evaluations <= 25);
  CHECK(capped.terminated_by == Termination::budget_exhausted);

  params.max_evaluations = 0;
  params.execution = kernels::Execution::parallel;
  CHECK(train_cg(start, ps, params).sse == train_cg(start, ps, CgParams{.max_iterations = 40}).sse);
  CHECK_THROWS_AS(train_cg(start, std::vector<TrainingPattern>{}, params), ArgumentError);
}

TEST_CASE("GA") {
  const auto cfg = NetworkConfig::uniform(3);
  const auto ps = oracle::random_patterns(20, 2);
  GaParams params;
  params.population_size = 12;
  params.generations = 200;

  SUBCASE("identical chromosomes without mutation keep the best SSE") {
    const Network n = init_weights(cfg, -1, 1, 4);
    std::vector<std::vector<double>> pop(12, std::vector<double>(n.weights().begin(), n.weights().end()));
    params.mutation_rate = 0.0;
    params.generations = 30;
    const auto t = train_ga(cfg, ps, params, pop);
    for (double v : t.sse) CHECK(v == t.sse.front());
  }
  SUBCASE("elitism makes the best SSE non-increasing") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      params.seed = seed;
      const auto t = train_ga(cfg, ps, params);
      CHECK(t.sse.size() == 200);
      CHECK(t.sse_evaluations == 200 * 12);
      CHECK(t.population == 12);
      for (std::size_t k = 1; k < t.sse.size(); ++k) CHECK(t.sse[k] <= t.sse[k - 1]);
      CHECK(t.final_sse() == sse(t.network(), ps));
    }
  }
  SUBCASE("deterministic per seed and execution") {
    params.generations = 20;
    params.seed = 9;
    const auto a = train_ga(cfg, ps, params);
    params.execution = kernels::Execution::serial;
    const auto b = train_ga(cfg, ps, params);
    CHECK(a.sse == b.sse);
    CHECK(a.network() == b.network());
  }
  SUBCASE("parameter checks") {
    params.elitism_count = 12;
    CHECK_THROWS_AS(train_ga(cfg, ps, params), ConfigError);
    params.elitism_count = 1;
    params.tournament_size = 1;
    CHECK_THROWS_AS(train_ga(cfg, ps, params), ConfigError);
    params.tournament_size = 3;
    CHECK_THROWS_AS(train_ga(cfg, std::vector<TrainingPattern>{}, params), ArgumentError);
  }
}

TEST_CASE("PSO") {
  const auto cfg = NetworkConfig::uniform(3);
  const auto ps = oracle::random_patterns(20, 3);
  PsoParams params;
  params.swarm_size = 10;
  params.iterations = 150;

  SUBCASE("a lone particle with no velocity stays put") {
    const Network n = init_weights(cfg, -1, 1, 4);
    const std::vector<double> x(n.weights().begin(), n.weights().end());
    params.swarm_size = 1;
    params.inertia = 0.0;
    params.iterations = 20;
    const auto t = train_pso(cfg, ps, params, SwarmState{{x}, {std::vector<double>(x.size(), 0.0)}});
    for (double v : t.sse) CHECK(v == t.sse.front());
    CHECK(t.network() == n);
  }
  SUBCASE("global best never gets worse") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      params.seed = seed;
      params.inertia = 0.4 + 0.1 * static_cast<double>(seed);
      const auto t = train_pso(cfg, ps, params);
      CHECK(t.sse_evaluations == 150 * 10);
      for (std::size_t k = 1; k < t.sse.size(); ++k) CHECK(t.sse[k] <= t.sse[k - 1]);
      CHECK(t.final_sse() == sse(t.network(), ps));
    }
  }
  SUBCASE("deterministic per seed and execution") {
    params.iterations = 20;
    const auto a = train_pso(cfg, ps, params);
    params.execution = kernels::Execution::serial;
    const auto b = train_pso(cfg, ps, params);
    CHECK(a.sse == b.sse);
  }
  SUBCASE("parameter checks") {
    params.inertia = 1.5;
    CHECK_THROWS_AS(train_pso(cfg, ps, params), ConfigError);
    params.inertia = 0.7;
    params.velocity_clamp = 0.0;
    CHECK_THROWS_AS(train_pso(cfg, ps, params), ConfigError);
  }
}

TEST_CASE("trainer spec dispatch and budgets") {
  TrainerSpec spec;
  spec.kind = TrainerKind::ga;
  const auto ga = with_evaluation_budget(spec, 15000);
  CHECK(ga.ga.generations == 500);
  CHECK(ga.bp.max_epochs == 15000);
  CHECK(ga.cg.max_evaluations == 15000);
  spec.kind = TrainerKind::pso;
  CHECK(with_evaluation_budget(spec, 3000).pso.iterations == 100);
  CHECK_THROWS_AS(with_evaluation_budget(spec, 10), ArgumentError);
  CHECK(trainer_kind_from_string("cg") == TrainerKind::cg);
  CHECK_THROWS_AS(trainer_kind_from_string("sgd"), ArgumentError);
}

TEST_CASE("trainer tendencies on the fixture subset" * doctest::timeout(120)) {
  TrainerSpec bp = default_sweep_request().spec;
  const double bp_median = oracle::median(final_sses(bp, 10));

  SUBCASE("CG ends within 2x of BP at an equal iteration budget") {
    TrainerSpec cg = bp;
    cg.kind = TrainerKind::cg;
    cg.cg.max_iterations = 1000;
    CHECK(oracle::median(final_sses(cg, 10)) <= 2.0 * bp_median);
  }
  SUBCASE("GA ends worse than BP at a matched evaluation budget") {
    TrainerSpec ga = bp;
    ga.kind = TrainerKind::ga;
    CHECK(oracle::median(final_sses(with_evaluation_budget(ga, 15000), 10)) >
          oracle::median(final_sses(with_evaluation_budget(bp, 15000), 10)));
  }
  SUBCASE("PSO ends within 3x of BP") {
    TrainerSpec pso = bp;
    pso.kind = TrainerKind::pso;
    pso.pso.iterations = 1000;
    CHECK(oracle::median(final_sses(pso, 10)) <= 3.0 * bp_median);
  }
}
