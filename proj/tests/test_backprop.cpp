#include "doctest.h"
#include "support.hpp"

#include "gas_sentinel/backprop.hpp"
#include "gas_sentinel/errors.hpp"

#include <cmath>

using namespace gas_sentinel;

TEST_CASE("gradient matches finite differences") {
  std::mt19937_64 rng(17);
  for (std::size_t trial = 0; trial < 40; ++trial) {
    const std::size_t h = 1 + trial % 8;
    const auto cfg = NetworkConfig::uniform(h, 1 + trial % 2);
    const Network net = init_weights(cfg, -1.5, 1.5, trial);
    const auto p = oracle::random_pattern(rng);
    const auto g = backprop_gradient(net, p);
    const std::vector<double> w(net.weights().begin(), net.weights().end());
    const auto fd = oracle::finite_difference(cfg.layer_sizes, w, p, 1e-5);
    REQUIRE(g.size() == fd.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      // g is the descent direction, -dE/dw.
      CHECK(oracle::gradient_close(-g[k], fd[k]));
    }
  }
}

TEST_CASE("gradient vanishes when outputs equal targets") {
  const auto cfg = NetworkConfig::uniform(3);
  const Network net(cfg, std::vector<double>(cfg.weight_count(), 0.0));
  const TrainingPattern p{{0.2, 0.4, 0.6, 0.8, 1.0}, {0.5, 0.5, 0.5, 0.5, 0.5}};
  for (double g : backprop_gradient(net, p)) CHECK(g == 0.0);
}

TEST_CASE("batch gradient is the sum of pattern gradients") {
  const auto cfg = NetworkConfig::uniform(4);
  const Network net = init_weights(cfg, -1, 1, 2);
  const auto ps = oracle::random_patterns(2, 5);
  const std::vector<TrainingPattern> twice = {ps[0], ps[0]};
  const auto single = backprop_gradient(net, ps[0]);

  BackpropScratch scratch;
  std::vector<double> acc(cfg.weight_count(), 0.0);
  for (const auto& p : twice) {
    backprop_gradient_into(cfg, net.weights(), p, scratch, acc, true);
  }
  for (std::size_t k = 0; k < acc.size(); ++k) CHECK(acc[k] == 2.0 * single[k]);

  std::vector<double> errors;
  std::vector<double> out(cfg.weight_count());
  backprop_gradient_into(cfg, net.weights(), ps[1], scratch, out, false, &errors);
  const Activations act = forward(net, ps[1].input);
  const auto o = act.output();
  REQUIRE(errors.size() == 5);
  for (std::size_t j = 0; j < 5; ++j) CHECK(errors[j] == ps[1].target[j] - o[j]);
}

TEST_CASE("apply_update follows the momentum rule") {
  const auto cfg = NetworkConfig::uniform(1);
  const std::size_t m = cfg.weight_count();
  BpParams params;

  SUBCASE("beta 0, eta 1 adds the gradient") {
    Network net = init_weights(cfg, -1, 1, 3);
    const std::vector<double> before(net.weights().begin(), net.weights().end());
    BackpropWorkspace ws(cfg);
    std::vector<double> g(m);
    for (std::size_t k = 0; k < m; ++k) g[k] = 0.01 * static_cast<double>(k);
    params.eta = 1.0;
    params.beta = 0.0;
    apply_update(net, g, ws, params);
    for (std::size_t k = 0; k < m; ++k) CHECK(net.weights()[k] == before[k] + g[k]);
    CHECK(ws.previous_update == g);
  }
  SUBCASE("momentum-only step") {
    Network net(cfg, std::vector<double>(m, 0.0));
    BackpropWorkspace ws(cfg);
    ws.previous_update.assign(m, 0.25);
    params.beta = 0.5;
    apply_update(net, std::vector<double>(m, 0.0), ws, params);
    for (double w : net.weights()) CHECK(w == 0.125);
  }
  SUBCASE("eta 0.5 beta 0.1") {
    Network net(cfg, std::vector<double>(m, 0.0));
    BackpropWorkspace ws(cfg);
    ws.previous_update.assign(m, 0.0);
    ws.previous_update[0] = 0.2;
    std::vector<double> g(m, 0.0);
    g[0] = 1.0;
    params.eta = 0.5;
    params.beta = 0.1;
    apply_update(net, g, ws, params);
    CHECK(net.weights()[0] == doctest::Approx(0.52).epsilon(1e-15));
  }
  SUBCASE("shape mismatch") {
    Network net(cfg, std::vector<double>(m, 0.0));
    BackpropWorkspace ws(cfg);
    CHECK_THROWS_AS(apply_update(net, std::vector<double>(m + 1), ws, params), ShapeError);
  }
}

TEST_CASE("batch epoch equals eta times the accumulated gradient") {
  const auto cfg = NetworkConfig::uniform(3);
  const Network start = init_weights(cfg, -1.5, 1.5, 8);
  const auto ps = oracle::random_patterns(6, 21);
  BpParams params;
  params.eta = 0.3;
  params.beta = 0.1;
  params.max_epochs = 1;
  const auto trace = train_bp(start, ps, params);

  std::vector<double> acc(cfg.weight_count(), 0.0);
  for (const auto& p : ps) {
    const auto g = backprop_gradient(start, p);
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += g[k];
  }
  for (std::size_t k = 0; k < acc.size(); ++k) {
    CHECK(trace.network().weights()[k] ==
          doctest::Approx(start.weights()[k] + 0.3 * acc[k]).epsilon(1e-13));
  }
}

TEST_CASE("train_bp termination and trace") {
  const auto cfg = NetworkConfig::uniform(5);
  const Network start = init_weights(cfg, -1.5, 1.5, 1);
  const auto ps = oracle::random_patterns(20, 4);
  BpParams params;

  SUBCASE("infinite target stops after one epoch") {
    params.target_sse = std::numeric_limits<double>::infinity();
    const auto t = train_bp(start, ps, params);
    CHECK(t.epochs_run == 1);
    CHECK(t.terminated_by == Termination::target_reached);
  }
  SUBCASE("budget") {
    params.max_epochs = 25;
    for (auto mode : {TrainingMode::batch, TrainingMode::sequential}) {
      params.mode = mode;
      const auto t = train_bp(start, ps, params);
      CHECK(t.epochs_run == 25);
      CHECK(t.sse.size() == 25);
      CHECK(t.sse_evaluations == 25);
      CHECK(t.terminated_by == Termination::budget_exhausted);
      CHECK(t.final_sse() == sse(t.network(), ps));
      for (double v : t.sse) CHECK(v >= 0.0);
      const auto again = train_bp(start, ps, params);
      CHECK(again.sse == t.sse);
      CHECK(again.network() == t.network());
    }
  }
  SUBCASE("small steps never increase SSE") {
    params.eta = 0.01;
    params.beta = 0.0;
    params.max_epochs = 100;
    const auto t = train_bp(start, ps, params);
    for (std::size_t k = 1; k < t.sse.size(); ++k) CHECK(t.sse[k] <= t.sse[k - 1] + 1e-12);
  }
  SUBCASE("sequential shuffle depends on the seed") {
    params.mode = TrainingMode::sequential;
    params.max_epochs = 3;
    params.seed = 1;
    const auto a = train_bp(start, ps, params);
    params.seed = 2;
    const auto b = train_bp(start, ps, params);
    CHECK(a.sse != b.sse);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(train_bp(start, std::vector<TrainingPattern>{}, params), ArgumentError);
    params.eta = 0.0;
    CHECK_THROWS_AS(train_bp(start, ps, params), ConfigError);
    params.eta = 0.5;
    params.beta = 1.0;
    CHECK_THROWS_AS(train_bp(start, ps, params), ConfigError);
  }
}

TEST_CASE("sequential and batch agree on the first-epoch direction for tiny eta") {
  const auto cfg = NetworkConfig::uniform(4);
  const Network start = init_weights(cfg, -1.5, 1.5, 12);
  const auto ps = oracle::random_patterns(15, 30);
  BpParams params;
  params.eta = 1e-4;
  params.beta = 0.0;
  params.max_epochs = 1;
  params.mode = TrainingMode::batch;
  const auto batch = train_bp(start, ps, params);
  params.mode = TrainingMode::sequential;
  const auto seq = train_bp(start, ps, params);

  double dot = 0, nb = 0, ns = 0;
  for (std::size_t k = 0; k < cfg.weight_count(); ++k) {
    const double db = batch.network().weights()[k] - start.weights()[k];
    const double ds = seq.network().weights()[k] - start.weights()[k];
    dot += db * ds;
    nb += db * db;
    ns += ds * ds;
  }
  CHECK(dot / std::sqrt(nb * ns) >= 0.99);
}

TEST_CASE("mode and termination names") {
  CHECK(training_mode_from_string("batch") == TrainingMode::batch);
  CHECK(training_mode_from_string("sequential") == TrainingMode::sequential);
  CHECK_THROWS_AS(training_mode_from_string("online"), ArgumentError);
  for (auto t : {Termination::target_reached, Termination::budget_exhausted,
                 Termination::stationary_point}) {
    CHECK(termination_from_string(to_string(t)) == t);
  }
}
