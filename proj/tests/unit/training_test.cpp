#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dspose/error.hpp"
#include "dspose/training.hpp"
#include "gradcheck.hpp"

using namespace dspose;

namespace {

NetOutput uniform_output(int joints) {
  NetOutput o;
  o.likelihoods.assign(static_cast<std::size_t>(joints + 1), 1.0 / (joints + 1));
  o.locations.assign(static_cast<std::size_t>(2 * joints), 0.0);
  return o;
}

InMemorySamples random_samples(std::mt19937_64& rng, const LayerSpec& spec, int n) {
  InMemorySamples s;
  for (int i = 0; i < n; ++i) {
    s.add(test::random_input(rng, spec.input_size), test::random_label(rng, spec.joints));
  }
  return s;
}

LayerSpec tiny_spec() {
  LayerSpec spec;
  spec.input_size = 8;
  spec.joints = 3;
  spec.part_tower = {{3, 3, 1, true}, {4, 3, 1, true}};
  spec.body_tower = {{3, 3, 1, true}, {4, 3, 1, true}};
  spec.fully_connected = {12};
  return spec;
}

// Sets an environment variable for the lifetime of the guard.
class EnvGuard {
 public:
  EnvGuard(const char* name, const char* value) : name_(name) {
    if (const char* old = std::getenv(name)) old_ = old, had_ = true;
    ::setenv(name, value, 1);
  }
  ~EnvGuard() {
    if (had_) ::setenv(name_, old_.c_str(), 1);
    else ::unsetenv(name_);
  }

 private:
  const char* name_;
  std::string old_;
  bool had_ = false;
};

}  // namespace

TEST_SUITE("training") {

TEST_CASE("detection loss closed forms") {
  const NetOutput u = uniform_output(14);
  CHECK(std::abs(detection_loss(u.likelihoods, 3) - std::log(15.0)) <= 1e-12);
  const std::vector<double> half{0.5, 0.25, 0.25};
  CHECK(detection_loss(half, 0) == doctest::Approx(std::numbers::ln2).epsilon(1e-15));
  const std::vector<double> sure{0.0, 1.0};
  CHECK(detection_loss(sure, 1) == 0.0);
}

TEST_CASE("localization loss closed forms") {
  NetOutput o = uniform_output(3);
  o.locations = {9, 9, 0.3, 0.0, -7, 7};
  CHECK(localization_loss(o.locations, PatchLabel{2, NormalizedJoint{0, 0}}) == doctest::Approx(0.09).epsilon(1e-15));
  CHECK(localization_loss(o.locations, PatchLabel{2, NormalizedJoint{0.3, 0.0}}) == 0.0);
  CHECK(localization_loss(o.locations, PatchLabel{}) == 0.0);
}

TEST_CASE("total loss decomposes") {
  // One sample with C_d = 2 and C_r = 3 at lambda_d = 1 sums to 5.
  NetOutput o;
  o.likelihoods = {std::exp(-2.0), 1.0 - std::exp(-2.0)};
  o.locations = {std::sqrt(3.0), 0.0};
  const std::vector<NetOutput> one{o};
  const std::vector<PatchLabel> label{PatchLabel{0, std::nullopt}};
  CHECK(total_loss(one, label, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
  o.likelihoods = {1.0 - std::exp(-2.0), std::exp(-2.0)};
  const std::vector<NetOutput> one_fg{o};
  const std::vector<PatchLabel> lab_fg{PatchLabel{1, NormalizedJoint{0, 0}}};
  CHECK(total_loss(one_fg, lab_fg, 1.0) == doctest::Approx(5.0).epsilon(1e-14));

  const std::vector<NetOutput> two{o, o};
  const std::vector<PatchLabel> lab2{lab_fg[0], lab_fg[0]};
  CHECK(total_loss(two, lab2, 4.0) == 2.0 * total_loss(one_fg, lab_fg, 4.0));
  const LossBreakdown t = loss_terms(two, lab2);
  CHECK(t.total(4.0) == 4.0 * t.detection + t.localization);
  CHECK_THROWS_AS(loss_terms(two, lab_fg), ShapeMismatch);
}

TEST_CASE("loss gradient") {
  NetOutput o = uniform_output(2);
  o.locations = {0.1, 0.2, 0.3, 0.4};
  const OutputGradient g = loss_gradient(o, PatchLabel{2, NormalizedJoint{0.0, 0.5}}, 4.0);
  CHECK(g.logits[2] == doctest::Approx(4.0 * (1.0 / 3 - 1)));
  CHECK(g.logits[0] == doctest::Approx(4.0 / 3));
  CHECK(g.locations == std::vector<double>{0, 0, 0.6, 2.0 * (0.4 - 0.5)});
  const OutputGradient bg = loss_gradient(o, PatchLabel{}, 4.0);
  for (double v : bg.locations) CHECK(v == 0.0);
}

TEST_CASE("step decay") {
  TrainConfig cfg;
  cfg.learning_rate = 0.5;
  cfg.decay_every = 3;
  CHECK(learning_rate_at(cfg, 0) == 0.5);
  CHECK(learning_rate_at(cfg, 2) == 0.5);
  CHECK(learning_rate_at(cfg, 3) == doctest::Approx(0.05));
  CHECK(learning_rate_at(cfg, 6) == doctest::Approx(0.005));
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  std::mt19937_64 rng(1);
  const LayerSpec spec = tiny_spec();
  const InMemorySamples s = random_samples(rng, spec, 10);
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.epochs = 1;
  cfg.batch_size = 4;
  const NetworkParams init = init_params(spec, 3);
  const TrainResult r = train(s, Checkpoint{init, {}}, cfg);
  CHECK(r.checkpoint.params == init);
  CHECK(r.history.size() == 1);
  CHECK(r.checkpoint.state.epochs_completed == 1);
}

TEST_CASE("overfitting a single sample") {
  std::mt19937_64 rng(2);
  const LayerSpec spec = tiny_spec();
  InMemorySamples s;
  s.add(test::random_input(rng, spec.input_size), PatchLabel{2, NormalizedJoint{0.2, -0.3}});
  TrainConfig cfg;
  cfg.learning_rate = 0.0005;
  cfg.decay_every = 1000;
  cfg.batch_size = 1;
  cfg.epochs = 200;
  const TrainResult r = train(s, Checkpoint{init_params(spec, 4), {}}, cfg);
  REQUIRE(r.history.size() == 200);
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    CHECK(r.history[i].mean_loss < r.history[i - 1].mean_loss);
  }
  CHECK(r.history.back().mean_loss < 0.1 * r.history.front().mean_loss);
}

TEST_CASE("training is deterministic and thread-count independent") {
  std::mt19937_64 rng(3);
  const LayerSpec spec = tiny_spec();
  const InMemorySamples s = random_samples(rng, spec, 37);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 10;
  cfg.seed = 11;
  const Checkpoint start{init_params(spec, 5), {}};
  TrainResult a, b;
  {
    EnvGuard env("DSPOSE_THREADS", "1");
    a = train(s, start, cfg);
  }
  {
    EnvGuard env("DSPOSE_THREADS", "3");
    b = train(s, start, cfg);
  }
  CHECK(a.checkpoint.params == b.checkpoint.params);
  cfg.seed = 12;
  const TrainResult c = train(s, start, cfg);
  CHECK_FALSE(a.checkpoint.params == c.checkpoint.params);
}

TEST_CASE("resuming reproduces an uninterrupted run") {
  std::mt19937_64 rng(4);
  const LayerSpec spec = tiny_spec();
  const InMemorySamples s = random_samples(rng, spec, 20);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 6;
  cfg.momentum = 0.9;
  cfg.decay_every = 2;
  cfg.seed = 2;
  const Checkpoint start{init_params(spec, 6), {}};
  const TrainResult full = train(s, start, cfg);

  TrainConfig half = cfg;
  half.epochs = 2;
  const TrainResult first = train(s, start, half);
  CHECK(first.checkpoint.state.velocity.size() == first.checkpoint.params.size());
  const TrainResult rest = train(s, first.checkpoint, cfg);
  REQUIRE(rest.history.size() == 2);
  CHECK(rest.history.front().epoch == 3);
  CHECK(rest.checkpoint.params == full.checkpoint.params);
  CHECK(rest.checkpoint.state == full.checkpoint.state);
}

TEST_CASE("epoch callback and history") {
  std::mt19937_64 rng(5);
  const LayerSpec spec = tiny_spec();
  const InMemorySamples s = random_samples(rng, spec, 9);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  std::vector<int> seen;
  const TrainResult r = train(s, Checkpoint{init_params(spec, 1), {}}, cfg,
                              [&](const EpochStats& st, const Checkpoint& ck) {
                                seen.push_back(st.epoch);
                                CHECK(ck.state.epochs_completed == st.epoch);
                                CHECK(st.mean_loss == doctest::Approx(cfg.lambda_d * st.detection + st.localization));
                              });
  CHECK(seen == std::vector<int>{1, 2, 3});
  CHECK(r.history.size() == 3);
}

TEST_CASE("divergence is reported") {
  std::mt19937_64 rng(6);
  const LayerSpec spec = tiny_spec();
  const InMemorySamples s = random_samples(rng, spec, 16);
  TrainConfig cfg;
  cfg.learning_rate = 1e12;
  cfg.epochs = 5;
  cfg.batch_size = 4;
  CHECK_THROWS_AS(train(s, Checkpoint{init_params(spec, 1), {}}, cfg), Divergence);
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.lambda_d = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.momentum = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("evaluate_samples matches forward") {
  std::mt19937_64 rng(7);
  const LayerSpec spec = tiny_spec();
  const InMemorySamples s = random_samples(rng, spec, 70);
  const NetworkParams p = init_params(spec, 2);
  const auto outs = evaluate_samples(p, s);
  REQUIRE(outs.size() == 70);
  CHECK(outs[69].likelihoods == forward(p, s.input(69)).likelihoods);
}

}
