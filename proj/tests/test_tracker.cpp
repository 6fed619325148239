#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "guide/tracker.hpp"
#include "oracles.hpp"

using namespace guide;

namespace {

TrackerConfig config_with(double slot_s, double target_j, double poll_s, double alpha,
                          bool persist = false) {
  TrackerConfig cfg;
  cfg.slot_duration_s = slot_s;
  cfg.energy_target_j = target_j;
  cfg.poll_interval_s = poll_s;
  cfg.ema_weight = alpha;
  cfg.ema_persists_across_slots = persist;
  return cfg;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(config_with(2.0, 150.0, 0.1, 0.3).validate());
  CHECK_NOTHROW(config_with(2.0, 150.0, 0.1, 1.0).validate());  // degenerate EMA allowed
  CHECK_THROWS_AS(config_with(2.0, 150.0, 0.1, 0.0).validate(), ValidationError);
  CHECK_THROWS_AS(config_with(2.0, 150.0, 0.1, 1.1).validate(), ValidationError);
  CHECK_THROWS_AS(config_with(2.0, 0.0, 0.1, 0.3).validate(), ValidationError);
  CHECK_THROWS_AS(config_with(0.0, 150.0, 0.1, 0.3).validate(), ValidationError);
  CHECK_THROWS_AS(config_with(2.0, 150.0, 3.0, 0.3).validate(), ValidationError);
  // slot must be an integer multiple of the poll interval
  CHECK_THROWS_AS(config_with(2.0, 150.0, 0.3, 0.3).validate(), ValidationError);
  CHECK(config_with(2.0, 150.0, 0.1, 0.3).polls_per_slot() == 20);
}

TEST_CASE("five 5 J samples with alpha=1 leave 50 J usable") {
  // With alpha=1 the EMA equals the last instantaneous power, so the numbers
  // can be followed by hand: E_used=25, P=50 W, t_rem=1.5 s, predicted
  // remaining 75 J, usable = 150 - 100 = 50 J.
  EnergyBudgetTracker tracker(config_with(2.0, 150.0, 0.1, 1.0));
  BudgetEstimate est;
  for (int i = 0; i < 5; ++i) est = tracker.ingest({5.0, 0.1});
  CHECK(est.usable_j == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(est.predicted_remaining_j == doctest::Approx(75.0));
  CHECK(est.predicted_total_j == doctest::Approx(100.0));
  CHECK(est.time_remaining_s == doctest::Approx(1.5));
  CHECK(tracker.state().energy_used_j == doctest::Approx(25.0));
  CHECK(tracker.state().power_ema_w == doctest::Approx(50.0));

  // usable_budget reads back the same estimate without mutating anything.
  CHECK(tracker.usable_budget().usable_j == doctest::Approx(50.0));
  CHECK(tracker.usable_budget().usable_j == doctest::Approx(50.0));
  CHECK(tracker.state().poll_index_in_slot == 5);
}

TEST_CASE("fresh tracker exposes the full target") {
  EnergyBudgetTracker tracker(config_with(2.0, 400.0, 0.1, 0.3));
  CHECK(tracker.usable_budget().usable_j == doctest::Approx(400.0));
  CHECK(tracker.state().energy_used_j == 0.0);
  CHECK(tracker.state().power_ema_w == 0.0);
}

TEST_CASE("usable budget clamps at zero") {
  // 90 J used in one poll with alpha=1: predicted total far exceeds 100 J.
  EnergyBudgetTracker tracker(config_with(2.0, 100.0, 0.1, 1.0));
  auto est = tracker.ingest({90.0, 0.1});
  CHECK(est.predicted_total_j > 100.0);
  CHECK(est.usable_j == 0.0);
  CHECK(tracker.usable_budget().usable_j == 0.0);
}

TEST_CASE("negative deltas are rejected as meter faults") {
  EnergyBudgetTracker tracker(config_with(2.0, 150.0, 0.1, 0.3));
  CHECK_THROWS_AS(tracker.ingest({-0.001, 0.1}), MonotonicityError);
}

TEST_CASE("simulation mode rejects mismatched sample intervals") {
  EnergyBudgetTracker tracker(config_with(2.0, 150.0, 0.1, 0.3));
  CHECK_THROWS_AS(tracker.ingest({1.0, 0.2}), ValidationError);
  CHECK_THROWS_AS(tracker.ingest({1.0, 0.0}), ValidationError);
  CHECK_NOTHROW(tracker.ingest({1.0, 0.1}));
}

TEST_CASE("slot energy log records realized per-slot sums") {
  auto cfg = config_with(1.0, 150.0, 0.5, 0.3);  // 2 polls per slot
  EnergyBudgetTracker tracker(cfg);
  CHECK(tracker.slot_energy_log().empty());

  tracker.ingest({60.0, 0.5});
  tracker.ingest({80.0, 0.5});  // slot 0 closes at 140 J
  tracker.ingest({70.0, 0.5});
  tracker.ingest({90.0, 0.5});  // slot 1 closes at 160 J
  REQUIRE(tracker.slot_energy_log().size() == 2);
  CHECK(tracker.slot_energy_log()[0].slot_index == 0);
  CHECK(tracker.slot_energy_log()[0].energy_j == doctest::Approx(140.0));
  CHECK(tracker.slot_energy_log()[1].slot_index == 1);
  CHECK(tracker.slot_energy_log()[1].energy_j == doctest::Approx(160.0));
}

TEST_CASE("idle 45 W trace logs 90 J per slot") {
  EnergyBudgetTracker tracker(config_with(2.0, 150.0, 0.1, 0.3));
  for (int slot = 0; slot < 3; ++slot) {
    for (int k = 0; k < 20; ++k) tracker.ingest({45.0 * 0.1, 0.1});
  }
  REQUIRE(tracker.slot_energy_log().size() == 3);
  for (const auto& slot : tracker.slot_energy_log()) {
    CHECK(slot.energy_j == doctest::Approx(90.0).epsilon(1e-12));
  }
}

TEST_CASE("slot close resets accounting and refreshes the snapshot") {
  EnergyBudgetTracker tracker(config_with(1.0, 100.0, 0.5, 0.5));
  tracker.ingest({40.0, 0.5});
  auto final_est = tracker.ingest({40.0, 0.5});  // closes slot 0
  // The final poll of the slot still reports the closing slot's numbers...
  CHECK(final_est.slot_index == 0);
  CHECK(final_est.time_remaining_s == 0.0);
  CHECK(final_est.usable_j == doctest::Approx(100.0 - 80.0));
  // ...while the snapshot now describes the untouched next slot.
  CHECK(tracker.state().slot_index == 1);
  CHECK(tracker.state().poll_index_in_slot == 0);
  CHECK(tracker.state().energy_used_j == 0.0);
  CHECK(tracker.state().power_ema_w == 0.0);  // EMA reset by default
  CHECK(tracker.usable_budget().usable_j == doctest::Approx(100.0));
}

TEST_CASE("EMA can persist across slot boundaries") {
  auto cfg = config_with(1.0, 100.0, 0.5, 0.5, /*persist=*/true);
  EnergyBudgetTracker tracker(cfg);
  tracker.ingest({40.0, 0.5});  // P=80, ema=40
  tracker.ingest({40.0, 0.5});  // P=80, ema=60; slot closes
  CHECK(tracker.state().power_ema_w == doctest::Approx(60.0));
  // Fresh-slot snapshot forecasts a full slot at the carried EMA.
  CHECK(tracker.usable_budget().usable_j == doctest::Approx(100.0 - 60.0 * 1.0));
}

TEST_CASE("boundary poll: no remaining time means usable = target - used") {
  EnergyBudgetTracker tracker(config_with(2.0, 100.0, 0.1, 0.3));
  BudgetEstimate est;
  for (int k = 0; k < 20; ++k) est = tracker.ingest({3.0, 0.1});
  CHECK(est.time_remaining_s == 0.0);
  CHECK(est.predicted_remaining_j == 0.0);
  CHECK(est.usable_j == doctest::Approx(100.0 - 60.0));
}

TEST_CASE("tracker matches the closed-form oracle on randomized traces") {
  std::mt19937_64 rng(7);
  for (int trace = 0; trace < 300; ++trace) {
    const double alpha = std::vector<double>{0.1, 0.3, 0.9}[trace % 3];
    const int polls_per_slot = guide::testing::uniform_int(rng, 1, 25);
    const double poll_s = 0.1;
    const double slot_s = polls_per_slot * poll_s;
    const double target = guide::testing::uniform_in(rng, 10.0, 300.0);
    const bool persist = (trace % 2) == 0;

    auto cfg = config_with(slot_s, target, poll_s, alpha, persist);
    EnergyBudgetTracker tracker(cfg);

    const int samples = guide::testing::uniform_int(rng, 1, 200);
    std::vector<double> slot_deltas;
    double ema_carry = 0.0;
    for (int i = 0; i < samples; ++i) {
      const double delta = guide::testing::uniform_in(rng, 0.0, 20.0);
      slot_deltas.push_back(delta);
      auto est = tracker.ingest({delta, poll_s});

      auto oracle = guide::testing::tracker_oracle(slot_deltas, poll_s, slot_s, target, alpha,
                                                   ema_carry);
      CHECK(est.usable_j == doctest::Approx(oracle.usable_j).epsilon(1e-9));
      if (static_cast<int>(slot_deltas.size()) == polls_per_slot) {
        // Slot closed: tracker state moved on, oracle restarts the slot.
        CHECK(tracker.state().energy_used_j == 0.0);
        ema_carry = persist ? oracle.power_ema_w : 0.0;
        slot_deltas.clear();
      } else {
        CHECK(tracker.state().power_ema_w == doctest::Approx(oracle.power_ema_w).epsilon(1e-9));
        CHECK(tracker.state().energy_used_j ==
              doctest::Approx(oracle.energy_used_j).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("EMA converges to constant power with gap P(1-alpha)^n") {
  const double alpha = 0.3;
  const double power = 58.0;
  EnergyBudgetTracker tracker(config_with(10.0, 1000.0, 0.1, alpha));
  double previous_gap = power;
  for (int n = 1; n <= 60; ++n) {
    tracker.ingest({power * 0.1, 0.1});
    const double gap = power - tracker.state().power_ema_w;
    CHECK(gap == doctest::Approx(power * std::pow(1.0 - alpha, n)).epsilon(1e-9));
    CHECK(gap <= previous_gap);  // monotone approach
    previous_gap = gap;
  }
}

TEST_CASE("usable budget is never negative") {
  std::mt19937_64 rng(99);
  EnergyBudgetTracker tracker(config_with(2.0, 25.0, 0.1, 0.9));
  for (int i = 0; i < 2000; ++i) {
    auto est = tracker.ingest({guide::testing::uniform_in(rng, 0.0, 50.0), 0.1});
    CHECK(est.usable_j >= 0.0);
  }
}

TEST_CASE("identical feeds produce bit-identical states") {
  std::mt19937_64 rng(4242);
  std::vector<double> deltas;
  for (int i = 0; i < 500; ++i) deltas.push_back(guide::testing::uniform_in(rng, 0.0, 30.0));

  auto cfg = config_with(2.0, 120.0, 0.1, 0.3);
  EnergyBudgetTracker a(cfg);
  EnergyBudgetTracker b(cfg);
  for (double delta : deltas) {
    auto ea = a.ingest({delta, 0.1});
    auto eb = b.ingest({delta, 0.1});
    CHECK(ea.usable_j == eb.usable_j);  // exact, not approximate
    CHECK(a.state().power_ema_w == b.state().power_ema_w);
    CHECK(a.state().energy_used_j == b.state().energy_used_j);
  }
}

TEST_CASE("energy conservation over a long feed") {
  EnergyBudgetTracker tracker(config_with(2.0, 150.0, 0.1, 0.3));
  const double delta = 4.5;
  const int slots = 1000;
  for (int i = 0; i < slots * 20; ++i) tracker.ingest({delta, 0.1});
  REQUIRE(tracker.slot_energy_log().size() == static_cast<std::size_t>(slots));
  for (const auto& slot : tracker.slot_energy_log()) {
    CHECK(std::abs(slot.energy_j - 90.0) <= 1e-9 * 90.0);
  }
}

TEST_CASE("a slot of exactly one poll closes on every sample") {
  EnergyBudgetTracker tracker(config_with(0.5, 100.0, 0.5, 0.4));
  for (int i = 1; i <= 4; ++i) {
    auto est = tracker.ingest({10.0, 0.5});
    CHECK(est.time_remaining_s == 0.0);
    CHECK(est.usable_j == doctest::Approx(90.0));
    CHECK(tracker.state().poll_index_in_slot == 0);
    CHECK(tracker.state().slot_index == i);
  }
  CHECK(tracker.slot_energy_log().size() == 4);
}

TEST_CASE("live mode accepts jittered intervals and closes on elapsed time") {
  EnergyBudgetTracker tracker(config_with(1.0, 100.0, 0.5, 0.5),
                              EnergyBudgetTracker::Mode::Live);
  tracker.ingest({30.0, 0.45});
  tracker.ingest({30.0, 0.6});  // elapsed 1.05 s >= slot, closes
  REQUIRE(tracker.slot_energy_log().size() == 1);
  CHECK(tracker.slot_energy_log()[0].energy_j == doctest::Approx(60.0));
  CHECK(tracker.state().slot_index == 1);
}
