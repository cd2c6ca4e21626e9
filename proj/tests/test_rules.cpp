#include <gtest/gtest.h>

#include "sfps/rules/rules.hpp"

using namespace sfps;
using namespace sfps::rules;
using world::World;

namespace {

World small_world(int slots = 1) {
    world::WorldConfig cfg;
    cfg.charger_slots = slots;
    cfg.n_birds = 0;
    return world::world_init(cfg);
}

void place(World& w, EntityId id, world::Point p, double battery) {
    auto& d = w.drones[static_cast<std::size_t>(id)];
    d.position = d.target = d.hover_point = p;
    d.battery = battery;
}

void enqueue(World& w, EntityId id) {
    w.drones[static_cast<std::size_t>(id)].queued = true;
    w.charger.queue.push_back(id);
}

void occupy(World& w, EntityId id, double battery) {
    auto& d = w.drones[static_cast<std::size_t>(id)];
    d.position = d.target = w.charger.position;
    d.mode = DroneMode::Charging;
    d.battery = battery;
    w.charger.occupants.push_back(id);
}

est::Snapshot snap_of(const world::Drone& d) {
    est::Snapshot s;
    s.entity = d.id;
    s.battery = d.battery;
    s.mode = d.mode;
    return s;
}

}  // namespace

TEST(BatteryBound, Examples) {
    world::WorldConfig cfg;
    EXPECT_NEAR(future_battery_bound(0.8, 0, 100, BoundKind::Upper, cfg), 0.55, 1e-12);
    EXPECT_NEAR(future_battery_bound(0.8, 0, 100, BoundKind::Lower, cfg), 0.35, 1e-12);
    EXPECT_EQ(future_battery_bound(0.8, 7, 7, BoundKind::Upper, cfg), 0.8);
    EXPECT_EQ(future_battery_bound(0.8, 7, 7, BoundKind::Lower, cfg), 0.8);
    EXPECT_EQ(future_battery_bound(0.1, 0, 1000, BoundKind::Lower, cfg), 0.0);
    EXPECT_THROW((void)future_battery_bound(0.8, 10, 9, BoundKind::Upper, cfg), Error);
}

TEST(BatteryBound, LowerNeverExceedsUpper) {
    world::WorldConfig cfg;
    Rng rng(5);
    const auto lo = battery_bound_predictor(BoundKind::Lower, cfg);
    const auto hi = battery_bound_predictor(BoundKind::Upper, cfg);
    for (int i = 0; i < 1000; ++i) {
        est::Snapshot s;
        s.battery = rng.uniform();
        const Tick d = rng.uniform_int(0, 400);
        EXPECT_LE(lo(s, d), hi(s, d));
        EXPECT_LE(hi(s, d), s.battery);
        EXPECT_EQ(lo(s, d), future_battery_bound(s.battery, 0, d, BoundKind::Lower, cfg));
    }
}

TEST(Predictor, ConstantAndClamp) {
    const auto c = Predictor::constant(42.0);
    EXPECT_EQ(c(est::Snapshot{}, 99999), 42.0);
    Tick seen = -1;
    Predictor p{[&seen](const est::Snapshot&, Tick d) {
                    seen = d;
                    return 0.0;
                },
                1, 200};
    (void)p(est::Snapshot{}, 1000);
    EXPECT_EQ(seen, 200);
    (void)p(est::Snapshot{}, 0);
    EXPECT_EQ(seen, 1);
}

TEST(ChargingDecision, LongWaitLowBatteryEnqueues) {
    auto w = small_world();
    place(w, 0, {20, 0}, 0.15);  // 10 ticks from the charger
    const auto& d = w.drones[0];
    Tick asked = -1;
    Predictor battery{[&asked](const est::Snapshot& s, Tick h) {
                          asked = h;
                          return s.battery - 0.0025 * static_cast<double>(h);
                      },
                      1, 200};
    const auto out = charging_decision(d, w, snap_of(d), Predictor::constant(30.0), battery, {0.2});
    EXPECT_EQ(out.decision, Decision::Enqueue);
    EXPECT_EQ(asked, 40);
    EXPECT_EQ(out.prediction, 30.0);
    EXPECT_EQ(out.threshold, 0.2);
}

TEST(ChargingDecision, FullBatteryStays) {
    auto w = small_world();
    const auto& d = w.drones[0];
    const auto battery = battery_bound_predictor(BoundKind::Lower, w.config);
    EXPECT_EQ(charging_decision(d, w, snap_of(d), Predictor::constant(0.0), battery, {0.2}).decision, Decision::Stay);
}

TEST(ChargingDecision, HorizonClampedToEstimatorRange) {
    auto w = small_world();
    place(w, 0, {20, 0}, 0.9);
    const auto& d = w.drones[0];
    Tick asked = -1;
    Predictor battery{[&asked](const est::Snapshot&, Tick h) {
                          asked = h;
                          return 1.0;
                      },
                      1, 200};
    (void)charging_decision(d, w, snap_of(d), Predictor::constant(1000.0), battery, {0.2});
    EXPECT_EQ(asked, 200);
}

TEST(ChargingDecision, NegativeWaitTreatedAsZero) {
    auto w = small_world();
    place(w, 0, {20, 0}, 0.9);
    const auto& d = w.drones[0];
    Tick asked = -1;
    Predictor battery{[&asked](const est::Snapshot&, Tick h) {
                          asked = h;
                          return 1.0;
                      },
                      0, 1000};
    (void)charging_decision(d, w, snap_of(d), Predictor::constant(-50.0), battery, {0.2});
    EXPECT_EQ(asked, 10);
}

TEST(ChargingDecision, QueuedOrChargingDronesStay) {
    auto w = small_world();
    place(w, 0, {20, 0}, 0.05);
    enqueue(w, 0);
    const auto battery = battery_bound_predictor(BoundKind::Lower, w.config);
    const auto& d = w.drones[0];
    EXPECT_EQ(charging_decision(d, w, snap_of(d), Predictor::constant(0.0), battery, {0.2}).decision, Decision::Stay);
    occupy(w, 1, 0.05);
    const auto& c = w.drones[1];
    EXPECT_EQ(charging_decision(c, w, snap_of(c), Predictor::constant(0.0), battery, {0.2}).decision, Decision::Stay);
}

TEST(ChargingRuleParams, ThresholdRange) {
    EXPECT_THROW((ChargingRuleParams{0.0}.validate()), ConfigError);
    EXPECT_THROW((ChargingRuleParams{1.0}.validate()), ConfigError);
    EXPECT_NO_THROW((ChargingRuleParams{0.2}.validate()));
}

TEST(ReleaseDecision, EmptyChargerReleasesImmediately) {
    auto w = small_world(1);
    place(w, 0, {20, 0}, 0.3);
    enqueue(w, 0);
    EXPECT_EQ(release_decision(w, w.drones[0]), Decision::FlyToCharger);
}

TEST(ReleaseDecision, WaitsUntilSlotFreesOnArrival) {
    auto w = small_world(1);
    place(w, 0, {20, 0}, 0.3);  // 10 ticks of flight
    enqueue(w, 0);
    occupy(w, 1, 0.5);          // 100 ticks of charging left
    EXPECT_EQ(expected_slot_free_time(w, 0), 100);
    EXPECT_EQ(release_decision(w, w.drones[0]), Decision::Stay);
    w.drones[1].battery = 0.945;  // 11 ticks left
    EXPECT_EQ(release_decision(w, w.drones[0]), Decision::Stay);
    w.drones[1].battery = 0.95;   // 10 ticks left
    EXPECT_EQ(release_decision(w, w.drones[0]), Decision::FlyToCharger);
}

TEST(ReleaseDecision, NeverOvertakesTheHead) {
    auto w = small_world(3);
    place(w, 0, {80, 80}, 0.3);
    place(w, 1, {2, 0}, 0.3);
    enqueue(w, 0);
    enqueue(w, 1);
    EXPECT_EQ(release_decision(w, w.drones[1]), Decision::Stay);
    EXPECT_EQ(release_decision(w, w.drones[0]), Decision::FlyToCharger);
    w.drones[0].queued = false;  // head is on its way
    w.drones[0].mode = DroneMode::MovingToCharger;
    EXPECT_EQ(release_decision(w, w.drones[1]), Decision::FlyToCharger);
}

TEST(ReleaseDecision, NotQueuedThrows) {
    auto w = small_world();
    EXPECT_THROW((void)release_decision(w, w.drones[0]), Error);
}

TEST(ExpectedSlotFreeTime, SchedulesQueueGreedily) {
    auto w = small_world(2);
    w.clock = 50;
    occupy(w, 5, 0.9);   // free at +20
    occupy(w, 6, 0.6);   // free at +80
    place(w, 0, {0, 20}, 0.5);   // ahead: 10 ticks flight, arrives 0.455
    place(w, 1, {20, 0}, 0.5);
    enqueue(w, 0);
    enqueue(w, 1);
    // drone 0 takes the slot freed at +20 and charges ceil(0.545 * 200) = 109 ticks
    const Tick d0_done = 50 + 20 + 109;
    EXPECT_EQ(expected_slot_free_time(w, 0), 70);
    EXPECT_EQ(expected_slot_free_time(w, 1), std::min<Tick>(d0_done, 130));
}

TEST(ProtectionDecision, ZeroThresholdNeverEnqueuesWithEnoughBattery) {
    auto w = small_world();
    Rng rng(3);
    for (int i = 0; i < 500; ++i) {
        const auto id = static_cast<EntityId>(rng.uniform_int(0, 11));
        auto& d = w.drones[static_cast<std::size_t>(id)];
        const double energy = world::energy_to_fly_to_charger(d, w.charger, w.config.drone_speed, w.config);
        d.battery = energy + rng.uniform() * (1.0 - energy);
        EXPECT_EQ(protection_decision(d, rng.uniform(), rng.uniform(), {0, 0, 0}, w).decision, Decision::Protect);
    }
}

TEST(ProtectionDecision, FZeroIgnoresPrediction) {
    auto w = small_world();
    Rng rng(4);
    for (int i = 0; i < 500; ++i) {
        auto& d = w.drones[static_cast<std::size_t>(rng.uniform_int(0, 11))];
        d.battery = rng.uniform();
        const ProtectionRuleParams p{rng.uniform() * 0.5, rng.uniform() * 0.4, 0.0};
        const double cur = rng.uniform();
        const auto a = protection_decision(d, cur, 0.0, p, w);
        const auto b = protection_decision(d, cur, rng.uniform(), p, w);
        EXPECT_EQ(a.decision, b.decision);
        EXPECT_EQ(a.threshold, b.threshold);
    }
}

TEST(ProtectionDecision, BelowThresholdEnqueues) {
    auto w = small_world();
    place(w, 0, {20, 0}, 0.45 + 10 * 0.0045);  // 0.45 left at the charger
    const auto out = protection_decision(w.drones[0], 0.0, 0.0, {0.5, 0.0, 0.0}, w);
    EXPECT_DOUBLE_EQ(out.threshold, 0.5);
    EXPECT_EQ(out.decision, Decision::Enqueue);
    w.drones[0].battery = 0.56 + 10 * 0.0045;
    EXPECT_EQ(protection_decision(w.drones[0], 0.0, 0.0, {0.5, 0.0, 0.0}, w).decision, Decision::Protect);
}

TEST(ProtectionDecision, ThresholdCombinesTerms) {
    auto w = small_world();
    const auto out = protection_decision(w.drones[0], 0.5, 0.25, {0.1, 0.2, 0.4}, w);
    EXPECT_DOUBLE_EQ(out.threshold, 0.1 + 0.2 * 0.5 + 0.4 * 0.25);
    EXPECT_DOUBLE_EQ(out.prediction, 0.25);
    // predictions are clamped into [0,1]
    EXPECT_DOUBLE_EQ(protection_decision(w.drones[0], 0.0, 3.0, {0, 0, 0.5}, w).threshold, 0.5);
}

TEST(ProtectionRuleParams, SumMustStayBelowOne) {
    EXPECT_THROW((ProtectionRuleParams{0.5, 0.3, 0.2}.validate()), ConfigError);
    EXPECT_THROW((ProtectionRuleParams{1.0, 0.0, 0.0}.validate()), ConfigError);
    EXPECT_NO_THROW((ProtectionRuleParams{0.4, 0.3, 0.2}.validate()));
}

TEST(Names, DecisionsAndScenarios) {
    EXPECT_EQ(to_string(Decision::Enqueue), "ENQUEUE");
    EXPECT_EQ(to_string(Decision::FlyToCharger), "FLY_TO_CHARGER");
    EXPECT_EQ(scenario_from_string("protection"), Scenario::Protection);
    EXPECT_EQ(to_string(Scenario::Charging), "charging");
    EXPECT_THROW(scenario_from_string("harvest"), ConfigError);
}
