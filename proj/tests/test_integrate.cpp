#include <doctest.h>

#include <cmath>
#include <random>

#include "pvortex/bifurcation.hpp"
#include "pvortex/error.hpp"
#include "pvortex/integrate.hpp"

using namespace pvortex;

namespace {

constexpr double kTwoPiSq = 19.739208802178717;  // mpmath

double distance(const VortexState& a, const VortexState& b) {
    double m = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::hypot(a[j].x - b[j].x, a[j].y - b[j].y));
    return m;
}

IntegratorConfig with_t_end(double t_end) {
    IntegratorConfig cfg;
    cfg.t_end = t_end;
    return cfg;
}

struct Case {
    std::string name;
    VortexSystem system;
    VortexState initial;
};

std::vector<Case> standard_set() {
    std::vector<Case> out{
        {"pair rotation", VortexSystem(Domain::Plane, {1.0, 1.0}), VortexState{{{0.5, 0.0}, {-0.5, 0.0}}}},
        {"dipole translation", VortexSystem(Domain::Plane, {1.0, -1.0}), VortexState{{{0.0, 0.5}, {0.0, -0.5}}}},
    };
    for (double W : {1.4, 1.9}) {
        const auto [sys, st] = aligned_state(-1.0, aligned_ratio_for_W(-1.0, W));
        const Encounter enc = encounter_from_aligned(sys, st, IntegratorConfig{});
        out.push_back({"half-plane dipole W=" + std::to_string(W), sys, enc.initial});
    }
    return out;
}

}  // namespace

TEST_CASE("plane pair returns after one rotation period") {
    const VortexSystem sys(Domain::Plane, {1.0, 1.0});
    const VortexState z0{{{0.5, 0.0}, {-0.5, 0.0}}};
    const Trajectory tr = integrate(sys, z0, with_t_end(kTwoPiSq));
    REQUIRE(tr.terminated_by == Termination::TimeEnd);
    CHECK(tr.times.back() == kTwoPiSq);
    CHECK(distance(tr.states.back(), z0) < 1e-6);
    // halfway round the pair has swapped places
    const VortexState swapped{{{-0.5, 0.0}, {0.5, 0.0}}};
    const Trajectory half = integrate(sys, z0, with_t_end(kTwoPiSq / 2));
    CHECK(distance(half.states.back(), swapped) < 1e-6);
}

TEST_CASE("single half-plane vortex drifts to (1, 1) at t = 4 pi") {
    const Trajectory tr = integrate(VortexSystem(Domain::HalfPlane, {1.0}), VortexState{{{0.0, 1.0}}},
                                    with_t_end(4.0 * std::numbers::pi));
    CHECK(std::fabs(tr.states.back()[0].x - 1.0) < 1e-8);
    CHECK(std::fabs(tr.states.back()[0].y - 1.0) < 1e-8);
}

TEST_CASE("output sampling") {
    IntegratorConfig cfg = with_t_end(1.005);
    cfg.output_interval = 0.01;
    const Trajectory tr = integrate(VortexSystem(Domain::Plane, {1.0, 2.0}), VortexState{{{0.0, 0.0}, {1.0, 0.0}}}, cfg);
    REQUIRE(tr.times.size() == 102);
    CHECK(tr.times.front() == 0.0);
    CHECK(tr.times[50] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(tr.times.back() == 1.005);
    CHECK(tr.states.size() == tr.times.size());
    CHECK(tr.accepted_steps > 0);
}

TEST_CASE("dipole encounter near the critical W has one horizontal alignment") {
    for (double W : {1.61, 1.62, 1.7}) {
        const Trajectory tr = encounter_run(-1.0, W, IntegratorConfig{});
        REQUIRE(tr.terminated_by == Termination::TimeEnd);
        int alignments = 0;
        for (const Event& e : tr.events) {
            if (e.kind != EventKind::VerticalAlignment) continue;
            ++alignments;
            CHECK(std::fabs(e.diagnostics.at("ydot_i")) < 1e-9);
            CHECK(std::fabs(e.diagnostics.at("ydot_j")) < 1e-9);
            CHECK(std::fabs(e.state[0].x - e.state[1].x) < 1e-9);
        }
        CHECK(alignments == 1);
    }
}

TEST_CASE("time reversal returns to the initial state") {
    std::vector<Case> cases = standard_set();
    cases.push_back({"three plane vortices", VortexSystem(Domain::Plane, {1.0, -0.5, 2.0}),
                     VortexState{{{0.0, 0.0}, {1.0, 0.3}, {-0.4, 1.2}}}});
    for (const Case& c : cases) {
        CAPTURE(c.name);
        const Trajectory fwd = integrate(c.system, c.initial, with_t_end(20.0));
        const Trajectory back = integrate(c.system.reversed(), fwd.states.back(), with_t_end(20.0));
        CHECK(distance(back.states.back(), c.initial) < 1e-6);
    }
}

TEST_CASE("every sign change of x1 - x2 is reported as an alignment") {
    const std::vector<std::pair<double, double>> runs{{-1.0, 1.4}, {-1.0, 1.9}, {1.0, 0.3}, {1.0, 0.9}, {-1.0, 1.62}};
    for (const auto& [lambda, W] : runs) {
        CAPTURE(lambda);
        CAPTURE(W);
        const Trajectory tr = encounter_run(lambda, W, IntegratorConfig{});
        int changes = 0;
        for (std::size_t k = 1; k < tr.states.size(); ++k) {
            const double a = tr.states[k - 1][0].x - tr.states[k - 1][1].x;
            const double b = tr.states[k][0].x - tr.states[k][1].x;
            if ((a < 0.0) != (b < 0.0) && a != 0.0) ++changes;
        }
        int alignments = 0;
        for (const Event& e : tr.events) alignments += e.kind == EventKind::VerticalAlignment;
        CHECK(changes >= 1);
        CHECK(alignments == changes);
    }
    // an alignment between output samples still counts
    IntegratorConfig coarse;
    coarse.output_interval = 5.0;
    const Trajectory tr = encounter_run(-1.0, 1.9, coarse);
    int alignments = 0;
    for (const Event& e : tr.events) alignments += e.kind == EventKind::VerticalAlignment;
    CHECK(alignments == 1);
}

TEST_CASE("well separated half-plane pairs never trigger the collision guard") {
    for (const auto& [lambda, W] : std::vector<std::pair<double, double>>{{-1.0, 1.4}, {-1.0, 1.9}, {1.0, 0.3}, {1.0, 0.9}}) {
        const auto [sys, st] = aligned_state(lambda, aligned_ratio_for_W(lambda, W));
        const Encounter enc = encounter_from_aligned(sys, st, IntegratorConfig{});
        const Trajectory tr = integrate(sys, enc.initial, with_t_end(100.0));
        CHECK(tr.terminated_by == Termination::TimeEnd);
    }
}

TEST_CASE("near collision ends the run early without throwing") {
    IntegratorConfig cfg = with_t_end(10.0);
    cfg.collision_guard = 0.4;
    // the dipole sinks toward the wall from below the guard's reach
    const Trajectory tr = integrate(VortexSystem(Domain::HalfPlane, {-1.0, 1.0}), VortexState{{{0.0, 1.0}, {0.5, 1.0}}}, cfg);
    CHECK(tr.terminated_by == Termination::NearCollision);
    REQUIRE_FALSE(tr.events.empty());
    CHECK(tr.events.back().kind == EventKind::NearCollision);
    CHECK(tr.times.back() < 10.0);
}

TEST_CASE("conservation at default tolerances over t = 100") {
    for (const Case& c : standard_set()) {
        CAPTURE(c.name);
        const Trajectory tr = integrate(c.system, c.initial, with_t_end(100.0));
        REQUIRE(tr.terminated_by == Termination::TimeEnd);
        const auto rep = conservation_report(tr);
        CHECK(rep.size() == (c.system.domain() == Domain::Plane ? 4u : 3u));
        for (const auto& [name, drift] : rep) {
            CAPTURE(name);
            CHECK(drift < 1e-8);
        }
    }
    const Trajectory three = integrate(VortexSystem(Domain::Plane, {1.0, -0.5, 2.0}),
                                       VortexState{{{0.0, 0.0}, {1.0, 0.3}, {-0.4, 1.2}}}, with_t_end(100.0));
    for (const auto& [name, drift] : conservation_report(three)) {
        CAPTURE(name);
        CHECK(drift < 1e-8);
    }
}

TEST_CASE("a resting vortex has no drift at all") {
    const Trajectory tr = integrate(VortexSystem(Domain::Plane, {1.0}), VortexState{{{0.3, -0.2}}}, with_t_end(10.0));
    for (const auto& [name, drift] : conservation_report(tr)) CHECK(drift < 1e-14);
    CHECK(tr.states.back()[0] == Point{0.3, -0.2});
}

TEST_CASE("halving rel_tol does not make drift worse by more than 2x") {
    for (const Case& c : standard_set()) {
        CAPTURE(c.name);
        IntegratorConfig loose = with_t_end(100.0);
        IntegratorConfig tight = loose;
        tight.rel_tol = loose.rel_tol / 2;
        const auto a = conservation_report(integrate(c.system, c.initial, loose));
        const auto b = conservation_report(integrate(c.system, c.initial, tight));
        for (const auto& [name, drift] : a) {
            CAPTURE(name);
            CHECK(b.at(name) <= 2.0 * drift);
        }
    }
}

TEST_CASE("adaptive and fixed-step RK4 agree") {
    const VortexSystem sys(Domain::HalfPlane, {1.0, -0.7, 0.5});
    const VortexState z0{{{0.0, 1.0}, {0.8, 0.6}, {-1.0, 2.0}}};
    const Trajectory tr = integrate(sys, z0, with_t_end(5.0));
    const VortexState rk4 = integrate_rk4(sys, z0, 5.0, 4000);
    CHECK(distance(tr.states.back(), rk4) < 1e-9);
    CHECK_THROWS_AS(integrate_rk4(sys, z0, 5.0, 0), UsageError);
}

TEST_CASE("config validation names the field") {
    IntegratorConfig cfg;
    cfg.rel_tol = 0.0;
    try {
        validate(cfg);
        FAIL("expected UsageError");
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("rel_tol") != std::string::npos);
    }
    cfg = IntegratorConfig{};
    cfg.output_interval = -1.0;
    CHECK_THROWS_AS(integrate(VortexSystem(Domain::Plane, {1.0}), VortexState{{{0.0, 0.0}}}, cfg), UsageError);
    cfg = IntegratorConfig{};
    cfg.alignment_pairs = {{0, 3}};
    CHECK_THROWS_AS(integrate(VortexSystem(Domain::Plane, {1.0, 1.0}), VortexState{{{0.0, 0.0}, {1.0, 0.0}}}, cfg),
                    UsageError);
}

TEST_CASE("enum names round-trip") {
    for (EventKind k : {EventKind::VerticalAlignment, EventKind::InstantaneousStop, EventKind::NearCollision})
        CHECK(parse_event_kind(to_string(k)) == k);
    for (Termination t : {Termination::TimeEnd, Termination::NearCollision, Termination::StepFailure})
        CHECK(parse_termination(to_string(t)) == t);
}
