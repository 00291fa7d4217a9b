#include <doctest.h>

#include <cmath>

#include "pvortex/error.hpp"
#include "pvortex/scenarios.hpp"

using namespace pvortex;

namespace {

const ScenarioCheck& check_named(const ScenarioReport& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return c;
    FAIL("no check named " << name << " in " << r.name);
    throw std::logic_error("unreachable");
}

void all_pass(const ScenarioReport& r) {
    INFO(r.summary());
    CHECK(r.passed);
    for (const auto& c : r.checks) {
        CAPTURE(c.name);
        CHECK(c.passed());
    }
}

// z3 for strengths (3, -2, 6) with z1 = (0, 0), z2 = (1, 0), as found by the
// search; frozen to catch regressions in the search or the integrator.
const VortexState kGrobliFixture{{{0.0, 0.0}, {1.0, 0.0}, {-0.69104907610615418, -2.2992710755449095}}};

}  // namespace

TEST_CASE("single plane vortex stays put") {
    for (const auto& [g, at] : std::vector<std::pair<double, Point>>{{1.0, {0.0, 0.0}}, {-3.0, {2.0, 5.0}}}) {
        const ScenarioReport r = scenario_single_rest(g, at);
        all_pass(r);
        CHECK(check_named(r, "max_displacement").measured < 1e-12);
    }
}

TEST_CASE("half-plane vortex moves where the plane one rests") {
    const ScenarioReport r = scenario_halfplane_drift(1.0, 1.0);
    all_pass(r);
    // t = 10 at speed 1/(4 pi)
    CHECK(check_named(r, "speed").measured * 10.0 == doctest::Approx(10.0 / (4.0 * std::numbers::pi)).epsilon(1e-8));
}

TEST_CASE("pair rotation") {
    SUBCASE("equal strengths, period 2 pi^2") {
        const ScenarioReport r = scenario_pair_rotation(1.0, 1.0, 1.0);
        all_pass(r);
        CHECK(check_named(r, "period").expected == doctest::Approx(19.739208802178717).epsilon(1e-15));
        CHECK(std::fabs(check_named(r, "period").measured / 19.739208802178717 - 1.0) < 1e-6);
    }
    SUBCASE("same signs: centre between the vortices") {
        const ScenarioReport r = scenario_pair_rotation(1.0, 2.0, 1.0);
        all_pass(r);
        CHECK(check_named(r, "centre_between").measured == 1.0);
        CHECK(check_named(r, "centre_drift").measured < 1e-8);
    }
    SUBCASE("opposite signs: centre outside the segment") {
        const ScenarioReport r = scenario_pair_rotation(1.0, -2.0, 1.0);
        all_pass(r);
        CHECK(check_named(r, "centre_between").measured == 0.0);
        CHECK(check_named(r, "centre_drift").measured < 1e-8);
    }
    CHECK_THROWS_AS(scenario_pair_rotation(1.0, -1.0, 1.0), UsageError);
}

TEST_CASE("dipole translation speed") {
    // mpmath
    const std::vector<std::tuple<double, double, double>> cases{
        {1.0, 1.0, 0.15915494309189534}, {2.0, 1.0, 0.31830988618379067}, {1.0, 2.0, 0.079577471545947668}};
    for (const auto& [g, d, speed] : cases) {
        const ScenarioReport r = scenario_dipole_translation(g, d);
        all_pass(r);
        CHECK(std::fabs(check_named(r, "speed").measured / speed - 1.0) < 1e-6);
    }
}

TEST_CASE("half-plane drift speed and direction") {
    const std::vector<std::tuple<double, double, double>> cases{
        {1.0, 1.0, 0.079577471545947668}, {-1.0, 1.0, 0.079577471545947668}, {1.0, 2.0, 0.039788735772973834}};
    for (const auto& [g, y, speed] : cases) {
        const ScenarioReport r = scenario_halfplane_drift(g, y);
        all_pass(r);
        CHECK(std::fabs(check_named(r, "speed").measured / speed - 1.0) < 1e-6);
        CHECK(check_named(r, "direction").measured == (g > 0 ? 1.0 : -1.0));
    }
}

TEST_CASE("collapse condition") {
    CHECK(grobli_collapse_condition(std::vector<double>{3.0, -2.0, 6.0}) == 0.0);
    CHECK(grobli_collapse_condition(std::vector<double>{1.0, 1.0, 1.0}) == 3.0);
    CHECK(grobli_collapse_condition(std::vector<double>{1.0, -1.0, 2.0}) == -1.0);
}

TEST_CASE("self-similar three-vortex search") {
    const std::vector<double> g{3.0, -2.0, 6.0};
    const GrobliResult res = grobli_selfsimilar_search(g);
    all_pass(res.expansion);
    all_pass(res.contraction);
    CHECK(res.scale_rate > 0.0);
    CHECK(res.configuration[0] == Point{0.0, 0.0});
    CHECK(res.configuration[1] == Point{1.0, 0.0});
    CHECK(check_named(res.expansion, "size_factor").measured >= 2.0);

    CHECK_THROWS_AS(grobli_selfsimilar_search(std::vector<double>{1.0, 1.0, 1.0}), UsageError);
    CHECK_THROWS_AS(grobli_selfsimilar_search(std::vector<double>{1.0, 1.0}), UsageError);
}

TEST_CASE("frozen self-similar configuration still verifies") {
    const VortexSystem sys(Domain::Plane, {3.0, -2.0, 6.0});
    const GrobliOptions opts;
    all_pass(grobli_verify(sys, kGrobliFixture, opts, "fixture expansion"));
    all_pass(grobli_verify(sys.reversed(), kGrobliFixture, opts, "fixture contraction"));

    // a nearby generic triangle does not keep its shape
    VortexState off = kGrobliFixture;
    off[2].x += 0.2;
    CHECK_FALSE(grobli_verify(sys, off, opts, "perturbed").passed);
}

TEST_CASE("three-vortex close approach stays clear of collision") {
    IntegratorConfig cfg;
    cfg.t_end = 60.0;
    const VortexSystem sys(Domain::Plane, {1.0, 1.0, -0.5});
    const Trajectory tr = integrate(sys, VortexState{{{0.0, 0.0}, {0.3, 0.0}, {3.0, 0.5}}}, cfg);
    CHECK(tr.terminated_by == Termination::TimeEnd);
    double closest = 1e300;
    for (const auto& s : tr.states) closest = std::min(closest, std::hypot(s[0].x - s[1].x, s[0].y - s[1].y));
    CHECK(closest > cfg.collision_guard);
    // the near pair keeps rotating about each other rather than closing in
    CHECK(closest > 0.1);
}

TEST_CASE("verify suites") {
    CHECK_THROWS_AS(run_verify_suite("nope"), UsageError);
    for (const char* suite : {"scenarios", "bifurcation", "conservation", "grobli"}) {
        const auto reports = run_verify_suite(suite);
        CAPTURE(suite);
        CHECK_FALSE(reports.empty());
        for (const auto& r : reports) all_pass(r);
    }
}

TEST_CASE("report bookkeeping") {
    ScenarioReport r;
    r.name = "demo";
    r.checks = {{"a", 1.0, 1.0, 0.0, Compare::Absolute}, {"b", 2.0, 1.0, 0.5, Compare::Relative}};
    r.finalize();
    CHECK_FALSE(r.passed);
    CHECK(r.summary().find("b") != std::string::npos);
    r.checks.pop_back();
    r.finalize();
    CHECK(r.passed);
    CHECK(ScenarioCheck{"x", 3.0, 2.0, 0.0, Compare::AtLeast}.passed());
    CHECK_FALSE(ScenarioCheck{"x", 1.0, 2.0, 0.0, Compare::AtLeast}.passed());
    CHECK_FALSE(ScenarioCheck{"x", NAN, 0.0, 1.0, Compare::Absolute}.passed());
}
