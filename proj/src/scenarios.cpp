#include "pvortex/scenarios.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "pvortex/bifurcation.hpp"
#include "pvortex/error.hpp"

namespace pvortex {

namespace {

constexpr double kDriftBound = 1e-8;

double sign(double v) {
    return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
}

// Every scenario run must also keep its conserved quantities.
void add_conservation(ScenarioReport& rep, const Trajectory& traj) {
    for (const auto& [name, drift] : conservation_report(traj))
        rep.checks.push_back({"drift_" + name, drift, 0.0, kDriftBound, Compare::Absolute});
}

ScenarioReport run_conservation(const std::string& name, const VortexSystem& sys, const VortexState& s0) {
    IntegratorConfig cfg;
    cfg.t_end = 100.0;
    const Trajectory traj = integrate(sys, s0, cfg);
    ScenarioReport rep;
    rep.name = name;
    rep.checks.push_back({"completed", traj.terminated_by == Termination::TimeEnd ? 1.0 : 0.0, 1.0, 0.0,
                          Compare::Absolute});
    add_conservation(rep, traj);
    rep.finalize();
    return rep;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

bool ScenarioCheck::passed() const {
    if (!std::isfinite(measured)) return false;
    switch (compare) {
        case Compare::Absolute: return std::abs(measured - expected) <= tolerance;
        case Compare::Relative: return std::abs(measured - expected) <= tolerance * std::abs(expected);
        case Compare::AtLeast: return measured >= expected;
    }
    return false;
}

void ScenarioReport::finalize() {
    passed = !checks.empty();
    for (const auto& c : checks) passed = passed && c.passed();
}

std::string ScenarioReport::summary() const {
    std::ostringstream os;
    os << (passed ? "PASS " : "FAIL ") << name;
    for (const auto& c : checks) {
        if (c.passed() && passed) continue;
        os << " [" << c.name << ": measured " << fmt(c.measured) << ", expected "
           << (c.compare == Compare::AtLeast ? ">= " : "") << fmt(c.expected);
        if (c.compare != Compare::AtLeast)
            os << (c.compare == Compare::Relative ? " rel tol " : " tol ") << fmt(c.tolerance);
        os << "]";
    }
    return os.str();
}

ScenarioReport scenario_single_rest(double gamma, Point at) {
    const VortexSystem sys(Domain::Plane, {gamma});
    IntegratorConfig cfg;
    cfg.t_end = 10.0;
    const Trajectory traj = integrate(sys, VortexState{{at}}, cfg);
    double disp = 0.0;
    for (const auto& s : traj.states) disp = std::max(disp, std::hypot(s[0].x - at.x, s[0].y - at.y));
    ScenarioReport rep;
    rep.name = "single_rest(G=" + fmt(gamma) + ")";
    rep.checks.push_back({"max_displacement", disp, 0.0, 1e-12, Compare::Absolute});
    add_conservation(rep, traj);
    rep.finalize();
    return rep;
}

ScenarioReport scenario_pair_rotation(double gamma1, double gamma2, double d) {
    const double total = gamma1 + gamma2;
    if (total == 0.0) throw UsageError("pair rotation needs G1 + G2 != 0; use the dipole scenario");
    if (!(d > 0.0)) throw UsageError("pair separation must be positive");
    const VortexSystem sys(Domain::Plane, {gamma1, gamma2});
    const VortexState s0{{{0.5 * d, 0.0}, {-0.5 * d, 0.0}}};
    // angular velocity (G1 + G2) / (2 pi d^2) under the 1/(2 pi) Green's function;
    // a change of plane normalization rescales this period by the same factor
    const double period = 4.0 * kPi * kPi * d * d / std::abs(total);

    IntegratorConfig cfg;
    cfg.t_end = period;
    const Trajectory traj = integrate(sys, s0, cfg);

    auto centre = [&](const VortexState& s) {
        return Point{(gamma1 * s[0].x + gamma2 * s[1].x) / total, (gamma1 * s[0].y + gamma2 * s[1].y) / total};
    };
    const Point c0 = centre(s0);
    double centre_drift = 0.0, sep_drift = 0.0, angle = 0.0;
    double prev = std::atan2(s0[0].y - s0[1].y, s0[0].x - s0[1].x);
    for (const auto& s : traj.states) {
        const Point c = centre(s);
        centre_drift = std::max(centre_drift, std::hypot(c.x - c0.x, c.y - c0.y));
        sep_drift = std::max(sep_drift, std::abs(std::hypot(s[0].x - s[1].x, s[0].y - s[1].y) - d));
        const double a = std::atan2(s[0].y - s[1].y, s[0].x - s[1].x);
        angle += std::remainder(a - prev, 2.0 * kPi);
        prev = a;
    }
    const auto& sf = traj.states.back();
    const double ret = std::max(std::hypot(sf[0].x - s0[0].x, sf[0].y - s0[0].y),
                                std::hypot(sf[1].x - s0[1].x, sf[1].y - s0[1].y));
    const double measured_period = 2.0 * kPi * traj.times.back() / std::abs(angle);
    // position of the centre along z1 -> z2: inside (0, 1) iff same-sign strengths
    const double along = ((c0.x - s0[0].x) * (s0[1].x - s0[0].x) + (c0.y - s0[0].y) * (s0[1].y - s0[0].y)) / (d * d);
    const bool between = along > 0.0 && along < 1.0;

    ScenarioReport rep;
    rep.name = "pair_rotation(G=" + fmt(gamma1) + "," + fmt(gamma2) + ", d=" + fmt(d) + ")";
    rep.checks = {
        {"period", measured_period, period, 1e-6, Compare::Relative},
        {"rotation_sense", sign(angle), sign(total), 0.0, Compare::Absolute},
        {"centre_drift", centre_drift, 0.0, 1e-8, Compare::Absolute},
        {"separation_drift", sep_drift, 0.0, 1e-8, Compare::Absolute},
        {"return_to_start", ret, 0.0, 1e-6, Compare::Absolute},
        {"centre_between", between ? 1.0 : 0.0, gamma1 * gamma2 > 0.0 ? 1.0 : 0.0, 0.0, Compare::Absolute},
    };
    add_conservation(rep, traj);
    rep.finalize();
    return rep;
}

ScenarioReport scenario_dipole_translation(double gamma, double d) {
    if (gamma == 0.0 || !(d > 0.0)) throw UsageError("dipole needs G != 0 and d > 0");
    const VortexSystem sys(Domain::Plane, {gamma, -gamma});
    const VortexState s0{{{0.0, 0.5 * d}, {0.0, -0.5 * d}}};
    IntegratorConfig cfg;
    cfg.t_end = 10.0;
    const Trajectory traj = integrate(sys, s0, cfg);

    const auto& sf = traj.states.back();
    const double mx = 0.5 * (sf[0].x + sf[1].x), my = 0.5 * (sf[0].y + sf[1].y);
    const double dist = std::hypot(mx, my);
    const double speed = dist / traj.times.back();
    // cosine between the displacement and the vortex segment
    const double sx = sf[0].x - sf[1].x, sy = sf[0].y - sf[1].y;
    const double cosine = (mx * sx + my * sy) / (dist * std::hypot(sx, sy));
    double sep_drift = 0.0;
    for (const auto& s : traj.states)
        sep_drift = std::max(sep_drift, std::abs(std::hypot(s[0].x - s[1].x, s[0].y - s[1].y) - d));

    ScenarioReport rep;
    rep.name = "dipole_translation(G=" + fmt(gamma) + ", d=" + fmt(d) + ")";
    rep.checks = {
        {"speed", speed, std::abs(gamma) / (2.0 * kPi * d), 1e-8, Compare::Relative},
        {"direction_cosine", cosine, 0.0, 1e-8, Compare::Absolute},
        {"separation_drift", sep_drift, 0.0, 1e-8, Compare::Absolute},
    };
    add_conservation(rep, traj);
    rep.finalize();
    return rep;
}

ScenarioReport scenario_halfplane_drift(double gamma, double y) {
    if (gamma == 0.0 || !(y > 0.0)) throw UsageError("half-plane drift needs G != 0 and y > 0");
    const VortexSystem sys(Domain::HalfPlane, {gamma});
    const VortexState s0{{{0.0, y}}};
    IntegratorConfig cfg;
    cfg.t_end = 10.0;
    const Trajectory traj = integrate(sys, s0, cfg);
    const auto& sf = traj.states.back();
    double vertical = 0.0;
    for (const auto& s : traj.states) vertical = std::max(vertical, std::abs(s[0].y - y));

    ScenarioReport rep;
    rep.name = "halfplane_drift(G=" + fmt(gamma) + ", y=" + fmt(y) + ")";
    rep.checks = {
        {"speed", std::abs(sf[0].x) / traj.times.back(), std::abs(gamma) / (4.0 * kPi * y), 1e-8, Compare::Relative},
        {"direction", sign(sf[0].x), sign(gamma), 0.0, Compare::Absolute},
        {"vertical_displacement", vertical, 0.0, 1e-12, Compare::Absolute},
    };
    add_conservation(rep, traj);
    rep.finalize();
    return rep;
}

std::vector<ScenarioReport> run_verify_suite(const std::string& suite) {
    const bool all = suite == "all";
    if (!all && suite != "scenarios" && suite != "bifurcation" && suite != "conservation" && suite != "grobli")
        throw UsageError("unknown suite '" + suite + "' (scenarios, bifurcation, conservation, grobli, all)");
    std::vector<ScenarioReport> out;

    if (all || suite == "scenarios") {
        out.push_back(scenario_single_rest(1.0, {0.0, 0.0}));
        out.push_back(scenario_single_rest(-3.0, {2.0, 5.0}));
        out.push_back(scenario_pair_rotation(1.0, 1.0, 1.0));
        out.push_back(scenario_pair_rotation(1.0, 2.0, 1.0));
        out.push_back(scenario_pair_rotation(1.0, -2.0, 1.0));
        out.push_back(scenario_dipole_translation(1.0, 1.0));
        out.push_back(scenario_dipole_translation(2.0, 1.0));
        out.push_back(scenario_dipole_translation(1.0, 2.0));
        out.push_back(scenario_halfplane_drift(1.0, 1.0));
        out.push_back(scenario_halfplane_drift(-1.0, 1.0));
        out.push_back(scenario_halfplane_drift(1.0, 2.0));
    }

    if (all || suite == "bifurcation") {
        const double phi = kGoldenRatio;
        for (double lambda : {-1.0, 1.0}) {
            const std::string tag = lambda < 0.0 ? "dipole" : "pair";
            const double target = lambda < 0.0 ? phi : 1.0 / phi;

            ScenarioReport alg;
            alg.name = "critical_W_algebraic(" + tag + ")";
            const BifurcationResult a = critical_W(lambda);
            alg.checks = {{"W*", a.critical_W, target, 1e-12, Compare::Absolute},
                          {"stop_cross_ratio", a.cross_ratio_at_stop, phi, 1e-12, Compare::Absolute}};
            alg.finalize();
            out.push_back(alg);

            ScenarioReport sim;
            sim.name = "critical_W_simulation(" + tag + ")";
            const auto bracket = lambda < 0.0 ? std::pair{0.1, 0.4} : std::pair{3.0, 6.0};
            const BifurcationResult s = find_cusp_by_simulation(lambda, bracket, IntegratorConfig{});
            sim.checks = {{"W*", s.critical_W, target, 1e-6, Compare::Absolute},
                          {"stop_ratio", s.stop_ratio, stop_height_ratio(lambda), 1e-6, Compare::Absolute},
                          {"ydot_1", s.alignment->diagnostics.at("ydot_i"), 0.0, 1e-9, Compare::Absolute},
                          {"ydot_2", s.alignment->diagnostics.at("ydot_j"), 0.0, 1e-9, Compare::Absolute}};
            sim.finalize();
            out.push_back(sim);

            ScenarioReport flip;
            flip.name = "regime_flip(" + tag + ")";
            const double ws = a.critical_W;
            const Regime below = classify_regime(encounter_run(lambda, ws - 1e-3, IntegratorConfig{}), lambda);
            const Regime above = classify_regime(encounter_run(lambda, ws + 1e-3, IntegratorConfig{}), lambda);
            // the kink side is where the stopping vortex runs backwards at the alignment
            const double speed_below = alignment_speed(lambda, aligned_ratio_for_W(lambda, ws - 1e-3));
            flip.checks = {
                {"below_is_kink", below.tag == RegimeTag::KinkOrLeapfrog ? 1.0 : 0.0, 1.0, 0.0, Compare::Absolute},
                {"above_is_smooth", above.tag == RegimeTag::SmoothPass ? 1.0 : 0.0, 1.0, 0.0, Compare::Absolute},
                {"alignment_speed_below_negative", speed_below < 0.0 ? 1.0 : 0.0, 1.0, 0.0, Compare::Absolute}};
            flip.finalize();
            out.push_back(flip);

            ScenarioReport cusp;
            cusp.name = "cusp_exponent(" + tag + ")";
            const Trajectory traj = encounter_run(lambda, ws, IntegratorConfig{});
            double slope = std::nan("");
            for (const Event& ev : traj.events)
                if (ev.kind == EventKind::InstantaneousStop) {
                    slope = cusp_exponent_check(traj, ev);
                    break;
                }
            cusp.checks = {{"slope", slope, 1.5, 0.05, Compare::Absolute}};
            cusp.finalize();
            out.push_back(cusp);
        }
        ScenarioReport cr;
        cr.name = "cross_ratio_identities";
        const double A = balance_point();
        cr.checks = {
            {"CR(2+sqrt5,1,-1,-2-sqrt5)", cross_ratio(2.0 + std::sqrt(5.0), 1.0, -1.0, -2.0 - std::sqrt(5.0)), phi,
             1e-12, Compare::Absolute},
            {"balance_quadratic", A * A - 4.0 * A - 1.0, 0.0, 1e-12, Compare::Absolute},
            {"balance_cross_ratio", cross_ratio(A, 1.0, -1.0, -A), phi, 1e-12, Compare::Absolute}};
        cr.finalize();
        out.push_back(cr);
    }

    if (all || suite == "conservation") {
        out.push_back(run_conservation("conservation(pair rotation)", VortexSystem(Domain::Plane, {1.0, 1.0}),
                                       VortexState{{{0.5, 0.0}, {-0.5, 0.0}}}));
        out.push_back(run_conservation("conservation(dipole translation)", VortexSystem(Domain::Plane, {1.0, -1.0}),
                                       VortexState{{{0.0, 0.5}, {0.0, -0.5}}}));
        for (double W : {1.4, 1.9}) {
            const auto [sys, st] = aligned_state(-1.0, aligned_ratio_for_W(-1.0, W));
            const Encounter enc = encounter_from_aligned(sys, st, IntegratorConfig{});
            out.push_back(run_conservation("conservation(half-plane dipole W=" + fmt(W) + ")", sys, enc.initial));
        }
    }

    if (all || suite == "grobli") {
        const std::vector<double> g{3.0, -2.0, 6.0};
        try {
            const GrobliResult res = grobli_selfsimilar_search(g);
            out.push_back(res.expansion);
            out.push_back(res.contraction);
        } catch (const DiagnosticError& e) {
            ScenarioReport failed;
            failed.name = "grobli_search";
            failed.checks = {{e.what(), 0.0, 1.0, 0.0, Compare::AtLeast}};
            failed.finalize();
            out.push_back(failed);
        }
    }
    return out;
}

}  // namespace pvortex
