// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pvortex/bifurcation.hpp"
#include "pvortex/error.hpp"
#include "pvortex/integrate.hpp"
#include "pvortex/scenarios.hpp"
#include "pvortex/vortex.hpp"
#include "support.hpp"

using namespace pvortex;

namespace {

// mpmath, 50 digits, rounded to double
constexpr double kPhi = 1.6180339887498949;
constexpr double kInvPhi = 0.61803398874989485;
constexpr double kTwoPlusSqrt5 = 4.2360679774997897;
constexpr double kDipoleStopRatio = 0.23606797749978970;  // sqrt 5 - 2
constexpr double kPairStopRatio = 4.2360679774997897;     // 2 + sqrt 5

struct Outcome {
    bool passed = true;
    std::ostringstream detail;

    Outcome() { detail.precision(17); }

    void require(bool ok, const std::string& what) {
        if (!ok) {
            passed = false;
            detail << " [" << what << "]";
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string run_cli(const std::string& args, int& code) {
    FILE* p = popen((std::string(PVORTEX_CLI) + " " + args + " 2>&1").c_str(), "r");
    std::string out;
    if (!p) {
        code = -1;
        return out;
    }
    std::array<char, 4096> buf;
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
    const int status = pclose(p);
    code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

double parse_w_star(const std::string& out) {
    const auto at = out.find("W* = ");
    if (at == std::string::npos) return NAN;
    return std::strtod(out.c_str() + at + 5, nullptr);
}

void algebraic(Outcome& o) {
    for (const auto& [lambda, target] : {std::pair{-1.0, kPhi}, std::pair{1.0, kInvPhi}}) {
        const auto t0 = std::chrono::steady_clock::now();
        const double w = critical_W(lambda).critical_W;
        const double dt = seconds_since(t0);
        o.detail << " lambda=" << lambda << " W*=" << w << " (" << dt * 1e3 << " ms)";
        o.require(std::fabs(w - target) < 1e-12, "in-process W*");
        o.require(dt < 1e-3, "runtime");

        int code = 0;
        const std::string out = run_cli("bifurcate --method algebraic --lambda " + std::to_string(lambda), code);
        o.require(code == 0 && std::fabs(parse_w_star(out) - target) < 1e-12, "cli W*");
    }
}

void dynamic(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& [lambda, target, bracket] :
         {std::tuple{-1.0, kPhi, std::pair{0.1, 0.4}}, std::tuple{1.0, kInvPhi, std::pair{3.0, 6.0}}}) {
        const BifurcationResult r = find_cusp_by_simulation(lambda, bracket, IntegratorConfig{});
        const double ratio_target = lambda < 0 ? kDipoleStopRatio : kPairStopRatio;
        o.require(r.alignment.has_value(), "alignment event");
        if (!r.alignment) continue;
        const double yd1 = r.alignment->diagnostics.at("ydot_i");
        const double yd2 = r.alignment->diagnostics.at("ydot_j");
        const double ratio = r.alignment->diagnostics.at("y_i") / r.alignment->diagnostics.at("y_j");
        o.detail << " lambda=" << lambda << " W*=" << r.critical_W << " |ydot|=" << std::max(std::fabs(yd1), std::fabs(yd2))
                 << " ratio=" << ratio;
        o.require(std::fabs(r.critical_W - target) < 1e-6, "W*");
        o.require(std::fabs(yd1) < 1e-9 && std::fabs(yd2) < 1e-9, "ydot");
        o.require(std::fabs(ratio - ratio_target) < 1e-6, "y1/y2");
    }
    const double dt = seconds_since(t0);
    o.detail << " (" << dt << " s)";
    o.require(dt < 30.0, "runtime");
}

void cross_ratios(Outcome& o) {
    const double cr = cross_ratio(kTwoPlusSqrt5, 1.0, -1.0, -kTwoPlusSqrt5);
    const double a = balance_point();
    o.detail << " CR=" << cr << " A=" << a;
    o.require(std::fabs(cr - kPhi) < 1e-12, "CR(2+sqrt5, 1, -1, -2-sqrt5)");
    o.require(std::fabs(stop_cross_ratio(-1.0) - kPhi) < 1e-12, "stop CR(-1)");
    o.require(std::fabs(stop_cross_ratio(1.0) - kPhi) < 1e-12, "stop CR(+1)");
    o.require(std::fabs(a * a - 4.0 * a - 1.0) < 1e-12, "A^2 - 4A - 1");
}

void conservation(Outcome& o) {
    struct Case {
        std::string name;
        VortexSystem system;
        VortexState initial;
    };
    std::vector<Case> cases{
        {"pair", VortexSystem(Domain::Plane, {1.0, 1.0}), VortexState{{{0.5, 0.0}, {-0.5, 0.0}}}},
        {"dipole", VortexSystem(Domain::Plane, {1.0, -1.0}), VortexState{{{0.0, 0.5}, {0.0, -0.5}}}},
    };
    for (double W : {1.4, 1.9}) {
        const auto [sys, st] = aligned_state(-1.0, aligned_ratio_for_W(-1.0, W));
        cases.push_back({"half-plane W=" + std::to_string(W).substr(0, 3), sys,
                         encounter_from_aligned(sys, st, IntegratorConfig{}).initial});
    }
    IntegratorConfig cfg;
    cfg.t_end = 100.0;
    const auto t0 = std::chrono::steady_clock::now();
    for (const Case& c : cases) {
        const Trajectory tr = integrate(c.system, c.initial, cfg);
        o.require(tr.terminated_by == Termination::TimeEnd, c.name + " ended early");
        const auto names = invariant_names(c.system);
        const auto v0 = invariant_values(c.system, c.initial);
        double worst = 0.0;
        for (const auto& s : tr.states) {
            const auto v = invariant_values(c.system, s);
            for (std::size_t k = 0; k < v.size(); ++k) {
                // relative where the initial value is nonzero, absolute otherwise
                const double scale = std::fabs(v0[k]) > 1e-12 ? std::fabs(v0[k]) : 1.0;
                worst = std::max(worst, std::fabs(v[k] - v0[k]) / scale);
            }
        }
        o.detail << " " << c.name << "=" << worst;
        o.require(worst < 1e-8, c.name);
    }
    const double dt = seconds_since(t0);
    o.detail << " (" << dt << " s)";
    o.require(dt < 10.0, "runtime");
}

double measured(const ScenarioReport& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return c.measured;
    return NAN;
}

void analytic(Outcome& o) {
    const double pi = std::numbers::pi;
    for (const auto& [g, d] : {std::pair{1.0, 1.0}, std::pair{2.0, 0.5}}) {
        const ScenarioReport r = scenario_pair_rotation(g, g, d);
        const double expected = 4.0 * pi * pi * d * d / (2.0 * g);
        const double rel = std::fabs(measured(r, "period") / expected - 1.0);
        o.detail << " period=" << rel;
        o.require(rel < 1e-6, "rotation period");
    }
    for (const auto& [g, d] : {std::pair{1.0, 1.0}, std::pair{2.0, 1.0}, std::pair{1.0, 2.0}}) {
        const double rel = std::fabs(measured(scenario_dipole_translation(g, d), "speed") / (g / (2.0 * pi * d)) - 1.0);
        o.detail << " dipole=" << rel;
        o.require(rel < 1e-6, "dipole speed");
    }
    for (const auto& [g, y] : {std::pair{1.0, 1.0}, std::pair{-1.0, 1.0}, std::pair{1.0, 2.0}}) {
        const double rel =
            std::fabs(measured(scenario_halfplane_drift(g, y), "speed") / (std::fabs(g) / (4.0 * pi * y)) - 1.0);
        o.detail << " drift=" << rel;
        o.require(rel < 1e-6, "half-plane drift speed");
    }
    const double disp = measured(scenario_single_rest(1.0, {0.0, 0.0}), "max_displacement");
    o.detail << " rest=" << disp;
    o.require(disp < 1e-12, "single vortex displacement");
}

void regime_flip(Outcome& o) {
    for (double lambda : {-1.0, 1.0}) {
        const double ws = critical_W(lambda).critical_W;
        const RegimeTag below = classify_regime(encounter_run(lambda, ws - 1e-3, IntegratorConfig{}), lambda).tag;
        const RegimeTag above = classify_regime(encounter_run(lambda, ws + 1e-3, IntegratorConfig{}), lambda).tag;
        o.detail << " lambda=" << lambda << ": " << to_string(below) << " / " << to_string(above);
        o.require(below == RegimeTag::KinkOrLeapfrog, "below W*");
        o.require(above == RegimeTag::SmoothPass, "above W*");
    }
}

void cusp_geometry(Outcome& o) {
    for (double lambda : {-1.0, 1.0}) {
        const auto [sys, st] = aligned_state(lambda, stop_height_ratio(lambda));
        const Encounter enc = encounter_from_aligned(sys, st, IntegratorConfig{});
        const double dw = std::fabs(interaction_W(sys, enc.initial) - critical_W(lambda).critical_W);
        o.require(dw < 1e-9, "|W - W*|");
        const Trajectory tr = run_encounter(enc, IntegratorConfig{});
        const Event* stop = nullptr;
        for (const Event& e : tr.events)
            if (e.kind == EventKind::InstantaneousStop) stop = &e;
        o.require(stop != nullptr, "stop event");
        if (!stop) continue;
        const double slope = cusp_exponent_check(tr, *stop);
        o.detail << " lambda=" << lambda << " |W-W*|=" << dw << " slope=" << slope;
        o.require(std::fabs(slope - 1.5) < 0.05, "slope");
    }
}

void grobli(Outcome& o) {
    const std::vector<double> g{3.0, -2.0, 6.0};
    const double sum = grobli_collapse_condition(g);
    o.require(sum == 0.0, "collapse condition");
    const auto t0 = std::chrono::steady_clock::now();
    const GrobliResult r = grobli_selfsimilar_search(g);
    const double dt = seconds_since(t0);

    // remeasure independently: integrate until l13 has doubled
    auto dist = [](const VortexState& st, std::size_t i, std::size_t j) {
        return std::hypot(st[i].x - st[j].x, st[i].y - st[j].y);
    };
    const VortexSystem sys(Domain::Plane, g);
    IntegratorConfig cfg;
    cfg.output_interval = 0.05;
    cfg.t_end = 1e4;
    const VortexState& z0 = r.configuration;
    const double r1 = dist(z0, 0, 1) / dist(z0, 0, 2), r2 = dist(z0, 1, 2) / dist(z0, 0, 2);
    const Trajectory tr = integrate(sys, z0, cfg);
    double drift = 0.0, size = 1.0;
    for (const auto& st : tr.states) {
        const double l13 = dist(st, 0, 2);
        drift = std::max({drift, std::fabs(dist(st, 0, 1) / l13 / r1 - 1.0), std::fabs(dist(st, 1, 2) / l13 / r2 - 1.0)});
        size = l13 / dist(z0, 0, 2);
        if (size >= 2.0 || size <= 0.5) break;
    }
    size = std::max(size, 1.0 / size);
    o.detail << " sum=" << sum << " z3=(" << r.configuration[2].x << "," << r.configuration[2].y << ") drift=" << drift
             << " size=" << size << " (" << dt << " s)";
    o.require(r.expansion.passed && r.contraction.passed, "verification");
    o.require(drift < 1e-4, "ratio drift");
    o.require(size >= 2.0, "size change");
    o.require(dt < 60.0, "runtime");
}

void oracle(Outcome& o) {
    std::mt19937_64 rng(7);
    double worst = 0.0;
    int count = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Domain d = trial % 2 ? Domain::HalfPlane : Domain::Plane;
        const std::size_t n = 1 + static_cast<std::size_t>(trial / 2) % 3;
        const auto c = support::random_case(rng, d, n);
        const auto v = velocity(c.system, c.state);
        const auto fd = velocity_fd_oracle(c.system, c.state, 1e-6);
        double diff = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            diff = std::max({diff, std::fabs(v[i].x - fd[i].x), std::fabs(v[i].y - fd[i].y)});
            scale = std::max({scale, std::fabs(v[i].x), std::fabs(v[i].y)});
        }
        // a lone plane vortex has zero velocity; compare absolutely there
        worst = std::max(worst, scale > 0.0 ? diff / scale : diff);
        ++count;
    }
    o.detail << " states=" << count << " worst=" << worst;
    o.require(worst < 1e-6, "relative error");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"1 golden-ratio bifurcation (algebraic)", algebraic},
        {"2 golden-ratio bifurcation (dynamic)", dynamic},
        {"3 cross-ratio identities", cross_ratios},
        {"4 conservation", conservation},
        {"5 analytic scenarios", analytic},
        {"6 regime flip", regime_flip},
        {"7 cusp geometry", cusp_geometry},
        {"8 self-similar three-vortex motion", grobli},
        {"9 oracle equivalence", oracle},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            fn(o);
        } catch (const std::exception& e) {
            o.passed = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        std::printf("%s %s:%s\n", o.passed ? "PASS" : "FAIL", name.c_str(), o.detail.str().c_str());
        std::fflush(stdout);
        if (!o.passed) ++failed;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
