// Self-similar three-vortex configurations.
//
// Gauge: z1 = (0, 0), z2 = (1, 0), z3 = (u, v). Scale and rotation invariance
// of the flow (when sum G_j G_k = 0) make this choice free of loss.
//   1. coarse grid over z3, scored by shape drift per unit log-size change
//      over a short integration window;
//   2. Nelder-Mead on the same score from the best local minima;
//   3. Newton on the instantaneous shape rates d/dt ln(l_ij / l_13) = 0;
//   4. verification by a long integration (size change >= 2x).
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_multiroots.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>

#include "pvortex/error.hpp"
#include "pvortex/scenarios.hpp"

namespace pvortex {

namespace {

constexpr double kBad = 1e6;

struct Lengths {
    double l12, l13, l23;
};

Lengths lengths(const VortexState& s) {
    auto d = [&](std::size_t a, std::size_t b) { return std::hypot(s[a].x - s[b].x, s[a].y - s[b].y); };
    return {d(0, 1), d(0, 2), d(1, 2)};
}

VortexState gauge_state(double u, double v) {
    return VortexState{{{0.0, 0.0}, {1.0, 0.0}, {u, v}}};
}

// d/dt ln l_ij for (12, 13, 23)
std::array<double, 3> log_rates(const VortexSystem& sys, const VortexState& s) {
    const auto vel = velocity(sys, s);
    auto rate = [&](std::size_t a, std::size_t b) {
        const double dx = s[a].x - s[b].x, dy = s[a].y - s[b].y;
        const double du = vel[a].x - vel[b].x, dv = vel[a].y - vel[b].y;
        return (dx * du + dy * dv) / (dx * dx + dy * dy);
    };
    return {rate(0, 1), rate(0, 2), rate(1, 2)};
}

struct SearchContext {
    const VortexSystem* sys;
    const GrobliOptions* opts;
};

double window_score(const SearchContext& ctx, double u, double v) {
    const VortexState s = gauge_state(u, v);
    if (!std::isfinite(u) || !std::isfinite(v) || min_clearance(*ctx.sys, s) < 0.1) return kBad;
    IntegratorConfig cfg;
    cfg.t_end = ctx.opts->window;
    cfg.output_interval = ctx.opts->window / 10.0;
    cfg.max_step = ctx.opts->window;
    cfg.collision_guard = 1e-3;
    const Trajectory traj = integrate(*ctx.sys, s, cfg);
    if (traj.terminated_by != Termination::TimeEnd) return kBad;
    const Lengths l0 = lengths(traj.states.front());
    double dev = 0.0;
    for (const auto& st : traj.states) {
        const Lengths l = lengths(st);
        dev = std::max(dev, std::abs((l.l12 / l.l13) / (l0.l12 / l0.l13) - 1.0));
        dev = std::max(dev, std::abs((l.l23 / l.l13) / (l0.l23 / l0.l13) - 1.0));
    }
    const double growth = std::abs(std::log(lengths(traj.states.back()).l13 / l0.l13));
    return dev / std::max(growth, 1e-14);
}

double nm_objective(const gsl_vector* x, void* params) {
    const auto* ctx = static_cast<const SearchContext*>(params);
    return window_score(*ctx, gsl_vector_get(x, 0), gsl_vector_get(x, 1));
}

std::pair<double, double> nelder_mead(const SearchContext& ctx, double u, double v) {
    gsl_multimin_function fn{&nm_objective, 2, const_cast<SearchContext*>(&ctx)};
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(2), &gsl_vector_free);
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> step(gsl_vector_alloc(2), &gsl_vector_free);
    gsl_vector_set(x.get(), 0, u);
    gsl_vector_set(x.get(), 1, v);
    gsl_vector_set_all(step.get(), 0.25 * ctx.opts->grid_step);
    std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> m(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2), &gsl_multimin_fminimizer_free);
    gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), step.get());
    for (int it = 0; it < 400; ++it) {
        if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()), 1e-9) == GSL_SUCCESS) break;
    }
    return {gsl_vector_get(m->x, 0), gsl_vector_get(m->x, 1)};
}

int shape_rates(const gsl_vector* x, void* params, gsl_vector* f) {
    const auto* ctx = static_cast<const SearchContext*>(params);
    const VortexState s = gauge_state(gsl_vector_get(x, 0), gsl_vector_get(x, 1));
    if (min_clearance(*ctx->sys, s) < 1e-6) return GSL_EDOM;
    const auto r = log_rates(*ctx->sys, s);
    gsl_vector_set(f, 0, r[0] - r[1]);
    gsl_vector_set(f, 1, r[2] - r[1]);
    return GSL_SUCCESS;
}

// Newton (Powell hybrid, finite-difference Jacobian) on the shape rates.
std::pair<double, double> polish(const SearchContext& ctx, double u, double v) {
    gsl_multiroot_function fn{&shape_rates, 2, const_cast<SearchContext*>(&ctx)};
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(2), &gsl_vector_free);
    gsl_vector_set(x.get(), 0, u);
    gsl_vector_set(x.get(), 1, v);
    std::unique_ptr<gsl_multiroot_fsolver, decltype(&gsl_multiroot_fsolver_free)> s(
        gsl_multiroot_fsolver_alloc(gsl_multiroot_fsolver_hybrids, 2), &gsl_multiroot_fsolver_free);
    if (gsl_multiroot_fsolver_set(s.get(), &fn, x.get()) != GSL_SUCCESS) return {u, v};
    for (int it = 0; it < 100; ++it) {
        if (gsl_multiroot_fsolver_iterate(s.get()) != GSL_SUCCESS) break;
        if (gsl_multiroot_test_residual(s->f, 1e-15) == GSL_SUCCESS) break;
    }
    return {gsl_vector_get(s->x, 0), gsl_vector_get(s->x, 1)};
}

}  // namespace

double grobli_collapse_condition(std::span<const double> g) {
    if (g.size() != 3) throw UsageError("the self-similarity condition is stated for three vortices");
    return g[0] * g[1] + g[0] * g[2] + g[1] * g[2];
}

ScenarioReport grobli_verify(const VortexSystem& sys, const VortexState& config, const GrobliOptions& opts,
                             const std::string& name) {
    if (sys.size() != 3 || sys.domain() != Domain::Plane)
        throw UsageError("self-similar verification needs three plane vortices");
    const double kappa = log_rates(sys, config)[1];
    if (!(std::abs(kappa) > 1e-9)) throw DiagnosticError("configuration does not change size");

    // self-similar motion has l^2 linear in time: l^2(t) = l0^2 (1 + 2 kappa t)
    const double f2 = opts.size_factor * opts.size_factor;
    const double t_target = kappa > 0.0 ? (f2 - 1.0) / (2.0 * kappa) : (1.0 - 1.0 / f2) / (2.0 * -kappa);
    IntegratorConfig cfg;
    cfg.t_end = (kappa > 0.0 ? 1.25 : 1.1) * t_target;
    cfg.output_interval = cfg.t_end / 2000.0;
    cfg.max_step = cfg.output_interval * 10.0;
    const Trajectory traj = integrate(sys, config, cfg);

    const Lengths l0 = lengths(config);
    double drift = 0.0, factor = 1.0;
    for (const auto& st : traj.states) {
        const Lengths l = lengths(st);
        drift = std::max(drift, std::abs((l.l12 / l.l13) / (l0.l12 / l0.l13) - 1.0));
        drift = std::max(drift, std::abs((l.l23 / l.l13) / (l0.l23 / l0.l13) - 1.0));
        const double size = l.l13 / l0.l13;
        factor = std::max(factor, std::max(size, 1.0 / size));
        if (factor >= opts.size_factor) break;
    }
    ScenarioReport rep;
    rep.name = name;
    rep.checks = {
        {"shape_drift", drift, 0.0, opts.drift_limit, Compare::Absolute},
        {"size_factor", factor, opts.size_factor, 0.0, Compare::AtLeast},
        {"collapse_condition", grobli_collapse_condition(sys.strengths()), 0.0, 0.0, Compare::Absolute},
        {"no_near_collision", traj.terminated_by == Termination::TimeEnd ? 1.0 : 0.0, 1.0, 0.0, Compare::Absolute},
    };
    rep.finalize();
    return rep;
}

GrobliResult grobli_selfsimilar_search(std::span<const double> strengths, const GrobliOptions& opts) {
    if (strengths.size() != 3) throw UsageError("self-similar search needs exactly three strengths");
    double scale = 0.0;
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t k = j + 1; k < 3; ++k) scale += std::abs(strengths[j] * strengths[k]);
    if (std::abs(grobli_collapse_condition(strengths)) > 1e-12 * scale)
        throw UsageError("sum of G_j G_k over pairs must vanish for self-similar motion");
    if (!(opts.grid_step > 0.0) || !(opts.window > 0.0)) throw UsageError("grid_step and window must be positive");

    const VortexSystem sys(Domain::Plane, std::vector<double>(strengths.begin(), strengths.end()));
    const SearchContext ctx{&sys, &opts};

    // coarse grid
    const double u0 = -2.0, u1 = 3.0, v0 = -2.5, v1 = 2.5;
    const int nu = static_cast<int>(std::round((u1 - u0) / opts.grid_step)) + 1;
    const int nv = static_cast<int>(std::round((v1 - v0) / opts.grid_step)) + 1;
    std::vector<double> score(static_cast<std::size_t>(nu * nv));
    auto at = [&](int i, int j) -> double& { return score[static_cast<std::size_t>(i * nv + j)]; };
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) at(i, j) = window_score(ctx, u0 + i * opts.grid_step, v0 + j * opts.grid_step);

    // local minima of the grid, best first
    std::vector<std::pair<double, std::pair<int, int>>> minima;
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
            const double s = at(i, j);
            if (s >= kBad) continue;
            bool is_min = true;
            for (int di = -1; di <= 1 && is_min; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    const int a = i + di, b = j + dj;
                    if ((di || dj) && a >= 0 && a < nu && b >= 0 && b < nv && at(a, b) < s) {
                        is_min = false;
                        break;
                    }
                }
            if (is_min) minima.push_back({s, {i, j}});
        }
    std::sort(minima.begin(), minima.end());
    if (minima.size() > opts.polish_starts) minima.resize(opts.polish_starts);

    double best_drift = std::numeric_limits<double>::infinity();
    for (const auto& [s, ij] : minima) {
        auto [u, v] = nelder_mead(ctx, u0 + ij.first * opts.grid_step, v0 + ij.second * opts.grid_step);
        std::tie(u, v) = polish(ctx, u, v);
        VortexState config = gauge_state(u, v);
        if (min_clearance(sys, config) < 1e-3) continue;
        double kappa = log_rates(sys, config)[1];
        if (!(std::abs(kappa) > 1e-6)) continue;  // rigidly rotating shapes
        if (kappa < 0.0) {
            // the mirror image runs the same motion backwards in time
            config = gauge_state(u, -v);
            kappa = log_rates(sys, config)[1];
        }
        GrobliResult res;
        res.configuration = config;
        res.scale_rate = kappa;
        res.expansion = grobli_verify(sys, config, opts, "grobli_expansion");
        res.contraction = grobli_verify(sys.reversed(), config, opts, "grobli_contraction");
        best_drift = std::min(best_drift, res.expansion.checks.front().measured);
        if (res.expansion.passed && res.contraction.passed) return res;
    }
    throw DiagnosticError("no self-similar configuration verified; best shape drift " + std::to_string(best_drift));
}

}  // namespace pvortex
