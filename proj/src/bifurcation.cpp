#include "pvortex/bifurcation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pvortex/error.hpp"

namespace pvortex {

namespace {

void require_two_half_plane(const VortexSystem& sys, const char* what) {
    if (sys.domain() != Domain::HalfPlane || sys.size() != 2)
        throw UsageError(std::string(what) + " is defined for two vortices in the half-plane");
}

void require_nonzero(double lambda) {
    if (lambda == 0.0 || !std::isfinite(lambda)) throw UsageError("strength ratio lambda must be finite and nonzero");
}

void require_unit_lambda(double lambda) {
    if (lambda != 1.0 && lambda != -1.0) throw UsageError("lambda must be +1 (pair) or -1 (dipole)");
}

// log W for strengths (1, lambda); P and H taken in the normalized frame.
double log_w_normalized(double lambda, double p, double h) {
    return (1.0 + lambda * lambda) * std::log(std::abs(p)) - 4.0 * kPi * h;
}

}  // namespace

std::string_view to_string(BifurcationMethod m) {
    return m == BifurcationMethod::Algebraic ? "Algebraic" : "Simulation";
}

std::string_view to_string(RegimeTag r) {
    switch (r) {
        case RegimeTag::Escape: return "Escape";
        case RegimeTag::KinkOrLeapfrog: return "KinkOrLeapfrog";
        case RegimeTag::Cusp: return "Cusp";
        case RegimeTag::SmoothPass: return "SmoothPass";
    }
    return "?";
}

double interaction_W(const VortexSystem& sys, const VortexState& state) {
    require_two_half_plane(sys, "interaction_W");
    const double g1 = sys.strength(0);
    const double g2 = sys.strength(1);
    if (std::abs(std::abs(g1) - std::abs(g2)) > 1e-12 * std::abs(g1))
        throw UsageError("interaction_W needs Gamma_1 = +-Gamma_2; use the general-lambda form");
    const double h = hamiltonian(sys, state);
    const double p = g1 * state[0].y + g2 * state[1].y;
    const double q = p / g1;
    return q * q * std::exp(-4.0 * kPi * h / (g1 * g1));
}

double interaction_W_general(double lambda, const VortexState& state) {
    require_nonzero(lambda);
    const VortexSystem sys(Domain::HalfPlane, {1.0, lambda});
    const double h = hamiltonian(sys, state);
    const double p = state[0].y + lambda * state[1].y;
    return std::exp(log_w_normalized(lambda, p, h));
}

double interaction_W_any(const VortexSystem& sys, const VortexState& state) {
    require_two_half_plane(sys, "interaction parameter");
    const double g1 = sys.strength(0);
    const double lambda = sys.strength(1) / g1;
    const double h = hamiltonian(sys, state) / (g1 * g1);
    const double p = state[0].y + lambda * state[1].y;
    return std::exp(log_w_normalized(lambda, p, h));
}

double stop_height_ratio(double lambda) {
    require_nonzero(lambda);
    const double root = std::sqrt(4.0 * lambda * lambda + 1.0);
    // for lambda < 0 the direct sum cancels; use the conjugate form
    return lambda >= 0.0 ? 2.0 * lambda + root : 1.0 / (root - 2.0 * lambda);
}

double alignment_speed(double lambda, double ratio) {
    require_nonzero(lambda);
    if (!(ratio > 0.0) || ratio == 1.0) throw UsageError("alignment ratio must be positive and != 1");
    const double y1 = ratio;
    const double y2 = 1.0;
    return (y1 * y1 - y2 * y2 - 4.0 * lambda * y1 * y2) / (4.0 * kPi * y1 * (y1 * y1 - y2 * y2));
}

std::pair<VortexSystem, VortexState> aligned_state(double lambda, double ratio, double y2, double x) {
    require_nonzero(lambda);
    if (!(ratio > 0.0) || !std::isfinite(ratio)) throw UsageError("aligned_state: ratio must be > 0");
    if (ratio == 1.0) throw UsageError("aligned_state: ratio 1 puts both vortices at the same point");
    if (!(y2 > 0.0) || !std::isfinite(y2)) throw UsageError("aligned_state: y2 must be > 0");
    VortexSystem sys(Domain::HalfPlane, {1.0, lambda});
    VortexState st{{{x, ratio * y2}, {x, y2}}};
    return {std::move(sys), std::move(st)};
}

double aligned_ratio_for_W(double lambda, double W) {
    require_unit_lambda(lambda);
    if (lambda < 0.0) {
        // (r + 1)^2 / (4 r) = W, small root
        if (!(W >= 1.0)) throw UsageError("a dipole reaches a vertical alignment only for W >= 1");
        const double b = 2.0 * W - 1.0;
        return 1.0 / (b + std::sqrt(b * b - 1.0));
    }
    // (r - 1)^2 / (4 r) = W, large root
    if (!(W > 0.0)) throw UsageError("W must be positive");
    const double b = 2.0 * W + 1.0;
    return b + std::sqrt(b * b - 1.0);
}

BifurcationResult critical_W(double lambda) {
    require_nonzero(lambda);
    BifurcationResult res;
    res.lambda = lambda;
    res.method = BifurcationMethod::Algebraic;
    res.stop_ratio = stop_height_ratio(lambda);
    const double r = res.stop_ratio;
    if (std::fabs(lambda) == 1.0) {
        // on the stop, r^2 - 1 = 4 lambda r collapses W to (1 + lambda r) / (2r)
        res.critical_W = (1.0 + lambda * r) / (2.0 * r);
    } else {
        const auto [sys, st] = aligned_state(lambda, r);
        res.critical_W = interaction_W_general(lambda, st);
    }
    res.cross_ratio_at_stop = stop_cross_ratio(lambda);
    return res;
}

Encounter encounter_from_aligned(const VortexSystem& sys, const VortexState& aligned, const IntegratorConfig& cfg,
                                 const EncounterOptions& opts) {
    require_two_half_plane(sys, "an encounter");
    if (!(opts.offset > 0.0) || !(opts.max_back_time > 0.0))
        throw UsageError("encounter offset and max_back_time must be positive");
    IntegratorConfig back = cfg;
    back.t_end = opts.max_back_time;
    back.alignment_pairs = {{0, 1}};
    const Trajectory tb = integrate(sys.reversed(), aligned, back);

    double limit = tb.times.back();
    for (const Event& ev : tb.events) {
        if (ev.kind == EventKind::VerticalAlignment) {
            limit = std::min(limit, 0.5 * ev.time);
            break;
        }
    }
    if (tb.terminated_by != Termination::TimeEnd && tb.times.size() > 1)
        limit = std::min(limit, tb.times[tb.times.size() - 2]);

    std::size_t pick = 0;
    for (std::size_t k = 1; k < tb.times.size() && tb.times[k] <= limit; ++k) {
        pick = k;
        if (std::abs(tb.states[k][0].x - tb.states[k][1].x) >= opts.offset) break;
    }
    if (pick == 0) throw DiagnosticError("could not step back from the alignment (run too short)");
    return Encounter{sys, tb.states[pick], tb.times[pick]};
}

Trajectory run_encounter(const Encounter& enc, const IntegratorConfig& cfg) {
    IntegratorConfig fwd = cfg;
    fwd.t_end = 2.0 * enc.alignment_time;
    fwd.alignment_pairs = {{0, 1}};
    return integrate(enc.system, enc.initial, fwd);
}

Trajectory encounter_run(double lambda, double W, const IntegratorConfig& cfg, const EncounterOptions& opts) {
    const double ratio = aligned_ratio_for_W(lambda, W);
    const auto [sys, st] = aligned_state(lambda, ratio);
    return run_encounter(encounter_from_aligned(sys, st, cfg, opts), cfg);
}

BifurcationResult find_cusp_by_simulation(double lambda, std::pair<double, double> ratio_bracket,
                                          const IntegratorConfig& cfg, const CuspSearchOptions& opts) {
    require_unit_lambda(lambda);
    auto [lo, hi] = ratio_bracket;
    if (lo > hi) std::swap(lo, hi);
    if (!(lo > 0.0) || (lo < 1.0 && hi > 1.0) || lo == 1.0 || hi == 1.0 || lo == hi)
        throw UsageError("ratio bracket must be a proper interval inside (0, 1) or (1, inf)");

    struct Probe {
        double xdot;
        Event event;
        VortexSystem system;
    };
    auto probe = [&](double r) {
        const auto [sys, st] = aligned_state(lambda, r);
        const Encounter enc = encounter_from_aligned(sys, st, cfg, opts.encounter);
        const Trajectory traj = run_encounter(enc, cfg);
        const Event* best = nullptr;
        for (const Event& ev : traj.events) {
            if (ev.kind != EventKind::VerticalAlignment) continue;
            if (!best || std::abs(ev.time - enc.alignment_time) < std::abs(best->time - enc.alignment_time))
                best = &ev;
        }
        if (!best)
            throw DiagnosticError("no vertical alignment found when re-running ratio " + std::to_string(r) +
                                  " (terminated by " + std::string(to_string(traj.terminated_by)) + ")");
        return Probe{best->diagnostics.at("xdot_i"), *best, sys};
    };

    Probe p_lo = probe(lo);
    Probe p_hi = probe(hi);
    if ((p_lo.xdot > 0.0) == (p_hi.xdot > 0.0) && p_lo.xdot != 0.0 && p_hi.xdot != 0.0)
        throw UsageError("xdot_1 does not change sign across the ratio bracket");

    Probe best = std::abs(p_lo.xdot) < std::abs(p_hi.xdot) ? p_lo : p_hi;
    int it = 0;
    while (it < opts.max_iterations && std::abs(best.xdot) >= opts.residual_tol &&
           hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi) {
        ++it;
        const double mid = 0.5 * (lo + hi);
        Probe p = probe(mid);
        if (std::abs(p.xdot) < std::abs(best.xdot)) best = p;
        if ((p.xdot > 0.0) == (p_lo.xdot > 0.0)) {
            lo = mid;
            p_lo = std::move(p);
        } else {
            hi = mid;
        }
    }

    BifurcationResult res;
    res.lambda = lambda;
    res.method = BifurcationMethod::Simulation;
    const VortexState& s = best.event.state;
    res.critical_W = interaction_W(best.system, s);
    res.stop_ratio = s[0].y / s[1].y;
    res.cross_ratio_at_stop = cross_ratio(s[0].y, s[1].y, -s[1].y, -s[0].y);
    res.residual = std::abs(best.xdot);
    res.alignment = best.event;
    res.iterations = it;
    return res;
}

double cross_ratio(double a, double b, double c, double d) {
    if (a == b || c == d) throw UsageError("cross ratio is undefined when a == b or c == d");
    return (a - d) * (b - c) / ((a - b) * (c - d));
}

double stop_cross_ratio(double lambda) {
    const double r = stop_height_ratio(lambda);
    return cross_ratio(r, 1.0, -1.0, -r);
}

double balance_point() {
    return 2.0 + std::sqrt(5.0);
}

Regime classify_regime(const Trajectory& traj, double lambda) {
    require_unit_lambda(lambda);
    require_two_half_plane(traj.system, "regime classification");
    const double g1 = traj.system.strength(0);
    if (std::abs(traj.system.strength(1) - lambda * g1) > 1e-12 * std::abs(g1))
        throw UsageError("trajectory strengths do not match lambda");
    if (traj.terminated_by == Termination::NearCollision)
        throw DiagnosticError("regime unresolved: run terminated by NearCollision");
    if (traj.states.size() < 3) throw DiagnosticError("regime unresolved: trajectory too short");

    Regime reg;
    std::size_t alignments = 0, stops = 0;
    for (const Event& ev : traj.events) {
        if (ev.kind == EventKind::VerticalAlignment) ++alignments;
        if (ev.kind == EventKind::InstantaneousStop) ++stops;
    }

    // xdot series per vortex: samples merged with the alignment diagnostics,
    // which sit exactly on the extremum of xdot for the stopping vortex
    std::vector<std::pair<double, std::array<double, 2>>> series;
    series.reserve(traj.states.size() + traj.events.size());
    std::vector<double> uv(4);
    double min_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const auto xy = flatten(traj.states[k]);
        velocity_into(traj.system.domain(), traj.system.strengths(), xy, uv);
        series.push_back({traj.times[k], {uv[0], uv[2]}});
        min_dist = std::min(min_dist, std::hypot(xy[0] - xy[2], xy[1] - xy[3]));
    }
    for (const Event& ev : traj.events) {
        if (ev.kind != EventKind::VerticalAlignment) continue;
        std::array<double, 2> v{};
        v[ev.vortex_indices.first] = ev.diagnostics.at("xdot_i");
        v[ev.vortex_indices.second] = ev.diagnostics.at("xdot_j");
        series.push_back({ev.time, v});
    }
    std::stable_sort(series.begin(), series.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    int sign_changes = 0;
    for (int v = 0; v < 2; ++v) {
        int last = 0;
        for (const auto& [t, xd] : series) {
            const int s = xd[v] > 0.0 ? 1 : (xd[v] < 0.0 ? -1 : 0);
            if (s == 0) continue;
            if (last != 0 && s != last) ++sign_changes;
            last = s;
        }
    }

    const auto dist = [](const VortexState& s) { return std::hypot(s[0].x - s[1].x, s[0].y - s[1].y); };
    const double d0 = dist(traj.states.front());
    const double d1 = dist(traj.states.back());
    reg.evidence = {{"alignment_events", static_cast<double>(alignments)},
                    {"stop_events", static_cast<double>(stops)},
                    {"xdot_sign_changes", static_cast<double>(sign_changes)},
                    {"initial_distance", d0},
                    {"final_distance", d1},
                    {"min_distance", min_dist}};

    if (stops > 0) {
        reg.tag = RegimeTag::Cusp;
        return reg;
    }
    if (sign_changes > 0) {
        reg.tag = RegimeTag::KinkOrLeapfrog;
        return reg;
    }
    if (alignments > 0) {
        // a pair keeps intertwining; a dipole must actually part after the encounter
        if (lambda > 0.0 || d1 > 3.0 * min_dist) {
            reg.tag = RegimeTag::SmoothPass;
            return reg;
        }
        throw DiagnosticError("regime unresolved: dipole did not separate after the encounter");
    }
    if (lambda < 0.0) {
        // escape: the dipole leaves the wall along a straight slanted line
        double min_height = std::numeric_limits<double>::infinity();
        for (const auto& s : traj.states) min_height = std::min(min_height, 0.5 * (s[0].y + s[1].y));
        const double final_height = 0.5 * (traj.states.back()[0].y + traj.states.back()[1].y);
        const std::size_t from = traj.states.size() - std::max<std::size_t>(3, traj.states.size() / 4);
        double lo = std::numeric_limits<double>::infinity(), hi = -lo, ref = 0.0;
        for (std::size_t k = from + 1; k < traj.states.size(); ++k) {
            const auto& a = traj.states[k - 1];
            const auto& b = traj.states[k];
            const double heading = std::atan2(b[0].y + b[1].y - a[0].y - a[1].y, b[0].x + b[1].x - a[0].x - a[1].x);
            if (k == from + 1) ref = heading;
            const double rel = std::remainder(heading - ref, 2.0 * kPi);
            lo = std::min(lo, rel);
            hi = std::max(hi, rel);
        }
        const double variation_deg = (hi - lo) * 180.0 / kPi;
        reg.evidence["height_growth"] = final_height / min_height;
        reg.evidence["heading_variation_deg"] = variation_deg;
        if (final_height > 10.0 * min_height && variation_deg < 5.0) {
            reg.tag = RegimeTag::Escape;
            return reg;
        }
    }
    throw DiagnosticError("regime unresolved: no encounter in this run");
}

double cusp_exponent_check(const Trajectory& traj, const Event& event, const CuspWindow& window) {
    if (event.kind != EventKind::InstantaneousStop)
        throw UsageError("cusp exponent needs an InstantaneousStop event");
    if (!(window.half_width > 0.0) || window.inner_fraction < 0.0 || window.inner_fraction >= 1.0)
        throw UsageError("cusp window must have half_width > 0 and inner_fraction in [0, 1)");
    const std::size_t v = event.vortex_indices.first;
    if (v >= event.state.size()) throw UsageError("event does not belong to this trajectory");
    const Point c = event.state[v];
    const double inner = window.inner_fraction * window.half_width;

    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const double dt = std::abs(traj.times[k] - event.time);
        if (dt < inner || dt > window.half_width) continue;
        const double ax = std::abs(traj.states[k][v].x - c.x);
        const double ay = std::abs(traj.states[k][v].y - c.y);
        if (ax == 0.0 || ay == 0.0) continue;
        lx.push_back(std::log(ax));
        ly.push_back(std::log(ay));
    }
    if (lx.size() < window.min_samples)
        throw DiagnosticError("cusp window holds " + std::to_string(lx.size()) + " samples, need " +
                              std::to_string(window.min_samples));
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        mx += lx[k];
        my += ly[k];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sxy += (ly[k] - my) * (lx[k] - mx);
        syy += (ly[k] - my) * (ly[k] - my);
    }
    if (syy == 0.0) throw DiagnosticError("cusp window has no vertical spread");
    return sxy / syy;
}

}  // namespace pvortex
