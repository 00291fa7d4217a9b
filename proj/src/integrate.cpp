#include "pvortex/integrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "pvortex/error.hpp"

namespace pvortex {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                 b6 = 11.0 / 84.0;
// b - bhat, the embedded error weights
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

class Stepper {
public:
    Stepper(const VortexSystem& sys, const IntegratorConfig& cfg)
        : domain_(sys.domain()), g_(sys.strengths()), dim_(2 * sys.size()), cfg_(cfg) {
        for (auto& k : k_) k.resize(dim_);
        tmp_.resize(dim_);
    }

    void rhs(std::span<const double> y, std::span<double> dy) const { velocity_into(domain_, g_, y, dy); }

    // One step of size h from y0, whose derivative must already be in k1.
    // Returns the weighted error norm when requested (NaN-safe: non-finite -> inf).
    double step(const std::vector<double>& y0, std::span<const double> k1, double h,
                std::vector<double>& y1, bool want_error) {
        auto& k2 = k_[1];
        auto& k3 = k_[2];
        auto& k4 = k_[3];
        auto& k5 = k_[4];
        auto& k6 = k_[5];
        auto& k7 = k_[6];
        for (std::size_t i = 0; i < dim_; ++i) tmp_[i] = y0[i] + h * a21 * k1[i];
        rhs(tmp_, k2);
        for (std::size_t i = 0; i < dim_; ++i) tmp_[i] = y0[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs(tmp_, k3);
        for (std::size_t i = 0; i < dim_; ++i) tmp_[i] = y0[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(tmp_, k4);
        for (std::size_t i = 0; i < dim_; ++i)
            tmp_[i] = y0[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(tmp_, k5);
        for (std::size_t i = 0; i < dim_; ++i)
            tmp_[i] = y0[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        rhs(tmp_, k6);
        y1.resize(dim_);
        for (std::size_t i = 0; i < dim_; ++i)
            y1[i] = y0[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        if (!want_error) return 0.0;
        rhs(y1, k7);
        double err = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double scale = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
            const double r = std::abs(e) / scale;
            if (!std::isfinite(r) || !std::isfinite(y1[i])) return std::numeric_limits<double>::infinity();
            err = std::max(err, r);
        }
        return err;
    }

    // Derivative at the end of the last error-checked step (FSAL).
    const std::vector<double>& last_derivative() const { return k_[6]; }

private:
    Domain domain_;
    std::span<const double> g_;
    std::size_t dim_;
    const IntegratorConfig& cfg_;
    std::array<std::vector<double>, 7> k_;
    std::vector<double> tmp_;
};

double clearance_flat(Domain domain, std::span<const double> xy, std::pair<std::size_t, std::size_t>& who) {
    const std::size_t n = xy.size() / 2;
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        if (domain == Domain::HalfPlane && xy[2 * j + 1] < m) {
            m = xy[2 * j + 1];
            who = {j, j};
        }
        for (std::size_t k = 0; k < j; ++k) {
            const double d = std::hypot(xy[2 * j] - xy[2 * k], xy[2 * j + 1] - xy[2 * k + 1]);
            if (d < m) {
                m = d;
                who = {k, j};
            }
        }
    }
    return m;
}

struct CheckPoint {
    double tau;  // offset from the step start
    const std::vector<double>* y;
};

}  // namespace

void validate(const IntegratorConfig& cfg) {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw UsageError(std::string("integrator.") + name + " must be > 0");
    };
    positive(cfg.rel_tol, "rel_tol");
    positive(cfg.abs_tol, "abs_tol");
    positive(cfg.max_step, "max_step");
    positive(cfg.t_end, "t_end");
    positive(cfg.output_interval, "output_interval");
    positive(cfg.collision_guard, "collision_guard");
    positive(cfg.event_refine_tol, "event_refine_tol");
    positive(cfg.stop_threshold, "stop_threshold");
}

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::VerticalAlignment: return "VerticalAlignment";
        case EventKind::InstantaneousStop: return "InstantaneousStop";
        case EventKind::NearCollision: return "NearCollision";
    }
    return "?";
}

EventKind parse_event_kind(std::string_view name) {
    if (name == "VerticalAlignment") return EventKind::VerticalAlignment;
    if (name == "InstantaneousStop") return EventKind::InstantaneousStop;
    if (name == "NearCollision") return EventKind::NearCollision;
    throw UsageError("unknown event kind '" + std::string(name) + "'");
}

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::TimeEnd: return "TimeEnd";
        case Termination::NearCollision: return "NearCollision";
        case Termination::StepFailure: return "StepFailure";
    }
    return "?";
}

Termination parse_termination(std::string_view name) {
    if (name == "TimeEnd") return Termination::TimeEnd;
    if (name == "NearCollision") return Termination::NearCollision;
    if (name == "StepFailure") return Termination::StepFailure;
    throw UsageError("unknown termination mode '" + std::string(name) + "'");
}

std::vector<std::string> invariant_names(const VortexSystem& sys) {
    if (sys.domain() == Domain::Plane) return {"H", "P", "Q", "I"};
    if (sys.size() == 2) return {"H", "P", "W"};
    return {"H", "P"};
}

std::vector<double> invariant_values(const VortexSystem& sys, const VortexState& state) {
    const Invariants inv = invariants(sys, state);
    std::vector<double> v{inv.H, inv.P};
    if (inv.Q) v.push_back(*inv.Q);
    if (inv.I) v.push_back(*inv.I);
    if (inv.W) v.push_back(*inv.W);
    return v;
}

Trajectory integrate(const VortexSystem& sys, const VortexState& initial, const IntegratorConfig& cfg) {
    validate(sys, initial);
    validate(cfg);

    Trajectory traj{sys, cfg, {}, {}, {}, {}, Termination::TimeEnd, 0, 0};
    auto pairs = cfg.alignment_pairs;
    if (pairs.empty() && sys.size() == 2) pairs.push_back({0, 1});
    for (const auto& [i, j] : pairs) {
        if (i >= sys.size() || j >= sys.size() || i == j)
            throw UsageError("alignment pair (" + std::to_string(i) + ", " + std::to_string(j) + ") is invalid");
    }

    Stepper stepper(sys, cfg);
    const std::size_t dim = 2 * sys.size();
    std::vector<double> y = flatten(initial);
    std::vector<double> k1(dim), y_new(dim), y_sub(dim), dydt(dim);
    stepper.rhs(y, k1);

    traj.times.push_back(0.0);
    traj.states.push_back(initial);

    const double t_end = cfg.t_end;
    const double dt_out = cfg.output_interval;
    std::size_t next_out = 1;
    // sample k sits at k * dt_out; the last one is snapped onto t_end
    auto out_time = [&](std::size_t k) {
        const double tk = static_cast<double>(k) * dt_out;
        return tk >= t_end - 1e-9 * dt_out ? t_end : tk;
    };
    auto out_done = [&](std::size_t k) { return out_time(k - 1) == t_end; };

    double t = 0.0;
    double h = std::min({cfg.max_step, 1e-4 * std::max(1.0, t_end), t_end});
    bool last_rejected = false;

    // sub-step states kept alive for event scanning within the current step
    std::vector<std::pair<double, std::vector<double>>> inner;

    auto alignment = [&](std::size_t i, std::size_t j, double time, const std::vector<double>& ys) {
        Event ev;
        ev.kind = EventKind::VerticalAlignment;
        ev.time = time;
        ev.state = unflatten(ys);
        ev.vortex_indices = {i, j};
        stepper.rhs(ys, dydt);
        ev.diagnostics = {{"xdot_i", dydt[2 * i]},    {"xdot_j", dydt[2 * j]},   {"ydot_i", dydt[2 * i + 1]},
                          {"ydot_j", dydt[2 * j + 1]}, {"y_i", ys[2 * i + 1]}, {"y_j", ys[2 * j + 1]}};
        return ev;
    };

    // Bisection on the sub-step length tau in [ta, tb] for the sign of x_i - x_j.
    auto refine = [&](std::size_t i, std::size_t j, double ta, double tb, double fa) {
        double best_tau = tb;
        std::vector<double> best;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (ta + tb);
            stepper.step(y, k1, mid, y_sub, false);
            const double fm = y_sub[2 * i] - y_sub[2 * j];
            best_tau = mid;
            best = y_sub;
            if (fm == 0.0) break;
            if ((fm > 0.0) == (fa > 0.0)) {
                ta = mid;
                fa = fm;
            } else {
                tb = mid;
            }
            const bool narrow = (tb - ta) <= cfg.event_refine_tol;
            if ((narrow && std::abs(fm) < cfg.event_refine_tol) || (tb - ta) <= 4 * kEps * std::max(1.0, t + tb))
                break;
        }
        return alignment(i, j, t + best_tau, best);
    };

    while (t < t_end) {
        h = std::min({h, cfg.max_step, t_end - t});
        if (h <= 16 * kEps * std::max(1.0, std::abs(t))) {
            traj.terminated_by = Termination::StepFailure;
            break;
        }
        const double err = stepper.step(y, k1, h, y_new, true);
        if (!(err <= 1.0)) {
            ++traj.rejected_steps;
            const double factor = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.1;
            h *= factor;
            last_rejected = true;
            continue;
        }
        ++traj.accepted_steps;
        const bool final_step = (t + h) >= t_end * (1.0 - 4 * kEps);
        const double t_new = final_step ? t_end : t + h;

        // dense samples strictly inside (t, t_new], evaluated by sub-steps from y
        inner.clear();
        while (!out_done(next_out) && out_time(next_out) <= t_new) {
            const double ts = out_time(next_out);
            if (ts >= t_new) {
                inner.emplace_back(t_new, y_new);
            } else if (ts > t) {
                stepper.step(y, k1, ts - t, y_sub, false);
                inner.emplace_back(ts, y_sub);
            }
            ++next_out;
        }
        const bool end_sampled = !inner.empty() && inner.back().first == t_new;

        // alignment events: scan start, inner samples, end
        std::vector<CheckPoint> pts;
        pts.push_back({0.0, &y});
        for (const auto& [ts, ys] : inner)
            if (ts < t_new) pts.push_back({ts - t, &ys});
        pts.push_back({t_new - t, &y_new});
        std::vector<Event> step_events;
        for (const auto& [i, j] : pairs) {
            for (std::size_t p = 1; p < pts.size(); ++p) {
                const double fa = (*pts[p - 1].y)[2 * i] - (*pts[p - 1].y)[2 * j];
                const double fb = (*pts[p].y)[2 * i] - (*pts[p].y)[2 * j];
                if (fa == 0.0 || !((fa < 0.0 && fb >= 0.0) || (fa > 0.0 && fb <= 0.0))) continue;
                Event ev = fb == 0.0 ? alignment(i, j, t + pts[p].tau, *pts[p].y)
                                     : refine(i, j, pts[p - 1].tau, pts[p].tau, fa);
                step_events.push_back(ev);
                const double xi = std::abs(ev.diagnostics["xdot_i"]);
                const double xj = std::abs(ev.diagnostics["xdot_j"]);
                if (std::min(xi, xj) < cfg.stop_threshold) {
                    Event stop = ev;
                    stop.kind = EventKind::InstantaneousStop;
                    stop.vortex_indices = xi <= xj ? std::pair{i, j} : std::pair{j, i};
                    stop.diagnostics["xdot_stop"] = xi <= xj ? ev.diagnostics["xdot_i"] : ev.diagnostics["xdot_j"];
                    step_events.push_back(stop);
                }
            }
        }
        std::stable_sort(step_events.begin(), step_events.end(),
                         [](const Event& a, const Event& b) { return a.time < b.time; });

        // near-collision guard on every state produced in this step
        std::pair<std::size_t, std::size_t> who{0, 0};
        bool collided = false;
        double t_stop = t_new;
        const std::vector<double>* y_stop = &y_new;
        for (const auto& [ts, ys] : inner) {
            if (clearance_flat(sys.domain(), ys, who) < cfg.collision_guard) {
                collided = true;
                t_stop = ts;
                y_stop = &ys;
                break;
            }
        }
        if (!collided && clearance_flat(sys.domain(), y_new, who) < cfg.collision_guard) collided = true;

        for (const auto& [ts, ys] : inner) {
            if (ts > t_stop) break;
            traj.times.push_back(ts);
            traj.states.push_back(unflatten(ys));
        }
        for (auto& ev : step_events)
            if (ev.time <= t_stop) traj.events.push_back(std::move(ev));

        if (collided) {
            if (traj.times.back() < t_stop) {
                traj.times.push_back(t_stop);
                traj.states.push_back(unflatten(*y_stop));
            }
            Event ev;
            ev.kind = EventKind::NearCollision;
            ev.time = t_stop;
            ev.state = traj.states.back();
            ev.vortex_indices = who;
            ev.diagnostics = {{"clearance", clearance_flat(sys.domain(), *y_stop, who)}};
            traj.events.push_back(std::move(ev));
            traj.terminated_by = Termination::NearCollision;
            break;
        }
        if (final_step && !end_sampled && traj.times.back() < t_new) {
            traj.times.push_back(t_new);
            traj.states.push_back(unflatten(y_new));
        }

        t = t_new;
        y.swap(y_new);
        std::copy(stepper.last_derivative().begin(), stepper.last_derivative().end(), k1.begin());

        double factor = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        factor = std::clamp(factor, 0.2, last_rejected ? 1.0 : 5.0);
        h *= factor;
        last_rejected = false;
    }

    // drift against the initial invariants
    const auto names = invariant_names(sys);
    const auto v0 = invariant_values(sys, traj.states.front());
    std::vector<double> worst(names.size(), 0.0);
    for (const auto& s : traj.states) {
        const auto v = invariant_values(sys, s);
        for (std::size_t k = 0; k < v.size(); ++k) worst[k] = std::max(worst[k], std::abs(v[k] - v0[k]));
    }
    for (std::size_t k = 0; k < names.size(); ++k) traj.invariant_drift[names[k]] = worst[k];
    return traj;
}

VortexState integrate_rk4(const VortexSystem& sys, const VortexState& initial, double t_end, std::size_t steps) {
    validate(sys, initial);
    if (steps == 0 || !(t_end > 0.0)) throw UsageError("rk4 needs t_end > 0 and at least one step");
    const std::size_t dim = 2 * sys.size();
    std::vector<double> y = flatten(initial), k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    const double h = t_end / static_cast<double>(steps);
    auto f = [&](const std::vector<double>& in, std::vector<double>& out) {
        velocity_into(sys.domain(), sys.strengths(), in, out);
    };
    for (std::size_t s = 0; s < steps; ++s) {
        f(y, k1);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        f(tmp, k2);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        f(tmp, k3);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + h * k3[i];
        f(tmp, k4);
        for (std::size_t i = 0; i < dim; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return unflatten(y);
}

std::map<std::string, double> conservation_report(const Trajectory& traj) {
    if (traj.empty()) throw UsageError("conservation report needs a non-empty trajectory");
    const auto names = invariant_names(traj.system);
    const auto v0 = invariant_values(traj.system, traj.states.front());
    std::map<std::string, double> report;
    for (const auto& n : names) report[n] = 0.0;
    for (const auto& s : traj.states) {
        const auto v = invariant_values(traj.system, s);
        for (std::size_t k = 0; k < v.size(); ++k)
            report[names[k]] = std::max(report[names[k]], std::abs(v[k] - v0[k]) / std::max(1.0, std::abs(v0[k])));
    }
    return report;
}

}  // namespace pvortex
