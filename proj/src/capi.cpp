#include <chrono>
#include <cmath>
#include <limits>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "pvortex/bifurcation.hpp"
#include "pvortex/error.hpp"
#include "pvortex/integrate.hpp"
#include "pvortex/io.hpp"
#include "pvortex/pvortex.h"
#include "pvortex/scenarios.hpp"
#include "pvortex/vortex.hpp"

struct pv_system {
    pvortex::VortexSystem sys;
};

struct pv_trajectory {
    pvortex::Trajectory traj;
};

struct pv_run {
    pv_system system;
    pvortex::VortexState initial;
    pvortex::IntegratorConfig config;
    std::vector<size_t> flat_pairs;
};

namespace {

using namespace pvortex;

thread_local std::string g_last_error;

pv_status fail(pv_status s, std::string msg) {
    g_last_error = std::move(msg);
    return s;
}

template <class F>
pv_status guarded(F&& f) {
    try {
        f();
        return PV_OK;
    } catch (const DomainViolation& e) {
        return fail(PV_ERR_DOMAIN, e.what());
    } catch (const UsageError& e) {
        return fail(PV_ERR_USAGE, e.what());
    } catch (const OracleInvalid& e) {
        return fail(PV_ERR_ORACLE, e.what());
    } catch (const DiagnosticError& e) {
        return fail(PV_ERR_DIAGNOSTIC, e.what());
    } catch (const IoError& e) {
        return fail(PV_ERR_IO, e.what());
    } catch (const SchemaError& e) {
        return fail(PV_ERR_SCHEMA, e.what());
    } catch (const std::bad_alloc&) {
        return fail(PV_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(PV_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(PV_ERR_INTERNAL, "unknown error");
    }
}

void need(const void* p, const char* what) {
    if (!p) throw UsageError(std::string(what) + " must not be null");
}

VortexState state_from(const pv_system* s, const double* xy) {
    need(s, "system");
    need(xy, "xy");
    return unflatten(std::span<const double>(xy, 2 * s->sys.size()));
}

IntegratorConfig config_from(const pv_integrator_config* c) {
    IntegratorConfig cfg;
    if (!c) return cfg;
    cfg.rel_tol = c->rel_tol;
    cfg.abs_tol = c->abs_tol;
    cfg.max_step = c->max_step;
    cfg.t_end = c->t_end;
    cfg.output_interval = c->output_interval;
    cfg.collision_guard = c->collision_guard;
    cfg.event_refine_tol = c->event_refine_tol;
    cfg.stop_threshold = c->stop_threshold;
    if (c->n_alignment_pairs) {
        need(c->alignment_pairs, "alignment_pairs");
        for (size_t k = 0; k < c->n_alignment_pairs; ++k)
            cfg.alignment_pairs.emplace_back(c->alignment_pairs[2 * k], c->alignment_pairs[2 * k + 1]);
    }
    return cfg;
}

void config_to(const IntegratorConfig& cfg, const std::vector<size_t>& flat, pv_integrator_config* c) {
    c->rel_tol = cfg.rel_tol;
    c->abs_tol = cfg.abs_tol;
    c->max_step = cfg.max_step;
    c->t_end = cfg.t_end;
    c->output_interval = cfg.output_interval;
    c->collision_guard = cfg.collision_guard;
    c->event_refine_tol = cfg.event_refine_tol;
    c->stop_threshold = cfg.stop_threshold;
    c->alignment_pairs = flat.empty() ? nullptr : flat.data();
    c->n_alignment_pairs = flat.size() / 2;
}

pv_event event_to(const Event& e) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const auto get = [&](const char* k) {
        const auto it = e.diagnostics.find(k);
        return it == e.diagnostics.end() ? nan : it->second;
    };
    pv_event out{};
    out.kind = static_cast<pv_event_kind>(e.kind);
    out.time = e.time;
    out.i = e.vortex_indices.first;
    out.j = e.vortex_indices.second;
    out.xdot_i = get("xdot_i");
    out.xdot_j = get("xdot_j");
    out.ydot_i = get("ydot_i");
    out.ydot_j = get("ydot_j");
    out.y_i = get("y_i");
    out.y_j = get("y_j");
    out.clearance = get("clearance");
    return out;
}

void bifurcation_to(const BifurcationResult& r, pv_bifurcation* out) {
    *out = pv_bifurcation{};
    out->lambda = r.lambda;
    out->critical_w = r.critical_W;
    out->stop_ratio = r.stop_ratio;
    out->cross_ratio_at_stop = r.cross_ratio_at_stop;
    out->residual = r.residual;
    out->iterations = r.iterations;
    out->has_alignment = r.alignment.has_value();
    if (r.alignment) out->alignment = event_to(*r.alignment);
}

PlotOptions plot_from(const pv_plot_options* o) {
    PlotOptions p;
    if (o) {
        p.width_px = o->width_px;
        p.stroke_width = o->stroke_width;
        p.show_events = o->show_events != 0;
    }
    return p;
}

std::vector<size_t> flatten_pairs(const IntegratorConfig& cfg) {
    std::vector<size_t> flat;
    for (const auto& [i, j] : cfg.alignment_pairs) {
        flat.push_back(i);
        flat.push_back(j);
    }
    return flat;
}

}  // namespace

extern "C" {

const char* pv_version(void) { return PVORTEX_VERSION_STRING; }
const char* pv_last_error(void) { return g_last_error.c_str(); }

const char* pv_status_name(pv_status status) {
    switch (status) {
        case PV_OK: return "ok";
        case PV_ERR_USAGE: return "usage error";
        case PV_ERR_DOMAIN: return "domain violation";
        case PV_ERR_ORACLE: return "oracle invalid";
        case PV_ERR_DIAGNOSTIC: return "diagnostic error";
        case PV_ERR_IO: return "i/o error";
        case PV_ERR_SCHEMA: return "schema error";
        case PV_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* pv_event_kind_name(pv_event_kind kind) {
    switch (kind) {
        case PV_EVENT_ALIGNMENT: return "VerticalAlignment";
        case PV_EVENT_STOP: return "InstantaneousStop";
        case PV_EVENT_COLLISION: return "NearCollision";
    }
    return "unknown";
}

const char* pv_termination_name(pv_termination term) {
    switch (term) {
        case PV_TERM_TIME_END: return "TimeEnd";
        case PV_TERM_NEAR_COLLISION: return "NearCollision";
        case PV_TERM_STEP_FAILURE: return "StepFailure";
    }
    return "unknown";
}

const char* pv_regime_name(pv_regime regime) {
    switch (regime) {
        case PV_REGIME_ESCAPE: return "Escape";
        case PV_REGIME_KINK_OR_LEAPFROG: return "KinkOrLeapfrog";
        case PV_REGIME_CUSP: return "Cusp";
        case PV_REGIME_SMOOTH_PASS: return "SmoothPass";
    }
    return "unknown";
}

pv_status pv_system_create(pv_domain domain, const double* strengths, size_t n, pv_system** out) {
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        if (n) need(strengths, "strengths");
        if (domain != PV_PLANE && domain != PV_HALF_PLANE) throw UsageError("unknown domain");
        const Domain d = domain == PV_PLANE ? Domain::Plane : Domain::HalfPlane;
        *out = new pv_system{VortexSystem(d, std::vector<double>(strengths, strengths + n))};
    });
}

void pv_system_destroy(pv_system* sys) { delete sys; }
size_t pv_system_size(const pv_system* sys) { return sys ? sys->sys.size() : 0; }
pv_domain pv_system_domain(const pv_system* sys) {
    return sys && sys->sys.domain() == Domain::HalfPlane ? PV_HALF_PLANE : PV_PLANE;
}
double pv_system_strength(const pv_system* sys, size_t i) {
    return sys && i < sys->sys.size() ? sys->sys.strength(i) : std::numeric_limits<double>::quiet_NaN();
}

pv_status pv_hamiltonian(const pv_system* sys, const double* xy, double* out) {
    return guarded([&] {
        need(sys, "system");
        need(out, "out");
        *out = hamiltonian(sys->sys, state_from(sys, xy));
    });
}

pv_status pv_velocity(const pv_system* sys, const double* xy, double* out_uv) {
    return guarded([&] {
        need(sys, "system");
        need(out_uv, "out_uv");
        const auto v = velocity(sys->sys, state_from(sys, xy));
        for (size_t i = 0; i < v.size(); ++i) {
            out_uv[2 * i] = v[i].x;
            out_uv[2 * i + 1] = v[i].y;
        }
    });
}

pv_status pv_invariants(const pv_system* sys, const double* xy, double* out, size_t capacity, size_t* count) {
    return guarded([&] {
        need(sys, "system");
        need(count, "count");
        const auto vals = invariant_values(sys->sys, state_from(sys, xy));
        *count = vals.size();
        if (capacity < vals.size()) throw UsageError("capacity " + std::to_string(capacity) + " < " +
                                                     std::to_string(vals.size()) + " invariants");
        need(out, "out");
        for (size_t k = 0; k < vals.size(); ++k) out[k] = vals[k];
    });
}

pv_status pv_invariant_name(const pv_system* sys, size_t k, const char** name) {
    return guarded([&] {
        need(sys, "system");
        need(name, "name");
        static const char* const known[] = {"H", "P", "Q", "I", "W"};
        const auto names = invariant_names(sys->sys);
        if (k >= names.size()) throw UsageError("invariant index out of range");
        for (const char* n : known)
            if (names[k] == n) *name = n;
    });
}

void pv_integrator_config_default(pv_integrator_config* cfg) {
    if (cfg) config_to(IntegratorConfig{}, {}, cfg);
}

pv_status pv_integrate(const pv_system* sys, const double* xy, const pv_integrator_config* cfg, pv_trajectory** out) {
    return guarded([&] {
        need(sys, "system");
        need(out, "out");
        need(cfg, "cfg");
        *out = nullptr;
        *out = new pv_trajectory{integrate(sys->sys, state_from(sys, xy), config_from(cfg))};
    });
}

void pv_trajectory_destroy(pv_trajectory* traj) { delete traj; }
size_t pv_trajectory_sample_count(const pv_trajectory* traj) { return traj ? traj->traj.times.size() : 0; }
size_t pv_trajectory_vortex_count(const pv_trajectory* traj) { return traj ? traj->traj.system.size() : 0; }

pv_status pv_trajectory_sample(const pv_trajectory* traj, size_t k, double* t, double* xy) {
    return guarded([&] {
        need(traj, "trajectory");
        if (k >= traj->traj.times.size()) throw UsageError("sample index out of range");
        if (t) *t = traj->traj.times[k];
        if (xy)
            for (size_t i = 0; i < traj->traj.states[k].size(); ++i) {
                xy[2 * i] = traj->traj.states[k][i].x;
                xy[2 * i + 1] = traj->traj.states[k][i].y;
            }
    });
}

size_t pv_trajectory_event_count(const pv_trajectory* traj) { return traj ? traj->traj.events.size() : 0; }

pv_status pv_trajectory_event(const pv_trajectory* traj, size_t k, pv_event* event, double* xy) {
    return guarded([&] {
        need(traj, "trajectory");
        if (k >= traj->traj.events.size()) throw UsageError("event index out of range");
        const Event& e = traj->traj.events[k];
        if (event) *event = event_to(e);
        if (xy)
            for (size_t i = 0; i < e.state.size(); ++i) {
                xy[2 * i] = e.state[i].x;
                xy[2 * i + 1] = e.state[i].y;
            }
    });
}

pv_termination pv_trajectory_termination(const pv_trajectory* traj) {
    return traj ? static_cast<pv_termination>(traj->traj.terminated_by) : PV_TERM_STEP_FAILURE;
}

pv_status pv_trajectory_relative_drift(const pv_trajectory* traj, const char* name, double* out) {
    return guarded([&] {
        need(traj, "trajectory");
        need(name, "name");
        need(out, "out");
        const auto rep = conservation_report(traj->traj);
        const auto it = rep.find(name);
        if (it == rep.end()) throw UsageError(std::string("no conserved quantity '") + name + "' for this system");
        *out = it->second;
    });
}

pv_status pv_trajectory_write_csv(const pv_trajectory* traj, const char* path) {
    return guarded([&] {
        need(traj, "trajectory");
        need(path, "path");
        write_trajectory_csv(traj->traj, std::filesystem::path(path));
    });
}

pv_status pv_trajectory_plot_svg(const pv_trajectory* traj, const char* path, const pv_plot_options* opts) {
    return guarded([&] {
        need(traj, "trajectory");
        need(path, "path");
        plot_svg(traj->traj, std::filesystem::path(path), plot_from(opts));
    });
}

pv_status pv_plot_csv(const char* csv_path, const char* svg_path, const pv_plot_options* opts) {
    return guarded([&] {
        need(csv_path, "csv_path");
        need(svg_path, "svg_path");
        plot_svg(read_trajectory_csv(csv_path), std::filesystem::path(svg_path), plot_from(opts));
    });
}

pv_status pv_run_create(const pv_system* sys, const double* xy, const pv_integrator_config* cfg, pv_run** out) {
    return guarded([&] {
        need(sys, "system");
        need(out, "out");
        need(cfg, "cfg");
        *out = nullptr;
        VortexState st = state_from(sys, xy);
        IntegratorConfig c = config_from(cfg);
        validate(sys->sys, st);
        validate(c);
        auto flat = flatten_pairs(c);
        *out = new pv_run{pv_system{sys->sys}, std::move(st), std::move(c), std::move(flat)};
    });
}

pv_status pv_run_read_config(const char* path, pv_run** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = nullptr;
        RunInputs in = read_config(path);
        auto flat = flatten_pairs(in.config);
        *out = new pv_run{pv_system{std::move(in.system)}, std::move(in.initial), std::move(in.config), std::move(flat)};
    });
}

void pv_run_destroy(pv_run* run) { delete run; }
const pv_system* pv_run_system(const pv_run* run) { return run ? &run->system : nullptr; }

pv_status pv_run_initial_state(const pv_run* run, double* xy) {
    return guarded([&] {
        need(run, "run");
        need(xy, "xy");
        const auto flat = flatten(run->initial);
        for (size_t k = 0; k < flat.size(); ++k) xy[k] = flat[k];
    });
}

pv_status pv_run_config(const pv_run* run, pv_integrator_config* cfg) {
    return guarded([&] {
        need(run, "run");
        need(cfg, "cfg");
        config_to(run->config, run->flat_pairs, cfg);
    });
}

pv_status pv_run_execute(const pv_run* run, pv_trajectory** out, double* wall_time_s) {
    return guarded([&] {
        need(run, "run");
        need(out, "out");
        *out = nullptr;
        const auto t0 = std::chrono::steady_clock::now();
        auto* traj = new pv_trajectory{integrate(run->system.sys, run->initial, run->config)};
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        *out = traj;
        if (wall_time_s) *wall_time_s = dt.count();
    });
}

pv_status pv_run_write_manifest(const pv_run* run, const pv_trajectory* traj, const char* command,
                                double wall_time_s, const char* path) {
    return guarded([&] {
        need(run, "run");
        need(traj, "trajectory");
        need(path, "path");
        const RunInputs in{run->system.sys, run->initial, run->config};
        write_manifest_json(make_manifest(in, traj->traj, command ? command : "", wall_time_s), path);
    });
}

pv_status pv_critical_w(double lambda, pv_bifurcation* out) {
    return guarded([&] {
        need(out, "out");
        bifurcation_to(critical_W(lambda), out);
    });
}

pv_status pv_find_cusp(double lambda, double ratio_lo, double ratio_hi, const pv_integrator_config* cfg,
                       pv_bifurcation* out) {
    return guarded([&] {
        need(out, "out");
        bifurcation_to(find_cusp_by_simulation(lambda, {ratio_lo, ratio_hi}, config_from(cfg)), out);
    });
}

pv_status pv_cross_ratio(double a, double b, double c, double d, double* out) {
    return guarded([&] {
        need(out, "out");
        *out = cross_ratio(a, b, c, d);
    });
}

pv_status pv_stop_cross_ratio(double lambda, double* out) {
    return guarded([&] {
        need(out, "out");
        *out = stop_cross_ratio(lambda);
    });
}

pv_status pv_stop_height_ratio(double lambda, double* out) {
    return guarded([&] {
        need(out, "out");
        *out = stop_height_ratio(lambda);
    });
}

double pv_balance_point(void) { return balance_point(); }

pv_status pv_alignment_speed(double lambda, double ratio, double* out) {
    return guarded([&] {
        need(out, "out");
        *out = alignment_speed(lambda, ratio);
    });
}

pv_status pv_interaction_w(const pv_system* sys, const double* xy, double* out) {
    return guarded([&] {
        need(sys, "system");
        need(out, "out");
        *out = interaction_W_any(sys->sys, state_from(sys, xy));
    });
}

pv_status pv_aligned_ratio_for_w(double lambda, double w, double* out) {
    return guarded([&] {
        need(out, "out");
        *out = aligned_ratio_for_W(lambda, w);
    });
}

pv_status pv_encounter_run(double lambda, double w, const pv_integrator_config* cfg, pv_trajectory** out) {
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        *out = new pv_trajectory{encounter_run(lambda, w, config_from(cfg))};
    });
}

pv_status pv_classify_regime(const pv_trajectory* traj, double lambda, pv_regime* out) {
    return guarded([&] {
        need(traj, "trajectory");
        need(out, "out");
        *out = static_cast<pv_regime>(classify_regime(traj->traj, lambda).tag);
    });
}

pv_status pv_cusp_exponent(const pv_trajectory* traj, size_t event_index, double* slope) {
    return guarded([&] {
        need(traj, "trajectory");
        need(slope, "slope");
        if (event_index >= traj->traj.events.size()) throw UsageError("event index out of range");
        *slope = cusp_exponent_check(traj->traj, traj->traj.events[event_index]);
    });
}

pv_status pv_verify(const char* suite, pv_report_fn report, void* user, int* all_passed) {
    return guarded([&] {
        need(suite, "suite");
        const auto reports = run_verify_suite(suite);
        bool ok = true;
        for (const auto& r : reports) {
            ok = ok && r.passed;
            if (report) report(r.name.c_str(), r.passed ? 1 : 0, r.summary().c_str(), user);
        }
        if (all_passed) *all_passed = ok ? 1 : 0;
    });
}

}  // extern "C"
