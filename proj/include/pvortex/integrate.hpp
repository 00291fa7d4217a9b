#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pvortex/vortex.hpp"

namespace pvortex {

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 1.0;
    double t_end = 10.0;
    double output_interval = 0.01;
    // Minimum allowed pairwise distance, and distance to the wall in the half-plane.
    double collision_guard = 1e-6;
    double event_refine_tol = 1e-10;
    // |xdot| below which an alignment is also reported as an instantaneous stop.
    double stop_threshold = 1e-6;
    // Ordered pairs watched for x_i - x_j sign changes. Empty means all pairs
    // when N == 2 and none otherwise.
    std::vector<std::pair<std::size_t, std::size_t>> alignment_pairs;
};

// Throws UsageError naming the offending field.
void validate(const IntegratorConfig& cfg);

enum class EventKind { VerticalAlignment, InstantaneousStop, NearCollision };
std::string_view to_string(EventKind k);
EventKind parse_event_kind(std::string_view name);

struct Event {
    EventKind kind = EventKind::VerticalAlignment;
    double time = 0.0;
    VortexState state;
    // For NearCollision with the wall both indices name the same vortex.
    std::pair<std::size_t, std::size_t> vortex_indices{0, 0};
    // Alignment events carry xdot_i, xdot_j, ydot_i, ydot_j, y_i, y_j.
    std::map<std::string, double> diagnostics;
};

enum class Termination { TimeEnd, NearCollision, StepFailure };
std::string_view to_string(Termination t);
Termination parse_termination(std::string_view name);

struct Trajectory {
    VortexSystem system;
    IntegratorConfig config;
    std::vector<double> times;
    std::vector<VortexState> states;
    std::vector<Event> events;
    // Max absolute deviation from the initial value, per conserved quantity.
    std::map<std::string, double> invariant_drift;
    Termination terminated_by = Termination::TimeEnd;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;

    bool empty() const { return times.empty(); }
};

// Adaptive Dormand-Prince 5(4) integration with dense sampling every
// output_interval, alignment event refinement and a near-collision guard.
// Returns the trajectory even when terminated early; check terminated_by.
Trajectory integrate(const VortexSystem& sys, const VortexState& initial, const IntegratorConfig& cfg);

// Fixed-step classical RK4, kept for cross-checks of the adaptive path.
// Returns the state after `steps` equal steps up to t_end.
VortexState integrate_rk4(const VortexSystem& sys, const VortexState& initial, double t_end,
                          std::size_t steps);

// Max over samples of |v - v0| / max(1, |v0|) for each conserved quantity of
// the trajectory's domain (H, P, Q, I in the plane; H, P, W in the half-plane).
std::map<std::string, double> conservation_report(const Trajectory& traj);

// Names of conserved quantities in column order: H, P, then Q, I or W.
std::vector<std::string> invariant_names(const VortexSystem& sys);
std::vector<double> invariant_values(const VortexSystem& sys, const VortexState& state);

}  // namespace pvortex
