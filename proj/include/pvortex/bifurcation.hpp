#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "pvortex/integrate.hpp"
#include "pvortex/vortex.hpp"

// Two vortices in the half-plane with strengths (1, lambda). Everything here
// is expressed in the normalized frame: Gamma_1 = 1, Gamma_2 = lambda,
// and "ratio" is y_1 / y_2 on a vertical alignment x_1 == x_2.
namespace pvortex {

enum class BifurcationMethod { Algebraic, Simulation };
std::string_view to_string(BifurcationMethod m);

struct BifurcationResult {
    double lambda = 0.0;
    double critical_W = 0.0;
    double stop_ratio = 0.0;           // y1 / y2 at the stop
    double cross_ratio_at_stop = 0.0;  // CR(y1, y2, -y2, -y1)
    BifurcationMethod method = BifurcationMethod::Algebraic;
    double residual = 0.0;             // |xdot_1| at the located alignment (simulation only)
    std::optional<Event> alignment;    // the located alignment event (simulation only)
    int iterations = 0;
};

// W = (P / G)^2 exp(-4 pi H / G^2), G = Gamma_1. Requires a half-plane system
// with N = 2 and Gamma_1 = +-Gamma_2; otherwise UsageError.
double interaction_W(const VortexSystem& sys, const VortexState& state);

// W(lambda) = |P|^(1 + lambda^2) exp(-4 pi H) for strengths (1, lambda).
double interaction_W_general(double lambda, const VortexState& state);

// Scale-free W for any two half-plane strengths: the general-lambda form with
// lambda = Gamma_2 / Gamma_1, evaluated after normalizing Gamma_1 to 1.
double interaction_W_any(const VortexSystem& sys, const VortexState& state);

// 2 lambda + sqrt(4 lambda^2 + 1): the height ratio y1/y2 at which vortex 1
// stops on an alignment.
double stop_height_ratio(double lambda);

// xdot_1 on the alignment with heights (ratio, 1).
double alignment_speed(double lambda, double ratio);

// Half-plane system (1, lambda) at ((x, ratio * y2), (x, y2)).
std::pair<VortexSystem, VortexState> aligned_state(double lambda, double ratio, double y2 = 1.0, double x = 0.0);

// Inverse of W along the aligned family for lambda = +-1: the ratio whose
// aligned state has interaction parameter W, on the branch that contains the
// stop ratio (ratio < 1 for the dipole, ratio > 1 for the pair).
double aligned_ratio_for_W(double lambda, double W);

// W* from the aligned stop state, exact up to rounding.
BifurcationResult critical_W(double lambda);

struct EncounterOptions {
    // Horizontal separation |x1 - x2| reached by integrating back from the
    // alignment (in units of y2 = 1 at the alignment).
    double offset = 4.0;
    // Backward integration is capped here; the full run is at most twice this.
    double max_back_time = 100.0;
};

struct Encounter {
    VortexSystem system;
    VortexState initial;
    double alignment_time = 0.0;  // when the forward run crosses the seed alignment
};

// Finds a non-aligned state on the exact trajectory through `aligned` by
// integrating backward (negated strengths) until the vortices are `offset`
// apart horizontally, or halfway back to the previous alignment, whichever
// comes first.
Encounter encounter_from_aligned(const VortexSystem& sys, const VortexState& aligned, const IntegratorConfig& cfg,
                                 const EncounterOptions& opts = {});

// Forward run from an encounter's initial state through the alignment and an
// equal time beyond it.
Trajectory run_encounter(const Encounter& enc, const IntegratorConfig& cfg);

// Convenience: aligned_ratio_for_W -> aligned_state -> encounter -> run.
Trajectory encounter_run(double lambda, double W, const IntegratorConfig& cfg, const EncounterOptions& opts = {});

struct CuspSearchOptions {
    double residual_tol = 1e-12;
    int max_iterations = 80;
    EncounterOptions encounter;
};

// Bisects the alignment ratio on the sign of xdot_1 measured at the simulated
// alignment event. lambda must be +-1; the bracket must show a sign change
// (UsageError otherwise).
BifurcationResult find_cusp_by_simulation(double lambda, std::pair<double, double> ratio_bracket,
                                          const IntegratorConfig& cfg, const CuspSearchOptions& opts = {});

// (a - d)(b - c) / ((a - b)(c - d)); UsageError when a == b or c == d.
double cross_ratio(double a, double b, double c, double d);

// CR(r, 1, -1, -r) with r = stop_height_ratio(lambda). For lambda != +-1
// this extends the golden-ratio statement beyond the two proven cases.
double stop_cross_ratio(double lambda);

// Positive root of 1/(A - 1) + 1/(A + 1) = 1/2, i.e. A^2 - 4A - 1 = 0.
double balance_point();

enum class RegimeTag { Escape, KinkOrLeapfrog, Cusp, SmoothPass };
std::string_view to_string(RegimeTag r);

struct Regime {
    RegimeTag tag = RegimeTag::SmoothPass;
    std::map<std::string, double> evidence;
};

// Classifies a two-vortex half-plane run with strengths (G, lambda G),
// lambda = +-1. DiagnosticError when the run ended in NearCollision or the
// evidence fits no regime (e.g. run too short to contain the encounter).
Regime classify_regime(const Trajectory& traj, double lambda);

struct CuspWindow {
    double half_width = 0.5;      // time on each side of the stop
    double inner_fraction = 0.1;  // samples closer than this fraction are skipped
    std::size_t min_samples = 8;
};

// Least-squares slope of log|x - x_c| against log|y - y_c| for the stopping
// vortex around an InstantaneousStop event; 3/2 for a (t^3, t^2) cusp.
double cusp_exponent_check(const Trajectory& traj, const Event& event, const CuspWindow& window = {});

}  // namespace pvortex
