#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pvortex/integrate.hpp"
#include "pvortex/vortex.hpp"

namespace pvortex {

enum class Compare {
    Absolute,  // |measured - expected| <= tolerance
    Relative,  // |measured - expected| <= tolerance * |expected|
    AtLeast,   // measured >= expected
};

struct ScenarioCheck {
    std::string name;
    double measured = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    Compare compare = Compare::Absolute;

    bool passed() const;
};

struct ScenarioReport {
    std::string name;
    bool passed = false;
    std::vector<ScenarioCheck> checks;

    // Recomputes `passed` from the checks.
    void finalize();
    std::string summary() const;
};

// Single plane vortex over t = 10: it must not move.
ScenarioReport scenario_single_rest(double gamma = 1.0, Point at = {0.0, 0.0});

// One predicted period T = 4 pi^2 d^2 / |G1 + G2| of a plane pair. Checks the
// measured period, vorticity-centre drift, separation drift and return to start.
// UsageError when G1 + G2 == 0 (that is the dipole scenario).
ScenarioReport scenario_pair_rotation(double gamma1, double gamma2, double d);

// Plane dipole (G, -G) at separation d: speed G/(2 pi d) perpendicular to the
// segment, separation constant.
ScenarioReport scenario_dipole_translation(double gamma, double d);

// Single half-plane vortex at height y: speed |G|/(4 pi y) along the wall in
// the direction of sign(G), no vertical motion.
ScenarioReport scenario_halfplane_drift(double gamma, double y);

// sum_{j<k} G_j G_k; zero is necessary for self-similar three-vortex motion.
double grobli_collapse_condition(std::span<const double> strengths);

struct GrobliOptions {
    double window = 0.05;         // integration window for the coarse objective
    double grid_step = 0.1;       // z3 grid spacing over [-2, 3] x [-2.5, 2.5]
    std::size_t polish_starts = 6;
    double drift_limit = 1e-4;
    double size_factor = 2.0;
};

struct GrobliResult {
    VortexState configuration;     // z1 = (0,0), z2 = (1,0), z3 found
    double scale_rate = 0.0;       // d ln(l13) / dt at t = 0, > 0 (expanding)
    ScenarioReport expansion;
    ScenarioReport contraction;    // same configuration, negated strengths
};

// Searches z3 for a configuration whose triangle keeps its shape while its
// size changes, then verifies it by integration. UsageError when N != 3 or
// the collapse condition fails; DiagnosticError if no candidate verifies.
GrobliResult grobli_selfsimilar_search(std::span<const double> strengths, const GrobliOptions& opts = {});

// Integrates a three-vortex configuration until its size has changed by
// opts.size_factor (up or down) and reports the drift of the two distance ratios.
ScenarioReport grobli_verify(const VortexSystem& sys, const VortexState& config, const GrobliOptions& opts,
                             const std::string& name);

// Named suites: "scenarios", "bifurcation", "conservation", "grobli", "all".
// UsageError for an unknown name.
std::vector<ScenarioReport> run_verify_suite(const std::string& suite);

}  // namespace pvortex
