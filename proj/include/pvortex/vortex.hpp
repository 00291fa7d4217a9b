#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pvortex {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kGoldenRatio = 1.61803398874989484820;  // (1 + sqrt 5) / 2

enum class Domain { Plane, HalfPlane };

std::string_view to_string(Domain d);
// Accepts "plane" and "half-plane"; throws UsageError otherwise.
Domain parse_domain(std::string_view name);

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

// Positions of all vortices at one instant.
struct VortexState {
    std::vector<Point> positions;

    std::size_t size() const { return positions.size(); }
    const Point& operator[](std::size_t i) const { return positions[i]; }
    Point& operator[](std::size_t i) { return positions[i]; }

    friend bool operator==(const VortexState&, const VortexState&) = default;
};

// Strengths plus domain. Immutable once constructed; construction enforces
// N >= 1 and nonzero strengths.
class VortexSystem {
public:
    VortexSystem(Domain domain, std::vector<double> strengths);

    Domain domain() const { return domain_; }
    std::span<const double> strengths() const { return strengths_; }
    double strength(std::size_t i) const { return strengths_[i]; }
    std::size_t size() const { return strengths_.size(); }

    // Same configuration with every strength negated: the time-reversed flow.
    VortexSystem reversed() const;

    friend bool operator==(const VortexSystem&, const VortexSystem&) = default;

private:
    Domain domain_;
    std::vector<double> strengths_;
};

struct Invariants {
    double H = 0.0;
    double P = 0.0;                // sum Gamma_j y_j
    std::optional<double> Q;       // sum Gamma_j x_j (plane)
    std::optional<double> I;       // sum Gamma_j |z_j|^2 (plane)
    std::optional<double> W;       // interaction parameter (half-plane, N = 2)
};

// Throws DomainViolation when the state has the wrong size, coincident
// vortices, or (half-plane) a vortex with y <= 0.
void validate(const VortexSystem& sys, const VortexState& state);

// Smallest pairwise distance, and in the half-plane also the smallest height.
// Infinity for a single plane vortex.
double min_clearance(const VortexSystem& sys, const VortexState& state);

// Plane:      H = -(1/2pi) sum_{j<k} G_j G_k ln|z_j - z_k|
// Half-plane: H = (1/4pi) [ sum_j G_j^2 ln(2 y_j)
//                 + sum_{j<k} (-2 G_j G_k ln|z_j - z_k| + 2 G_j G_k ln|z_j - conj z_k|) ]
double hamiltonian(const VortexSystem& sys, const VortexState& state);

// Closed-form velocities from G_j xdot_j = dH/dy_j, G_j ydot_j = -dH/dx_j.
std::vector<Point> velocity(const VortexSystem& sys, const VortexState& state);

// Unchecked kernel used by the integrator: xy and out are interleaved
// (x0, y0, x1, y1, ...). No validation, no allocation.
void velocity_into(Domain domain, std::span<const double> strengths,
                   std::span<const double> xy, std::span<double> out);

Invariants invariants(const VortexSystem& sys, const VortexState& state);

// Central differences of hamiltonian() pushed through the symplectic form.
// Independent of velocity(); used to cross-check it. Throws OracleInvalid
// unless every pairwise distance (and height, in the half-plane) exceeds 10 h.
std::vector<Point> velocity_fd_oracle(const VortexSystem& sys, const VortexState& state,
                                      double h);

std::vector<double> flatten(const VortexState& state);
VortexState unflatten(std::span<const double> xy);

}  // namespace pvortex
