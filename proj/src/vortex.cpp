#include "pvortex/vortex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pvortex/bifurcation.hpp"
#include "pvortex/error.hpp"

namespace pvortex {

std::string_view to_string(Domain d) {
    return d == Domain::Plane ? "plane" : "half-plane";
}

Domain parse_domain(std::string_view name) {
    if (name == "plane") return Domain::Plane;
    if (name == "half-plane" || name == "halfplane") return Domain::HalfPlane;
    throw UsageError("unknown domain '" + std::string(name) + "' (expected plane or half-plane)");
}

VortexSystem::VortexSystem(Domain domain, std::vector<double> strengths)
    : domain_(domain), strengths_(std::move(strengths)) {
    if (strengths_.empty()) throw UsageError("a vortex system needs at least one vortex");
    for (std::size_t i = 0; i < strengths_.size(); ++i) {
        if (!std::isfinite(strengths_[i]) || strengths_[i] == 0.0)
            throw UsageError("strength " + std::to_string(i + 1) + " must be finite and nonzero");
    }
}

VortexSystem VortexSystem::reversed() const {
    std::vector<double> g(strengths_.begin(), strengths_.end());
    for (double& v : g) v = -v;
    return VortexSystem(domain_, std::move(g));
}

void validate(const VortexSystem& sys, const VortexState& state) {
    if (state.size() != sys.size())
        throw DomainViolation("state has " + std::to_string(state.size()) + " positions, system has " +
                              std::to_string(sys.size()) + " vortices");
    for (std::size_t j = 0; j < state.size(); ++j) {
        const Point& p = state[j];
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw DomainViolation("vortex " + std::to_string(j + 1) + " has a non-finite coordinate");
        if (sys.domain() == Domain::HalfPlane && !(p.y > 0.0))
            throw DomainViolation("vortex " + std::to_string(j + 1) + " is not in the open upper half-plane");
        for (std::size_t k = 0; k < j; ++k) {
            if (p == state[k])
                throw DomainViolation("vortices " + std::to_string(k + 1) + " and " + std::to_string(j + 1) +
                                      " coincide");
        }
    }
}

double min_clearance(const VortexSystem& sys, const VortexState& state) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < state.size(); ++j) {
        if (sys.domain() == Domain::HalfPlane) m = std::min(m, state[j].y);
        for (std::size_t k = 0; k < j; ++k)
            m = std::min(m, std::hypot(state[j].x - state[k].x, state[j].y - state[k].y));
    }
    return m;
}

double hamiltonian(const VortexSystem& sys, const VortexState& state) {
    validate(sys, state);
    const auto g = sys.strengths();
    const std::size_t n = state.size();
    double sum = 0.0;
    if (sys.domain() == Domain::Plane) {
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k) {
                const double dx = state[j].x - state[k].x;
                const double dy = state[j].y - state[k].y;
                sum += g[j] * g[k] * 0.5 * std::log(dx * dx + dy * dy);
            }
        return -sum / (2.0 * kPi);
    }
    for (std::size_t j = 0; j < n; ++j) {
        sum += g[j] * g[j] * std::log(2.0 * state[j].y);
        for (std::size_t k = j + 1; k < n; ++k) {
            const double dx = state[j].x - state[k].x;
            const double dm = state[j].y - state[k].y;
            const double dp = state[j].y + state[k].y;
            // -2 ln r + 2 ln rho == ln(rho^2 / r^2)
            sum += g[j] * g[k] * std::log((dx * dx + dp * dp) / (dx * dx + dm * dm));
        }
    }
    return sum / (4.0 * kPi);
}

void velocity_into(Domain domain, std::span<const double> g, std::span<const double> xy,
                   std::span<double> out) {
    const std::size_t n = g.size();
    std::fill(out.begin(), out.end(), 0.0);
    constexpr double c = 1.0 / (2.0 * kPi);
    for (std::size_t j = 0; j < n; ++j) {
        const double xj = xy[2 * j];
        const double yj = xy[2 * j + 1];
        if (domain == Domain::HalfPlane) out[2 * j] += 0.5 * c * g[j] / yj;
        for (std::size_t k = j + 1; k < n; ++k) {
            const double dx = xj - xy[2 * k];
            const double dy = yj - xy[2 * k + 1];
            const double inv_r2 = 1.0 / (dx * dx + dy * dy);
            // direct interaction, antisymmetric in (j, k)
            out[2 * j] -= c * g[k] * dy * inv_r2;
            out[2 * j + 1] += c * g[k] * dx * inv_r2;
            out[2 * k] += c * g[j] * dy * inv_r2;
            out[2 * k + 1] -= c * g[j] * dx * inv_r2;
            if (domain == Domain::HalfPlane) {
                // image of k seen by j, and image of j seen by k
                const double sy = yj + xy[2 * k + 1];
                const double inv_p2 = 1.0 / (dx * dx + sy * sy);
                out[2 * j] += c * g[k] * sy * inv_p2;
                out[2 * j + 1] -= c * g[k] * dx * inv_p2;
                out[2 * k] += c * g[j] * sy * inv_p2;
                out[2 * k + 1] += c * g[j] * dx * inv_p2;
            }
        }
    }
}

std::vector<Point> velocity(const VortexSystem& sys, const VortexState& state) {
    validate(sys, state);
    const auto xy = flatten(state);
    std::vector<double> uv(xy.size());
    velocity_into(sys.domain(), sys.strengths(), xy, uv);
    return unflatten(uv).positions;
}

Invariants invariants(const VortexSystem& sys, const VortexState& state) {
    Invariants inv;
    inv.H = hamiltonian(sys, state);
    const auto g = sys.strengths();
    double p = 0.0, q = 0.0, i = 0.0;
    for (std::size_t j = 0; j < state.size(); ++j) {
        p += g[j] * state[j].y;
        q += g[j] * state[j].x;
        i += g[j] * (state[j].x * state[j].x + state[j].y * state[j].y);
    }
    inv.P = p;
    if (sys.domain() == Domain::Plane) {
        inv.Q = q;
        inv.I = i;
    } else if (sys.size() == 2) {
        inv.W = interaction_W_any(sys, state);
    }
    return inv;
}

std::vector<Point> velocity_fd_oracle(const VortexSystem& sys, const VortexState& state, double h) {
    validate(sys, state);
    if (!(h > 0.0)) throw OracleInvalid("finite-difference step must be positive");
    if (min_clearance(sys, state) <= 10.0 * h)
        throw OracleInvalid("finite-difference step too large for the closest approach in this state");

    std::vector<Point> v(state.size());
    VortexState probe = state;
    auto partial = [&](std::size_t j, double Point::*coord) {
        const double saved = probe[j].*coord;
        probe[j].*coord = saved + h;
        const double plus = hamiltonian(sys, probe);
        probe[j].*coord = saved - h;
        const double minus = hamiltonian(sys, probe);
        probe[j].*coord = saved;
        return (plus - minus) / (2.0 * h);
    };
    for (std::size_t j = 0; j < state.size(); ++j) {
        const double gj = sys.strength(j);
        v[j].x = partial(j, &Point::y) / gj;
        v[j].y = -partial(j, &Point::x) / gj;
    }
    return v;
}

std::vector<double> flatten(const VortexState& state) {
    std::vector<double> xy;
    xy.reserve(2 * state.size());
    for (const Point& p : state.positions) {
        xy.push_back(p.x);
        xy.push_back(p.y);
    }
    return xy;
}

VortexState unflatten(std::span<const double> xy) {
    VortexState s;
    s.positions.reserve(xy.size() / 2);
    for (std::size_t i = 0; i + 1 < xy.size(); i += 2) s.positions.push_back({xy[i], xy[i + 1]});
    return s;
}

}  // namespace pvortex
