#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "pvortex/vortex.hpp"

namespace support {

inline std::vector<std::complex<double>> as_complex(const pvortex::VortexState& s) {
    std::vector<std::complex<double>> z;
    for (const auto& p : s.positions) z.emplace_back(p.x, p.y);
    return z;
}

inline std::vector<double> strengths(const pvortex::VortexSystem& sys) {
    return {sys.strengths().begin(), sys.strengths().end()};
}

struct RandomCase {
    pvortex::VortexSystem system;
    pvortex::VortexState state;
};

// Strengths with |G| in [0.2, 3] and either sign; positions in a box with
// pairwise distance and wall clearance at least 0.05.
inline RandomCase random_case(std::mt19937_64& rng, pvortex::Domain domain, std::size_t n) {
    std::uniform_real_distribution<double> mag(0.2, 3.0), coord(-2.0, 2.0), height(0.05, 3.0);
    std::bernoulli_distribution sign(0.5);
    std::vector<double> g;
    for (std::size_t k = 0; k < n; ++k) g.push_back(sign(rng) ? mag(rng) : -mag(rng));
    pvortex::VortexState st;
    while (st.size() < n) {
        const pvortex::Point p{coord(rng), domain == pvortex::Domain::HalfPlane ? height(rng) : coord(rng)};
        bool ok = true;
        for (const auto& q : st.positions) ok = ok && std::hypot(p.x - q.x, p.y - q.y) >= 0.05;
        if (ok) st.positions.push_back(p);
    }
    return {pvortex::VortexSystem(domain, g), st};
}

}  // namespace support
