#pragma once

#include <cstddef>

namespace funcmax {

/// Number of functions in the simulation basis.
inline constexpr std::size_t kBasisSize = 50;

/// phi_v(t) for v = 1..50: phi_1 = 1, phi_{2v} = sqrt2 cos(v pi (2t-1)) and
/// phi_{2v-1} = sqrt2 sin((v-1) pi (2t-1)). Orthonormal in L2[0, 1].
double basis_function(std::size_t v, double t) noexcept;

}  // namespace funcmax
