#include "funcmax/basis.hpp"

#include <cmath>
#include <numbers>

namespace funcmax {

double basis_function(std::size_t v, double t) noexcept {
    if (v <= 1) return 1.0;
    const double x = std::numbers::pi * (2.0 * t - 1.0);
    if (v % 2 == 0) return std::numbers::sqrt2 * std::cos(static_cast<double>(v / 2) * x);
    return std::numbers::sqrt2 * std::sin(static_cast<double>((v - 1) / 2) * x);
}

}  // namespace funcmax
