// quadrature.hpp — Gauss-Legendre rules

#pragma once

#include <vector>

namespace risim {

struct QuadratureRule {
    std::vector<double> nodes;   // ascending, in (-1, 1)
    std::vector<double> weights; // sum to 2
};

// n-point Gauss-Legendre rule on [-1, 1] (Golub-Welsch). Throws InputError for n < 1.
QuadratureRule gauss_legendre(int n);

} // namespace risim
