#pragma once

#include "cutbiot/core.hpp"

#include <vector>

namespace cutbiot {

struct Rule1D {
    std::vector<double> points;  // on [0,1]
    std::vector<double> weights; // sum to 1
};

struct Rule2D {
    std::vector<Vec2> points;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule mapped to [0,1].
Rule1D gauss_legendre(int n);

/// Smallest Gauss-Legendre rule integrating polynomials of degree `order` exactly.
Rule1D gauss_for_order(int order);

/// Tensor Gauss rule on the unit square, exact for degree `order` per variable.
Rule2D tensor_gauss(int order);

/// Rule on the reference triangle (0,0),(1,0),(0,1); weights sum to 1/2.
/// Exact for total degree `order`.
Rule2D triangle_rule(int order);

} // namespace cutbiot
