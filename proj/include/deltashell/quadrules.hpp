#pragma once
#include <utility>
#include <vector>

namespace ds {

// Gauss-Legendre rule on (-1, 1), nodes ascending.
struct GaussRule {
    std::vector<double> x, w;
    int order() const { return static_cast<int>(x.size()); }
};

GaussRule gauss_legendre(int n);
GaussRule gauss_legendre_on(int n, double a, double b);

} // namespace ds
