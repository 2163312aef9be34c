#pragma once

#include "fuchsian/core.hpp"

#include <vector>

namespace fuchsian {

// Polynomial with ascending coefficients c[0] + c[1] z + ...
struct Poly {
    std::vector<cplx> c;

    Poly() = default;
    explicit Poly(std::vector<cplx> coeffs) : c(std::move(coeffs)) {}
    static Poly constant(cplx a) { return Poly({a}); }
    static Poly linear_root(cplx r) { return Poly({-r, 1.0}); }  // z - r

    int degree() const;  // -1 for the zero polynomial
    cplx operator()(cplx z) const;
    Poly derivative() const;
    // drops leading coefficients below rel * max|c|
    Poly trimmed(double rel = 0.0) const;
    // coefficients of p(a + t) in t
    Poly shifted(cplx a) const;
};

Poly operator+(const Poly& a, const Poly& b);
Poly operator-(const Poly& a, const Poly& b);
Poly operator*(const Poly& a, const Poly& b);
Poly operator*(cplx s, const Poly& a);

Poly from_roots(const std::vector<cplx>& roots, cplx lead = 1.0);
// companion-matrix eigenvalues; the polynomial must be trimmed
std::vector<cplx> roots(const Poly& p);

// num / (lead * prod (z - root_i)^mult_i)
struct RationalFunction {
    Poly num;
    cplx lead = 1.0;
    std::vector<cplx> den_roots;
    std::vector<int> mult;

    cplx operator()(cplx z) const;
    Poly denominator() const;
    // Laurent coefficients c_{-mult}, ..., c_{count - mult - 1} at den_roots[i]
    std::vector<cplx> laurent(int i, int count) const;
    cplx residue(int i) const;
    // index of the denominator root nearest to z
    int root_index(cplx z) const;
};

// first `count` Taylor coefficients of a/b at t = 0 (b(0) != 0)
std::vector<cplx> series_divide(const std::vector<cplx>& a, const std::vector<cplx>& b, int count);

}  // namespace fuchsian
