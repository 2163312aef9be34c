#include "fuchsian/poly.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace fuchsian {

int Poly::degree() const {
    for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k)
        if (c[k] != 0.0) return k;
    return -1;
}

cplx Poly::operator()(cplx z) const {
    cplx v = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * z + *it;
    return v;
}

Poly Poly::derivative() const {
    if (c.size() <= 1) return Poly({0.0});
    std::vector<cplx> d(c.size() - 1);
    for (size_t k = 1; k < c.size(); ++k) d[k - 1] = double(k) * c[k];
    return Poly(d);
}

Poly Poly::trimmed(double rel) const {
    double big = 0;
    for (auto a : c) big = std::max(big, std::abs(a));
    std::vector<cplx> d = c;
    while (!d.empty() && std::abs(d.back()) <= rel * big) d.pop_back();
    if (d.empty()) d.push_back(0.0);
    return Poly(d);
}

Poly Poly::shifted(cplx a) const {
    // repeated synthetic division (Taylor shift)
    std::vector<cplx> d = c;
    const int n = static_cast<int>(d.size());
    for (int i = 0; i < n; ++i)
        for (int k = n - 2; k >= i; --k) d[k] += a * d[k + 1];
    return Poly(d);
}

Poly operator+(const Poly& a, const Poly& b) {
    std::vector<cplx> d(std::max(a.c.size(), b.c.size()), 0.0);
    for (size_t k = 0; k < a.c.size(); ++k) d[k] += a.c[k];
    for (size_t k = 0; k < b.c.size(); ++k) d[k] += b.c[k];
    return Poly(d);
}

Poly operator-(const Poly& a, const Poly& b) { return a + (-1.0) * b; }

Poly operator*(const Poly& a, const Poly& b) {
    if (a.c.empty() || b.c.empty()) return Poly({0.0});
    std::vector<cplx> d(a.c.size() + b.c.size() - 1, 0.0);
    for (size_t i = 0; i < a.c.size(); ++i)
        for (size_t j = 0; j < b.c.size(); ++j) d[i + j] += a.c[i] * b.c[j];
    return Poly(d);
}

Poly operator*(cplx s, const Poly& a) {
    Poly r = a;
    for (auto& x : r.c) x *= s;
    return r;
}

Poly from_roots(const std::vector<cplx>& rs, cplx lead) {
    Poly p = Poly::constant(lead);
    for (auto r : rs) p = p * Poly::linear_root(r);
    return p;
}

std::vector<cplx> roots(const Poly& p) {
    const int n = p.degree();
    if (n < 0) throw ValidationError("roots of the zero polynomial");
    if (n == 0) return {};
    Mat comp = Mat::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -p.c[i] / p.c[n];
    Eigen::ComplexEigenSolver<Mat> es(comp, false);
    if (es.info() != Eigen::Success) throw NumericError("companion eigensolver did not converge");
    std::vector<cplx> r(es.eigenvalues().data(), es.eigenvalues().data() + n);
    // one Newton step each against the original coefficients
    const Poly dp = p.derivative();
    for (auto& z : r) {
        const cplx d = dp(z);
        if (std::abs(d) > 0) z -= p(z) / d;
    }
    std::sort(r.begin(), r.end(), [](cplx a, cplx b) { return exponent_order(a, b); });
    return r;
}

std::vector<cplx> series_divide(const std::vector<cplx>& a, const std::vector<cplx>& b, int count) {
    if (b.empty() || b[0] == 0.0) throw NumericError("series division by a vanishing leading term");
    std::vector<cplx> q(count, 0.0);
    for (int k = 0; k < count; ++k) {
        cplx s = k < static_cast<int>(a.size()) ? a[k] : 0.0;
        for (int j = 1; j <= k && j < static_cast<int>(b.size()); ++j) s -= b[j] * q[k - j];
        q[k] = s / b[0];
    }
    return q;
}

Poly RationalFunction::denominator() const {
    Poly d = Poly::constant(lead);
    for (size_t i = 0; i < den_roots.size(); ++i)
        for (int k = 0; k < mult[i]; ++k) d = d * Poly::linear_root(den_roots[i]);
    return d;
}

cplx RationalFunction::operator()(cplx z) const {
    cplx d = lead;
    for (size_t i = 0; i < den_roots.size(); ++i) d *= std::pow(z - den_roots[i], mult[i]);
    return num(z) / d;
}

std::vector<cplx> RationalFunction::laurent(int i, int count) const {
    const cplx r = den_roots.at(i);
    Poly rest = Poly::constant(lead);
    for (size_t j = 0; j < den_roots.size(); ++j) {
        if (static_cast<int>(j) == i) continue;
        for (int k = 0; k < mult[j]; ++k) rest = rest * Poly::linear_root(den_roots[j]);
    }
    return series_divide(num.shifted(r).c, rest.shifted(r).c, count);
}

cplx RationalFunction::residue(int i) const {
    const int k = mult.at(i);
    return laurent(i, k)[k - 1];
}

int RationalFunction::root_index(cplx z) const {
    int best = -1;
    double d = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < den_roots.size(); ++i)
        if (std::abs(den_roots[i] - z) < d) {
            d = std::abs(den_roots[i] - z);
            best = static_cast<int>(i);
        }
    return best;
}

}  // namespace fuchsian
