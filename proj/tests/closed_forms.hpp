#pragma once
// Closed-form isomonodromic families used as oracles. Poles are [0, x, 1]
// throughout; x > 1 real with principal branches of sqrt and log.

#include "fuchsian/core.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>

namespace closed_forms {

using fuchsian::cplx;
using fuchsian::FuchsianSystem;
using fuchsian::Mat;

inline Mat m2(cplx a, cplx b, cplx c, cplx d) {
    Mat r(2, 2);
    r << a, b, c, d;
    return r;
}

inline FuchsianSystem make(double x, Mat a1, Mat a2, Mat a3) {
    return fuchsian::build_system({0.0, x, 1.0}, {a1, a2, a3});
}

// upper-triangular family
inline FuchsianSystem b_system(double x) {
    const double s = std::sqrt(x);
    return make(x, m2(0.5, s / (x - 1), 0, -0.5), m2(-0.25, s / ((x - 1) * (x - 1)), 0, 0.25),
                m2(-0.75, -x * s / ((x - 1) * (x - 1)), 0, 0.75));
}

// the irreducible-looking family, entries exactly as printed
inline FuchsianSystem a_printed(double x) {
    const double s = std::sqrt(x), L = std::log((s + 1) / (s - 1)), D = (x - 1) * L - 2 * s, D2 = D * D;
    const double a111 = (2 * L * s * (x * x + 4 * x - 5) - 4 * x * (4 + 3 * x) - L * L * (x - 1) * (x - 1)) / (2 * D2);
    const double a112 = (L * L * (x - 1) * (x - 1) + 2 * x * (5 + 3 * x) - (x * x + 6 * x - 7) * s * L) /
                        (4 * D2 * (x - 1)) * (6 * s * (1 + x) - (x * x + 2 * x - 3) * L);
    const double a121 = 4 * s * (1 - x) / D2;
    const double a211 = (L * L * std::pow(x - 1, 3) - 4 * x * (7 + x) - 8 * L * s * (x * x - 3 * x + 2)) / (4 * D2 * (x - 1));
    const double a212 = -(L * L * std::pow(x - 1, 3) - 16 * x - 2 * (3 * x * x - 8 * x + 5) * s * L) /
                        (8 * D2 * (x - 1) * (x - 1)) * (2 * s * (3 + x) + (x * x - 4 * x + 3) * L);
    const double a221 = -4 * s / D2;
    const double a311 = 0.5 - a111 - a211, a312 = -a112 - a212, a321 = -a121 - a221;
    return make(x, m2(a111, a112, a121, -a111), m2(a211, a212, a221, -a211), m2(a311, a312, a321, -a311));
}

// a closed form of the same family that does solve the deformation equations
// (finite differences confirm); A_inf = diag(-1/2, 1/2)
inline FuchsianSystem a_corrected(double x) {
    const double s = std::sqrt(x), L = std::log((s + 1) / (s - 1));
    const double D = L * s * s - L + 2 * s, D2 = D * D;
    const double s2 = s * s, s3 = s2 * s, s4 = s2 * s2, s5 = s4 * s, q = (s2 - 1) * (s2 - 1);
    const double a1 = (-L * L * q + 2 * L * s * (s4 - 1) - 4 * s4 + 8 * s2) / (2 * D2);
    const double b1 = (L * s4 + 2 * L * s2 - 3 * L - 2 * s3 + 6 * s) * (-L * L * s2 + L * L + L * s3 - L * s - 2 * s2) / (4 * D2);
    const double c1 = -4 * s * (s2 - 1) / D2;
    const double a2 = (L * L * q + 8 * L * s - 20 * s2) / (4 * D2);
    const double b2 = -(L * s2 - 3 * L + 6 * s) * (L * L * q + 2 * L * s3 + 2 * L * s - 8 * s2) / (8 * D2);
    const double c2 = -4 * s / D2;
    const double a3 = -(-3 * L * L * q + 4 * L * s5 - 8 * L * s3 + 12 * L * s - 8 * s4 - 12 * s2) / (4 * D2);
    const double b3 = -(L * s2 + L - 2 * s) * (-3 * L * L * q + 2 * L * s5 - 10 * L * s3 + 12 * L * s - 4 * s4 - 12 * s2) / (8 * D2);
    const double c3 = 4 * s3 / D2;
    return make(x, m2(a1, b1, c1, -a1), m2(a2, b2, c2, -a2), m2(a3, b3, c3, -a3));
}

// nilpotent residues, A_inf = diag(1/2, -1/2), resonant at infinity
inline FuchsianSystem ex211(double x) {
    const double s = std::sqrt(x);
    return make(x,
                m2(-(s + 1) * (s + 1) / (16 * s), -1 / (2 * s), std::pow(s + 1, 4) / (128 * s), (s + 1) * (s + 1) / (16 * s)),
                m2(-(3 * s - 1) / (16 * s), 1 / (2 * (s + 1) * s), -(s + 1) * (3 * s - 1) * (3 * s - 1) / (128 * s), (3 * s - 1) / (16 * s)),
                m2((s - 3) / 16, 1 / (2 * (s + 1)), -(s - 3) * (s - 3) * (s + 1) / 128, (3 - s) / 16));
}

// Ψ_1 of the family above as printed, and its resonant slot alone
inline Mat ex211_psi1_printed(double x) {
    const double s = std::sqrt(x);
    return m2((3 * x - 2 * s) / 16, -std::log(s + 1), (4.5 * x * x + 2 * x * s - 5 * x + 2 * s) / 128, (2 * s - 3 * x) / 16);
}
inline double ex211_slot12(double x) { return -std::log(std::sqrt(x) + 1); }

inline Mat ex211_r_inf() { return m2(0, -0.5, 0, 0); }

// Exact rationals for the Hamiltonian oracle
struct Q {
    std::int64_t n = 0, d = 1;
    Q(std::int64_t a = 0, std::int64_t b = 1) : n(a), d(b) {
        if (d < 0) n = -n, d = -d;
        const auto g = std::gcd(n < 0 ? -n : n, d);
        if (g > 1) n /= g, d /= g;
    }
    friend Q operator+(Q a, Q b) { return {a.n * b.d + b.n * a.d, a.d * b.d}; }
    friend Q operator-(Q a, Q b) { return {a.n * b.d - b.n * a.d, a.d * b.d}; }
    friend Q operator*(Q a, Q b) { return {a.n * b.n, a.d * b.d}; }
    friend Q operator/(Q a, Q b) { return {a.n * b.d, a.d * b.n}; }
    friend bool operator==(Q a, Q b) { return a.n == b.n && a.d == b.d; }
    double value() const { return double(n) / double(d); }
};

// B-family at x = 4 (sqrt x = 2) with rational entries; H_2 by direct summation
inline Q b_hamiltonian_2_exact() {
    using M = Q[2][2];
    const Q x(4), s(2);
    const M b1 = {{Q(1, 2), s / (x - 1)}, {Q(0), Q(-1, 2)}};
    const M b2 = {{Q(-1, 4), s / ((x - 1) * (x - 1))}, {Q(0), Q(1, 4)}};
    const M b3 = {{Q(-3, 4), Q(0) - x * s / ((x - 1) * (x - 1))}, {Q(0), Q(3, 4)}};
    auto tr = [](const M& a, const M& b) {
        Q t;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) t = t + a[i][j] * b[j][i];
        return t;
    };
    return tr(b2, b1) / (x - Q(0)) + tr(b2, b3) / (x - Q(1));
}

}  // namespace closed_forms
