#pragma once
// Generators shared by the unit suites.

#include "fuchsian/core.hpp"

#include <random>

namespace testing_helpers {

using fuchsian::cplx;
using fuchsian::FuchsianSystem;
using fuchsian::Mat;

inline Mat mat2(cplx a, cplx b, cplx c, cplx d) {
    Mat r(2, 2);
    r << a, b, c, d;
    return r;
}

inline Mat random_matrix(std::mt19937& rng, int m, double re, double im) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat a(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a(i, j) = cplx(re * u(rng), im * u(rng));
    return a;
}

// Residues of moderate size with A_inf = diag(lambda); the last residue closes the sum.
inline FuchsianSystem random_system(unsigned seed, const std::vector<cplx>& poles, const std::vector<cplx>& lambda,
                                    double scale = 0.6) {
    std::mt19937 rng(seed);
    const int m = static_cast<int>(lambda.size()), n = static_cast<int>(poles.size());
    std::vector<Mat> a;
    Mat sum = Mat::Zero(m, m);
    for (int k = 0; k + 1 < n; ++k) {
        a.push_back(random_matrix(rng, m, scale, 0.1 * scale));
        sum += a.back();
    }
    Mat inf = Mat::Zero(m, m);
    for (int i = 0; i < m; ++i) inf(i, i) = lambda[i];
    a.push_back(-inf - sum);
    return fuchsian::build_system(poles, a);
}

inline FuchsianSystem generic_2x2(unsigned seed, int n) {
    std::vector<cplx> u = {0.0, 1.0, cplx(2.5, 1.0), cplx(-1.5, 2.0)};
    u.resize(n);
    return random_system(seed, u, {cplx(0.31, 0.1), -0.77});
}

inline double max_dev(const FuchsianSystem& a, const FuchsianSystem& b) {
    double d = 0;
    for (int k = 0; k < a.n(); ++k) d = std::max(d, fuchsian::max_abs(a.residues[k] - b.residues[k]));
    return d;
}

}  // namespace testing_helpers
