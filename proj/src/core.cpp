#include "fuchsian/core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace fuchsian {

Mat FuchsianSystem::eval(cplx z) const {
    Mat a = Mat::Zero(m, m);
    for (int k = 0; k < n(); ++k) a += residues[k] / (z - poles[k]);
    return a;
}

void ToleranceConfig::validate() const {
    if (!(ode_rel_tol > 0) || !(ode_abs_tol > 0) || !(resonance_eps > 0) || pole_clearance < 0)
        throw ValidationError("tolerances must be strictly positive");
    if (series_order < 2) throw ValidationError("series_order must be at least 2");
}

double ToleranceConfig::clearance_for(const std::vector<cplx>& poles) const {
    if (pole_clearance > 0) return pole_clearance;
    if (poles.size() < 2) return 1e-3;
    return 1e-3 * min_pole_distance(poles);
}

double min_pole_distance(const std::vector<cplx>& poles) {
    double d = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < poles.size(); ++i)
        for (size_t j = i + 1; j < poles.size(); ++j) d = std::min(d, std::abs(poles[i] - poles[j]));
    return d;
}

FuchsianSystem build_system(std::vector<cplx> poles, std::vector<Mat> residues, double separation) {
    if (poles.size() != residues.size())
        throw ValidationError("number of poles and residues differ");
    if (poles.empty()) throw ValidationError("a system needs at least one pole");
    const auto m = residues.front().rows();
    if (m < 2) throw ValidationError("matrix size must be at least 2");
    for (const auto& a : residues) {
        if (a.rows() != m || a.cols() != m) throw ValidationError("ragged residue matrix sizes");
        if (!a.allFinite()) throw ValidationError("residue has non-finite entries");
    }
    for (auto u : poles)
        if (!std::isfinite(u.real()) || !std::isfinite(u.imag()))
            throw ValidationError("pole is not finite");
    if (poles.size() > 1 && min_pole_distance(poles) <= separation)
        throw ValidationError("duplicate poles");
    FuchsianSystem s;
    s.m = static_cast<int>(m);
    s.poles = std::move(poles);
    s.residues = std::move(residues);
    return s;
}

Mat residue_at_infinity(const FuchsianSystem& sys) {
    Mat a = Mat::Zero(sys.m, sys.m);
    for (const auto& r : sys.residues) a -= r;
    return a;
}

bool exponent_order(cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
}

std::vector<cplx> spectrum(const Mat& a) {
    if (a.rows() != a.cols()) throw ValidationError("spectrum of a non-square matrix");
    Eigen::ComplexEigenSolver<Mat> es(a, false);
    if (es.info() != Eigen::Success) throw NumericError("eigensolver did not converge");
    std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + a.rows());
    std::sort(ev.begin(), ev.end(), exponent_order);
    return ev;
}

Mat permutation_matrix(const std::vector<int>& perm) {
    const int m = static_cast<int>(perm.size());
    Mat p = Mat::Zero(m, m);
    for (int i = 0; i < m; ++i) p(perm[i], i) = 1.0;
    return p;
}

Mat conjugate(const Mat& a, const Mat& p) { return p.partialPivLu().solve(a * p); }

double max_abs(const Mat& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

double diagonal_conjugation_distance(const std::vector<Mat>& a, const std::vector<Mat>& b, Vec* d_out) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    if (a.empty()) return 0.0;
    const int m = static_cast<int>(a.front().rows());
    for (size_t k = 0; k < a.size(); ++k)
        if (b[k].rows() != m || a[k].rows() != m) return std::numeric_limits<double>::infinity();

    // (D^-1 A D)_ij = A_ij d_j / d_i, so every sizeable entry links d_i and d_j.
    Vec d = Vec::Ones(m);
    std::vector<bool> seen(m, false);
    seen[0] = true;
    std::queue<int> todo;
    todo.push(0);
    auto spread = [&](int i) {
        for (int j = 0; j < m; ++j) {
            if (seen[j]) continue;
            double best = 0;
            cplx ratio = 1.0;
            for (size_t k = 0; k < a.size(); ++k) {
                if (std::abs(a[k](i, j)) > best && std::abs(b[k](i, j)) > 0) {
                    best = std::abs(a[k](i, j));
                    ratio = b[k](i, j) / a[k](i, j);  // d_j / d_i
                }
                if (std::abs(b[k](j, i)) > best && std::abs(a[k](j, i)) > 0) {
                    best = std::abs(b[k](j, i));
                    ratio = a[k](j, i) / b[k](j, i);
                }
            }
            if (best > 1e-12) {
                d(j) = d(i) * ratio;
                seen[j] = true;
                todo.push(j);
            }
        }
    };
    while (!todo.empty()) {
        int i = todo.front();
        todo.pop();
        spread(i);
    }
    double worst = 0;
    for (size_t k = 0; k < a.size(); ++k) {
        Mat c = d.cwiseInverse().asDiagonal() * a[k] * d.asDiagonal();
        worst = std::max(worst, max_abs(c - b[k]));
    }
    if (d_out) *d_out = d;
    return worst;
}

}  // namespace fuchsian
