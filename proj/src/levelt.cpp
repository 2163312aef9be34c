#include "fuchsian/levelt.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fuchsian {

Mat AdmissiblePair::R() const {
    const auto m = lambda.size();
    Mat r = Mat::Zero(m, m);
    for (const auto& p : r_parts) r += p;
    return r;
}

Mat LeveltExpansion::psi_at(cplx z) const {
    // at infinity the series runs in 1/z, at a pole in (z - u)
    const cplx w = at_infinity() ? 1.0 / z : z - center;
    Mat s = psi.back();
    for (int k = static_cast<int>(psi.size()) - 2; k >= 0; --k) s = psi[k] + w * s;
    return s;
}

namespace {

// Shared recursion. With C_k the expansion coefficients of the regular part
// (sign-adjusted), both charts reduce to
//   gap_ab(k) Ψ_k,ab = rhs_ab + R_k,ab,  rhs = C_k + Σ_{i<k} (Ψ_{k-i} R_i + C_i Ψ_{k-i}),
// with gap_ab(k) = λ_a - λ_b - k.
void run_recursion(LeveltExpansion& e, const std::vector<Mat>& c, const LeveltOptions& opt) {
    const Vec& lam = e.pair.lambda;
    const int m = static_cast<int>(lam.size());
    const int N = e.order;
    e.psi.assign(N + 1, Mat::Zero(m, m));
    e.psi[0] = Mat::Identity(m, m);
    e.pair.r_parts.assign(N + 1, Mat::Zero(m, m));
    e.pair.K = 0;

    for (int k = 1; k <= N; ++k) {
        Mat rhs = c[k];
        for (int i = 1; i < k; ++i) rhs += e.psi[k - i] * e.pair.r_parts[i] + c[i] * e.psi[k - i];
        for (int a = 0; a < m; ++a) {
            for (int b = 0; b < m; ++b) {
                const cplx gap = lam(a) - lam(b) - double(k);
                if (std::abs(gap) < opt.resonance_eps) {
                    const FreeSlot slot{k, a, b};
                    if (gap != 0.0) e.near_resonances.push_back(slot);
                    e.free_slots.push_back(slot);
                    e.pair.r_parts[k](a, b) = -rhs(a, b);
                    auto it = opt.overrides.find(slot);
                    e.psi[k](a, b) = it == opt.overrides.end() ? cplx(0.0) : it->second;
                    if (std::abs(rhs(a, b)) > 0) e.pair.K = std::max(e.pair.K, k);
                } else {
                    e.psi[k](a, b) = rhs(a, b) / gap;
                }
            }
        }
    }
    // keep only the R_k that can be nonzero
    int kmax = 0;
    for (int k = 1; k <= N; ++k)
        if (max_abs(e.pair.r_parts[k]) > 0) kmax = k;
    e.pair.r_parts.resize(kmax + 1);
    e.pair.K = kmax;
}

void check_repeats(const Vec& lam, const LeveltOptions& opt, const char* where) {
    if (opt.allow_repeated) return;
    for (int a = 0; a < lam.size(); ++a)
        for (int b = a + 1; b < lam.size(); ++b)
            if (std::abs(lam(a) - lam(b)) < opt.resonance_eps)
                throw ValidationError(std::string("repeated eigenvalues ") + where);
}

}  // namespace

LeveltExpansion levelt_at_infinity(const FuchsianSystem& sys, int order, const LeveltOptions& opt) {
    if (order < 1) throw ValidationError("series order must be positive");
    const int m = sys.m;
    const Mat ainf = residue_at_infinity(sys);
    Mat off = ainf;
    off.diagonal().setZero();
    if (max_abs(off) > 1e-10 * std::max(1.0, max_abs(ainf)))
        throw ValidationError("A_inf is not diagonal; conjugate the system first");

    LeveltExpansion e;
    e.anchor = -1;
    e.frame = Mat::Identity(m, m);
    e.order = order;
    e.pair.lambda = ainf.diagonal();
    check_repeats(e.pair.lambda, opt, "of A_inf");
    double rmax = 0;
    for (auto u : sys.poles) rmax = std::max(rmax, std::abs(u));
    e.validity_radius = 2.0 * rmax;

    // B_k = -Σ A_j u_j^k, and C_k = -B_k
    std::vector<Mat> c(order + 1, Mat::Zero(m, m));
    for (int j = 0; j < sys.n(); ++j) {
        cplx p = 1.0;
        for (int k = 1; k <= order; ++k) {
            p *= sys.poles[j];
            c[k] += sys.residues[j] * p;
        }
    }
    run_recursion(e, c, opt);
    return e;
}

LeveltExpansion levelt_at_pole(const FuchsianSystem& sys, int k, int order, const LeveltOptions& opt) {
    if (k < 0 || k >= sys.n()) throw ValidationError("pole index out of range");
    if (order < 1) throw ValidationError("series order must be positive");
    const int m = sys.m;
    const Mat& ak = sys.residues[k];

    Eigen::ComplexEigenSolver<Mat> es(ak);
    if (es.info() != Eigen::Success) throw NumericError("eigensolver did not converge");
    std::vector<int> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        return exponent_order(es.eigenvalues()(a), es.eigenvalues()(b));
    });
    Mat t(m, m);
    Vec lam(m);
    for (int i = 0; i < m; ++i) {
        t.col(i) = es.eigenvectors().col(idx[i]);
        lam(i) = es.eigenvalues()(idx[i]);
    }
    Eigen::JacobiSVD<Mat> svd(t);
    const auto& sv = svd.singularValues();
    if (sv(m - 1) < 1e-10 * sv(0))
        throw ValidationError("residue matrix is not diagonalizable");
    // snap eigenvalues that are equal within the resonance band
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b)
            if (std::abs(lam(a) - lam(b)) < opt.resonance_eps) lam(b) = lam(a);
    // a Jordan block survives the eigensolver as a nearly parallel eigenvector pair
    if (max_abs(t * lam.asDiagonal() * t.inverse() - ak) > 1e-8 * std::max(1.0, max_abs(ak)))
        throw ValidationError("residue matrix is not diagonalizable");

    LeveltExpansion e;
    e.anchor = k;
    e.center = sys.poles[k];
    e.frame = t;
    e.order = order;
    e.pair.lambda = lam;
    double dmin = std::numeric_limits<double>::infinity();
    for (int l = 0; l < sys.n(); ++l)
        if (l != k) dmin = std::min(dmin, std::abs(sys.poles[l] - sys.poles[k]));
    e.validity_radius = 0.5 * dmin;

    // A(z) = A_k/t + Σ_j E_j t^j, E_j = Σ_{l≠k} (-1)^j A_l / (u_k-u_l)^{j+1}; C_j = -T^-1 E_{j-1} T
    auto lu = t.partialPivLu();
    std::vector<Mat> c(order + 1, Mat::Zero(m, m));
    for (int l = 0; l < sys.n(); ++l) {
        if (l == k) continue;
        const cplx d = sys.poles[k] - sys.poles[l];
        cplx w = 1.0 / d;
        for (int j = 1; j <= order; ++j) {
            c[j] -= sys.residues[l] * w;
            w *= -1.0 / d;
        }
    }
    for (int j = 1; j <= order; ++j) c[j] = lu.solve(c[j] * t);
    run_recursion(e, c, opt);
    return e;
}

Mat nilpotent_exp(const Mat& r, cplx s) {
    const auto m = r.rows();
    Mat out = Mat::Identity(m, m);
    Mat term = Mat::Identity(m, m);
    for (int j = 1; j <= m; ++j) {
        term = term * r * (s / double(j));
        if (max_abs(term) == 0.0) break;
        out += term;
    }
    return out;
}

Mat evaluate_levelt_log(const LeveltExpansion& e, cplx z, cplx logv) {
    const auto& lam = e.pair.lambda;
    const Mat r = e.pair.R();
    if (e.at_infinity()) {
        if (!(std::abs(z) > e.validity_radius))
            throw ValidationError("point outside the validity region of the expansion at infinity");
        Vec d = (-lam * logv).array().exp();
        return e.psi_at(z) * d.asDiagonal() * nilpotent_exp(r, -logv);
    }
    if (!(std::abs(z - e.center) < e.validity_radius) || z == e.center)
        throw ValidationError("point outside the validity disk of the local expansion");
    Vec d = (lam * logv).array().exp();
    return e.frame * e.psi_at(z) * d.asDiagonal() * nilpotent_exp(r, logv);
}

Mat evaluate_levelt(const LeveltExpansion& e, cplx z, int log_branch) {
    const cplx w = e.at_infinity() ? z : z - e.center;
    const cplx logv = std::log(w) + cplx(0.0, 2.0 * M_PI * log_branch);
    return evaluate_levelt_log(e, z, logv);
}

bool centralizer_membership(const Mat& g, const Vec& lambda, bool at_infinity, double eps,
                            double zero_tol) {
    // At a pole z^Λ G z^-Λ, at infinity z^-Λ G z^Λ expanded in 1/z: both
    // need λ_i - λ_j to be a non-negative integer wherever G_ij ≠ 0.
    (void)at_infinity;
    if (g.rows() != g.cols() || g.rows() != lambda.size())
        throw ValidationError("shape mismatch in centralizer test");
    for (int i = 0; i < g.rows(); ++i)
        for (int j = 0; j < g.cols(); ++j) {
            if (std::abs(g(i, j)) <= zero_tol) continue;
            const cplx d = lambda(i) - lambda(j);
            const double r = std::round(d.real());
            if (std::abs(d - r) > eps || r < 0) return false;
        }
    return true;
}

}  // namespace fuchsian
