#include "fuchsian/monodromy.hpp"
#include "fuchsian/ode.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fuchsian {

namespace {

double dist_to_segment(cplx p, cplx a, cplx b) {
    const cplx ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(p - a);
    const double s = std::clamp(((p - a) * std::conj(ab)).real() / len2, 0.0, 1.0);
    return std::abs(p - (a + s * ab));
}

Vec flatten(const Mat& a) { return Eigen::Map<const Vec>(a.data(), a.size()); }
Mat unflatten(const Vec& v, int m) { return Eigen::Map<const Mat>(v.data(), m, m); }

OdeOptions ode_opts(const ToleranceConfig& tol) {
    OdeOptions o;
    o.rel_tol = tol.ode_rel_tol;
    o.abs_tol = tol.ode_abs_tol;
    return o;
}

Mat transport_segment(const FuchsianSystem& sys, cplx a, cplx b, const Mat& phi,
                      const ToleranceConfig& tol) {
    const int m = sys.m;
    const cplx dz = b - a;
    OdeRhs f = [&](double s, const Vec& y, Vec& dy) {
        const Mat am = sys.eval(a + s * dz) * dz;
        dy = flatten(am * unflatten(y, m));
    };
    return unflatten(integrate_dopri(f, 0.0, 1.0, flatten(phi), ode_opts(tol)), m);
}

Mat transport_circle(const FuchsianSystem& sys, cplx c, double r, double theta0, const Mat& phi,
                     const ToleranceConfig& tol) {
    const int m = sys.m;
    OdeRhs f = [&](double th, const Vec& y, Vec& dy) {
        const cplx e = std::polar(r, th);
        const Mat am = sys.eval(c + e) * (cplx(0, 1) * e);
        dy = flatten(am * unflatten(y, m));
    };
    return unflatten(integrate_dopri(f, theta0, theta0 + 2 * M_PI, flatten(phi), ode_opts(tol)), m);
}

void check_clearance(const FuchsianSystem& sys, cplx a, cplx b, double clearance) {
    for (auto u : sys.poles)
        if (dist_to_segment(u, a, b) < clearance)
            throw ValidationError("path passes within the pole clearance of a pole");
}

}  // namespace

double loop_radius(const FuchsianSystem& sys, int k) {
    double d = std::numeric_limits<double>::infinity();
    for (int l = 0; l < sys.n(); ++l)
        if (l != k) d = std::min(d, std::abs(sys.poles[l] - sys.poles[k]));
    if (!std::isfinite(d)) d = 2.0;
    return 0.5 * d;
}

LoopBasis make_loop_basis(const FuchsianSystem& sys, LoopBasis basis) {
    if (std::abs(basis.cut_direction) == 0.0) throw ValidationError("cut direction must be nonzero");
    basis.cut_direction /= std::abs(basis.cut_direction);
    double rmax = 0;
    for (auto u : sys.poles) rmax = std::max(rmax, std::abs(u));
    if (basis.basepoint_radius <= 0) basis.basepoint_radius = 10.0 * rmax + 1.0;
    if (basis.basepoint_radius <= 2.0 * rmax)
        throw ValidationError("basepoint radius must exceed twice the largest |u_k|");
    const cplx dc = std::conj(basis.cut_direction);
    // loops are composed from the lowest (in the rotated frame) upwards
    basis.ordering.resize(sys.n());
    std::iota(basis.ordering.begin(), basis.ordering.end(), 0);
    std::stable_sort(basis.ordering.begin(), basis.ordering.end(), [&](int a, int b) {
        return (sys.poles[a] * dc).imag() < (sys.poles[b] * dc).imag();
    });
    return basis;
}

cplx basepoint(const FuchsianSystem&, const LoopBasis& basis) {
    return -basis.basepoint_radius * basis.cut_direction;
}

cplx basepoint_log(const FuchsianSystem& sys, const LoopBasis& basis) {
    return std::log(basepoint(sys, basis));
}

std::vector<cplx> approach_path(const FuchsianSystem& sys, const LoopBasis& basis, int k) {
    const cplx d = basis.cut_direction;
    const cplx w = sys.poles[k] * std::conj(d);
    const double rho = basis.basepoint_radius;
    const double r = loop_radius(sys, k);
    return {cplx(-rho, 0.0) * d, cplx(-rho, w.imag()) * d, (w - r) * d};
}

Mat transport(const FuchsianSystem& sys, const PathSpec& path, const Mat& initial,
              const ToleranceConfig& tol) {
    tol.validate();
    if (initial.rows() != sys.m || initial.cols() != sys.m)
        throw ValidationError("initial matrix has the wrong size");
    const double clearance = tol.clearance_for(sys.poles);
    Mat phi = initial;
    const auto& v = path.vertices;
    for (size_t i = 0; i + 1 < v.size(); ++i) check_clearance(sys, v[i], v[i + 1], clearance);
    if (path.kind == PathSpec::Kind::Polyline) {
        for (size_t i = 0; i + 1 < v.size(); ++i) phi = transport_segment(sys, v[i], v[i + 1], phi, tol);
        if (!phi.allFinite()) throw NumericError("transport produced non-finite values");
        return phi;
    }
    if (!path.anchor || *path.anchor < 0 || *path.anchor >= sys.n() || v.empty())
        throw ValidationError("loop path needs an anchor pole and a start vertex");
    const cplx c = sys.poles[*path.anchor];
    const double r = path.radius > 0 ? path.radius : std::abs(v.back() - c);
    if (r < clearance) throw ValidationError("loop radius below the pole clearance");
    for (int l = 0; l < sys.n(); ++l)
        if (l != *path.anchor && std::abs(std::abs(sys.poles[l] - c) - r) < clearance)
            throw ValidationError("loop circle passes through another pole");
    for (size_t i = 0; i + 1 < v.size(); ++i) phi = transport_segment(sys, v[i], v[i + 1], phi, tol);
    phi = transport_circle(sys, c, r, std::arg(v.back() - c), phi, tol);
    for (size_t i = v.size() - 1; i > 0; --i) phi = transport_segment(sys, v[i], v[i - 1], phi, tol);
    if (!phi.allFinite()) throw NumericError("transport produced non-finite values");
    return phi;
}

namespace {

PathSpec loop_spec(const FuchsianSystem& sys, const LoopBasis& basis, int k) {
    PathSpec p;
    p.kind = PathSpec::Kind::Loop;
    p.anchor = k;
    p.vertices = approach_path(sys, basis, k);
    p.radius = loop_radius(sys, k);
    return p;
}

Mat local_exp(const Vec& lam, const Mat& r) {
    Vec d = (lam * cplx(0, 2 * M_PI)).array().exp();
    return d.asDiagonal() * nilpotent_exp(r, cplx(0, 2 * M_PI));
}

MonodromyData monodromy_impl(const FuchsianSystem& sys, const LoopBasis& basis_in,
                             const ToleranceConfig& tol, bool parallel) {
    tol.validate();
    const LoopBasis basis = make_loop_basis(sys, basis_in);
    const int m = sys.m, n = sys.n();
    const auto einf = levelt_at_infinity(sys, tol.series_order, {tol.resonance_eps, false, {}});

    MonodromyData d;
    d.m = m;
    d.ordering = basis.ordering;
    d.basepoint = basepoint(sys, basis);
    d.phi_base = evaluate_levelt_log(einf, d.basepoint, basepoint_log(sys, basis));
    d.monodromies.assign(n, Mat());
    d.local.assign(n + 1, LocalData{});
    for (int k = 0; k < n; ++k) {
        try {
            auto e = levelt_at_pole(sys, k, tol.series_order, {tol.resonance_eps, false, {}});
            d.local[k] = {e.pair.lambda, e.pair.R()};
        } catch (const ValidationError&) {
            auto ev = spectrum(sys.residues[k]);
            d.local[k] = {Eigen::Map<Vec>(ev.data(), m), Mat()};
        }
    }
    d.local[n] = {einf.pair.lambda, einf.pair.R()};

    auto phi_lu = d.phi_base.partialPivLu();
    std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int k = 0; k < n; ++k) {
        try {
            const Mat p = transport(sys, loop_spec(sys, basis, k), Mat::Identity(m, m), tol);
            d.monodromies[k] = phi_lu.solve(p * d.phi_base);
        } catch (const std::exception& ex) {
            errors[k] = ex.what();
        }
    }
    for (int k = 0; k < n; ++k)
        if (!errors[k].empty()) throw NumericError("loop " + std::to_string(k + 1) + ": " + errors[k]);

    Mat prod = Mat::Identity(m, m);
    for (int idx : basis.ordering) prod = d.monodromies[idx] * prod;
    d.m_inf = prod.inverse();
    d.inf_check = max_abs(d.m_inf - local_exp(einf.pair.lambda, einf.pair.R()));
    // N6 with M_inf taken from the local data at infinity
    d.closure_residual = max_abs(local_exp(einf.pair.lambda, einf.pair.R()) * prod - Mat::Identity(m, m));
    // transport errors are amplified by the condition of Φ_inf at the basepoint
    // and by the size of the partial products
    double mscale = 1.0;
    for (const auto& mk : d.monodromies) mscale *= std::max(1.0, max_abs(mk));
    const double cond = max_abs(d.phi_base) * max_abs(phi_lu.inverse());
    const double limit = std::max(1e-6, 1e4 * tol.ode_rel_tol * std::max(1.0, cond) * mscale);
    if (!(d.closure_residual < limit))
        throw NumericError("monodromy closure residual " + std::to_string(d.closure_residual) +
                           " above tolerance");
    return d;
}

}  // namespace

MonodromyData monodromy_matrices(const FuchsianSystem& sys, const LoopBasis& basis,
                                 const ToleranceConfig& tol) {
    return monodromy_impl(sys, basis, tol, true);
}

MonodromyData monodromy_matrices_serial(const FuchsianSystem& sys, const LoopBasis& basis,
                                        const ToleranceConfig& tol) {
    return monodromy_impl(sys, basis, tol, false);
}

MonodromyData connection_matrices(const FuchsianSystem& sys, const LoopBasis& basis_in,
                                  const ToleranceConfig& tol) {
    MonodromyData d = monodromy_matrices(sys, basis_in, tol);
    const LoopBasis basis = make_loop_basis(sys, basis_in);
    const int m = sys.m, n = sys.n();
    d.connections.assign(n, Mat());
    std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < n; ++k) {
        try {
            const auto ek = levelt_at_pole(sys, k, tol.series_order, {tol.resonance_eps, false, {}});
            auto path = approach_path(sys, basis, k);
            const cplx u = sys.poles[k];
            const double r = loop_radius(sys, k);
            path.push_back(u - 0.5 * r * basis.cut_direction);
            PathSpec p;
            p.vertices = path;
            const Mat phi_inf = transport(sys, p, d.phi_base, tol);
            const cplx logt = std::log(path.back() - u);
            const Mat phi_k = evaluate_levelt_log(ek, path.back(), logt);
            d.connections[k] = phi_k.partialPivLu().solve(phi_inf);
        } catch (const std::exception& ex) {
            errors[k] = ex.what();
        }
    }
    for (int k = 0; k < n; ++k)
        if (!errors[k].empty())
            throw NumericError("connection matrix " + std::to_string(k + 1) + ": " + errors[k]);
    d.n4_residual = 0;
    double limit = 1e-6;
    for (int k = 0; k < n; ++k) {
        const auto& c = d.connections[k];
        auto lu = c.partialPivLu();
        const Mat pred = lu.solve(local_exp(d.local[k].lambda, d.local[k].R) * c);
        d.n4_residual = std::max(d.n4_residual, max_abs(pred - d.monodromies[k]) /
                                                    std::max(1.0, max_abs(d.monodromies[k])));
        limit = std::max(limit, 1e4 * tol.ode_rel_tol * max_abs(c) * max_abs(lu.inverse()));
    }
    (void)m;
    if (!(d.n4_residual < limit))
        throw NumericError("connection matrices inconsistent with local monodromy (residual " +
                           std::to_string(d.n4_residual) + ")");
    return d;
}

std::vector<cplx> trace_invariants(const std::vector<Mat>& ms) {
    std::vector<cplx> t;
    const int n = static_cast<int>(ms.size());
    for (int i = 0; i < n; ++i) t.push_back(ms[i].trace());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) t.push_back((ms[i] * ms[j]).trace());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k) t.push_back((ms[i] * ms[j] * ms[k]).trace());
    return t;
}

namespace {

bool same_multiset(Vec a, Vec b, double tol) {
    if (a.size() != b.size()) return false;
    std::vector<bool> used(b.size(), false);
    for (int i = 0; i < a.size(); ++i) {
        bool hit = false;
        for (int j = 0; j < b.size() && !hit; ++j)
            if (!used[j] && std::abs(a(i) - b(j)) < tol) used[j] = hit = true;
        if (!hit) return false;
    }
    return true;
}

// Null vectors of the stacked Sylvester operators X ↦ A_k X - X B_k.
std::optional<Mat> conjugator(const std::vector<Mat>& a, const std::vector<Mat>& b, double tol,
                              double* residual) {
    const int m = static_cast<int>(a.front().rows());
    const int K = static_cast<int>(a.size());
    Mat big(K * m * m, m * m);
    const Mat I = Mat::Identity(m, m);
    double scale = 1.0;
    for (int k = 0; k < K; ++k) {
        // vec(A X - X B) = (I ⊗ A - B^T ⊗ I) vec X
        Mat blk(m * m, m * m);
        for (int p = 0; p < m; ++p)
            for (int q = 0; q < m; ++q)
                blk.block(p * m, q * m, m, m) = I(p, q) * a[k] - b[k](q, p) * I;
        big.block(k * m * m, 0, m * m, m * m) = blk;
        scale = std::max(scale, max_abs(a[k]));
    }
    Eigen::JacobiSVD<Mat> svd(big, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const int dim = m * m;
    std::vector<int> nulls;
    for (int i = 0; i < dim; ++i)
        if (sv(i) < tol * scale) nulls.push_back(i);
    if (nulls.empty()) return std::nullopt;
    std::mt19937 gen(12345);
    std::normal_distribution<double> nd;
    Vec x = Vec::Zero(dim);
    for (int i : nulls) x += cplx(nd(gen), nd(gen)) * svd.matrixV().col(i);
    Mat w = unflatten(x, m);
    const double cond = Eigen::JacobiSVD<Mat>(w).singularValues()(m - 1);
    if (cond < 1e-8 * max_abs(w)) return std::nullopt;
    w /= max_abs(w);
    double res = 0;
    for (int k = 0; k < K; ++k) res = std::max(res, max_abs(a[k] * w - w * b[k]));
    if (residual) *residual = res;
    return w;
}

}  // namespace

std::optional<EquivalenceWitness> monodromy_equivalent(const MonodromyData& d1,
                                                       const MonodromyData& d2, double tol) {
    if (d1.m != d2.m || d1.monodromies.size() != d2.monodromies.size()) return std::nullopt;
    const int m = d1.m, n = static_cast<int>(d1.monodromies.size());
    for (int k = 0; k < n; ++k)
        if (!same_multiset(d1.local[k].lambda, d2.local[k].lambda, tol)) return std::nullopt;

    const Vec& l1 = d1.local[n].lambda;
    const Vec& l2 = d2.local[n].lambda;
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    EquivalenceWitness w;
    bool found = false;
    do {
        Vec shift(m);
        bool ok = true;
        for (int i = 0; i < m && ok; ++i) {
            shift(i) = l2(i) - l1(perm[i]);
            ok = std::abs(shift(i) - std::round(shift(i).real())) < tol;
            shift(i) = std::round(shift(i).real());
        }
        if (ok) {
            w.perm = perm;
            w.shift = shift;
            found = true;
        }
    } while (!found && std::next_permutation(perm.begin(), perm.end()));
    if (!found) return std::nullopt;

    const auto t1 = trace_invariants(d1.monodromies);
    const auto t2 = trace_invariants(d2.monodromies);
    for (size_t i = 0; i < t1.size(); ++i)
        w.trace_residual = std::max(w.trace_residual, std::abs(t1[i] - t2[i]));
    if (!(w.trace_residual < tol)) return std::nullopt;

    double res = 0;
    auto c = conjugator(d1.monodromies, d2.monodromies, std::max(tol, 1e-9), &res);
    if (!c) return std::nullopt;
    w.conjugator = *c;
    w.conjugacy_residual = res;
    return w;
}

std::optional<Mat> common_invariant_subspace(const std::vector<Mat>& mats, int l, double tol) {
    if (mats.empty()) return std::nullopt;
    const int m = static_cast<int>(mats.front().rows());
    if (l <= 0 || l >= m) throw ValidationError("subspace dimension must satisfy 0 < l < m");

    auto invariant = [&](const Mat& q) {
        const Mat proj = Mat::Identity(m, m) - q * q.adjoint();
        for (const auto& a : mats)
            if (max_abs(proj * a * q) > tol * std::max(1.0, max_abs(a))) return false;
        return true;
    };

    // candidate vectors: eigenvectors of a random combination and of each matrix
    std::vector<Vec> cand;
    std::mt19937 gen(2024);
    std::normal_distribution<double> nd;
    Mat s = Mat::Zero(m, m);
    for (const auto& a : mats) s += cplx(nd(gen), nd(gen)) * a;
    std::vector<Mat> sources{s};
    for (const auto& a : mats) sources.push_back(a);
    for (const auto& src : sources) {
        Eigen::ComplexEigenSolver<Mat> es(src);
        if (es.info() != Eigen::Success) continue;
        for (int i = 0; i < m; ++i) cand.push_back(es.eigenvectors().col(i).normalized());
    }
    for (int i = 0; i < m; ++i) cand.push_back(Vec::Unit(m, i));

    const int c = static_cast<int>(cand.size());
    std::vector<int> pick(l);
    std::function<std::optional<Mat>(int, int)> rec = [&](int start, int depth) -> std::optional<Mat> {
        if (depth == l) {
            Mat b(m, l);
            for (int i = 0; i < l; ++i) b.col(i) = cand[pick[i]];
            Eigen::JacobiSVD<Mat> svd(b, Eigen::ComputeThinU);
            if (svd.singularValues()(l - 1) < 1e-6) return std::nullopt;
            Mat q = svd.matrixU();
            if (invariant(q)) return q;
            return std::nullopt;
        }
        for (int i = start; i < c; ++i) {
            pick[depth] = i;
            if (auto r = rec(i + 1, depth + 1)) return r;
        }
        return std::nullopt;
    };
    return rec(0, 0);
}

std::optional<Mat> invariant_subspace(const MonodromyData& d, int l, double tol) {
    return common_invariant_subspace(d.monodromies, l, tol);
}

std::vector<ScalarMonodromy> scalar_monodromy_indices(const MonodromyData& d, double tol) {
    std::vector<ScalarMonodromy> out;
    for (int k = 0; k < static_cast<int>(d.monodromies.size()); ++k) {
        const Mat& mk = d.monodromies[k];
        const cplx mu = mk.trace() / double(d.m);
        if (max_abs(mk - mu * Mat::Identity(d.m, d.m)) < tol * std::max(1.0, std::abs(mu))) {
            bool ok = std::abs(std::pow(mu, d.m) - mk.determinant()) < 10 * tol;
            if (k < static_cast<int>(d.local.size()) && d.local[k].lambda.size() == d.m) {
                const cplx e = std::exp(cplx(0, 2 * M_PI) * d.local[k].lambda.sum());
                ok = ok && std::abs(std::pow(mu, d.m) - e) < 10 * tol;
            }
            out.push_back({k, mu, ok});
        }
    }
    return out;
}

}  // namespace fuchsian
