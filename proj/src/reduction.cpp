#include "fuchsian/reduction.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <sstream>

namespace fuchsian {

Mat ElementaryGauge::matrix_at(cplx z) const {
    switch (kind) {
        case Kind::Constant:
            return payload;
        case Kind::UpShift: {
            Mat h = payload;
            h(0, 0) += z;
            return h;
        }
        case Kind::DownShift: {
            Mat h = payload;
            const auto m = h.rows();
            h(m - 1, m - 1) += z;
            return h;
        }
        default:
            throw ValidationError("gauge step has no matrix form");
    }
}

FuchsianSystem BlockSplit::assemble() const {
    const int a = upper.empty() ? 0 : static_cast<int>(upper.front().rows());
    const int b = lower.empty() ? 0 : static_cast<int>(lower.front().rows());
    FuchsianSystem s;
    s.m = a + b;
    s.poles = poles;
    for (size_t k = 0; k < poles.size(); ++k) {
        Mat r = Mat::Zero(a + b, a + b);
        r.topLeftCorner(a, a) = upper[k];
        r.bottomRightCorner(b, b) = lower[k];
        r.topRightCorner(a, b) = coupling[k];
        s.residues.push_back(r);
    }
    return s;
}

std::string fingerprint(const FuchsianSystem& sys) {
    // FNV-1a over the raw bits
    std::uint64_t h = 1469598103934665603ULL;
    auto feed = [&](const void* p, size_t len) {
        const auto* c = static_cast<const unsigned char*>(p);
        for (size_t i = 0; i < len; ++i) {
            h ^= c[i];
            h *= 1099511628211ULL;
        }
    };
    feed(&sys.m, sizeof sys.m);
    for (auto u : sys.poles) feed(&u, sizeof u);
    for (const auto& a : sys.residues) feed(a.data(), sizeof(cplx) * a.size());
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

FuchsianSystem apply_gauge(const FuchsianSystem& sys, const ElementaryGauge& g) {
    using K = ElementaryGauge::Kind;
    FuchsianSystem out = sys;
    const int m = sys.m;
    switch (g.kind) {
        case K::Constant: {
            auto lu = g.payload.partialPivLu();
            for (auto& a : out.residues) a = lu.solve(a * g.payload);
            return out;
        }
        case K::UpShift:
        case K::DownShift: {
            for (int k = 0; k < sys.n(); ++k) {
                const Mat h = g.matrix_at(sys.poles[k]);
                out.residues[k] = h.partialPivLu().solve(sys.residues[k] * h);
            }
            return out;
        }
        case K::Conformal: {
            out.poles = {0.0};
            out.residues = {residue_at_infinity(sys)};
            for (int k = 0; k < sys.n(); ++k) {
                if (k == g.index) continue;
                out.poles.push_back(1.0 / (sys.poles[k] - g.center));
                out.residues.push_back(sys.residues[k]);
            }
            return out;
        }
        case K::ConformalInverse: {
            if (sys.n() < 1 || sys.poles[0] != 0.0)
                throw ValidationError("ζ-chart system must carry its ζ = 0 pole first");
            const Mat at_inf = residue_at_infinity(sys);
            out.poles.clear();
            out.residues.clear();
            for (int k = 1; k < sys.n(); ++k) {
                out.poles.push_back(g.center + 1.0 / sys.poles[k]);
                out.residues.push_back(sys.residues[k]);
            }
            if (g.keep_center) {
                const int at = g.index < 0 ? out.n() : std::min(g.index, out.n());
                out.poles.insert(out.poles.begin() + at, g.center);
                out.residues.insert(out.residues.begin() + at, at_inf);
            }
            return out;
        }
        case K::Projection: {
            for (auto& a : out.residues) a.bottomLeftCorner(m - g.block, g.block).setZero();
            return out;
        }
    }
    return out;
}

FuchsianSystem apply_chain(const FuchsianSystem& sys, const GaugeChain& chain) {
    FuchsianSystem s = sys;
    for (const auto& g : chain.steps) s = apply_gauge(s, g);
    return s;
}

double gauge_det_residual(const ElementaryGauge& g) {
    if (!g.is_shift()) return 0.0;
    double worst = 0;
    for (cplx z : {cplx(2, 0), cplx(3, 1), cplx(-5, 0)})
        worst = std::max(worst, std::abs(g.matrix_at(z).determinant() - 1.0));
    return worst;
}

std::vector<int> order_for_subspace(const Vec& a_inf, const Mat& subspace, double tol) {
    const int m = static_cast<int>(a_inf.size());
    const int l = static_cast<int>(subspace.cols());
    if (subspace.rows() != m || l <= 0 || l >= m) throw ValidationError("subspace has the wrong shape");
    Eigen::JacobiSVD<Mat> svd(subspace, Eigen::ComputeThinU);
    const Mat q = svd.matrixU();
    std::vector<int> in, out;
    for (int i = 0; i < m; ++i) {
        // distance of e_i from the subspace
        const double d = (Vec::Unit(m, i) - q * q.row(i).adjoint()).norm();
        (d < std::sqrt(tol) ? in : out).push_back(i);
    }
    if (static_cast<int>(in.size()) != l)
        throw ValidationError("subspace is not spanned by coordinate vectors; it cannot be aligned by a permutation");
    auto by_re = [&](int a, int b) { return exponent_order(a_inf(a), a_inf(b)); };
    std::stable_sort(in.begin(), in.end(), by_re);
    std::stable_sort(out.begin(), out.end(), by_re);
    in.insert(in.end(), out.begin(), out.end());
    return in;
}

namespace {

double pivot_floor(const Mat& psi1) { return 1e-12 * std::max(1.0, max_abs(psi1)); }

}  // namespace

ShiftResult elementary_up_shift(const FuchsianSystem& sys, const Mat& p1, const Mat& p2) {
    const int m = sys.m;
    const int L = m - 1;
    if (std::abs(p1(L, 0)) < pivot_floor(p1))
        throw ValidationError("up-shift pivot Ψ1(m,1) vanishes");
    Mat g = Mat::Zero(m, m);
    g(L, 0) = p1(L, 0);
    g(0, L) = -1.0 / g(L, 0);
    for (int p = 1; p < L; ++p) {
        g(p, p) = 1.0;
        g(0, p) = p1(L, p) * g(0, L);
        g(p, 0) = p1(p, 0);
    }
    g(0, 0) = g(0, L) * p2(L, 0) + p1(0, 0);
    ElementaryGauge e;
    e.kind = ElementaryGauge::Kind::UpShift;
    e.payload = g;
    return {apply_gauge(sys, e), e};
}

ShiftResult elementary_down_shift(const FuchsianSystem& sys, const Mat& p1, const Mat& p2) {
    const int m = sys.m;
    const int L = m - 1;
    if (std::abs(p1(0, L)) < pivot_floor(p1))
        throw ValidationError("down-shift pivot Ψ1(1,m) vanishes");
    Mat f = Mat::Zero(m, m);
    f(0, L) = p1(0, L);
    f(L, 0) = -1.0 / f(0, L);
    for (int p = 1; p < L; ++p) {
        f(p, p) = 1.0;
        f(L, p) = p1(0, p) * f(L, 0);
        f(p, L) = p1(p, L);
    }
    f(L, L) = f(L, 0) * p2(0, L) + p1(L, L);
    ElementaryGauge e;
    e.kind = ElementaryGauge::Kind::DownShift;
    e.payload = f;
    return {apply_gauge(sys, e), e};
}

std::vector<Mat> shift_psi_series(const std::vector<Mat>& psi, const ElementaryGauge& g) {
    if (!g.is_shift()) throw ValidationError("series shift needs a shift step");
    const int N = static_cast<int>(psi.size()) - 1;
    if (N < 3) throw ValidationError("series too short to shift");
    const int m = static_cast<int>(psi[0].rows());
    const int L = m - 1;
    const bool up = g.kind == ElementaryGauge::Kind::UpShift;
    // H^-1 is linear in z: K0 + z K1
    const Mat k0 = g.matrix_at(0.0).inverse();
    const Mat k1 = g.matrix_at(1.0).inverse() - k0;
    auto P = [&](int k) -> Mat { return (k >= 0 && k <= N) ? psi[k] : Mat::Zero(m, m); };
    // Y = Ψ D, D = diag(z, 1, .., 1/z) for the up-shift and its inverse for the down-shift
    auto Y = [&](int k) -> Mat {
        Mat y = P(k);
        if (up) {
            y.col(0) = P(k + 1).col(0);
            y.col(L) = P(k - 1).col(L);
        } else {
            y.col(0) = P(k - 1).col(0);
            y.col(L) = P(k + 1).col(L);
        }
        return y;
    };
    auto T = [&](int k) -> Mat { return k0 * Y(k) + k1 * Y(k + 1); };
    const double dev = std::max({max_abs(T(-2)), max_abs(T(-1)), max_abs(T(0) - Mat::Identity(m, m))});
    const double scale = std::max(1.0, max_abs(g.payload)) * std::max(1.0, max_abs(psi[1]));
    if (dev > 1e-8 * scale * scale)
        throw NumericError("shifted series lost its normalization at infinity (deviation " +
                           std::to_string(dev) + ")");
    std::vector<Mat> out(N - 1);
    out[0] = Mat::Identity(m, m);
    for (int k = 1; k <= N - 2; ++k) out[k] = T(k);
    return out;
}

cplx flag_exponent_sum(const Vec& lambda, const Mat& w, double rank_tol) {
    const int m = static_cast<int>(lambda.size());
    const int l = static_cast<int>(w.cols());
    std::vector<int> ord(m);
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(), [&](int a, int b) { return exponent_order(lambda(a), lambda(b)); });
    Mat wn = w;
    for (int c = 0; c < l; ++c) wn.col(c).normalize();
    auto rank = [&](const Mat& a) {
        if (a.rows() == 0) return 0;
        Eigen::JacobiSVD<Mat> svd(a);
        int r = 0;
        for (int i = 0; i < svd.singularValues().size(); ++i)
            if (svd.singularValues()(i) > rank_tol) ++r;
        return r;
    };
    cplx sum = 0.0;
    int prev = 0;
    for (int j = 1; j <= m; ++j) {
        // rows outside span(e_ord[0..j-1])
        Mat rest(m - j, l);
        for (int r = j; r < m; ++r) rest.row(r - j) = wn.row(ord[r]);
        const int dim = l - rank(rest);
        if (dim > prev) sum += double(dim - prev) * lambda(ord[j - 1]);
        prev = dim;
    }
    return sum;
}

namespace {

using Kind = ElementaryGauge::Kind;

ElementaryGauge constant_step(const Mat& p, std::string note) {
    ElementaryGauge g;
    g.kind = Kind::Constant;
    g.payload = p;
    g.note = std::move(note);
    return g;
}

std::vector<Mat> permute_series(const std::vector<Mat>& psi, const std::vector<int>& perm) {
    const Mat p = permutation_matrix(perm);
    std::vector<Mat> out;
    for (const auto& s : psi) out.push_back(p.transpose() * s * p);
    return out;
}

bool is_identity_perm(const std::vector<int>& perm) {
    for (size_t i = 0; i < perm.size(); ++i)
        if (perm[i] != static_cast<int>(i)) return false;
    return true;
}

// Columns: echelon basis of X, pivot rows last in descending-Re order.
struct Echelon {
    Mat basis;
    std::vector<int> pivot_rows;
};

Echelon echelon_from_bottom(const Vec& lambda, const Mat& x, double tol) {
    const int m = static_cast<int>(x.rows()), l = static_cast<int>(x.cols());
    std::vector<int> ord(m);
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(), [&](int a, int b) { return exponent_order(lambda(a), lambda(b)); });
    Mat b = x;
    for (int c = 0; c < l; ++c) b.col(c).normalize();
    std::vector<bool> used(l, false);
    Echelon e;
    e.basis = Mat::Zero(m, l);
    std::vector<int> col_of_pivot;
    for (int pos = m - 1; pos >= 0; --pos) {
        const int r = ord[pos];
        int best = -1;
        double bv = tol;
        for (int c = 0; c < l; ++c)
            if (!used[c] && std::abs(b(r, c)) > bv) {
                bv = std::abs(b(r, c));
                best = c;
            }
        if (best < 0) continue;
        used[best] = true;
        b.col(best) /= b(r, best);
        for (int c = 0; c < l; ++c)
            if (c != best) b.col(c) -= b(r, c) * b.col(best);
        e.pivot_rows.push_back(r);
        col_of_pivot.push_back(best);
    }
    if (static_cast<int>(e.pivot_rows.size()) != l) throw NumericError("subspace basis is rank deficient");
    for (int s = 0; s < l; ++s) e.basis.col(s) = b.col(col_of_pivot[s]);
    // clean the numerically zero tails
    for (int s = 0; s < l; ++s)
        for (int i = 0; i < m; ++i)
            if (std::abs(e.basis(i, s)) < tol) e.basis(i, s) = 0.0;
    return e;
}

}  // namespace

Reduction reduce_reducible(const FuchsianSystem& input, const std::optional<Mat>& subspace,
                           const ToleranceConfig& tol, const LoopBasis& basis) {
    tol.validate();
    const int m = input.m;
    Reduction red;
    GaugeChain& chain = red.chain;
    chain.source_fingerprint = fingerprint(input);
    FuchsianSystem sys = input;

    // A_inf must be diagonal for the Levelt frame at infinity
    {
        Mat ainf = residue_at_infinity(sys);
        Mat off = ainf;
        off.diagonal().setZero();
        if (max_abs(off) > 1e-10 * std::max(1.0, max_abs(ainf))) {
            if (subspace) throw ValidationError("explicit subspace needs a system with diagonal A_inf");
            Eigen::ComplexEigenSolver<Mat> es(ainf);
            std::vector<int> idx(m);
            std::iota(idx.begin(), idx.end(), 0);
            std::sort(idx.begin(), idx.end(), [&](int a, int b) {
                return exponent_order(es.eigenvalues()(a), es.eigenvalues()(b));
            });
            Mat t(m, m);
            for (int i = 0; i < m; ++i) t.col(i) = es.eigenvectors().col(idx[i]);
            auto g = constant_step(t, "diagonalize A_inf");
            sys = apply_gauge(sys, g);
            chain.steps.push_back(g);
        }
    }
    const Vec lambda0 = residue_at_infinity(sys).diagonal();

    // monodromy in the default Φ_inf frame
    const auto data = connection_matrices(sys, basis, tol);
    Mat x;
    if (subspace) {
        if (subspace->rows() != m || subspace->cols() < 1 || subspace->cols() >= m)
            throw ValidationError("subspace must be an m×l basis with 0 < l < m");
        x = *subspace;
        for (const auto& mk : data.monodromies) {
            Eigen::JacobiSVD<Mat> svd(x, Eigen::ComputeThinU);
            const Mat q = svd.matrixU();
            if (max_abs((Mat::Identity(m, m) - q * q.adjoint()) * mk * q) > 1e-6 * std::max(1.0, max_abs(mk)))
                throw ValidationError("given subspace is not invariant under the monodromy");
        }
    } else {
        std::optional<Mat> found;
        for (int l = 1; l < m && !found; ++l) found = invariant_subspace(data, l, 1e-6);
        if (!found) throw ValidationError("monodromy is irreducible: no invariant subspace");
        x = *found;
    }
    const int l = static_cast<int>(x.cols());

    // exponent sum of the invariant subspace over all singular points
    cplx total = flag_exponent_sum(lambda0, x);
    for (int k = 0; k < sys.n(); ++k) total += flag_exponent_sum(data.local[k].lambda, data.connections[k] * x);
    const double nr = std::round(-total.real());
    if (std::abs(-total - nr) > std::max(tol.resonance_eps, 1e-6) || nr < 0)
        throw ValidationError("subspace exponent sum " + std::to_string(total.real()) +
                              " is not a non-positive integer");
    red.N = static_cast<int>(nr);

    // Levelt frame at infinity, then a C_0(Λ) change of frame making X a coordinate subspace
    const int order = std::max(tol.series_order, 6) + 2 * red.N + 2;
    LeveltOptions lopt;
    lopt.resonance_eps = tol.resonance_eps;
    const auto einf = levelt_at_infinity(sys, order, lopt);
    auto ech = echelon_from_bottom(lambda0, x, 1e-7);
    Mat g = Mat::Identity(m, m);
    for (int s = 0; s < l; ++s) {
        const int r = ech.pivot_rows[s];
        for (int a = 0; a < m; ++a) {
            if (a == r || ech.basis(a, s) == 0.0) continue;
            const cplx gap = lambda0(a) - lambda0(r);
            const double k = std::round(gap.real());
            if (std::abs(gap - k) > tol.resonance_eps || k < 1)
                throw ValidationError("invariant subspace cannot be aligned within the Levelt frame at infinity");
            g(a, r) = ech.basis(a, s);
        }
    }
    red.alignment_norm = max_abs(g - Mat::Identity(m, m));
    std::vector<Mat> psi = einf.psi;
    if (red.alignment_norm > 0) {
        // Ψ' = Ψ Σ G_k z^-k with G_k the part of G at exponent gap k
        std::vector<Mat> gk(order + 1, Mat::Zero(m, m));
        gk[0] = Mat::Identity(m, m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                if (a != b && g(a, b) != 0.0) {
                    const int k = static_cast<int>(std::round((lambda0(a) - lambda0(b)).real()));
                    if (k <= order) gk[k](a, b) = g(a, b);
                }
        std::vector<Mat> np(order + 1, Mat::Zero(m, m));
        for (int j = 0; j <= order; ++j)
            for (int k = 0; k <= j; ++k) np[j] += psi[j - k] * gk[k];
        psi = np;
    }
    Mat coords = Mat::Zero(m, l);
    for (int s = 0; s < l; ++s) coords(ech.pivot_rows[s], s) = 1.0;

    // order the coordinates, then N up-shifts
    std::vector<int> net(m);
    std::iota(net.begin(), net.end(), 0);
    auto reorder = [&](const Mat& sub) {
        const Vec lam = residue_at_infinity(sys).diagonal();
        const auto perm = order_for_subspace(lam, sub, 1e-8);
        if (is_identity_perm(perm)) return;
        auto step = constant_step(permutation_matrix(perm), "order exponents for the subspace");
        sys = apply_gauge(sys, step);
        psi = permute_series(psi, perm);
        std::vector<int> nn(m);
        for (int i = 0; i < m; ++i) nn[i] = net[perm[i]];
        net = nn;
        chain.steps.push_back(step);
    };
    reorder(coords);
    Mat first = Mat::Zero(m, l);
    for (int s = 0; s < l; ++s) first(s, s) = 1.0;
    for (int i = 0; i < red.N; ++i) {
        if (i > 0) reorder(first);
        auto res = elementary_up_shift(sys, psi[1], psi[2]);
        res.gauge.note = "up-shift " + std::to_string(i + 1) + " of " + std::to_string(red.N);
        psi = shift_psi_series(psi, res.gauge);
        sys = res.system;
        chain.steps.push_back(res.gauge);
    }

    // block-triangular form; constant correction if the corner did not vanish
    auto corner = [&](const FuchsianSystem& s) {
        double c = 0;
        for (const auto& a : s.residues) c = std::max(c, max_abs(a.bottomLeftCorner(m - l, l)));
        return c;
    };
    red.prezero_norm = corner(sys);
    if (red.prezero_norm > 1e-6) {
        auto v = common_invariant_subspace(sys.residues, l, 1e-6);
        if (!v) throw NumericError("reduced residues share no invariant subspace");
        Eigen::HouseholderQR<Mat> qr(*v);
        const Mat q = qr.householderQ() * Mat::Identity(m, m);
        auto step = constant_step(q, "triangularizing conjugation");
        sys = apply_gauge(sys, step);
        chain.steps.push_back(step);
        red.prezero_norm = corner(sys);
        if (red.prezero_norm > 1e-6)
            throw NumericError("lower-left block does not vanish after the reduction");
    }
    ElementaryGauge proj;
    proj.kind = Kind::Projection;
    proj.block = l;
    proj.norm = red.prezero_norm;
    proj.note = "zero the lower-left block";
    sys = apply_gauge(sys, proj);
    chain.steps.push_back(proj);

    const Vec lam_end = residue_at_infinity(sys).diagonal();
    chain.declared_perm = net;
    chain.declared_shift = Vec(m);
    for (int i = 0; i < m; ++i) {
        const cplx s = lam_end(i) - lambda0(net[i]);
        chain.declared_shift(i) = std::round(s.real());
    }
    chain.target_fingerprint = fingerprint(sys);

    red.system = sys;
    red.split.l = l;
    red.split.poles = sys.poles;
    for (const auto& a : sys.residues) {
        red.split.upper.push_back(a.topLeftCorner(l, l));
        red.split.lower.push_back(a.bottomRightCorner(m - l, m - l));
        red.split.coupling.push_back(a.topRightCorner(l, m - l));
    }
    return red;
}

std::vector<std::vector<Mat>> block_pfaffian_rhs(const BlockSplit& split) {
    const int n = static_cast<int>(split.poles.size());
    std::vector<std::vector<Mat>> d(n, std::vector<Mat>(n));
    for (int i = 0; i < n; ++i) d[i][i] = Mat::Zero(split.coupling[i].rows(), split.coupling[i].cols());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            d[i][j] = (split.upper[i] * split.coupling[j] - split.upper[j] * split.coupling[i] +
                       split.coupling[i] * split.lower[j] - split.coupling[j] * split.lower[i]) /
                      (split.poles[i] - split.poles[j]);
            d[i][i] -= d[i][j];
        }
    return d;
}

namespace {

// Drives the exponents at ζ = ∞ of a ζ-chart system to `target` by shifts
// (with permutations), appending the steps and accumulating W(0).
void drive_exponents(FuchsianSystem& zsys, Vec target, GaugeChain& chain, Mat& w0,
                     const ToleranceConfig& tol) {
    const int m = zsys.m;
    LeveltOptions lopt;
    lopt.resonance_eps = tol.resonance_eps;
    lopt.allow_repeated = true;
    for (int guard = 0; guard < 64; ++guard) {
        const Vec lam = residue_at_infinity(zsys).diagonal();
        std::vector<int> low, high;
        for (int i = 0; i < m; ++i) {
            const double d = (lam(i) - target(i)).real();
            if (d < -0.5) low.push_back(i);
            if (d > 0.5) high.push_back(i);
        }
        if (low.empty() && high.empty()) return;
        if (low.empty() || high.empty()) throw ValidationError("exponent targets do not balance");
        const auto e = levelt_at_infinity(zsys, 4, lopt);
        if (max_abs(e.pair.R()) > 1e-7)
            throw ValidationError("local monodromy at the singular point is not trivial (R ≠ 0)");
        bool done = false;
        for (int i : low) {
            for (int j : high) {
                // up-shift: i first, j last; down-shift: j first, i last
                for (int up = 1; up >= 0 && !done; --up) {
                    std::vector<int> perm;
                    perm.push_back(up ? i : j);
                    for (int k = 0; k < m; ++k)
                        if (k != i && k != j) perm.push_back(k);
                    perm.push_back(up ? j : i);
                    auto psi = permute_series(e.psi, perm);
                    const double piv = up ? std::abs(psi[1](m - 1, 0)) : std::abs(psi[1](0, m - 1));
                    if (piv < 1e-10 * std::max(1.0, max_abs(psi[1]))) continue;
                    FuchsianSystem s = zsys;
                    if (!is_identity_perm(perm)) {
                        auto step = constant_step(permutation_matrix(perm), "pivot permutation");
                        s = apply_gauge(s, step);
                        chain.steps.push_back(step);
                        w0 = w0 * step.payload;
                    }
                    auto res = up ? elementary_up_shift(s, psi[1], psi[2]) : elementary_down_shift(s, psi[1], psi[2]);
                    res.gauge.note = up ? "up-shift at ζ = ∞" : "down-shift at ζ = ∞";
                    chain.steps.push_back(res.gauge);
                    w0 = w0 * res.gauge.matrix_at(0.0);
                    zsys = res.system;
                    // undo the permutation on the exponent bookkeeping: the target follows the frame
                    Vec t(m);
                    for (int k = 0; k < m; ++k) t(k) = target(perm[k]);
                    target = t;
                    done = true;
                }
                if (done) break;
            }
            if (done) break;
        }
        if (!done) throw NumericError("no nonzero shift pivot available");
    }
    throw NumericError("exponent shifting did not terminate");
}

}  // namespace

EraseResult erase_identity_singularity(const FuchsianSystem& sys, int l, const ToleranceConfig& tol) {
    tol.validate();
    if (l < 0 || l >= sys.n()) throw ValidationError("pole index out of range");
    if (sys.n() < 2) throw ValidationError("cannot erase the only pole");
    const int m = sys.m;
    EraseResult out;
    GaugeChain& chain = out.chain;
    chain.source_fingerprint = fingerprint(sys);

    const auto loc = levelt_at_pole(sys, l, std::max(4, tol.series_order), {tol.resonance_eps, true, {}});
    const Vec& lam = loc.pair.lambda;
    const bool integral = (lam.array() - lam.array().real().round()).abs().maxCoeff() < 1e-7;
    const bool r_zero = max_abs(loc.pair.R()) < 1e-7;
    if (!integral || !r_zero) {
        const cplx mu = std::exp(cplx(0, 2 * M_PI) * lam(0));
        bool scalar = r_zero;
        for (int i = 1; i < m && scalar; ++i)
            scalar = std::abs(std::exp(cplx(0, 2 * M_PI) * lam(i)) - mu) < 1e-7;
        if (scalar)
            throw ValidationError("monodromy at this pole is scalar with μ ≠ 1; use the symmetry route (darboux S_k / S_inf) first");
        throw ValidationError("monodromy at this pole is not scalar; it cannot be erased");
    }
    if (std::abs(lam.sum()) > 1e-7)
        throw ValidationError("exponents at the pole do not sum to zero; a scalar gauge would be needed");

    ElementaryGauge conf;
    conf.kind = Kind::Conformal;
    conf.center = sys.poles[l];
    conf.index = l;
    conf.note = "ζ = 1/(z - u_l)";
    FuchsianSystem zsys = apply_gauge(sys, conf);
    chain.steps.push_back(conf);

    Mat w0 = Mat::Identity(m, m);
    if (max_abs(sys.residues[l]) > 0) {
        auto t = constant_step(loc.frame, "diagonalize the erased residue");
        zsys = apply_gauge(zsys, t);
        chain.steps.push_back(t);
        w0 = loc.frame;
        const Vec target = Vec::Zero(m);
        drive_exponents(zsys, target, chain, w0, tol);
    }

    ElementaryGauge inv;
    inv.kind = Kind::ConformalInverse;
    inv.center = sys.poles[l];
    inv.keep_center = false;
    inv.norm = max_abs(residue_at_infinity(zsys));
    inv.note = "back to z; the residue at u_l is dropped";
    out.leftover = inv.norm;
    FuchsianSystem z = apply_gauge(zsys, inv);
    chain.steps.push_back(inv);

    // S(∞) = 1: Φ_new = W(0) Φ̂
    auto fin = constant_step(w0.inverse(), "normalize at infinity");
    z = apply_gauge(z, fin);
    chain.steps.push_back(fin);
    if (out.leftover > 1e-6)
        throw NumericError("erased point keeps a residue of norm " + std::to_string(out.leftover));
    chain.declared_perm.resize(m);
    std::iota(chain.declared_perm.begin(), chain.declared_perm.end(), 0);
    chain.declared_shift = Vec::Zero(m);
    chain.target_fingerprint = fingerprint(z);
    out.system = z;
    return out;
}

AttachResult attach_identity_singularity(const FuchsianSystem& sys, cplx u_new,
                                         const std::vector<int>& exponents,
                                         const ToleranceConfig& tol, const LoopBasis& basis_in) {
    tol.validate();
    const int m = sys.m;
    if (static_cast<int>(exponents.size()) != m) throw ValidationError("need one exponent per row");
    if (std::accumulate(exponents.begin(), exponents.end(), 0) != 0)
        throw ValidationError("exponents must sum to zero");
    for (auto u : sys.poles)
        if (std::abs(u - u_new) <= tol.clearance_for(sys.poles))
            throw ValidationError("new pole coincides with an existing pole");
    AttachResult out;
    GaugeChain& chain = out.chain;
    chain.source_fingerprint = fingerprint(sys);
    chain.declared_perm.resize(m);
    std::iota(chain.declared_perm.begin(), chain.declared_perm.end(), 0);
    chain.declared_shift = Vec::Zero(m);

    const bool trivial = std::all_of(exponents.begin(), exponents.end(), [](int e) { return e == 0; });
    if (trivial) {
        ElementaryGauge conf;
        conf.kind = Kind::Conformal;
        conf.center = u_new;
        ElementaryGauge inv;
        inv.kind = Kind::ConformalInverse;
        inv.center = u_new;
        inv.keep_center = true;
        chain.steps = {conf, inv};
        out.system = apply_chain(sys, chain);
        chain.target_fingerprint = fingerprint(out.system);
        return out;
    }

    // Φ̂ = Φ(u_new)^-1 Φ with Φ the frame at infinity continued to u_new
    const LoopBasis basis = make_loop_basis(sys, basis_in);
    const auto einf = levelt_at_infinity(sys, tol.series_order, {tol.resonance_eps, false, {}});
    const cplx z0 = basepoint(sys, basis);
    const Mat phi0 = evaluate_levelt_log(einf, z0, basepoint_log(sys, basis));
    const cplx d = basis.cut_direction;
    const cplx w = u_new * std::conj(d);
    PathSpec path;
    path.vertices = {z0, cplx(-basis.basepoint_radius, w.imag()) * d, u_new};
    const Mat p = transport(sys, path, phi0, tol);

    auto c0 = constant_step(p, "normalize the frame at the new point");
    FuchsianSystem s = apply_gauge(sys, c0);
    chain.steps.push_back(c0);
    Mat w0 = p;

    ElementaryGauge conf;
    conf.kind = Kind::Conformal;
    conf.center = u_new;
    conf.note = "ζ = 1/(z - u_new)";
    FuchsianSystem zsys = apply_gauge(s, conf);
    chain.steps.push_back(conf);

    // the requested row order first, then the other orderings of the same exponents
    // (a reducible frame can make every pivot of one ordering vanish)
    std::vector<std::vector<int>> orders{exponents};
    auto sorted = exponents;
    std::sort(sorted.begin(), sorted.end());
    do
        if (sorted != exponents) orders.push_back(sorted);
    while (std::next_permutation(sorted.begin(), sorted.end()));
    const auto steps0 = chain.steps;
    const Mat w_start = w0;
    const FuchsianSystem z_start = zsys;
    for (size_t o = 0;; ++o) {
        Vec target(m);
        for (int i = 0; i < m; ++i) target(i) = double(orders[o][i]);
        try {
            drive_exponents(zsys, target, chain, w0, tol);
            break;
        } catch (const NumericError&) {
            if (o + 1 == orders.size()) throw;
            chain.steps = steps0;
            w0 = w_start;
            zsys = z_start;
        }
    }

    ElementaryGauge inv;
    inv.kind = Kind::ConformalInverse;
    inv.center = u_new;
    inv.keep_center = true;
    inv.index = sys.n();
    inv.note = "back to z; the new pole is appended";
    FuchsianSystem z = apply_gauge(zsys, inv);
    chain.steps.push_back(inv);
    auto fin = constant_step(w0.inverse(), "normalize at infinity");
    z = apply_gauge(z, fin);
    chain.steps.push_back(fin);
    chain.target_fingerprint = fingerprint(z);
    out.system = z;
    return out;
}

}  // namespace fuchsian
