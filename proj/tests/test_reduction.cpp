#include "closed_forms.hpp"
#include "fuchsian/flow.hpp"
#include "fuchsian/monodromy.hpp"
#include "fuchsian/reduction.hpp"
#include "helpers.hpp"

#include <doctest.h>

using namespace fuchsian;
using namespace testing_helpers;
using Kind = ElementaryGauge::Kind;

namespace {

const ToleranceConfig kTol{};

Mat diag(std::initializer_list<cplx> v) {
    Vec d(static_cast<int>(v.size()));
    int i = 0;
    for (auto x : v) d(i++) = x;
    return d.asDiagonal();
}

FuchsianSystem two_pole() {
    Mat a1 = mat2(0.1, 0.3, 0.2, -0.25), a2 = mat2(-0.35, -0.3, -0.2, 0.45);
    return build_system({0.0, cplx(1.0, 0.2)}, {a1, a2});
}

double worst_det(const GaugeChain& c) {
    double r = 0;
    for (const auto& g : c.steps) r = std::max(r, gauge_det_residual(g));
    return r;
}

LeveltExpansion b_frame_with_slot(double x, int order) {
    const double s = std::sqrt(x), L = std::log((s + 1) / (s - 1));
    LeveltOptions o;
    o.overrides[{1, 0, 1}] = s / (x - 1) + L / 2;
    return levelt_at_infinity(closed_forms::b_system(x), order, o);
}

}  // namespace

TEST_SUITE("reduction") {

TEST_CASE("ordering for a subspace") {
    Vec a(2);
    a << -0.5, 0.5;
    CHECK(order_for_subspace(a, Vec::Unit(2, 0)) == std::vector<int>{0, 1});
    a << 0.5, -0.5;
    CHECK(order_for_subspace(a, Vec::Unit(2, 1)) == std::vector<int>{1, 0});
    Vec b(3);
    b << 0.3, 0.7, -1.0;
    Mat w = Mat::Zero(3, 2);
    w(0, 0) = 1.0, w(1, 1) = 1.0;
    CHECK(order_for_subspace(b, w) == std::vector<int>{1, 0, 2});
    // brute force over the six permutations for the stated rule
    int valid = 0;
    std::vector<int> p = {0, 1, 2};
    do {
        const bool in = (p[0] < 2 && p[1] < 2);
        if (in && b(p[0]).real() >= b(p[1]).real()) ++valid;
    } while (std::next_permutation(p.begin(), p.end()));
    CHECK(valid == 1);
    Mat skew = Mat::Zero(3, 1);
    skew(0, 0) = 1.0, skew(2, 0) = 1.0;
    CHECK_THROWS_AS(order_for_subspace(b, skew.normalized()), ValidationError);
}

TEST_CASE("down-shift of the triangular family gives the corrected family") {
    const auto e = b_frame_with_slot(4.0, 2);
    const auto r = elementary_down_shift(closed_forms::b_system(4.0), e.psi[1], e.psi[2]);
    CHECK(max_abs(residue_at_infinity(r.system) - diag({-0.5, 0.5})) < 1e-13);
    CHECK(diagonal_conjugation_distance(r.system.residues, closed_forms::a_corrected(4.0).residues) < 1e-10);
    CHECK(gauge_det_residual(r.gauge) < 1e-10);
}

TEST_CASE("up-shift of the corrected family gives the triangular family") {
    // Ψ of the corrected family from the shifted series of the triangular one
    const auto e = b_frame_with_slot(4.0, 6);
    const auto down = elementary_down_shift(closed_forms::b_system(4.0), e.psi[1], e.psi[2]);
    const auto psi = shift_psi_series(e.psi, down.gauge);
    REQUIRE(psi.size() >= 3);
    const auto up = elementary_up_shift(down.system, psi[1], psi[2]);
    CHECK(max_abs(residue_at_infinity(up.system) - diag({0.5, -0.5})) < 1e-12);
    CHECK(max_dev(up.system, closed_forms::b_system(4.0)) < 1e-10);
    cplx t0 = 0, t1 = 0;
    for (int k = 0; k < 3; ++k) t0 += down.system.residues[k].trace(), t1 += up.system.residues[k].trace();
    CHECK(std::abs(t0 - t1) < 1e-13);
    for (cplx z : {cplx(2, 0), cplx(3, 1), cplx(-5, 0)})
        CHECK(std::abs(up.gauge.matrix_at(z).determinant() - 1.0) < 1e-10);
}

TEST_CASE("down after up on a generic system returns the input") {
    for (unsigned seed : {1u, 2u, 3u}) {
        const auto s = generic_2x2(seed, 3);
        const auto e = levelt_at_infinity(s, 6);
        const auto up = elementary_up_shift(s, e.psi[1], e.psi[2]);
        CHECK(max_abs(residue_at_infinity(up.system) - residue_at_infinity(s) - diag({1.0, -1.0})) < 1e-12);
        const auto psi = shift_psi_series(e.psi, up.gauge);
        const auto back = elementary_down_shift(up.system, psi[1], psi[2]);
        CHECK(diagonal_conjugation_distance(back.system.residues, s.residues) < 1e-8);
        CHECK(max_abs(residue_at_infinity(back.system) - residue_at_infinity(s)) < 1e-12);
    }
}

TEST_CASE("zero pivots are rejected") {
    const auto b = closed_forms::b_system(4.0);
    const auto e = levelt_at_infinity(b, 2);
    CHECK_THROWS_AS(elementary_up_shift(b, e.psi[1], e.psi[2]), ValidationError);
}

TEST_CASE("reducing the corrected family") {
    const auto r = reduce_reducible(closed_forms::a_corrected(4.0), std::nullopt, kTol);
    CHECK(r.N == 1);
    CHECK(r.split.l == 1);
    CHECK(r.prezero_norm < 1e-6);
    for (const auto& a : r.system.residues) CHECK(a(1, 0) == 0.0);
    CHECK(std::abs(r.chain.declared_shift(0) - 1.0) < 1e-14);
    CHECK(std::abs(r.chain.declared_shift(1) + 1.0) < 1e-14);
    CHECK(worst_det(r.chain) < 1e-10);
    CHECK(diagonal_conjugation_distance(r.system.residues, closed_forms::b_system(4.0).residues) < 1e-8);
    const auto w = monodromy_equivalent(connection_matrices(closed_forms::a_corrected(4.0), {}, kTol),
                                        connection_matrices(r.system, {}, kTol), 1e-6);
    REQUIRE(w);
    CHECK(std::abs(w->shift(0) - 1.0) < 1e-8);
    // the chain applied to its source reproduces the result
    CHECK(max_dev(apply_chain(closed_forms::a_corrected(4.0), r.chain), r.system) < 1e-12);
    CHECK(r.split.assemble().residues.size() == 3);
    CHECK(max_dev(r.split.assemble(), r.system) == 0.0);
}

TEST_CASE("already triangular input needs no shift") {
    const auto r = reduce_reducible(closed_forms::b_system(4.0), std::nullopt, kTol);
    CHECK(r.N == 0);
    for (const auto& g : r.chain.steps) CHECK_FALSE(g.is_shift());
    CHECK(max_dev(r.system, closed_forms::b_system(4.0)) < 1e-10);
}

TEST_CASE("a hidden triangular system is recovered") {
    std::mt19937 rng(5);
    const auto b = closed_forms::b_system(4.0);
    const Mat p = random_matrix(rng, 2, 1.0, 0.3) + 2.0 * Mat::Identity(2, 2);
    std::vector<Mat> hidden;
    for (const auto& a : b.residues) hidden.push_back(conjugate(a, p));
    const auto r = reduce_reducible(build_system(b.poles, hidden), std::nullopt, kTol);
    CHECK(r.N == 0);
    CHECK(r.prezero_norm < 1e-6);
    for (const auto& a : r.system.residues) CHECK(a(1, 0) == 0.0);
    for (int k = 0; k < 3; ++k) {
        const auto e0 = spectrum(b.residues[k]), e1 = spectrum(r.system.residues[k]);
        CHECK(std::abs(e0[0] - e1[0]) + std::abs(e0[1] - e1[1]) < 1e-10);
    }
}

TEST_CASE("an irreducible system is rejected") {
    CHECK_THROWS_AS(reduce_reducible(generic_2x2(3, 3), std::nullopt, kTol), ValidationError);
}

TEST_CASE("block Pfaffian right-hand side") {
    // all blocks zero except the couplings: C is constant
    BlockSplit z;
    z.l = 1;
    z.poles = {0.0, 1.0, 3.0};
    for (int k = 0; k < 3; ++k) {
        z.upper.push_back(Mat::Zero(1, 1));
        z.lower.push_back(Mat::Zero(1, 1));
        z.coupling.push_back(Mat::Constant(1, 1, k + 1.0));
    }
    for (const auto& row : block_pfaffian_rhs(z))
        for (const auto& d : row) CHECK(max_abs(d) == 0.0);

    // the triangular family: finite differences of the printed couplings
    auto split = [](double x) {
        const auto s = closed_forms::b_system(x);
        BlockSplit b;
        b.l = 1;
        b.poles = s.poles;
        for (const auto& a : s.residues) {
            b.upper.push_back(a.topLeftCorner(1, 1));
            b.lower.push_back(a.bottomRightCorner(1, 1));
            b.coupling.push_back(a.topRightCorner(1, 1));
        }
        return b;
    };
    const double h = 1e-5;
    const auto rhs = block_pfaffian_rhs(split(4.0));
    const auto hi = split(4.0 + h), lo = split(4.0 - h);
    for (int k = 0; k < 3; ++k) CHECK(max_abs((hi.coupling[k] - lo.coupling[k]) / (2 * h) - rhs[k][1]) < 1e-6);

    // agrees with the full vector field on the assembled triangular system
    const auto full = schlesinger_rhs(closed_forms::b_system(4.0));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(std::abs(full[i][j](0, 1) - rhs[i][j](0, 0)) < 1e-13);
}

TEST_CASE("attach then erase") {
    const auto s = two_pole();
    const auto at = attach_identity_singularity(s, cplx(0.4, -0.7), {1, -1}, kTol);
    REQUIRE(at.system.n() == 3);
    CHECK(max_abs(residue_at_infinity(at.system) - residue_at_infinity(s)) < 1e-9);
    const auto ev = spectrum(at.system.residues[2]);
    CHECK(std::abs(ev[0] - 1.0) < 1e-9);
    CHECK(std::abs(ev[1] + 1.0) < 1e-9);
    const auto d = monodromy_matrices(at.system, {}, kTol);
    CHECK(max_abs(d.monodromies[2] - Mat::Identity(2, 2)) < 1e-6);
    CHECK(worst_det(at.chain) < 1e-10);

    const auto er = erase_identity_singularity(at.system, 2, kTol);
    REQUIRE(er.system.n() == 2);
    CHECK(er.leftover < 1e-8);
    CHECK(diagonal_conjugation_distance(er.system.residues, s.residues) < 1e-7);
    CHECK(worst_det(er.chain) < 1e-10);

    const auto t0 = monodromy_matrices(s, {}, kTol), t1 = monodromy_matrices(er.system, {}, kTol);
    for (int k = 0; k < 2; ++k) {
        CHECK(std::abs(t0.monodromies[k].trace() - t1.monodromies[k].trace()) < 1e-5);
        CHECK(std::abs(t0.monodromies[k].trace() - d.monodromies[k].trace()) < 1e-5);
    }
}

TEST_CASE("attach onto a triangular system and larger exponents") {
    const auto b = closed_forms::b_system(4.0);
    const auto at = attach_identity_singularity(b, cplx(0.5, -1.5), {1, -1}, kTol);
    const auto d = monodromy_matrices(at.system, {}, kTol);
    CHECK(max_abs(d.monodromies[3] - Mat::Identity(2, 2)) < 1e-6);
    const auto er = erase_identity_singularity(at.system, 3, kTol);
    CHECK(diagonal_conjugation_distance(er.system.residues, b.residues) < 1e-7);

    const auto s = two_pole();
    const auto at2 = attach_identity_singularity(s, cplx(-0.6, 0.9), {2, -2}, kTol);
    const auto ev = spectrum(at2.system.residues[2]);
    CHECK(std::abs(ev[0] - 2.0) < 1e-8);
    const auto er2 = erase_identity_singularity(at2.system, 2, kTol);
    CHECK(diagonal_conjugation_distance(er2.system.residues, s.residues) < 1e-7);
}

TEST_CASE("trivial attach and erase") {
    const auto s = two_pole();
    const auto at = attach_identity_singularity(s, cplx(2.0, 2.0), {0, 0}, kTol);
    REQUIRE(at.system.n() == 3);
    CHECK(max_abs(at.system.residues[2]) < 1e-14);
    CHECK(max_dev(build_system(s.poles, {at.system.residues[0], at.system.residues[1]}), s) < 1e-13);
    const auto er = erase_identity_singularity(at.system, 2, kTol);
    REQUIRE(er.chain.steps.size() >= 2);
    CHECK(er.chain.steps.front().kind == Kind::Conformal);
    CHECK(max_dev(er.system, s) < 1e-12);
}

TEST_CASE("erase and attach preconditions") {
    const auto s = two_pole();
    CHECK_THROWS_AS(attach_identity_singularity(s, 0.0, {1, -1}, kTol), ValidationError);
    CHECK_THROWS_AS(attach_identity_singularity(s, 3.0, {1, 0}, kTol), ValidationError);
    CHECK_THROWS_AS(attach_identity_singularity(s, 3.0, {1, -1, 0}, kTol), ValidationError);
    CHECK_THROWS_AS(erase_identity_singularity(s, 0, kTol), ValidationError);
    CHECK_THROWS_AS(erase_identity_singularity(s, 5, kTol), ValidationError);
}

TEST_CASE("property: reduced output satisfies the deformation equations") {
    const double h = 1e-5;
    auto reduced = [&](double x) { return reduce_reducible(closed_forms::a_corrected(x), std::nullopt, kTol).system; };
    const auto mid = reduced(4.0), hi = reduced(4.0 + h), lo = reduced(4.0 - h);
    const auto rhs = schlesinger_rhs(mid);
    for (int k = 0; k < 3; ++k) CHECK(max_abs((hi.residues[k] - lo.residues[k]) / (2 * h) - rhs[k][1]) < 1e-5);
}

TEST_CASE("property: gauge chains keep monodromy traces up to the declared shift") {
    const auto s = random_system(41, {0.0, 1.0, cplx(0.5, 1.2)}, {0.27, -0.39});
    const auto at = attach_identity_singularity(s, cplx(-0.8, -0.6), {-1, 1}, kTol);
    const auto t0 = trace_invariants(monodromy_matrices(s, {}, kTol).monodromies);
    auto d1 = monodromy_matrices(at.system, {}, kTol);
    d1.monodromies.pop_back();
    const auto t1 = trace_invariants(d1.monodromies);
    for (size_t i = 0; i < t0.size(); ++i) CHECK(std::abs(t0[i] - t1[i]) < 1e-5);
}

}
