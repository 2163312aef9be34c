#pragma once

#include "fuchsian/core.hpp"
#include "fuchsian/levelt.hpp"
#include "fuchsian/monodromy.hpp"

#include <optional>
#include <string>

namespace fuchsian {

// One invertible step of a gauge chain.
//   Constant:  Φ = P Φ̃, residues P^-1 A P
//   UpShift:   Φ = (z E_11 + G) Φ̃
//   DownShift: Φ = (z E_mm + F) Φ̃
//   Conformal: ζ = 1/(z - c); the new pole list is [0, 1/(u_k - c)...] with A_inf at ζ = 0
//   ConformalInverse: back from the ζ-chart; the ζ = 0 pole becomes z = ∞ and the
//     residue at ζ = ∞ is either kept as a pole at c (inserted at `index`) or dropped
//   Projection: zero the lower-left (m-l)×l block of every residue
struct ElementaryGauge {
    enum class Kind { Constant, UpShift, DownShift, Conformal, ConformalInverse, Projection };
    Kind kind = Kind::Constant;
    Mat payload;
    cplx center = 0.0;
    int index = -1;          // removed pole (Conformal) / insertion slot (ConformalInverse)
    bool keep_center = false;
    int block = 0;           // l for Projection
    double norm = 0.0;       // mass removed by a Projection, or dropped residue norm
    std::string note;

    bool is_shift() const { return kind == Kind::UpShift || kind == Kind::DownShift; }
    // H(z) for shifts, P for constants
    Mat matrix_at(cplx z) const;
};

struct GaugeChain {
    std::vector<ElementaryGauge> steps;
    std::string source_fingerprint, target_fingerprint;
    // Λ_inf(target) = P^-1 Λ_inf(source) P + diag(shift)
    std::vector<int> declared_perm;
    Vec declared_shift;
};

struct BlockSplit {
    int l = 0;
    std::vector<cplx> poles;
    std::vector<Mat> upper, lower, coupling;
    FuchsianSystem assemble() const;
};

std::string fingerprint(const FuchsianSystem& sys);
FuchsianSystem apply_gauge(const FuchsianSystem& sys, const ElementaryGauge& g);
FuchsianSystem apply_chain(const FuchsianSystem& sys, const GaugeChain& chain);
// max |det H(z) - 1| over z ∈ {2, 3+i, -5}; zero for non-shift steps
double gauge_det_residual(const ElementaryGauge& g);

// perm[i] = old index placed at position i
std::vector<int> order_for_subspace(const Vec& a_inf, const Mat& subspace, double tol = 1e-8);

struct ShiftResult {
    FuchsianSystem system;
    ElementaryGauge gauge;
};
ShiftResult elementary_up_shift(const FuchsianSystem& sys, const Mat& psi1, const Mat& psi2);
ShiftResult elementary_down_shift(const FuchsianSystem& sys, const Mat& psi1, const Mat& psi2);

// Ψ̃ = H^-1 Ψ D for a shift step; the result is two orders shorter. Throws
// NumericError if the product loses the normalization Ψ̃ = 1 + O(1/z).
std::vector<Mat> shift_psi_series(const std::vector<Mat>& psi, const ElementaryGauge& g);

// Sum of the exponents carried by subspace W (columns) in a Levelt frame
// with exponents lambda, read off the valuation flag.
cplx flag_exponent_sum(const Vec& lambda, const Mat& w, double rank_tol = 1e-6);

struct Reduction {
    FuchsianSystem system;
    BlockSplit split;
    GaugeChain chain;
    int N = 0;
    double prezero_norm = 0.0;   // lower-left mass before the projection
    double alignment_norm = 0.0; // size of the C_0(Λ) correction used to align the subspace
};

// subspace: basis of the invariant subspace in the Φ_inf frame of the
// (diagonal-A_inf) input; nullopt searches l = 1..m-1.
Reduction reduce_reducible(const FuchsianSystem& sys, const std::optional<Mat>& subspace,
                           const ToleranceConfig& tol, const LoopBasis& basis = {});

// d[i][j] = ∂C_i/∂u_j
std::vector<std::vector<Mat>> block_pfaffian_rhs(const BlockSplit& split);

struct EraseResult {
    FuchsianSystem system;
    GaugeChain chain;
    double leftover = 0.0;  // residue left at the erased point before dropping it
};
EraseResult erase_identity_singularity(const FuchsianSystem& sys, int l, const ToleranceConfig& tol);

struct AttachResult {
    FuchsianSystem system;
    GaugeChain chain;
};
AttachResult attach_identity_singularity(const FuchsianSystem& sys, cplx u_new,
                                         const std::vector<int>& exponents,
                                         const ToleranceConfig& tol, const LoopBasis& basis = {});

}  // namespace fuchsian
