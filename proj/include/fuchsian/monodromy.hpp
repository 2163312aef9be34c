#pragma once

#include "fuchsian/core.hpp"
#include "fuchsian/levelt.hpp"

#include <optional>

namespace fuchsian {

struct LoopBasis {
    cplx cut_direction = std::polar(1.0, 1.1);
    // 0 means "10 * max|u_k| + 1"
    double basepoint_radius = 0.0;
    // filled by make_loop_basis: poles in loop order
    std::vector<int> ordering;
};

struct LocalData {
    Vec lambda;
    Mat R;
};

struct MonodromyData {
    int m = 0;
    std::vector<LocalData> local;   // n entries for the poles, then one for infinity
    std::vector<Mat> connections;   // C_k, empty when not computed
    std::vector<Mat> monodromies;   // M_1 .. M_n
    Mat m_inf;                      // from closure
    std::vector<int> ordering;      // loop order used in the closure product
    double closure_residual = 0.0;  // |M_inf M_{σn} ... M_{σ1} - 1|
    double inf_check = 0.0;         // |M_inf - e^{2πiΛ} e^{2πiR}|
    double n4_residual = 0.0;       // max_k |M_k - C_k^-1 e^{2πiΛ} e^{2πiR} C_k|
    cplx basepoint = 0.0;
    Mat phi_base;                   // Φ_inf at the basepoint
};

// Fixes the loop ordering and base radius for a given system.
LoopBasis make_loop_basis(const FuchsianSystem& sys, LoopBasis basis = {});

// Polyline of the approach to pole k: basepoint, transverse move, segment
// parallel to the cut direction ending on the circle of radius r_k.
std::vector<cplx> approach_path(const FuchsianSystem& sys, const LoopBasis& basis, int k);
double loop_radius(const FuchsianSystem& sys, int k);
cplx basepoint(const FuchsianSystem& sys, const LoopBasis& basis);
// log z at the basepoint, on the branch cut along the cut direction
cplx basepoint_log(const FuchsianSystem& sys, const LoopBasis& basis);

Mat transport(const FuchsianSystem& sys, const PathSpec& path, const Mat& initial,
              const ToleranceConfig& tol);

// Parallel over loops when OpenMP is available.
MonodromyData monodromy_matrices(const FuchsianSystem& sys, const LoopBasis& basis,
                                 const ToleranceConfig& tol);
// Serial reference kept for tests and the benchmark.
MonodromyData monodromy_matrices_serial(const FuchsianSystem& sys, const LoopBasis& basis,
                                        const ToleranceConfig& tol);
MonodromyData connection_matrices(const FuchsianSystem& sys, const LoopBasis& basis,
                                  const ToleranceConfig& tol);

struct EquivalenceWitness {
    std::vector<int> perm;   // Λ_inf(d2) = P^-1 Λ_inf(d1) P + diag(shift)
    Vec shift;
    Mat conjugator;          // d2.M_k = W^-1 d1.M_k W
    double trace_residual = 0.0;
    double conjugacy_residual = 0.0;
};

std::optional<EquivalenceWitness> monodromy_equivalent(const MonodromyData& d1,
                                                       const MonodromyData& d2, double tol);

// Orthonormal m×l basis of a common invariant subspace, if any.
std::optional<Mat> invariant_subspace(const MonodromyData& d, int l, double tol);
std::optional<Mat> common_invariant_subspace(const std::vector<Mat>& mats, int l, double tol);

struct ScalarMonodromy {
    int index;
    cplx mu;
    bool consistent;  // μ^m equals det M_k = e^{2πi tr Λ}
};
std::vector<ScalarMonodromy> scalar_monodromy_indices(const MonodromyData& d, double tol);

// tr M_i, tr M_i M_j (i<j), tr M_i M_j M_k (i<j<k)
std::vector<cplx> trace_invariants(const std::vector<Mat>& ms);

}  // namespace fuchsian
