#pragma once

#include "fuchsian/core.hpp"
#include "fuchsian/levelt.hpp"

namespace fuchsian {

struct DeformationState {
    FuchsianSystem system;
    Mat psi1, psi2;
    double position = 0.0;
};

// Movable singularity of the solution: the residues blew up before the target.
struct BlowUpError : NumericError {
    cplx location;
    BlowUpError(const std::string& what, cplx where) : NumericError(what), location(where) {}
};

// d[i][j] = ∂A_i/∂u_j
std::vector<std::vector<Mat>> schlesinger_rhs(const FuchsianSystem& sys);

cplx hamiltonian(const FuchsianSystem& sys, int k);

// State whose Ψ_1, Ψ_2 come from the Levelt recursion with free slots at zero.
DeformationState initial_state(const FuchsianSystem& sys, const LeveltOptions& opt = {});

// Moves pole `moving` along path.vertices (first vertex = current position;
// empty path = straight segment) to u_target.
DeformationState integrate_schlesinger(const DeformationState& state, int moving, cplx u_target,
                                       const PathSpec& path, const ToleranceConfig& tol);

// All poles move linearly from the current positions to `targets`.
DeformationState integrate_schlesinger_all(const DeformationState& state,
                                           const std::vector<cplx>& targets,
                                           const ToleranceConfig& tol);

struct PsiPair {
    Mat psi1, psi2;
    double consistency = 0.0;  // largest mismatch in the determined slots
};

// Carries the reference along the straight path to sys.poles, then fixes the
// free slots of the recursion from the transported Ψ_1, Ψ_2.
PsiPair isomonodromic_psi(const FuchsianSystem& sys, const DeformationState& reference,
                          const ToleranceConfig& tol);

}  // namespace fuchsian
