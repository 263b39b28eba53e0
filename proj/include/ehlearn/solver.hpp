#pragma once

#include <utility>
#include <vector>

#include "ehlearn/density.hpp"
#include "ehlearn/operators.hpp"

namespace ehlearn {

/// Entanglement spectrum xi_alpha = -ln(Schmidt probability), ascending, with
/// the charge sector of each level.
struct EntanglementSpectrum {
    Eigen::VectorXd xi;
    std::vector<Charge> sectors;

    Eigen::VectorXd probs() const { return (-xi.array()).exp(); }
    /// entanglement entropy S0 = sum xi e^{-xi}
    double entropy() const { return (xi.array() * (-xi.array()).exp()).sum(); }
    /// ascending order; probabilities sum to 1 within 1e-8
    void validate() const;
};

struct GroundStateResult {
    double energy = 0.0;
    VecXcd psi;
    double residual = 0.0;
    /// two lowest Ritz values within 1e-9 * |H|; paper experiments pick
    /// sectors with a unique ground state, so this flags a misconfiguration
    bool degenerate = false;
};

/// Lowest eigenpair via Lanczos with full reorthogonalization. Deterministic:
/// seeded start vector, largest-magnitude amplitude rotated real positive.
GroundStateResult ground_state(const LocalOperator& h, unsigned seed = 0);

EntanglementSpectrum exact_entanglement_spectrum(const VecXcd& psi,
                                                 const SectorBasis& full,
                                                 const std::vector<int>& subsystem);
EntanglementSpectrum spectrum_of_density(const DensityMatrix& rho);

/// Eigenvalues of a charge-conserving Hermitian operator, one ascending list
/// per charge block. Throws if off-block entries exceed 1e-12.
std::vector<std::pair<Charge, Eigen::VectorXd>> sector_eigenvalues(
    const LocalOperator& h);

/// Full eigensystem of a Hermitian operator, one entry per charge block (or a
/// single whole-space entry if the operator mixes charges).
struct SectorEigensystem {
    Charge charge;           // meaningful only when block-diagonal
    bool charge_resolved = false;
    std::vector<int> idx;    // basis indices of the block
    Eigen::VectorXd evals;
    MatXcd evecs;
};
std::vector<SectorEigensystem> sector_eigensystems(const LocalOperator& h);

/// kappa_alpha = (xi_alpha - xi_a0) / (xi_a1 - xi_a0)
Eigen::VectorXd universal_ratios(const Eigen::VectorXd& xi, int a0, int a1);
/// indices of the two lowest distinct levels (a0 = 0)
std::pair<int, int> lowest_distinct_pair(const Eigen::VectorXd& xi,
                                         double tol = 1e-9);

}  // namespace ehlearn
