#pragma once

#include <vector>

#include "ehlearn/operators.hpp"

namespace ehlearn {

/// Dense Hermitian unit-trace operator on a subsystem basis.
class DensityMatrix {
  public:
    DensityMatrix(BasisPtr basis, MatXcd rho);

    const BasisPtr& basis() const { return basis_; }
    const MatXcd& matrix() const { return rho_; }
    std::size_t dim() const { return rho_.rows(); }

    /// trace = 1 (1e-10), Hermitian (1e-12), eigenvalues >= -1e-10
    void validate() const;

  private:
    BasisPtr basis_;
    MatXcd rho_;
};

/// Induced subsystem lattice (local indices follow the sorted site list,
/// coordinates inherited from the parent lattice) and its full Fock / full
/// spin basis.
struct SubsystemSpace {
    std::vector<int> sites;  // sorted global site indices
    BasisPtr basis;
    int local_of(int global_site) const;
};

SubsystemSpace make_subsystem_space(const LatticeGraph& lattice,
                                    std::vector<int> sites, ModelKind kind);

/// Reduced density matrix of a pure state on a sector basis. Fermionic signs
/// are tracked through the mode-reordering permutation.
DensityMatrix partial_trace(const VecXcd& psi, const SectorBasis& full,
                            const std::vector<int>& subsystem_sites);

/// Reduced density matrix of a (small) dense state.
DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& subsystem_sites);

}  // namespace ehlearn
