#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ehlearn/operators.hpp"

namespace ehlearn {

/// Fermi-Hubbard couplings, H = -J sum_<jk>,s (c^dag c + h.c.) + U sum n_up n_dn
/// - mu sum_js n_js. Ladders use J for horizontal and J_perp for vertical bonds.
struct HubbardParams {
    double J = 1.0;
    double J_perp = 1.0;
    double U = 0.0;
    double mu = 0.0;
};

/// Heisenberg ladder couplings, bond strength by tag: J_par (horizontal),
/// sqrt(1-lambda)*J_perp (vertical), lambda*J_perp (diagonal).
struct HeisenbergParams {
    double J_par = 1.0;
    double J_perp = 1.0;
    double lambda = 0.0;
};

/// Variational ansatz H_var(g) = sum_j g_j h_j with per-parameter bounds and
/// an optional parameter pinned to a fixed value (removes the trivial overall
/// scale from the search).
struct AnsatzSpec {
    std::vector<std::string> labels;
    std::vector<LocalOperator> terms;
    std::vector<std::pair<double, double>> bounds;  // (lower, upper] per term
    int fixed_index = -1;
    double fixed_value = 1.0;

    std::size_t size() const { return terms.size(); }
    void validate() const;
};

LocalOperator build_hubbard(const BasisPtr& basis, const HubbardParams& p);

/// Site-centered local terms h_j of the Hubbard Hamiltonian: half-bond
/// hoppings (J/2 per adjacent bond inside the lattice), U double occupancy and
/// -mu density. Summing all terms reproduces build_hubbard exactly.
std::vector<LocalOperator> build_local_terms(const BasisPtr& basis,
                                             const HubbardParams& p);

/// Commuting all-density terms n_j_up + n_j_dn, one per site. Deliberately
/// unable to express an EH with off-diagonal structure.
std::vector<LocalOperator> build_density_terms(const BasisPtr& basis);

/// Heisenberg ladder Hamiltonian plus its bond-term decomposition. Bonds whose
/// interpolated coupling vanishes (diagonals at lambda=0, verticals at
/// lambda=1) are absent from the decomposition.
std::pair<LocalOperator, std::vector<LocalOperator>> build_heisenberg_ladder(
    const BasisPtr& basis, const HeisenbergParams& p);

LocalOperator deformed_hamiltonian(const std::vector<LocalOperator>& terms,
                                   const Eigen::VectorXd& g);
/// Bounds-checked variant; g covers all terms including the fixed one.
LocalOperator deformed_hamiltonian(const AnsatzSpec& ansatz, const Eigen::VectorXd& g);

/// Site-centered ansatz with bounds (0, 10] and g at `fixed_index` pinned to 1.
AnsatzSpec make_site_ansatz(std::vector<LocalOperator> terms,
                            std::vector<std::string> labels, int fixed_index);

/// H' = sum_i B_i . sigma_i on the given sites (full spin space only).
LocalOperator perturbation_field(
    const BasisPtr& basis,
    const std::vector<std::pair<int, std::array<double, 3>>>& site_fields);

}  // namespace ehlearn
