#pragma once

#include <string>
#include <vector>

#include "ehlearn/density.hpp"
#include "ehlearn/dynamics.hpp"
#include "ehlearn/models.hpp"
#include "ehlearn/rng.hpp"

namespace ehlearn {

/// Current-density composite constraints O^(n,s,s') =
/// i(c^dag_{n s} c_{n+1 s} - h.c.) n_{n+-2, s'}, both offsets where they fit.
/// Requires at least 4 contiguous sites.
ObservableSet build_constraint_observables(const BasisPtr& sub_basis);

/// Diagonal replacement used by the rank-deficiency sanity check: densities
/// instead of currents (all constraints commute with any diagonal ansatz).
ObservableSet build_density_constraint_observables(const BasisPtr& sub_basis);

/// M_jn = i <[h_j, O_n]>_rho, optionally with per-entry Gaussian noise of
/// variance Var_rho(i[h_j, O_n]) / N_M.
struct ConstraintMatrix {
    Eigen::MatrixXd m;  // terms x observables
    std::vector<std::string> row_labels, col_labels;
    long n_m = 0;  // 0 = noiseless

    /// column count >= row count (determined system)
    void validate() const;
};

ConstraintMatrix build_constraint_matrix(const DensityMatrix& rho,
                                         const AnsatzSpec& ansatz,
                                         const ObservableSet& obs, long n_m,
                                         Rng* rng);

struct ClResult {
    Eigen::VectorXd g_cl;  // unit norm, first nonzero component positive
    Eigen::VectorXd singular_values;  // descending
    std::vector<std::string> warnings;
};

/// Classical Hamiltonian learning: smallest left singular vector of the
/// constraint matrix. n_m <= 0 runs noiselessly; the noiseless matrix must
/// have exactly one small singular value (the EH ray), otherwise a warning is
/// attached. Two smallest singular values within 1e-12 of each other flag a
/// degenerate recovery.
ClResult cl_learn(const DensityMatrix& rho, const AnsatzSpec& ansatz,
                  const ObservableSet& obs, long n_m, Rng& rng);

/// Component of v orthogonal to the span of the given directions.
Eigen::VectorXd project_out(const Eigen::VectorXd& v,
                            const std::vector<Eigen::VectorXd>& directions);
/// Angle between rays (sign-insensitive), in radians.
double angle_between(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace ehlearn
