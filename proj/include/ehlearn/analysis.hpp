#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ehlearn/density.hpp"
#include "ehlearn/models.hpp"

namespace ehlearn {

struct FidelityResult {
    double fidelity = 0.0;
    double beta_star = 1.0;
};

/// Uhlmann fidelity between rho and the Gibbs family e^{-beta H}/Z(beta),
/// maximized over beta by golden-section search on log beta in [1e-3, 1e3].
FidelityResult uhlmann_fidelity(const LocalOperator& h_var, const DensityMatrix& rho);
FidelityResult uhlmann_fidelity(const AnsatzSpec& ansatz, const Eigen::VectorXd& g,
                                const DensityMatrix& rho);

/// F(rho, sigma) = [Tr sqrt(sqrt(rho) sigma sqrt(rho))]^2
double state_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

struct RelativeEntropyResult {
    Eigen::VectorXd g_re;  // absolute coefficients: H-tilde = sum_j g_re_j h_j + c
    double beta = 0.0;     // scale w.r.t. the ansatz convention (fixed g_j = fixed_value)
    double c = 0.0;        // normalization shift, log Tr e^{-sum g_re_j h_j}
    double s_min = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// S(rho || e^{-H(g)} / Z) = -S0 + Tr(rho H(g)) + log Tr e^{-H(g)}
double relative_entropy(const DensityMatrix& rho,
                        const std::vector<LocalOperator>& terms,
                        const Eigen::VectorXd& g);

/// Minimize the relative entropy over absolute coefficients with BFGS and the
/// analytic gradient dS/dg_j = Tr(rho h_j) - Tr(rho_var h_j). Converged means
/// max-norm gradient below 1e-7; a line-search failure returns the last
/// iterate with converged = false.
RelativeEntropyResult relative_entropy_minimize(const AnsatzSpec& ansatz,
                                                const DensityMatrix& rho,
                                                const Eigen::VectorXd& init);

/// Coefficient-convention conversions: unit norm (sum g^2 = 1) vs pinned entry.
Eigen::VectorXd to_unit_norm(const Eigen::VectorXd& g);
Eigen::VectorXd to_fixed_entry(const Eigen::VectorXd& g, int index, double value = 1.0);

struct SinFit {
    double q1 = 0.0, q2 = 0.0, q3 = 0.0, q4 = 0.0;  // q1 + q2 sin(q3 (x - q4))
    double residual = 0.0;
};

struct SizeFit {
    std::vector<int> sites;   // global site indices of the subsystem
    double a = 0.0, b = 0.0;  // -log(lambda^2) ~= a + b xi
    double residual = 0.0;
    Eigen::VectorXd g_norm;   // unit-norm EH direction
    Eigen::VectorXd g_abs;    // b * g_norm
    Eigen::VectorXd xi;       // <Phi_a|H(g_norm)|Phi_a>, Schmidt order
    SinFit ramp;
    double beta = 0.0;        // boundary slope of the fitted ramp
};

struct ScaleCalibration {
    double beta = 0.0;
    double c = 0.0;
    std::vector<std::pair<Charge, double>> mu;
    std::vector<SizeFit> fits;
    double beta_spread = 0.0;  // (max - min) / mean over sizes
    std::vector<std::string> warnings;

    /// beta > 0 and sum_a e^{-(b xi_a + c)} = 1 for the largest-size fit
    void validate() const;
};

/// Appendix-D calibration on the rightmost-`size` subsystems of a Hubbard
/// chain: per size, relative-entropy EH direction, linear Schmidt fit for the
/// absolute scale b, sin-fit of the resulting ramp, beta from its boundary
/// slope. Requires at least 4 Schmidt values above 1e-12 per size.
ScaleCalibration scale_from_schmidt_fit(const VecXcd& psi, const BasisPtr& full,
                                        const std::vector<int>& sizes,
                                        const HubbardParams& params);

/// mu_Q from e^{-mu_Q Q} = p_Q / p'_Q with Q the particle number measured from
/// round(<N>); the Q = 0 sector and sectors with p_Q < 1e-12 are skipped.
std::vector<std::pair<Charge, double>> sector_chemical_potentials(
    const DensityMatrix& rho,
    const std::vector<std::pair<Charge, Eigen::VectorXd>>& spectra,
    std::vector<std::string>* warnings = nullptr);

}  // namespace ehlearn
