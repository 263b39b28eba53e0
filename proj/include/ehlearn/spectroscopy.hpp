#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ehlearn/density.hpp"
#include "ehlearn/models.hpp"
#include "ehlearn/qvl.hpp"

namespace ehlearn {

/// sum_j (-1)^(jx+jy) sigma^z_j over all sites of a spin basis.
LocalOperator staggered_magnetization(const BasisPtr& basis);

/// Uniform sampling times t_i = i * dt, i = 0 .. n_samples-1.
struct TimeGrid {
    double dt = 0.0;
    int n_samples = 0;

    double t_max() const { return dt * n_samples; }
    std::vector<double> times() const;
    void validate() const;  // dt > 0, n_samples >= 2
};

/// dt such that the full spectral range of h is sampled with at least
/// points_per_period points per period, rounded so n_samples * dt = t_max.
TimeGrid auto_time_grid(const LocalOperator& h, double t_max,
                        int points_per_period = 8);

struct SpectroscopyRun {
    double eps = 0.0;
    long shots = 0;  // <= 0: exact expectation values
    std::uint64_t seed = 0;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<double> signal;
    std::vector<std::string> warnings;
};

/// Evolve rho under h_eh + eps * h_pert and record the observable signal
/// f(t) = <obs>_t, with independent per-point Gaussian shot noise of variance
/// Var_t(obs) / shots. A grid too coarse for the spectral range of the
/// evolution generator attaches an aliasing warning.
SpectroscopyRun spectroscopy_signal(const DensityMatrix& rho,
                                    const LocalOperator& h_eh,
                                    const LocalOperator& h_pert, double eps,
                                    const LocalOperator& obs, const TimeGrid& grid,
                                    long shots, std::uint64_t seed);
/// Staggered-magnetization convenience overload.
SpectroscopyRun spectroscopy_signal(const DensityMatrix& rho,
                                    const LocalOperator& h_eh,
                                    const LocalOperator& h_pert, double eps,
                                    const TimeGrid& grid, long shots,
                                    std::uint64_t seed);

struct Peak {
    double nu = 0.0;
    double height = 0.0;
    double width = 0.0;  // full width at half height
};

struct SpectrumPeaks {
    double d_nu = 0.0;    // bin spacing pi / t_max
    Eigen::VectorXd nu;   // nu_k = pi k / t_max
    Eigen::VectorXd amp;  // type-II DCT magnitudes of the mean-subtracted signal
    std::vector<Peak> peaks;  // descending height

    void validate() const;  // peaks on the grid, inside the Nyquist range
};

/// Deterministic DCT of the signal plus peak detection: local maxima above
/// 5x the median amplitude, ringing suppressed by a 2-bin minimum separation,
/// positions refined to sub-bin accuracy by parabolic interpolation.
SpectrumPeaks dct_spectrum(const SpectroscopyRun& run);

struct PeakTrack {
    std::vector<double> eps;  // perturbation strengths where the peak was seen
    std::vector<double> nu;   // matched peak positions
    std::vector<double> heights;  // matched peak heights
    double height = 0.0;      // height at the smallest eps
    double nu0 = 0.0;         // polynomial extrapolation to eps = 0
    double residual = 0.0;    // rms fit residual
};

struct ExtrapolationResult {
    double resolution = 0.0;  // DCT bin spacing pi / t_max
    std::vector<PeakTrack> tracks;  // descending height
    std::vector<std::string> warnings;

    /// number of tracks extrapolating to within tol of nu
    int degeneracy(double nu, double tol) const;
};

/// Match peaks across the eps grid by nearest-frequency continuation and fit
/// nu(eps) per track (quadratic, degree-limited by the number of matched
/// points). Requires >= 3 eps values; ambiguous matches (two candidate peaks
/// within one bin) are reported as warnings listing both assignments.
ExtrapolationResult extract_and_extrapolate(const std::vector<double>& eps_list,
                                            const std::vector<SpectrumPeaks>& spectra);

struct SpectroscopyConfig {
    std::vector<double> eps_list{0.02, 0.035, 0.05};  // units of J_perp
    double t_max = 1000.0;
    long shots = 5000;
    int points_per_period = 8;
    std::uint64_t seed = 0;
};

struct LambdaPoint {
    double lambda = 0.0;
    bool ok = false;
    std::string error;
    Eigen::VectorXd g_eh;  // learned absolute EH coefficients
    std::vector<SpectrumPeaks> spectra;  // one per eps
    ExtrapolationResult extrapolation;
};

struct LadderSweepConfig {
    int length = 6;
    double j_par = 0.25;
    double j_perp = 1.0;
    SpectroscopyConfig spec;
    /// The EH is the noiseless relative-entropy optimum (the QVL asymptote)
    /// unless use_qvl is set, in which case the shot-noise optimizer runs and
    /// its direction is rescaled by the fidelity-maximizing beta.
    bool use_qvl = false;
    ProtocolConfig qvl;
};

/// Per lambda: ladder ground state, half-cut reduced state, EH learning,
/// perturbed-evolution spectroscopy over the eps grid, extrapolation.
/// Failures are isolated per lambda (ok = false, error filled).
std::vector<LambdaPoint> lambda_sweep(const std::vector<double>& lambdas,
                                      const LadderSweepConfig& cfg);

}  // namespace ehlearn
