#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ehlearn/direct.hpp"
#include "ehlearn/dynamics.hpp"
#include "ehlearn/models.hpp"

namespace ehlearn {

struct ProtocolConfig {
    long budget_total = 60000;   // experimental runs for the whole optimization
    long shots_per_eval = 300;   // runs consumed by one cost evaluation
    int n_times = 5;             // observation times in (0, t_max]
    double t_max = 2.0;
    NoiseModel noise = NoiseModel::Projective;
    std::uint64_t seed = 0;
    int repeats = 1;

    std::vector<double> times() const;  // excludes t = 0
    long evals() const { return std::max(1L, budget_total / std::max(1L, shots_per_eval)); }
};

/// Measured cost C(g) = sum_{O,t} (<O>_t - <O>_0)^2 with simulated shot noise.
/// One instance per (rho_A, observables); precomputes the per-charge-block
/// eigendecompositions of the observables so repeated evaluations stay cheap.
class CostEvaluator {
  public:
    CostEvaluator(AnsatzSpec ansatz, DensityMatrix rho, ObservableSet obs,
                  std::vector<double> times, long shots_per_eval, NoiseModel noise,
                  std::uint64_t seed);
    ~CostEvaluator();
    CostEvaluator(CostEvaluator&&) noexcept;

    /// evaluate at a full parameter vector; advances the iteration counter
    double cost(const Eigen::VectorXd& g_full);
    /// records of the most recent evaluation
    const std::vector<MeasurementRecord>& last_records() const;
    long evaluations() const;
    long shots_per_measurement() const;
    const AnsatzSpec& ansatz() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper around CostEvaluator.
std::pair<double, std::vector<MeasurementRecord>> cost_function(
    const AnsatzSpec& ansatz, const Eigen::VectorXd& g, const DensityMatrix& rho,
    const ObservableSet& obs, const std::vector<double>& times, long shots_per_eval,
    NoiseModel noise, std::uint64_t seed);

struct QvlResult {
    Eigen::VectorXd g_opt;  // full parameter vector, fixed entry included
    OptimizationTrace trace;
    double final_cost = 0.0;
    long shots_used = 0;
    std::vector<std::string> warnings;
};

/// Double occupancy on every subsystem site plus up/down tunneling elements
/// on every subsystem bond.
ObservableSet default_hubbard_observables(const BasisPtr& sub_basis);

/// Bond energies on every subsystem edge plus per-site sigma^z.
ObservableSet default_heisenberg_observables(const BasisPtr& sub_basis);

/// Optimize the ansatz against a prepared subsystem state.
QvlResult run_qvl(const DensityMatrix& rho_A, const AnsatzSpec& ansatz,
                  const ObservableSet& obs, const ProtocolConfig& cfg);
/// Full protocol: ground state of the total system, partial trace, optimize.
QvlResult run_qvl(const LocalOperator& h_full, const std::vector<int>& subsystem,
                  const AnsatzSpec& ansatz, const ObservableSet& obs,
                  const ProtocolConfig& cfg);

/// Appendix-A ansatz diagnosability: (i) linear independence of the pairwise
/// commutators C_jk = [h_j, h_k], (ii) connectedness of the graph with edges
/// where C_jk != 0.
struct LearnabilityReport {
    std::vector<std::pair<int, int>> nonzero_pairs;
    int rank = 0;
    bool independent = false;
    bool connected = false;
    std::vector<std::vector<int>> components;
    /// always {beta, c}; plus each supplied symmetry generator commuting with
    /// the whole ansatz span (its chemical potential stays free)
    std::vector<std::string> undetermined_constants;

    bool unique_up_to_constants() const { return independent && connected; }
};

LearnabilityReport check_learnability(
    const AnsatzSpec& ansatz,
    const std::vector<std::pair<std::string, LocalOperator>>& symmetry_generators = {});

}  // namespace ehlearn
