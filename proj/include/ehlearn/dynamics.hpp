#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ehlearn/density.hpp"
#include "ehlearn/operators.hpp"

namespace ehlearn {

/// Hermitian observables sharing one subsystem basis.
struct ObservableSet {
    std::vector<std::string> labels;
    std::vector<LocalOperator> ops;

    std::size_t size() const { return ops.size(); }
    void validate() const;
    /// per-observable eigenvalue spread (single-shot variance bound)
    std::vector<double> spreads() const;
};

struct MeasurementRecord {
    double t = 0.0;
    std::string label;
    double truth = 0.0;
    double estimate = 0.0;
    long shots = 0;
};

enum class NoiseModel { None, Projective, Gaussian };

/// Exact propagator e^{-iHt} from one eigendecomposition of H, done per
/// charge block when H conserves charge (subsystem blocks are tiny, which is
/// what makes the repeated cost evaluations of the learning loop affordable).
/// Falls back to a single dense block for charge-mixing Hamiltonians.
class Propagator {
  public:
    explicit Propagator(const LocalOperator& h);

    const BasisPtr& basis() const { return basis_; }
    DensityMatrix evolve(const DensityMatrix& rho, double t) const;
    VecXcd evolve_state(const VecXcd& psi, double t) const;

    /// Exact expectations Tr[rho(t) O]; result(i_time, i_op).
    Eigen::MatrixXd expectations(const DensityMatrix& rho0, const ObservableSet& obs,
                                 const std::vector<double>& times) const;

    /// largest |eigenvalue| of H
    double spectral_radius() const;

  private:
    struct Block {
        std::vector<int> idx;
        Eigen::VectorXd evals;
        MatXcd evecs;
    };
    BasisPtr basis_;
    std::vector<Block> blocks_;
};

double expectation(const DensityMatrix& rho, const LocalOperator& o);

MeasurementRecord simulate_measurement(const DensityMatrix& rho, const LocalOperator& o,
                                       const std::string& label, double t, long shots,
                                       NoiseModel model, std::uint64_t seed);

}  // namespace ehlearn
