#pragma once

#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ehlearn {

/// Every objective evaluation of an optimization run, in evaluation order.
struct OptimizationTrace {
    std::vector<Eigen::VectorXd> points;
    std::vector<double> costs;
    std::vector<long> shots_cum;
    std::vector<double> wall_seconds;

    std::size_t size() const { return costs.size(); }
    int best_index() const;
    /// shots nondecreasing; best-so-far cost nonincreasing by construction
    void validate() const;
};

struct DirectOptions {
    /// epsilon balance between global and local search in the
    /// potentially-optimal rectangle selection
    double eps = 1e-4;
    /// optional extra start point evaluated before the DIRECT grid (the
    /// protocol's random initial parameter vector); must lie inside bounds
    std::vector<Eigen::VectorXd> extra_points;
    long shots_per_eval = 0;  // bookkeeping only, recorded in the trace
};

/// DIviding RECTangles global minimizer on a box. Deterministic; terminates
/// on budget exhaustion only.
std::pair<Eigen::VectorXd, OptimizationTrace> direct_optimize(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const std::vector<std::pair<double, double>>& bounds, long eval_budget,
    const DirectOptions& options = {});

}  // namespace ehlearn
