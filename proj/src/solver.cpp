#include "ehlearn/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace ehlearn {

void EntanglementSpectrum::validate() const {
    for (int i = 1; i < xi.size(); ++i)
        if (xi(i) < xi(i - 1)) throw std::logic_error("spectrum: not ascending");
    if (std::abs(probs().sum() - 1.0) > 1e-8)
        throw std::logic_error("spectrum: Schmidt probabilities do not sum to 1");
    if (!sectors.empty() && static_cast<int>(sectors.size()) != xi.size())
        throw std::logic_error("spectrum: one sector label per level required");
}

GroundStateResult ground_state(const LocalOperator& h, unsigned seed) {
    if (h.hermiticity_defect() > 1e-10)
        throw std::invalid_argument("ground_state: Hamiltonian not Hermitian");
    const std::size_t n = h.dim();
    const SpMat& m = h.matrix();

    GroundStateResult out;
    if (n == 1) {
        out.energy = m.coeff(0, 0).real();
        out.psi = VecXcd::Ones(1);
        return out;
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    VecXcd v(n);
    for (std::size_t i = 0; i < n; ++i) v(i) = cd(g(rng), g(rng));
    v.normalize();

    const int max_iter = static_cast<int>(std::min<std::size_t>(n, 500));
    std::vector<VecXcd> basis;
    std::vector<double> alpha, beta;
    basis.push_back(v);

    Eigen::VectorXd theta;
    Eigen::MatrixXd s;
    double scale = 1.0;
    for (int k = 0; k < max_iter; ++k) {
        VecXcd w = m * basis[k];
        alpha.push_back((basis[k].adjoint() * w)(0).real());
        // full reorthogonalization keeps ghost eigenvalues away
        for (const VecXcd& u : basis) w -= (u.adjoint() * w)(0) * u;
        for (const VecXcd& u : basis) w -= (u.adjoint() * w)(0) * u;
        const double b = w.norm();

        const int kk = k + 1;
        Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(kk, kk);
        for (int i = 0; i < kk; ++i) tri(i, i) = alpha[i];
        for (int i = 0; i + 1 < kk; ++i) tri(i, i + 1) = tri(i + 1, i) = beta[i];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
        theta = es.eigenvalues();
        s = es.eigenvectors();
        scale = std::max(std::abs(theta(0)), std::abs(theta(kk - 1)));
        if (scale == 0.0) scale = 1.0;

        const double resid_est = b * std::abs(s(kk - 1, 0));
        if (resid_est < 1e-10 * scale || b < 1e-13 * scale ||
            kk == static_cast<int>(n))
            break;
        beta.push_back(b);
        basis.push_back(w / b);
    }

    VecXcd psi = VecXcd::Zero(n);
    for (std::size_t i = 0; i < basis.size(); ++i) psi += s(i, 0) * basis[i];
    psi.normalize();
    out.energy = theta(0);
    out.residual = (m * psi - theta(0) * psi).norm();
    if (out.residual > 1e-9 * scale)
        throw std::runtime_error("ground_state: no convergence after " +
                                 std::to_string(basis.size()) +
                                 " iterations, residual " +
                                 std::to_string(out.residual));
    out.degenerate = theta.size() > 1 && theta(1) - theta(0) < 1e-9 * scale;

    // phase convention: largest-magnitude amplitude real positive
    Eigen::Index imax;
    psi.cwiseAbs().maxCoeff(&imax);
    psi *= std::conj(psi(imax)) / std::abs(psi(imax));
    out.psi = std::move(psi);
    return out;
}

namespace {

Charge dominant_sector(const SectorBasis& basis, const VecXcd& vec) {
    const auto& blocks = basis.charge_blocks();
    Charge best{};
    double best_w = -1.0;
    for (const auto& [q, idx] : blocks) {
        double w = 0.0;
        for (int i : idx) w += std::norm(vec(i));
        if (w > best_w) {
            best_w = w;
            best = q;
        }
    }
    return best;
}

}  // namespace

EntanglementSpectrum spectrum_of_density(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<MatXcd> es(rho.matrix());
    const auto& p = es.eigenvalues();
    std::vector<std::pair<double, int>> kept;
    for (int i = 0; i < p.size(); ++i)
        if (p(i) > 1e-14) kept.push_back({-std::log(p(i)), i});
    std::sort(kept.begin(), kept.end());

    EntanglementSpectrum out;
    out.xi.resize(kept.size());
    out.sectors.reserve(kept.size());
    for (std::size_t a = 0; a < kept.size(); ++a) {
        out.xi(a) = kept[a].first;
        out.sectors.push_back(
            dominant_sector(*rho.basis(), es.eigenvectors().col(kept[a].second)));
    }
    out.validate();
    return out;
}

EntanglementSpectrum exact_entanglement_spectrum(const VecXcd& psi,
                                                 const SectorBasis& full,
                                                 const std::vector<int>& subsystem) {
    return spectrum_of_density(partial_trace(psi, full, subsystem));
}

namespace {

/// Per-charge-block dense copies of a sparse operator, scattered in one pass.
struct BlockPartition {
    bool mixes = false;
    std::vector<MatXcd> dense;  // one per charge block
};

BlockPartition partition_blocks(const LocalOperator& h) {
    const auto& blocks = h.basis()->charge_blocks();
    std::vector<int> block_of(h.dim()), pos(h.dim());
    BlockPartition out;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto& idx = blocks[b].second;
        for (std::size_t p = 0; p < idx.size(); ++p) {
            block_of[idx[p]] = static_cast<int>(b);
            pos[idx[p]] = static_cast<int>(p);
        }
        out.dense.push_back(MatXcd::Zero(idx.size(), idx.size()));
    }
    for (int k = 0; k < h.matrix().outerSize(); ++k)
        for (SpMat::InnerIterator it(h.matrix(), k); it; ++it) {
            if (block_of[it.row()] != block_of[it.col()]) {
                if (std::abs(it.value()) > 1e-12) out.mixes = true;
                continue;
            }
            out.dense[block_of[it.row()]](pos[it.row()], pos[it.col()]) = it.value();
        }
    return out;
}

}  // namespace

std::vector<std::pair<Charge, Eigen::VectorXd>> sector_eigenvalues(
    const LocalOperator& h) {
    if (h.hermiticity_defect() > 1e-10)
        throw std::invalid_argument("sector_eigenvalues: operator not Hermitian");
    BlockPartition part = partition_blocks(h);
    if (part.mixes)
        throw std::logic_error("sector_eigenvalues: operator mixes charges");
    const auto& blocks = h.basis()->charge_blocks();
    std::vector<std::pair<Charge, Eigen::VectorXd>> out;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        Eigen::SelfAdjointEigenSolver<MatXcd> es(part.dense[b],
                                                 Eigen::EigenvaluesOnly);
        out.push_back({blocks[b].first, es.eigenvalues()});
    }
    return out;
}

std::vector<SectorEigensystem> sector_eigensystems(const LocalOperator& h) {
    if (h.hermiticity_defect() > 1e-10)
        throw std::invalid_argument("sector_eigensystems: operator not Hermitian");
    BlockPartition part = partition_blocks(h);
    std::vector<SectorEigensystem> out;
    if (part.mixes) {
        SectorEigensystem e;
        e.idx.resize(h.dim());
        for (std::size_t i = 0; i < h.dim(); ++i) e.idx[i] = static_cast<int>(i);
        Eigen::SelfAdjointEigenSolver<MatXcd> es(h.dense());
        e.evals = es.eigenvalues();
        e.evecs = es.eigenvectors();
        out.push_back(std::move(e));
        return out;
    }
    const auto& blocks = h.basis()->charge_blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        Eigen::SelfAdjointEigenSolver<MatXcd> es(part.dense[b]);
        SectorEigensystem e;
        e.charge = blocks[b].first;
        e.charge_resolved = true;
        e.idx = blocks[b].second;
        e.evals = es.eigenvalues();
        e.evecs = es.eigenvectors();
        out.push_back(std::move(e));
    }
    return out;
}

Eigen::VectorXd universal_ratios(const Eigen::VectorXd& xi, int a0, int a1) {
    if (a0 < 0 || a1 < 0 || a0 >= xi.size() || a1 >= xi.size() || a0 == a1)
        throw std::invalid_argument("universal_ratios: bad level indices");
    const double denom = xi(a1) - xi(a0);
    if (std::abs(denom) < 1e-9)
        throw std::invalid_argument(
            "universal_ratios: reference levels degenerate; pick a nondegenerate "
            "alpha_1 (e.g. via lowest_distinct_pair)");
    return (xi.array() - xi(a0)) / denom;
}

std::pair<int, int> lowest_distinct_pair(const Eigen::VectorXd& xi, double tol) {
    for (int i = 1; i < xi.size(); ++i)
        if (xi(i) - xi(0) > tol) return {0, i};
    throw std::invalid_argument("lowest_distinct_pair: spectrum fully degenerate");
}

}  // namespace ehlearn
