#include "ehlearn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "ehlearn/rng.hpp"

namespace ehlearn {

void ObservableSet::validate() const {
    if (ops.empty()) throw std::invalid_argument("observables: empty set");
    if (labels.size() != ops.size())
        throw std::invalid_argument("observables: one label per operator required");
    for (const auto& o : ops) {
        if (o.basis() != ops[0].basis())
            throw std::invalid_argument("observables: mixed bases");
        if (o.hermiticity_defect() > 1e-12)
            throw std::invalid_argument("observables: non-Hermitian entry");
    }
}

std::vector<double> ObservableSet::spreads() const {
    std::vector<double> out;
    for (const auto& o : ops) {
        Eigen::SelfAdjointEigenSolver<MatXcd> es(o.dense(), Eigen::EigenvaluesOnly);
        out.push_back(es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff());
    }
    return out;
}

Propagator::Propagator(const LocalOperator& h) : basis_(h.basis()) {
    if (h.hermiticity_defect() > 1e-10)
        throw std::invalid_argument("propagator: Hamiltonian not Hermitian");
    const SectorBasis& basis = *basis_;

    const auto& charge_blocks = basis.charge_blocks();
    std::vector<int> block_of(basis.dim());
    for (std::size_t b = 0; b < charge_blocks.size(); ++b)
        for (int i : charge_blocks[b].second) block_of[i] = static_cast<int>(b);
    bool mixes = false;
    for (int k = 0; k < h.matrix().outerSize() && !mixes; ++k)
        for (SpMat::InnerIterator it(h.matrix(), k); it; ++it)
            if (block_of[it.row()] != block_of[it.col()] && std::abs(it.value()) > 1e-12) {
                mixes = true;
                break;
            }

    std::vector<std::vector<int>> parts;
    if (mixes) {
        parts.emplace_back(basis.dim());
        for (std::size_t i = 0; i < basis.dim(); ++i) parts[0][i] = static_cast<int>(i);
    } else {
        for (const auto& [q, idx] : charge_blocks) parts.push_back(idx);
    }

    MatXcd dense = h.dense();
    for (auto& idx : parts) {
        Block blk;
        MatXcd sub(idx.size(), idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r)
            for (std::size_t c = 0; c < idx.size(); ++c)
                sub(r, c) = dense(idx[r], idx[c]);
        Eigen::SelfAdjointEigenSolver<MatXcd> es(sub);
        blk.idx = std::move(idx);
        blk.evals = es.eigenvalues();
        blk.evecs = es.eigenvectors();
        blocks_.push_back(std::move(blk));
    }
}

double Propagator::spectral_radius() const {
    double r = 0.0;
    for (const auto& b : blocks_)
        r = std::max({r, std::abs(b.evals.minCoeff()), std::abs(b.evals.maxCoeff())});
    return r;
}

namespace {

VecXcd block_phases(const Eigen::VectorXd& evals, double t) {
    return (cd(0, -1) * t * evals.array()).exp();
}

}  // namespace

VecXcd Propagator::evolve_state(const VecXcd& psi, double t) const {
    if (static_cast<std::size_t>(psi.size()) != basis_->dim())
        throw std::invalid_argument("propagator: state dimension mismatch");
    VecXcd out(psi.size());
    for (const auto& b : blocks_) {
        VecXcd sub(b.idx.size());
        for (std::size_t i = 0; i < b.idx.size(); ++i) sub(i) = psi(b.idx[i]);
        VecXcd evolved =
            b.evecs * (block_phases(b.evals, t).asDiagonal() * (b.evecs.adjoint() * sub));
        for (std::size_t i = 0; i < b.idx.size(); ++i) out(b.idx[i]) = evolved(i);
    }
    return out;
}

DensityMatrix Propagator::evolve(const DensityMatrix& rho, double t) const {
    if (rho.basis() != basis_)
        throw std::invalid_argument("propagator: density-matrix basis mismatch");
    // rho(t) = E rho E^dag applied blockwise on rows, then on columns
    MatXcd work = rho.matrix();
    for (const auto& b : blocks_) {
        MatXcd rows(b.idx.size(), work.cols());
        for (std::size_t i = 0; i < b.idx.size(); ++i) rows.row(i) = work.row(b.idx[i]);
        rows = b.evecs * (block_phases(b.evals, t).asDiagonal() * (b.evecs.adjoint() * rows));
        for (std::size_t i = 0; i < b.idx.size(); ++i) work.row(b.idx[i]) = rows.row(i);
    }
    for (const auto& b : blocks_) {
        MatXcd cols(work.rows(), b.idx.size());
        for (std::size_t i = 0; i < b.idx.size(); ++i) cols.col(i) = work.col(b.idx[i]);
        cols = ((cols * b.evecs) * block_phases(b.evals, t).conjugate().asDiagonal()) *
               b.evecs.adjoint();
        for (std::size_t i = 0; i < b.idx.size(); ++i) work.col(b.idx[i]) = cols.col(i);
    }
    return DensityMatrix(basis_, std::move(work));
}

Eigen::MatrixXd Propagator::expectations(const DensityMatrix& rho0,
                                         const ObservableSet& obs,
                                         const std::vector<double>& times) const {
    if (rho0.basis() != basis_)
        throw std::invalid_argument("propagator: density-matrix basis mismatch");
    obs.validate();
    if (obs.ops[0].basis() != basis_)
        throw std::invalid_argument("propagator: observable basis mismatch");

    // Tr[rho(t) O] = sum_{block pairs a,b} sum_{ij} e^{-i(la_i - lb_j)t} C^{ab}_{ij}
    // with C^{ab} = (Ua^dag rho_ab Ub) .* (Ub^dag O_ba Ua)^T
    struct PairTerm {
        int a, b, op;
        MatXcd c;
    };
    std::vector<PairTerm> terms;
    const MatXcd& rho = rho0.matrix();
    std::vector<MatXcd> op_dense;
    for (const auto& o : obs.ops) op_dense.push_back(o.dense());

    for (std::size_t a = 0; a < blocks_.size(); ++a) {
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            const auto& A = blocks_[a];
            const auto& B = blocks_[b];
            MatXcd rho_ab(A.idx.size(), B.idx.size());
            for (std::size_t r = 0; r < A.idx.size(); ++r)
                for (std::size_t c = 0; c < B.idx.size(); ++c)
                    rho_ab(r, c) = rho(A.idx[r], B.idx[c]);
            if (rho_ab.cwiseAbs().maxCoeff() < 1e-15) continue;
            MatXcd rho_t = A.evecs.adjoint() * rho_ab * B.evecs;
            for (std::size_t op = 0; op < obs.size(); ++op) {
                MatXcd o_ba(B.idx.size(), A.idx.size());
                for (std::size_t r = 0; r < B.idx.size(); ++r)
                    for (std::size_t c = 0; c < A.idx.size(); ++c)
                        o_ba(r, c) = op_dense[op](B.idx[r], A.idx[c]);
                if (o_ba.cwiseAbs().maxCoeff() < 1e-15) continue;
                MatXcd o_t = B.evecs.adjoint() * o_ba * A.evecs;
                terms.push_back({static_cast<int>(a), static_cast<int>(b),
                                 static_cast<int>(op),
                                 rho_t.array() * o_t.transpose().array()});
            }
        }
    }

    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(times.size(), obs.size());
    std::vector<VecXcd> phases(blocks_.size());
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        for (std::size_t b = 0; b < blocks_.size(); ++b)
            phases[b] = block_phases(blocks_[b].evals, times[ti]);
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(obs.size());
        for (const auto& term : terms)
            acc(term.op) +=
                (phases[term.a].transpose() * term.c * phases[term.b].conjugate())(0);
        if (acc.imag().cwiseAbs().maxCoeff() > 1e-8)
            throw std::logic_error("propagator: non-real expectation value");
        out.row(ti) = acc.real();
    }
    return out;
}

double expectation(const DensityMatrix& rho, const LocalOperator& o) {
    if (rho.basis() != o.basis())
        throw std::invalid_argument("expectation: basis mismatch");
    cd val = 0.0;
    const SpMat& m = o.matrix();
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it)
            val += it.value() * rho.matrix()(it.col(), it.row());
    if (std::abs(val.imag()) > 1e-8)
        throw std::logic_error("expectation: imaginary residual above 1e-8");
    return val.real();
}

MeasurementRecord simulate_measurement(const DensityMatrix& rho, const LocalOperator& o,
                                       const std::string& label, double t, long shots,
                                       NoiseModel model, std::uint64_t seed) {
    if (shots < 1) throw std::invalid_argument("measurement: shots >= 1 required");
    MeasurementRecord rec;
    rec.t = t;
    rec.label = label;
    rec.shots = shots;
    rec.truth = expectation(rho, o);

    Rng rng(seed);
    switch (model) {
        case NoiseModel::None:
            rec.estimate = rec.truth;
            break;
        case NoiseModel::Gaussian: {
            LocalOperator sq(o.basis(), SpMat(o.matrix() * o.matrix()), o.support(),
                             false);
            const double var = std::max(0.0, expectation(rho, sq) - rec.truth * rec.truth);
            rec.estimate = rec.truth + rng.normal() * std::sqrt(var / shots);
            break;
        }
        case NoiseModel::Projective: {
            Eigen::SelfAdjointEigenSolver<MatXcd> es(o.dense());
            Eigen::VectorXd p =
                (es.eigenvectors().adjoint() * rho.matrix() * es.eigenvectors())
                    .diagonal()
                    .real();
            p = p.cwiseMax(0.0);
            p /= p.sum();
            Eigen::VectorXd cum(p.size());
            double run = 0.0;
            for (int i = 0; i < p.size(); ++i) cum(i) = (run += p(i));
            double sum = 0.0;
            for (long s = 0; s < shots; ++s) {
                const double u = rng.uniform() * run;
                const int k = static_cast<int>(
                    std::lower_bound(cum.data(), cum.data() + cum.size(), u) - cum.data());
                sum += es.eigenvalues()(std::min<int>(k, p.size() - 1));
            }
            rec.estimate = sum / shots;
            break;
        }
    }
    return rec;
}

}  // namespace ehlearn
