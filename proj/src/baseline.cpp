#include "ehlearn/baseline.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

namespace ehlearn {

namespace {

std::string spin_tag(Spin s) { return s == Spin::Up ? "up" : "dn"; }

/// product of a bond operator and a disjoint diagonal density (commuting
/// factors, so the product is Hermitian)
LocalOperator composite(const LocalOperator& bond, const LocalOperator& density) {
    SpMat prod = bond.matrix() * density.matrix();
    prod.prune(cd(1.0, 0.0), 1e-15);
    std::set<int> support = bond.support();
    support.insert(density.support().begin(), density.support().end());
    return LocalOperator(bond.basis(), std::move(prod), std::move(support), true);
}

void check_contiguous_chain(const BasisPtr& basis) {
    if (basis->sector().kind != ModelKind::Fermionic)
        throw std::invalid_argument("constraint observables: fermionic basis required");
    const int n = basis->n_sites();
    if (n < 4)
        throw std::invalid_argument(
            "constraint observables: at least 4 contiguous sites required for the "
            "n+-2 density offsets");
    for (int i = 0; i + 1 < n; ++i)
        if (!basis->lattice().has_edge(i, i + 1))
            throw std::invalid_argument(
                "constraint observables: subsystem is not a contiguous chain");
}

ObservableSet build_composites(const BasisPtr& basis, bool currents) {
    check_contiguous_chain(basis);
    const int n = basis->n_sites();
    ObservableSet obs;
    for (int b = 0; b + 1 < n; ++b)
        for (Spin s : {Spin::Up, Spin::Down})
            for (Spin sp : {Spin::Up, Spin::Down})
                for (int m : {b - 2, b + 2}) {
                    if (m < 0 || m >= n) continue;
                    const LocalOperator factor =
                        currents ? fermion_current(basis, b, b + 1, s)
                                 : fermion_hopping(basis, b, b + 1, s);
                    obs.ops.push_back(
                        composite(factor, fermion_density(basis, m, sp)));
                    obs.labels.push_back((currents ? "cur" : "hop") +
                                         std::to_string(b) + "_" + spin_tag(s) +
                                         "_n" + std::to_string(m) + "_" +
                                         spin_tag(sp));
                }
    obs.validate();
    return obs;
}

}  // namespace

ObservableSet build_constraint_observables(const BasisPtr& sub_basis) {
    return build_composites(sub_basis, true);
}

ObservableSet build_density_constraint_observables(const BasisPtr& sub_basis) {
    check_contiguous_chain(sub_basis);
    const int n = sub_basis->n_sites();
    ObservableSet obs;
    for (int b = 0; b + 1 < n; ++b)
        for (Spin s : {Spin::Up, Spin::Down})
            for (Spin sp : {Spin::Up, Spin::Down})
                for (int m : {b - 2, b + 2}) {
                    if (m < 0 || m >= n) continue;
                    obs.ops.push_back(composite(fermion_density(sub_basis, b, s),
                                                fermion_density(sub_basis, m, sp)));
                    obs.labels.push_back("den" + std::to_string(b) + "_" +
                                         spin_tag(s) + "_n" + std::to_string(m) +
                                         "_" + spin_tag(sp));
                }
    obs.validate();
    return obs;
}

void ConstraintMatrix::validate() const {
    if (m.cols() < m.rows())
        throw std::logic_error(
            "constraint matrix: fewer observables than ansatz terms "
            "(underdetermined system)");
    if (static_cast<Eigen::Index>(row_labels.size()) != m.rows() ||
        static_cast<Eigen::Index>(col_labels.size()) != m.cols())
        throw std::logic_error("constraint matrix: label count mismatch");
}

ConstraintMatrix build_constraint_matrix(const DensityMatrix& rho,
                                         const AnsatzSpec& ansatz,
                                         const ObservableSet& obs, long n_m,
                                         Rng* rng) {
    ansatz.validate();
    obs.validate();
    if (ansatz.terms.front().basis() != rho.basis() ||
        obs.ops.front().basis() != rho.basis())
        throw std::invalid_argument("constraint matrix: basis mismatch");
    if (n_m > 0 && rng == nullptr)
        throw std::invalid_argument("constraint matrix: noise requested without rng");

    ConstraintMatrix out;
    out.n_m = std::max(0L, n_m);
    out.row_labels = ansatz.labels;
    out.col_labels = obs.labels;
    out.m.resize(ansatz.size(), obs.size());
    for (std::size_t j = 0; j < ansatz.size(); ++j)
        for (std::size_t k = 0; k < obs.size(); ++k) {
            const LocalOperator c = commutator(ansatz.terms[j], obs.ops[k]);
            // A = i[h, O] is Hermitian; <A> is real and A^2 = -C^2
            cd mean = 0.0, sq = 0.0;
            const SpMat& cm = c.matrix();
            const SpMat c2 = SpMat(cm * cm);
            for (int kk = 0; kk < cm.outerSize(); ++kk)
                for (SpMat::InnerIterator it(cm, kk); it; ++it)
                    mean += it.value() * rho.matrix()(it.col(), it.row());
            for (int kk = 0; kk < c2.outerSize(); ++kk)
                for (SpMat::InnerIterator it(c2, kk); it; ++it)
                    sq += it.value() * rho.matrix()(it.col(), it.row());
            const double value = (cd(0.0, 1.0) * mean).real();
            if (std::abs((cd(0.0, 1.0) * mean).imag()) > 1e-8)
                throw std::logic_error("constraint matrix: entry not real");
            out.m(j, k) = value;
            if (n_m > 0) {
                const double var = std::max(0.0, (-sq).real() - value * value);
                out.m(j, k) += rng->normal() * std::sqrt(var / n_m);
            }
        }
    out.validate();
    return out;
}

ClResult cl_learn(const DensityMatrix& rho, const AnsatzSpec& ansatz,
                  const ObservableSet& obs, long n_m, Rng& rng) {
    const ConstraintMatrix cm =
        build_constraint_matrix(rho, ansatz, obs, n_m, &rng);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cm.m, Eigen::ComputeFullU);

    ClResult out;
    out.singular_values = svd.singularValues();
    const Eigen::Index k = out.singular_values.size();
    if (out.singular_values(0) < 1e-10)
        out.warnings.push_back(
            "constraint matrix vanishes: observables give no constraints "
            "(diagonal replacement?)");
    else if (k >= 2 &&
             out.singular_values(k - 2) - out.singular_values(k - 1) < 1e-12)
        out.warnings.push_back(
            "degenerate recovery: two smallest singular values coincide "
            "(unfixed symmetry direction)");
    else if (n_m <= 0 &&
             out.singular_values(k - 2) < 50.0 * out.singular_values(k - 1))
        out.warnings.push_back(
            "noiseless constraint matrix lacks a clear nullity-1 gap");

    out.g_cl = svd.matrixU().col(k - 1);
    for (Eigen::Index j = 0; j < out.g_cl.size(); ++j) {
        if (std::abs(out.g_cl(j)) > 1e-12) {
            if (out.g_cl(j) < 0.0) out.g_cl = -out.g_cl;
            break;
        }
    }
    return out;
}

Eigen::VectorXd project_out(const Eigen::VectorXd& v,
                            const std::vector<Eigen::VectorXd>& directions) {
    if (directions.empty()) return v;
    Eigen::MatrixXd d(v.size(), directions.size());
    for (std::size_t i = 0; i < directions.size(); ++i) d.col(i) = directions[i];
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(d);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(
                                                v.size(), directions.size());
    return v - q * (q.transpose() * v);
}

double angle_between(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double na = a.norm(), nb = b.norm();
    if (na < 1e-300 || nb < 1e-300)
        throw std::invalid_argument("angle_between: zero vector");
    const double c = std::min(1.0, std::abs(a.dot(b)) / (na * nb));
    return std::acos(c);
}

}  // namespace ehlearn
