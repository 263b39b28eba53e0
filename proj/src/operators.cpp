#include "ehlearn/operators.hpp"

#include <bit>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace ehlearn {

namespace {

using Triplet = Eigen::Triplet<cd>;

SpMat from_triplets(std::size_t dim, std::vector<Triplet>& trips) {
    SpMat m(dim, dim);
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
}

// Key bit index of a fermionic mode: down modes occupy bits 0..n-1 (site
// order), up modes bits n..2n-1. Matches lexicographic (up, down) key order.
int mode_bit(int site, Spin s, int n) { return s == Spin::Up ? n + site : site; }

double jw_sign(std::uint64_t key, int b1, int b2) {
    const int lo = std::min(b1, b2), hi = std::max(b1, b2);
    const std::uint64_t between =
        key & (((std::uint64_t{1} << hi) - 1) & ~((std::uint64_t{1} << (lo + 1)) - 1));
    return std::popcount(between) % 2 ? -1.0 : 1.0;
}

void check_site(const SectorBasis& b, int j) {
    if (j < 0 || j >= b.n_sites())
        throw std::invalid_argument("operator: site index out of range");
}

// Accumulate coeff * c^dag_{b1} c_{b2} over all basis configurations.
void add_bilinear(const SectorBasis& basis, int b1, int b2, cd coeff,
                  std::vector<Triplet>& trips) {
    for (std::size_t i = 0; i < basis.dim(); ++i) {
        const std::uint64_t key = basis.config(i);
        if (b1 == b2) {
            if ((key >> b1) & 1) trips.emplace_back(i, i, coeff);
            continue;
        }
        if (!((key >> b2) & 1) || ((key >> b1) & 1)) continue;
        const std::uint64_t dst = key ^ (std::uint64_t{1} << b1) ^ (std::uint64_t{1} << b2);
        const long r = basis.index_of(dst);
        if (r < 0)
            throw std::logic_error("operator: bilinear leaves the sector basis");
        trips.emplace_back(r, i, coeff * jw_sign(key, b1, b2));
    }
}

void require_fermionic(const SectorBasis& b) {
    if (b.sector().kind != ModelKind::Fermionic)
        throw std::invalid_argument("operator: fermionic basis required");
}

void require_spin(const SectorBasis& b) {
    if (b.sector().kind != ModelKind::SpinHalf)
        throw std::invalid_argument("operator: spin-half basis required");
}

}  // namespace

LocalOperator::LocalOperator(BasisPtr basis, SpMat mat, std::set<int> support,
                             bool hermitian)
    : basis_(std::move(basis)), mat_(std::move(mat)), support_(std::move(support)),
      hermitian_(hermitian) {
    if (mat_.rows() != mat_.cols() ||
        static_cast<std::size_t>(mat_.rows()) != basis_->dim())
        throw std::invalid_argument("operator: matrix dimension != basis dimension");
    if (hermitian_ && hermiticity_defect() > 1e-12)
        throw std::logic_error("operator: claimed Hermitian but H != H^dag");
}

double LocalOperator::hermiticity_defect() const {
    SpMat d = SpMat(mat_.adjoint()) - mat_;
    double m = 0;
    for (int k = 0; k < d.outerSize(); ++k)
        for (SpMat::InnerIterator it(d, k); it; ++it)
            m = std::max(m, std::abs(it.value()));
    return m;
}

double LocalOperator::norm_max() const {
    double m = 0;
    for (int k = 0; k < mat_.outerSize(); ++k)
        for (SpMat::InnerIterator it(mat_, k); it; ++it)
            m = std::max(m, std::abs(it.value()));
    return m;
}

LocalOperator& LocalOperator::operator+=(const LocalOperator& o) {
    if (basis_ != o.basis_) throw std::invalid_argument("operator: basis mismatch");
    mat_ += o.mat_;
    support_.insert(o.support_.begin(), o.support_.end());
    hermitian_ = hermitian_ && o.hermitian_;
    return *this;
}

LocalOperator& LocalOperator::operator-=(const LocalOperator& o) {
    if (basis_ != o.basis_) throw std::invalid_argument("operator: basis mismatch");
    mat_ -= o.mat_;
    support_.insert(o.support_.begin(), o.support_.end());
    hermitian_ = hermitian_ && o.hermitian_;
    return *this;
}

LocalOperator& LocalOperator::operator*=(double s) {
    mat_ *= s;
    return *this;
}

void LocalOperator::dump(std::ostream& os) const {
    for (int k = 0; k < mat_.outerSize(); ++k)
        for (SpMat::InnerIterator it(mat_, k); it; ++it)
            os << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' '
               << it.value().imag() << '\n';
}

LocalOperator commutator(const LocalOperator& a, const LocalOperator& b) {
    if (a.basis() != b.basis()) throw std::invalid_argument("commutator: basis mismatch");
    SpMat m = (a.matrix() * b.matrix() - b.matrix() * a.matrix()).pruned(1e-15);
    std::set<int> sup = a.support();
    sup.insert(b.support().begin(), b.support().end());
    return LocalOperator(a.basis(), std::move(m), std::move(sup), false);
}

LocalOperator anticommutator(const LocalOperator& a, const LocalOperator& b) {
    if (a.basis() != b.basis()) throw std::invalid_argument("anticommutator: basis mismatch");
    SpMat m = (a.matrix() * b.matrix() + b.matrix() * a.matrix()).pruned(1e-15);
    std::set<int> sup = a.support();
    sup.insert(b.support().begin(), b.support().end());
    return LocalOperator(a.basis(), std::move(m), std::move(sup), false);
}

LocalOperator zero_operator(const BasisPtr& basis) {
    return LocalOperator(basis, SpMat(basis->dim(), basis->dim()), {}, true);
}

LocalOperator identity_operator(const BasisPtr& basis) {
    SpMat m(basis->dim(), basis->dim());
    m.setIdentity();
    return LocalOperator(basis, std::move(m), {}, true);
}

LocalOperator fermion_hopping(const BasisPtr& basis, int j, int k, Spin s) {
    require_fermionic(*basis);
    check_site(*basis, j);
    check_site(*basis, k);
    if (j == k) throw std::invalid_argument("hopping: j != k required");
    const int n = basis->n_sites();
    std::vector<Triplet> trips;
    add_bilinear(*basis, mode_bit(j, s, n), mode_bit(k, s, n), 1.0, trips);
    add_bilinear(*basis, mode_bit(k, s, n), mode_bit(j, s, n), 1.0, trips);
    return LocalOperator(basis, from_triplets(basis->dim(), trips), {j, k}, true);
}

LocalOperator fermion_density(const BasisPtr& basis, int j, Spin s) {
    require_fermionic(*basis);
    check_site(*basis, j);
    const int n = basis->n_sites();
    std::vector<Triplet> trips;
    add_bilinear(*basis, mode_bit(j, s, n), mode_bit(j, s, n), 1.0, trips);
    return LocalOperator(basis, from_triplets(basis->dim(), trips), {j}, true);
}

LocalOperator double_occupancy(const BasisPtr& basis, int j) {
    require_fermionic(*basis);
    check_site(*basis, j);
    const int n = basis->n_sites();
    std::vector<Triplet> trips;
    for (std::size_t i = 0; i < basis->dim(); ++i) {
        const std::uint64_t key = basis->config(i);
        if (((key >> mode_bit(j, Spin::Up, n)) & 1) &&
            ((key >> mode_bit(j, Spin::Down, n)) & 1))
            trips.emplace_back(i, i, 1.0);
    }
    return LocalOperator(basis, from_triplets(basis->dim(), trips), {j}, true);
}

LocalOperator fermion_current(const BasisPtr& basis, int j, int k, Spin s) {
    require_fermionic(*basis);
    check_site(*basis, j);
    check_site(*basis, k);
    if (j == k) throw std::invalid_argument("current: j != k required");
    const int n = basis->n_sites();
    std::vector<Triplet> trips;
    add_bilinear(*basis, mode_bit(j, s, n), mode_bit(k, s, n), cd(0, 1), trips);
    add_bilinear(*basis, mode_bit(k, s, n), mode_bit(j, s, n), cd(0, -1), trips);
    return LocalOperator(basis, from_triplets(basis->dim(), trips), {j, k}, true);
}

LocalOperator total_number(const BasisPtr& basis, Spin s) {
    require_fermionic(*basis);
    const int n = basis->n_sites();
    std::vector<Triplet> trips;
    std::set<int> sup;
    for (int j = 0; j < n; ++j) {
        add_bilinear(*basis, mode_bit(j, s, n), mode_bit(j, s, n), 1.0, trips);
        sup.insert(j);
    }
    return LocalOperator(basis, from_triplets(basis->dim(), trips), std::move(sup), true);
}

LocalOperator fermion_annihilate(const BasisPtr& basis, int j, Spin s) {
    require_fermionic(*basis);
    check_site(*basis, j);
    if (basis->sector().n_up)
        throw std::invalid_argument(
            "annihilate: changes particle number, full Fock basis required");
    const int n = basis->n_sites();
    const int b = mode_bit(j, s, n);
    std::vector<Triplet> trips;
    for (std::size_t i = 0; i < basis->dim(); ++i) {
        const std::uint64_t key = basis->config(i);
        if (!((key >> b) & 1)) continue;
        const std::uint64_t dst = key ^ (std::uint64_t{1} << b);
        // string over modes below b
        const double sign =
            std::popcount(key & ((std::uint64_t{1} << b) - 1)) % 2 ? -1.0 : 1.0;
        trips.emplace_back(basis->index_of(dst), i, sign);
    }
    return LocalOperator(basis, from_triplets(basis->dim(), trips), {j}, false);
}

LocalOperator sigma(const BasisPtr& basis, int j, Axis a) {
    require_spin(*basis);
    check_site(*basis, j);
    std::vector<Triplet> trips;
    if (a == Axis::Z) {
        for (std::size_t i = 0; i < basis->dim(); ++i)
            trips.emplace_back(i, i, ((basis->config(i) >> j) & 1) ? 1.0 : -1.0);
    } else {
        if (basis->sector().magnetization)
            throw std::invalid_argument(
                "sigma: X/Y change the magnetization sector; build them on the full "
                "spin space");
        for (std::size_t i = 0; i < basis->dim(); ++i) {
            const std::uint64_t key = basis->config(i);
            const long r = basis->index_of(key ^ (std::uint64_t{1} << j));
            const bool was_up = (key >> j) & 1;
            cd v = 1.0;
            if (a == Axis::Y) v = was_up ? cd(0, 1) : cd(0, -1);
            trips.emplace_back(r, i, v);
        }
    }
    return LocalOperator(basis, from_triplets(basis->dim(), trips), {j}, true);
}

LocalOperator heisenberg_bond(const BasisPtr& basis, int i, int j) {
    require_spin(*basis);
    check_site(*basis, i);
    check_site(*basis, j);
    if (i == j) throw std::invalid_argument("bond: distinct sites required");
    std::vector<Triplet> trips;
    for (std::size_t c = 0; c < basis->dim(); ++c) {
        const std::uint64_t key = basis->config(c);
        const bool bi = (key >> i) & 1, bj = (key >> j) & 1;
        trips.emplace_back(c, c, bi == bj ? 1.0 : -1.0);  // sigma^z sigma^z
        if (bi != bj) {
            // sigma^x sigma^x + sigma^y sigma^y = 2 * flip-flop
            const std::uint64_t dst =
                key ^ (std::uint64_t{1} << i) ^ (std::uint64_t{1} << j);
            trips.emplace_back(basis->index_of(dst), c, 2.0);
        }
    }
    return LocalOperator(basis, from_triplets(basis->dim(), trips), {i, j}, true);
}

LocalOperator total_sigma_z(const BasisPtr& basis) {
    require_spin(*basis);
    const int n = basis->n_sites();
    std::vector<Triplet> trips;
    std::set<int> sup;
    for (std::size_t i = 0; i < basis->dim(); ++i) {
        const int nup = std::popcount(basis->config(i));
        trips.emplace_back(i, i, 2.0 * nup - n);
    }
    for (int j = 0; j < n; ++j) sup.insert(j);
    return LocalOperator(basis, from_triplets(basis->dim(), trips), std::move(sup), true);
}

}  // namespace ehlearn
