#pragma once

#include <complex>
#include <iosfwd>
#include <set>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ehlearn/basis.hpp"

namespace ehlearn {

using cd = std::complex<double>;
using SpMat = Eigen::SparseMatrix<cd>;
using MatXcd = Eigen::MatrixXcd;
using VecXcd = Eigen::VectorXcd;

enum class Spin { Up, Down };
enum class Axis { X, Y, Z };

/// Sparse operator on a SectorBasis, tagged with its lattice support.
class LocalOperator {
  public:
    LocalOperator(BasisPtr basis, SpMat mat, std::set<int> support, bool hermitian);

    const BasisPtr& basis() const { return basis_; }
    const SpMat& matrix() const { return mat_; }
    const std::set<int>& support() const { return support_; }
    bool is_hermitian() const { return hermitian_; }
    std::size_t dim() const { return mat_.rows(); }

    VecXcd apply(const VecXcd& v) const { return mat_ * v; }
    MatXcd dense() const { return MatXcd(mat_); }

    double hermiticity_defect() const;
    double norm_max() const;

    LocalOperator& operator+=(const LocalOperator& o);
    LocalOperator& operator-=(const LocalOperator& o);
    LocalOperator& operator*=(double s);
    friend LocalOperator operator+(LocalOperator a, const LocalOperator& b) { return a += b; }
    friend LocalOperator operator-(LocalOperator a, const LocalOperator& b) { return a -= b; }
    friend LocalOperator operator*(double s, LocalOperator a) { return a *= s; }

    /// One "row col re im" line per stored entry, deterministic order.
    void dump(std::ostream& os) const;

  private:
    BasisPtr basis_;
    SpMat mat_;
    std::set<int> support_;
    bool hermitian_;
};

/// AB - BA. Anti-Hermitian for Hermitian inputs.
LocalOperator commutator(const LocalOperator& a, const LocalOperator& b);
LocalOperator anticommutator(const LocalOperator& a, const LocalOperator& b);

LocalOperator zero_operator(const BasisPtr& basis);
LocalOperator identity_operator(const BasisPtr& basis);

// --- fermionic constructors (Jordan-Wigner, species-major mode ordering) ---

/// c^dag_{j sigma} c_{k sigma} + h.c.  (j != k)
LocalOperator fermion_hopping(const BasisPtr& basis, int j, int k, Spin s);
/// n_{j sigma}
LocalOperator fermion_density(const BasisPtr& basis, int j, Spin s);
/// n_{j up} n_{j down}
LocalOperator double_occupancy(const BasisPtr& basis, int j);
/// i (c^dag_{j sigma} c_{k sigma} - h.c.)
LocalOperator fermion_current(const BasisPtr& basis, int j, int k, Spin s);
/// sum_j n_{j sigma}
LocalOperator total_number(const BasisPtr& basis, Spin s);
/// c_{j sigma}; requires the full (sector-unrestricted) fermionic basis.
LocalOperator fermion_annihilate(const BasisPtr& basis, int j, Spin s);

// --- spin-half constructors ---

/// Pauli matrix at site j. X and Y change the magnetization and are only
/// available on the full spin space.
LocalOperator sigma(const BasisPtr& basis, int j, Axis a);
/// sum_a sigma^a_i sigma^a_j (magnetization-conserving, any spin basis)
LocalOperator heisenberg_bond(const BasisPtr& basis, int i, int j);
/// sum_j sigma^z_j
LocalOperator total_sigma_z(const BasisPtr& basis);

}  // namespace ehlearn
