#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "ehlearn/models.hpp"

using namespace ehlearn;

namespace {

double ground_energy(const LocalOperator& h) {
    Eigen::SelfAdjointEigenSolver<MatXcd> es(h.dense(), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace

TEST_CASE("two-site Hubbard ground energies") {
    auto basis = build_sector_basis(LatticeGraph::chain(2), SectorSpec::fermion(1, 1));
    CHECK(ground_energy(build_hubbard(basis, {.J = 1.0})) == doctest::Approx(-2.0));
    const double J = 0.7, U = 1.3;
    const double exact = 0.5 * (U - std::sqrt(U * U + 16.0 * J * J));
    CHECK(ground_energy(build_hubbard(basis, {.J = J, .U = U})) ==
          doctest::Approx(exact).epsilon(1e-12));
    // chemical potential shifts the sector energy by -mu * N
    CHECK(ground_energy(build_hubbard(basis, {.J = J, .U = U, .mu = 0.25})) ==
          doctest::Approx(exact - 0.25 * 2).epsilon(1e-12));
}

TEST_CASE("Hubbard decomposition identity and symmetries") {
    auto basis = build_sector_basis(LatticeGraph::chain(4), SectorSpec::fermion(2, 2));
    HubbardParams p{.J = 1.0, .U = 1.0, .mu = 0.5};
    auto h = build_hubbard(basis, p);
    auto terms = build_local_terms(basis, p);
    CHECK(terms.size() == 4);
    LocalOperator sum = zero_operator(basis);
    for (const auto& t : terms) sum += t;
    CHECK((h.dense() - sum.dense()).cwiseAbs().maxCoeff() < 1e-12);

    CHECK(commutator(h, total_number(basis, Spin::Up)).norm_max() < 1e-12);
    CHECK(commutator(h, total_number(basis, Spin::Down)).norm_max() < 1e-12);

    // interior term touches both neighbors, boundary term only one
    CHECK(terms[1].support() == std::set<int>{0, 1, 2});
    CHECK(terms[0].support() == std::set<int>{0, 1});
}

TEST_CASE("deformed Hamiltonian") {
    auto basis = build_sector_basis(LatticeGraph::chain(3), SectorSpec::fermion(1, 1));
    HubbardParams p{.J = 1.0, .U = 2.0, .mu = 0.3};
    auto terms = build_local_terms(basis, p);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
    CHECK((deformed_hamiltonian(terms, ones).dense() - build_hubbard(basis, p).dense())
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    CHECK(deformed_hamiltonian(terms, Eigen::VectorXd::Zero(3)).norm_max() == 0.0);

    std::vector<std::string> labels = {"g1", "g2", "g3"};
    auto ansatz = make_site_ansatz(terms, labels, 0);
    Eigen::VectorXd g(3);
    g << 1.0, 2.0, 3.0;
    CHECK(deformed_hamiltonian(ansatz, g).hermiticity_defect() < 1e-12);
    g(1) = -1.0;
    CHECK_THROWS(deformed_hamiltonian(ansatz, g));  // below lower bound
    g(1) = 2.0;
    g(0) = 2.0;
    CHECK_THROWS(deformed_hamiltonian(ansatz, g));  // fixed parameter moved
    CHECK_THROWS(deformed_hamiltonian(terms, Eigen::VectorXd::Ones(2)));
}

TEST_CASE("density-only terms commute pairwise") {
    auto basis = build_sector_basis(LatticeGraph::chain(3), SectorSpec::fermion(1, 1));
    auto terms = build_density_terms(basis);
    CHECK(terms.size() == 3);
    for (const auto& a : terms)
        for (const auto& b : terms) CHECK(commutator(a, b).norm_max() < 1e-14);
}

TEST_CASE("Heisenberg single bond spectrum") {
    auto basis = build_sector_basis(LatticeGraph::ladder(1), SectorSpec::spin_full());
    auto [h, bonds] = build_heisenberg_ladder(basis, {.J_par = 1.0, .J_perp = 0.8});
    CHECK(bonds.size() == 1);
    Eigen::SelfAdjointEigenSolver<MatXcd> es(h.dense(), Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues()(0) == doctest::Approx(-3.0 * 0.8).epsilon(1e-12));
    for (int i = 1; i < 4; ++i)
        CHECK(es.eigenvalues()(i) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("Heisenberg ladder lambda interpolation") {
    auto lattice = LatticeGraph::ladder(4, true);  // 6 horizontal + 4 vertical + 3 diagonal
    auto basis = build_sector_basis(lattice, SectorSpec::spin(0));
    HeisenbergParams p{.J_par = 0.0625, .J_perp = 1.0, .lambda = 0.0};
    auto [h0, b0] = build_heisenberg_ladder(basis, p);
    CHECK(b0.size() == 10);  // diagonals absent at lambda = 0
    p.lambda = 1.0;
    auto [h1, b1] = build_heisenberg_ladder(basis, p);
    CHECK(b1.size() == 9);  // verticals absent at lambda = 1
    p.lambda = 0.5;
    auto [h5, b5] = build_heisenberg_ladder(basis, p);
    CHECK(b5.size() == 13);
    CHECK(commutator(h5, total_sigma_z(basis)).norm_max() < 1e-12);
    // continuity: couplings at lambda=1e-12 are within 1e-6 of lambda=0
    p.lambda = 1e-12;
    auto [he, be] = build_heisenberg_ladder(basis, p);
    CHECK((he.dense() - h0.dense()).cwiseAbs().maxCoeff() < 1e-6);

    p.lambda = 1.5;
    CHECK_THROWS(build_heisenberg_ladder(basis, p));
    auto chain_basis = build_sector_basis(LatticeGraph::chain(3), SectorSpec::spin(1));
    CHECK_THROWS(build_heisenberg_ladder(chain_basis, HeisenbergParams{}));
}

TEST_CASE("perturbation field") {
    auto basis = build_sector_basis(LatticeGraph::ladder(2), SectorSpec::spin_full());
    auto hp = perturbation_field(basis, {{0, {1.0, 0.0, 1.0}}, {2, {1.0, 0.0, -0.5}}});
    CHECK(hp.hermiticity_defect() < 1e-12);
    // breaks U(1): does not commute with total magnetization
    CHECK(commutator(hp, total_sigma_z(basis)).norm_max() > 0.1);
    CHECK(perturbation_field(basis, {{1, {0.0, 0.0, 0.0}}}).norm_max() == 0.0);
    auto sz = perturbation_field(basis, {{1, {0.0, 0.0, 1.0}}});
    CHECK((sz.dense() - sigma(basis, 1, Axis::Z).dense()).cwiseAbs().maxCoeff() == 0.0);
}
