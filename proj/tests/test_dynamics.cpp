#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "ehlearn/dynamics.hpp"
#include "ehlearn/models.hpp"
#include "ehlearn/solver.hpp"

using namespace ehlearn;

namespace {

DensityMatrix plus_state(const BasisPtr& basis) {
    VecXcd psi(2);
    psi << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    return DensityMatrix(basis, psi * psi.adjoint());
}

DensityMatrix thermal_state(const LocalOperator& h, double beta) {
    Eigen::SelfAdjointEigenSolver<MatXcd> es(h.dense());
    Eigen::VectorXd p = (-beta * es.eigenvalues().array()).exp();
    p /= p.sum();
    return DensityMatrix(h.basis(), es.eigenvectors() * p.asDiagonal() *
                                        es.eigenvectors().adjoint());
}

}  // namespace

TEST_CASE("single spin Rabi-free precession") {
    auto basis = build_sector_basis(LatticeGraph::chain(1), SectorSpec::spin_full());
    auto rho = plus_state(basis);
    Propagator prop(sigma(basis, 0, Axis::Z));
    auto sx = sigma(basis, 0, Axis::X);
    CHECK(expectation(prop.evolve(rho, 0.0), sx) == doctest::Approx(1.0));
    CHECK(expectation(prop.evolve(rho, std::numbers::pi / 4), sx) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(expectation(prop.evolve(rho, std::numbers::pi / 8), sx) ==
          doctest::Approx(std::cos(std::numbers::pi / 4)));
    CHECK(prop.spectral_radius() == doctest::Approx(1.0));
}

TEST_CASE("stationarity, unitarity, composition, energy conservation") {
    auto basis = build_sector_basis(LatticeGraph::chain(3), SectorSpec::fermion_full());
    auto h = build_hubbard(basis, {.J = 1.0, .U = 1.5, .mu = 0.4});
    Propagator prop(h);

    auto rho = thermal_state(h, 0.7);
    auto evolved = prop.evolve(rho, 1.3);
    CHECK((evolved.matrix() - rho.matrix()).cwiseAbs().maxCoeff() < 1e-10);  // [H,rho]=0

    // generic state: thermal state of a different Hamiltonian
    auto rho2 = thermal_state(build_hubbard(basis, {.J = 0.6, .U = 0.3}), 1.0);
    auto r1 = prop.evolve(rho2, 0.8);
    Eigen::SelfAdjointEigenSolver<MatXcd> e0(rho2.matrix(), Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<MatXcd> e1(r1.matrix(), Eigen::EigenvaluesOnly);
    CHECK((e0.eigenvalues() - e1.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(r1.matrix().trace() - cd(1.0)) < 1e-12);

    auto r12 = prop.evolve(prop.evolve(rho2, 0.5), 0.9);
    auto r3 = prop.evolve(rho2, 1.4);
    CHECK((r12.matrix() - r3.matrix()).cwiseAbs().maxCoeff() < 1e-9);

    CHECK(expectation(prop.evolve(rho2, 2.2), h) ==
          doctest::Approx(expectation(rho2, h)).epsilon(1e-9));
}

TEST_CASE("expectations(): block path matches naive evolution") {
    auto chain = LatticeGraph::chain(10);
    auto full = build_sector_basis(chain, SectorSpec::fermion(5, 5));
    auto gs = ground_state(build_hubbard(full, {.J = 1.0, .U = 1.0, .mu = 0.5}));
    auto rho = partial_trace(gs.psi, *full, {5, 6, 7, 8, 9});
    auto sub = rho.basis();

    HubbardParams p{.J = 1.0, .U = 1.0, .mu = 0.5};
    Eigen::VectorXd g(5);
    g << 1.0, 4.0, 6.0, 8.0, 9.0;
    auto hvar = deformed_hamiltonian(build_local_terms(sub, p), g);
    Propagator prop(hvar);

    ObservableSet obs;
    obs.labels = {"docc2", "tun01_up"};
    obs.ops = {double_occupancy(sub, 2), fermion_hopping(sub, 0, 1, Spin::Up)};
    std::vector<double> times = {0.0, 0.7, 1.9};
    auto vals = prop.expectations(rho, obs, times);
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        auto rt = prop.evolve(rho, times[ti]);
        for (std::size_t k = 0; k < obs.size(); ++k)
            CHECK(vals(ti, k) ==
                  doctest::Approx(expectation(rt, obs.ops[k])).epsilon(1e-10));
    }
}

TEST_CASE("charge-mixing Hamiltonian falls back to dense block") {
    auto basis = build_sector_basis(LatticeGraph::ladder(2), SectorSpec::spin_full());
    auto [h, bonds] = build_heisenberg_ladder(basis, {.J_par = 1.0, .J_perp = 1.0});
    auto hp = h + 0.3 * perturbation_field(basis, {{0, {1.0, 0.0, 1.0}}});
    Propagator prop(hp);
    auto rho = thermal_state(h, 1.0);
    auto rt = prop.evolve(rho, 0.6);
    // brute-force matrix exponential via dense eigendecomposition
    Eigen::SelfAdjointEigenSolver<MatXcd> es(hp.dense());
    MatXcd u = es.eigenvectors() *
               (cd(0, -1) * 0.6 * es.eigenvalues().array()).exp().matrix().asDiagonal() *
               es.eigenvectors().adjoint();
    CHECK((rt.matrix() - u * rho.matrix() * u.adjoint()).cwiseAbs().maxCoeff() < 1e-10);

    ObservableSet obs;
    obs.labels = {"sz0"};
    obs.ops = {sigma(basis, 0, Axis::Z)};
    auto vals = prop.expectations(rho, obs, {0.6});
    CHECK(vals(0, 0) == doctest::Approx(expectation(rt, obs.ops[0])).epsilon(1e-10));
}

TEST_CASE("expectation basics and error paths") {
    auto basis = build_sector_basis(LatticeGraph::chain(1), SectorSpec::spin_full());
    DensityMatrix mixed(basis, 0.5 * MatXcd::Identity(2, 2));
    CHECK(expectation(mixed, identity_operator(basis)) == doctest::Approx(1.0));
    CHECK(expectation(mixed, sigma(basis, 0, Axis::Z)) == doctest::Approx(0.0));

    // [sx, sy] = 2i sz has imaginary expectation in a z-polarized state
    MatXcd up = MatXcd::Zero(2, 2);
    up(1, 1) = 1.0;
    DensityMatrix polarized(basis, up);
    auto comm = commutator(sigma(basis, 0, Axis::X), sigma(basis, 0, Axis::Y));
    CHECK_THROWS(expectation(polarized, comm));
}

TEST_CASE("observable set validation and spreads") {
    auto basis = build_sector_basis(LatticeGraph::chain(2), SectorSpec::spin_full());
    ObservableSet obs;
    obs.labels = {"z0", "x1"};
    obs.ops = {sigma(basis, 0, Axis::Z), sigma(basis, 1, Axis::X)};
    obs.validate();
    for (double s : obs.spreads()) CHECK(s == doctest::Approx(2.0));

    ObservableSet bad;
    bad.labels = {"only one"};
    bad.ops = {sigma(basis, 0, Axis::Z), sigma(basis, 1, Axis::X)};
    CHECK_THROWS(bad.validate());
}

TEST_CASE("simulated measurement: determinism and statistics") {
    auto basis = build_sector_basis(LatticeGraph::chain(1), SectorSpec::spin_full());
    DensityMatrix mixed(basis, 0.5 * MatXcd::Identity(2, 2));
    auto sz = sigma(basis, 0, Axis::Z);

    auto a = simulate_measurement(mixed, sz, "sz", 0.0, 100, NoiseModel::Projective, 42);
    auto b = simulate_measurement(mixed, sz, "sz", 0.0, 100, NoiseModel::Projective, 42);
    CHECK(a.estimate == b.estimate);
    CHECK(a.truth == doctest::Approx(0.0));
    CHECK(a.shots == 100);

    // law of large numbers at 1e6 shots: 5 sigma = 5/1000
    auto big = simulate_measurement(mixed, sz, "sz", 0.0, 1000000, NoiseModel::Projective, 7);
    CHECK(std::abs(big.estimate - big.truth) < 5e-3);

    // binomial variance oracle: Var = 1/shots over many seeds
    double sum = 0.0, sq = 0.0;
    const int n_seeds = 1000;
    for (int s = 0; s < n_seeds; ++s) {
        auto r = simulate_measurement(mixed, sz, "sz", 0.0, 100, NoiseModel::Projective, s);
        sum += r.estimate;
        sq += r.estimate * r.estimate;
    }
    const double var = sq / n_seeds - (sum / n_seeds) * (sum / n_seeds);
    CHECK(var == doctest::Approx(0.01).epsilon(0.2));

    // gaussian mode variance matches Var(O)/shots
    double gsum = 0.0, gsq = 0.0;
    for (int s = 0; s < n_seeds; ++s) {
        auto r = simulate_measurement(mixed, sz, "sz", 0.0, 100, NoiseModel::Gaussian, s);
        gsum += r.estimate;
        gsq += r.estimate * r.estimate;
    }
    const double gvar = gsq / n_seeds - (gsum / n_seeds) * (gsum / n_seeds);
    CHECK(gvar == doctest::Approx(0.01).epsilon(0.2));

    // eigenstate of O: projective estimate is exact
    MatXcd up = MatXcd::Zero(2, 2);
    up(1, 1) = 1.0;
    DensityMatrix pol(basis, up);
    auto ex = simulate_measurement(pol, sz, "sz", 0.0, 3, NoiseModel::Projective, 1);
    CHECK(ex.estimate == doctest::Approx(1.0));

    auto none = simulate_measurement(mixed, sz, "sz", 0.0, 1, NoiseModel::None, 1);
    CHECK(none.estimate == none.truth);
    CHECK_THROWS(simulate_measurement(mixed, sz, "sz", 0.0, 0, NoiseModel::None, 1));
}
