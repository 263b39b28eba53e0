#include "ehlearn/models.hpp"

#include <cmath>
#include <stdexcept>

namespace ehlearn {

void AnsatzSpec::validate() const {
    if (terms.empty()) throw std::invalid_argument("ansatz: no terms");
    if (labels.size() != terms.size() || bounds.size() != terms.size())
        throw std::invalid_argument("ansatz: labels/bounds size mismatch");
    for (std::size_t j = 1; j < terms.size(); ++j)
        if (terms[j].basis() != terms[0].basis())
            throw std::invalid_argument("ansatz: terms on different bases");
    for (const auto& [lo, hi] : bounds)
        if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
            throw std::invalid_argument("ansatz: invalid bounds");
    if (fixed_index >= static_cast<int>(terms.size()))
        throw std::invalid_argument("ansatz: fixed index out of range");
    int free = static_cast<int>(terms.size()) - (fixed_index >= 0 ? 1 : 0);
    if (free < 1) throw std::invalid_argument("ansatz: no free parameter");
}

namespace {

double bond_coupling(const HubbardParams& p, BondTag tag) {
    switch (tag) {
        case BondTag::Horizontal: return p.J;
        case BondTag::Vertical: return p.J_perp;
        case BondTag::Diagonal:
            throw std::invalid_argument("hubbard: diagonal bonds unsupported");
    }
    return 0.0;
}

}  // namespace

LocalOperator build_hubbard(const BasisPtr& basis, const HubbardParams& p) {
    if (basis->sector().kind != ModelKind::Fermionic)
        throw std::invalid_argument("hubbard: fermionic basis required");
    LocalOperator h = zero_operator(basis);
    for (const Edge& e : basis->lattice().edges()) {
        const double J = bond_coupling(p, e.tag);
        for (Spin s : {Spin::Up, Spin::Down})
            h -= J * fermion_hopping(basis, e.a, e.b, s);
    }
    for (int j = 0; j < basis->n_sites(); ++j) {
        h += p.U * double_occupancy(basis, j);
        for (Spin s : {Spin::Up, Spin::Down})
            h -= p.mu * fermion_density(basis, j, s);
    }
    return h;
}

std::vector<LocalOperator> build_local_terms(const BasisPtr& basis,
                                             const HubbardParams& p) {
    if (basis->sector().kind != ModelKind::Fermionic)
        throw std::invalid_argument("local terms: fermionic basis required");
    std::vector<LocalOperator> terms;
    for (int j = 0; j < basis->n_sites(); ++j) {
        LocalOperator h = zero_operator(basis);
        for (const Edge& e : basis->lattice().edges()) {
            if (e.a != j && e.b != j) continue;
            const double half = 0.5 * bond_coupling(p, e.tag);
            for (Spin s : {Spin::Up, Spin::Down})
                h -= half * fermion_hopping(basis, e.a, e.b, s);
        }
        h += p.U * double_occupancy(basis, j);
        for (Spin s : {Spin::Up, Spin::Down})
            h -= p.mu * fermion_density(basis, j, s);
        terms.push_back(std::move(h));
    }
    return terms;
}

std::vector<LocalOperator> build_density_terms(const BasisPtr& basis) {
    std::vector<LocalOperator> terms;
    for (int j = 0; j < basis->n_sites(); ++j)
        terms.push_back(fermion_density(basis, j, Spin::Up) +
                        fermion_density(basis, j, Spin::Down));
    return terms;
}

std::pair<LocalOperator, std::vector<LocalOperator>> build_heisenberg_ladder(
    const BasisPtr& basis, const HeisenbergParams& p) {
    if (basis->sector().kind != ModelKind::SpinHalf)
        throw std::invalid_argument("heisenberg: spin-half basis required");
    if (p.lambda < 0.0 || p.lambda > 1.0)
        throw std::invalid_argument("heisenberg: lambda outside [0, 1]");
    if (p.J_par <= 0.0 || p.J_perp <= 0.0)
        throw std::invalid_argument("heisenberg: couplings must be positive");
    bool leg0 = false, leg1 = false;
    for (int s = 0; s < basis->n_sites(); ++s) {
        const int leg = basis->lattice().coord(s).second;
        if (leg != 0 && leg != 1)
            throw std::invalid_argument("heisenberg: lattice is not a 2-leg ladder");
        (leg == 0 ? leg0 : leg1) = true;
    }
    if (!leg0 || !leg1)
        throw std::invalid_argument("heisenberg: lattice is not a 2-leg ladder");
    std::vector<LocalOperator> bonds;
    LocalOperator h = zero_operator(basis);
    for (const Edge& e : basis->lattice().edges()) {
        double Jbar = 0.0;
        switch (e.tag) {
            case BondTag::Horizontal: Jbar = p.J_par; break;
            case BondTag::Vertical: Jbar = std::sqrt(1.0 - p.lambda) * p.J_perp; break;
            case BondTag::Diagonal: Jbar = p.lambda * p.J_perp; break;
        }
        if (Jbar == 0.0) continue;
        LocalOperator b = Jbar * heisenberg_bond(basis, e.a, e.b);
        h += b;
        bonds.push_back(std::move(b));
    }
    return {std::move(h), std::move(bonds)};
}

LocalOperator deformed_hamiltonian(const std::vector<LocalOperator>& terms,
                                   const Eigen::VectorXd& g) {
    if (terms.empty()) throw std::invalid_argument("deformed: no terms");
    if (static_cast<std::size_t>(g.size()) != terms.size())
        throw std::invalid_argument("deformed: parameter count != term count");
    LocalOperator h = zero_operator(terms[0].basis());
    for (std::size_t j = 0; j < terms.size(); ++j) h += g(j) * terms[j];
    return h;
}

LocalOperator deformed_hamiltonian(const AnsatzSpec& ansatz, const Eigen::VectorXd& g) {
    ansatz.validate();
    if (static_cast<std::size_t>(g.size()) != ansatz.size())
        throw std::invalid_argument("deformed: parameter count != term count");
    for (std::size_t j = 0; j < ansatz.size(); ++j) {
        if (static_cast<int>(j) == ansatz.fixed_index) {
            if (g(j) != ansatz.fixed_value)
                throw std::invalid_argument("deformed: fixed parameter modified");
            continue;
        }
        if (g(j) <= ansatz.bounds[j].first || g(j) > ansatz.bounds[j].second)
            throw std::invalid_argument("deformed: parameter outside bounds");
    }
    return deformed_hamiltonian(ansatz.terms, g);
}

AnsatzSpec make_site_ansatz(std::vector<LocalOperator> terms,
                            std::vector<std::string> labels, int fixed_index) {
    AnsatzSpec a;
    a.terms = std::move(terms);
    a.labels = std::move(labels);
    a.bounds.assign(a.terms.size(), {0.0, 10.0});
    a.fixed_index = fixed_index;
    a.fixed_value = 1.0;
    a.validate();
    return a;
}

LocalOperator perturbation_field(
    const BasisPtr& basis,
    const std::vector<std::pair<int, std::array<double, 3>>>& site_fields) {
    LocalOperator h = zero_operator(basis);
    for (const auto& [site, B] : site_fields) {
        if (B[0] != 0.0) h += B[0] * sigma(basis, site, Axis::X);
        if (B[1] != 0.0) h += B[1] * sigma(basis, site, Axis::Y);
        if (B[2] != 0.0) h += B[2] * sigma(basis, site, Axis::Z);
    }
    return h;
}

}  // namespace ehlearn
