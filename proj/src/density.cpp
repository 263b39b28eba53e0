#include "ehlearn/density.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace ehlearn {

DensityMatrix::DensityMatrix(BasisPtr basis, MatXcd rho)
    : basis_(std::move(basis)), rho_(std::move(rho)) {
    if (rho_.rows() != rho_.cols() ||
        static_cast<std::size_t>(rho_.rows()) != basis_->dim())
        throw std::invalid_argument("density: matrix dimension != basis dimension");
}

void DensityMatrix::validate() const {
    if (std::abs(rho_.trace() - cd(1.0)) > 1e-10)
        throw std::logic_error("density: trace != 1");
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::logic_error("density: not Hermitian");
    Eigen::SelfAdjointEigenSolver<MatXcd> es(rho_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw std::logic_error("density: negative eigenvalue");
}

int SubsystemSpace::local_of(int global_site) const {
    auto it = std::lower_bound(sites.begin(), sites.end(), global_site);
    if (it == sites.end() || *it != global_site)
        throw std::invalid_argument("subsystem: site not in subsystem");
    return static_cast<int>(it - sites.begin());
}

SubsystemSpace make_subsystem_space(const LatticeGraph& lattice,
                                    std::vector<int> sites, ModelKind kind) {
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    if (sites.empty()) throw std::invalid_argument("subsystem: empty site list");
    if (sites.front() < 0 || sites.back() >= lattice.n_sites())
        throw std::invalid_argument("subsystem: site index out of range");

    auto local = [&](int g) {
        return static_cast<int>(std::lower_bound(sites.begin(), sites.end(), g) -
                                sites.begin());
    };
    std::vector<Edge> edges;
    for (const Edge& e : lattice.edges()) {
        const bool a_in = std::binary_search(sites.begin(), sites.end(), e.a);
        const bool b_in = std::binary_search(sites.begin(), sites.end(), e.b);
        if (a_in && b_in) edges.push_back({local(e.a), local(e.b), e.tag});
    }
    std::vector<std::pair<int, int>> coords;
    coords.reserve(sites.size());
    for (int g : sites) coords.push_back(lattice.coord(g));

    LatticeGraph sub_lattice(static_cast<int>(sites.size()), std::move(edges),
                             std::move(coords));
    SectorSpec spec = kind == ModelKind::Fermionic ? SectorSpec::fermion_full()
                                                   : SectorSpec::spin_full();
    return {std::move(sites), build_sector_basis(sub_lattice, spec)};
}

namespace {

// Per global key bit: does it belong to the subsystem, and which bit of the
// subsystem / environment key it maps to.
struct BitMap {
    std::vector<char> in_sub;
    std::vector<int> dest_bit;
};

BitMap make_bit_map(const SectorBasis& full, const std::vector<int>& sub_sites) {
    const int n = full.n_sites();
    const bool fermionic = full.sector().kind == ModelKind::Fermionic;
    const int n_bits = fermionic ? 2 * n : n;
    const int ns = static_cast<int>(sub_sites.size());

    std::vector<int> local(n, -1);
    for (int i = 0; i < ns; ++i) local[sub_sites[i]] = i;
    std::vector<int> env_local(n, -1);
    int ne = 0;
    for (int s = 0; s < n; ++s)
        if (local[s] < 0) env_local[s] = ne++;

    BitMap bm{std::vector<char>(n_bits), std::vector<int>(n_bits)};
    for (int b = 0; b < n_bits; ++b) {
        const int site = fermionic ? b % n : b;
        const int species = fermionic ? b / n : 0;  // 0 = down bits, 1 = up bits
        if (local[site] >= 0) {
            bm.in_sub[b] = 1;
            bm.dest_bit[b] = species * ns + local[site];
        } else {
            bm.in_sub[b] = 0;
            bm.dest_bit[b] = species * ne + env_local[site];
        }
    }
    return bm;
}

struct SplitConfig {
    std::uint64_t sub_key;
    std::uint64_t env_key;
    double sign;
};

// Split a configuration into subsystem and environment keys. The sign is the
// parity of the mode permutation that brings the occupied creation operators
// from ascending global order to (subsystem block, environment block) order;
// both blocks keep their internal ascending order, so inversions are exactly
// the (env below, sub above) occupied pairs.
SplitConfig split_config(std::uint64_t key, const BitMap& bm, bool fermionic) {
    SplitConfig out{0, 0, 1.0};
    int env_seen = 0, inversions = 0;
    for (std::uint64_t rest = key; rest;) {
        const int b = std::countr_zero(rest);
        rest &= rest - 1;
        if (bm.in_sub[b]) {
            out.sub_key |= std::uint64_t{1} << bm.dest_bit[b];
            inversions += env_seen;
        } else {
            out.env_key |= std::uint64_t{1} << bm.dest_bit[b];
            ++env_seen;
        }
    }
    if (fermionic && (inversions % 2)) out.sign = -1.0;
    return out;
}

}  // namespace

DensityMatrix partial_trace(const VecXcd& psi, const SectorBasis& full,
                            const std::vector<int>& subsystem_sites) {
    if (static_cast<std::size_t>(psi.size()) != full.dim())
        throw std::invalid_argument("partial_trace: state dimension != basis dimension");
    const bool fermionic = full.sector().kind == ModelKind::Fermionic;
    SubsystemSpace sub =
        make_subsystem_space(full.lattice(), subsystem_sites, full.sector().kind);
    const BitMap bm = make_bit_map(full, sub.sites);

    const int ne = full.n_sites() - static_cast<int>(sub.sites.size());
    const std::size_t env_dim = std::uint64_t{1} << (fermionic ? 2 * ne : ne);
    MatXcd amps = MatXcd::Zero(sub.basis->dim(), env_dim);
    for (std::size_t i = 0; i < full.dim(); ++i) {
        const SplitConfig sc = split_config(full.config(i), bm, fermionic);
        const long r = sub.basis->index_of(sc.sub_key);
        amps(r, sc.env_key) += sc.sign * psi(i);
    }

    DensityMatrix rho(sub.basis, amps * amps.adjoint());
    rho.validate();
    return rho;
}

DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& subsystem_sites) {
    const SectorBasis& full = *rho.basis();
    const bool fermionic = full.sector().kind == ModelKind::Fermionic;
    SubsystemSpace sub =
        make_subsystem_space(full.lattice(), subsystem_sites, full.sector().kind);
    const BitMap bm = make_bit_map(full, sub.sites);

    // group configurations by environment key
    std::map<std::uint64_t, std::vector<std::pair<long, double>>> groups;  // env -> (i, sign*row)
    std::vector<long> sub_index(full.dim());
    for (std::size_t i = 0; i < full.dim(); ++i) {
        const SplitConfig sc = split_config(full.config(i), bm, fermionic);
        sub_index[i] = sub.basis->index_of(sc.sub_key);
        groups[sc.env_key].push_back({static_cast<long>(i), sc.sign});
    }

    MatXcd out = MatXcd::Zero(sub.basis->dim(), sub.basis->dim());
    for (const auto& [env, members] : groups)
        for (const auto& [i, si] : members)
            for (const auto& [j, sj] : members)
                out(sub_index[i], sub_index[j]) += si * sj * rho.matrix()(i, j);

    DensityMatrix reduced(sub.basis, std::move(out));
    reduced.validate();
    return reduced;
}

}  // namespace ehlearn
