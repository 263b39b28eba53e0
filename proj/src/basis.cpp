#include "ehlearn/basis.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

namespace ehlearn {

SectorSpec SectorSpec::fermion(int n_up, int n_down) {
    return {ModelKind::Fermionic, n_up, n_down, std::nullopt};
}
SectorSpec SectorSpec::fermion_full() {
    return {ModelKind::Fermionic, std::nullopt, std::nullopt, std::nullopt};
}
SectorSpec SectorSpec::spin(int magnetization) {
    return {ModelKind::SpinHalf, std::nullopt, std::nullopt, magnetization};
}
SectorSpec SectorSpec::spin_full() {
    return {ModelKind::SpinHalf, std::nullopt, std::nullopt, std::nullopt};
}

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::uint64_t r = 1;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

namespace {

// all n-bit masks with given popcount, ascending
std::vector<std::uint64_t> masks_with_popcount(int n, int k) {
    std::vector<std::uint64_t> out;
    out.reserve(binomial(n, k));
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m)
        if (std::popcount(m) == k) out.push_back(m);
    return out;
}

std::vector<std::uint64_t> all_masks(int n) {
    std::vector<std::uint64_t> out(std::uint64_t{1} << n);
    for (std::uint64_t m = 0; m < out.size(); ++m) out[m] = m;
    return out;
}

}  // namespace

SectorBasis::SectorBasis(LatticeGraph lattice, SectorSpec sector)
    : lattice_(std::move(lattice)), sector_(sector) {
    const int n = lattice_.n_sites();
    if (n > 28) throw std::invalid_argument("basis: lattice too large");
    if (sector_.kind == ModelKind::Fermionic) {
        if (sector_.n_up.has_value() != sector_.n_down.has_value())
            throw std::invalid_argument("basis: N_up and N_down must be given together");
        std::vector<std::uint64_t> ups, downs;
        if (sector_.n_up) {
            const int nu = *sector_.n_up, nd = *sector_.n_down;
            if (nu < 0 || nu > n || nd < 0 || nd > n)
                throw std::invalid_argument("basis: particle number out of range [0, " +
                                            std::to_string(n) + "]");
            ups = masks_with_popcount(n, nu);
            downs = masks_with_popcount(n, nd);
        } else {
            ups = all_masks(n);
            downs = all_masks(n);
        }
        configs_.reserve(ups.size() * downs.size());
        for (auto u : ups)
            for (auto d : downs) configs_.push_back((u << n) | d);
    } else {
        if (sector_.magnetization) {
            const int m = *sector_.magnetization;
            if (std::abs(m) > n || ((n + m) % 2) != 0)
                throw std::invalid_argument(
                    "basis: magnetization must satisfy |M| <= n and M = n (mod 2)");
            configs_ = masks_with_popcount(n, (n + m) / 2);
        } else {
            configs_ = all_masks(n);
        }
    }
    std::sort(configs_.begin(), configs_.end());
    index_.reserve(configs_.size() * 2);
    for (std::size_t i = 0; i < configs_.size(); ++i)
        index_[configs_[i]] = static_cast<int>(i);
}

long SectorBasis::index_of(std::uint64_t key) const {
    auto it = index_.find(key);
    return it == index_.end() ? -1 : it->second;
}

std::uint64_t SectorBasis::up_mask(std::uint64_t key) const {
    return sector_.kind == ModelKind::Fermionic ? key >> n_sites() : key;
}

std::uint64_t SectorBasis::down_mask(std::uint64_t key) const {
    return sector_.kind == ModelKind::Fermionic
               ? key & ((std::uint64_t{1} << n_sites()) - 1)
               : 0;
}

std::uint64_t SectorBasis::make_fermion_key(std::uint64_t up, std::uint64_t down, int n) {
    return (up << n) | down;
}

Charge SectorBasis::charge_of(std::uint64_t key) const {
    return {std::popcount(up_mask(key)), std::popcount(down_mask(key))};
}

const std::vector<std::pair<Charge, std::vector<int>>>& SectorBasis::charge_blocks() const {
    if (blocks_.empty()) {
        std::vector<std::pair<Charge, std::vector<int>>> blocks;
        for (std::size_t i = 0; i < configs_.size(); ++i) {
            Charge q = charge_of(configs_[i]);
            auto it = std::find_if(blocks.begin(), blocks.end(),
                                   [&](const auto& b) { return b.first == q; });
            if (it == blocks.end()) {
                blocks.push_back({q, {static_cast<int>(i)}});
            } else {
                it->second.push_back(static_cast<int>(i));
            }
        }
        std::sort(blocks.begin(), blocks.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        blocks_ = std::move(blocks);
    }
    return blocks_;
}

BasisPtr build_sector_basis(const LatticeGraph& lattice, const SectorSpec& sector) {
    return std::make_shared<SectorBasis>(lattice, sector);
}

}  // namespace ehlearn
