#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "ehlearn/lattice.hpp"

namespace ehlearn {

enum class ModelKind { Fermionic, SpinHalf };

/// Conserved quantum numbers selecting a symmetry sector. Empty counts mean
/// the full (sector-unrestricted) space.
struct SectorSpec {
    ModelKind kind;
    std::optional<int> n_up;
    std::optional<int> n_down;           // fermionic only
    std::optional<int> magnetization;    // spin-half only, M = (#up - #down)

    static SectorSpec fermion(int n_up, int n_down);
    static SectorSpec fermion_full();
    static SectorSpec spin(int magnetization);
    static SectorSpec spin_full();
};

/// Charge label of a basis configuration: (N_up, N_down) for fermions,
/// (#up spins, 0) for spin-half.
struct Charge {
    int up = 0;
    int down = 0;
    bool operator==(const Charge&) const = default;
    bool operator<(const Charge& o) const {
        return up != o.up ? up < o.up : down < o.down;
    }
};

/// Enumerated many-body basis restricted to a symmetry sector, with a
/// deterministic lexicographic ordering of the bit-encoded configurations.
///
/// Fermions: config key = (up_mask << n) | down_mask, mode ordering is
/// species-major (up modes in site order, then down modes).
/// Spin-half: config key = up-spin mask.
class SectorBasis {
  public:
    SectorBasis(LatticeGraph lattice, SectorSpec sector);

    const LatticeGraph& lattice() const { return lattice_; }
    const SectorSpec& sector() const { return sector_; }
    int n_sites() const { return lattice_.n_sites(); }
    std::size_t dim() const { return configs_.size(); }

    std::uint64_t config(std::size_t i) const { return configs_[i]; }
    /// Index of a configuration key, or -1 if not in the sector.
    long index_of(std::uint64_t key) const;

    std::uint64_t up_mask(std::uint64_t key) const;
    std::uint64_t down_mask(std::uint64_t key) const;
    static std::uint64_t make_fermion_key(std::uint64_t up, std::uint64_t down, int n);

    Charge charge_of(std::uint64_t key) const;
    /// Basis indices grouped by charge, blocks in ascending charge order.
    const std::vector<std::pair<Charge, std::vector<int>>>& charge_blocks() const;

    bool same_as(const SectorBasis& other) const { return this == &other; }

  private:
    LatticeGraph lattice_;
    SectorSpec sector_;
    std::vector<std::uint64_t> configs_;
    std::unordered_map<std::uint64_t, int> index_;
    mutable std::vector<std::pair<Charge, std::vector<int>>> blocks_;
};

using BasisPtr = std::shared_ptr<const SectorBasis>;

BasisPtr build_sector_basis(const LatticeGraph& lattice, const SectorSpec& sector);

std::uint64_t binomial(int n, int k);

}  // namespace ehlearn
