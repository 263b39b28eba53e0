#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ehlearn {

enum class BondTag { Horizontal, Vertical, Diagonal };

struct Edge {
    int a;
    int b;
    BondTag tag = BondTag::Horizontal;
};

/// Lattice connectivity with integer site coordinates (jx, jy).
class LatticeGraph {
  public:
    LatticeGraph(int n_sites, std::vector<Edge> edges,
                 std::vector<std::pair<int, int>> coords);

    static LatticeGraph chain(int n_sites);
    /// 2xL ladder, site index = leg*L + x (leg 0 first). Diagonal bonds
    /// connect (x, leg 0) to (x+1, leg 1).
    static LatticeGraph ladder(int length, bool with_diagonals = false);

    int n_sites() const { return n_sites_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::pair<int, int> coord(int site) const { return coords_.at(site); }

    bool has_edge(int a, int b) const;
    std::vector<int> neighbors(int site) const;

  private:
    int n_sites_;
    std::vector<Edge> edges_;
    std::vector<std::pair<int, int>> coords_;
};

}  // namespace ehlearn
