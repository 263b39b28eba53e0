#include "ehlearn/lattice.hpp"

#include <algorithm>
#include <set>

namespace ehlearn {

LatticeGraph::LatticeGraph(int n_sites, std::vector<Edge> edges,
                           std::vector<std::pair<int, int>> coords)
    : n_sites_(n_sites), edges_(std::move(edges)), coords_(std::move(coords)) {
    if (n_sites_ <= 0) throw std::invalid_argument("lattice: n_sites must be positive");
    if (static_cast<int>(coords_.size()) != n_sites_)
        throw std::invalid_argument("lattice: one coordinate per site required");
    std::set<std::pair<int, int>> seen;
    for (const auto& e : edges_) {
        if (e.a == e.b) throw std::invalid_argument("lattice: self-edge");
        if (e.a < 0 || e.a >= n_sites_ || e.b < 0 || e.b >= n_sites_)
            throw std::invalid_argument("lattice: edge endpoint out of range");
        auto key = std::minmax(e.a, e.b);
        if (!seen.insert(key).second)
            throw std::invalid_argument("lattice: duplicate edge");
    }
}

LatticeGraph LatticeGraph::chain(int n_sites) {
    std::vector<Edge> edges;
    std::vector<std::pair<int, int>> coords;
    for (int i = 0; i < n_sites; ++i) coords.emplace_back(i, 0);
    for (int i = 0; i + 1 < n_sites; ++i)
        edges.push_back({i, i + 1, BondTag::Horizontal});
    return LatticeGraph(n_sites, std::move(edges), std::move(coords));
}

LatticeGraph LatticeGraph::ladder(int length, bool with_diagonals) {
    const int n = 2 * length;
    std::vector<Edge> edges;
    std::vector<std::pair<int, int>> coords(n);
    for (int leg = 0; leg < 2; ++leg)
        for (int x = 0; x < length; ++x) coords[leg * length + x] = {x, leg};
    for (int leg = 0; leg < 2; ++leg)
        for (int x = 0; x + 1 < length; ++x)
            edges.push_back({leg * length + x, leg * length + x + 1, BondTag::Horizontal});
    for (int x = 0; x < length; ++x)
        edges.push_back({x, length + x, BondTag::Vertical});
    if (with_diagonals)
        for (int x = 0; x + 1 < length; ++x)
            edges.push_back({x, length + x + 1, BondTag::Diagonal});
    return LatticeGraph(n, std::move(edges), std::move(coords));
}

bool LatticeGraph::has_edge(int a, int b) const {
    for (const auto& e : edges_)
        if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) return true;
    return false;
}

std::vector<int> LatticeGraph::neighbors(int site) const {
    std::vector<int> out;
    for (const auto& e : edges_) {
        if (e.a == site) out.push_back(e.b);
        if (e.b == site) out.push_back(e.a);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace ehlearn
