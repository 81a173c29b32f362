#include "qmt/tree.hpp"

#include <algorithm>
#include <stdexcept>

namespace qmt {

SiteCoord::SiteCoord(std::vector<int> p, int k) : path(std::move(p)), order(k) {
    if (k < 1) throw std::invalid_argument("tree order must be >= 1");
    for (int b : path)
        if (b < 1 || b > k) throw std::invalid_argument("branch index out of range 1..k");
}

SiteCoord SiteCoord::parent() const {
    if (is_root()) throw std::invalid_argument("the root has no predecessor");
    std::vector<int> p(path.begin(), path.end() - 1);
    return SiteCoord(std::move(p), order);
}

SiteCoord SiteCoord::child(int branch) const {
    if (branch < 1 || branch > order) throw std::invalid_argument("branch index out of range 1..k");
    std::vector<int> p = path;
    p.push_back(branch);
    return SiteCoord(std::move(p), order);
}

std::string SiteCoord::to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(path[i]);
    }
    return s + ")";
}

bool SiteCoord::operator<(const SiteCoord& o) const {
    if (path.size() != o.path.size()) return path.size() < o.path.size();
    return std::lexicographical_compare(path.begin(), path.end(), o.path.begin(), o.path.end());
}

SiteCoord root_site(int k) { return SiteCoord({}, k); }

std::vector<SiteCoord> direct_successors(const SiteCoord& x, bool reversed) {
    std::vector<SiteCoord> out;
    out.reserve(static_cast<std::size_t>(x.order));
    for (int b = 1; b <= x.order; ++b) out.push_back(x.child(b));
    if (reversed) std::reverse(out.begin(), out.end());
    return out;
}

Level enumerate_level(int k, int n) {
    if (k < 1) throw std::invalid_argument("tree order must be >= 1");
    if (n < 0) throw std::invalid_argument("level must be >= 0");
    Level lv;
    lv.n = n;
    lv.vertices.push_back(root_site(k));
    for (int depth = 0; depth < n; ++depth) {
        std::vector<SiteCoord> next;
        next.reserve(lv.vertices.size() * static_cast<std::size_t>(k));
        for (const auto& v : lv.vertices)
            for (int b = 1; b <= k; ++b) next.push_back(v.child(b));
        lv.vertices = std::move(next);
    }
    return lv;
}

std::vector<SiteCoord> lambda_sites(int k, int n) {
    std::vector<SiteCoord> out;
    for (int m = 0; m <= n; ++m) {
        Level lv = enumerate_level(k, m);
        out.insert(out.end(), lv.vertices.begin(), lv.vertices.end());
    }
    return out;
}

std::size_t lambda_size(int k, int n) {
    std::size_t total = 0, w = 1;
    for (int m = 0; m <= n; ++m) {
        total += w;
        w *= static_cast<std::size_t>(k);
    }
    return total;
}

int tree_distance(const SiteCoord& x, const SiteCoord& y) {
    if (x.order != y.order) throw std::invalid_argument("vertices from trees of different order");
    std::size_t common = 0;
    while (common < x.path.size() && common < y.path.size() && x.path[common] == y.path[common])
        ++common;
    return static_cast<int>(x.path.size() + y.path.size() - 2 * common);
}

bool is_ternary(const SiteCoord& x, const SiteCoord& z, const SiteCoord& y) {
    if (x == y) return false;
    if (x.is_root() || y.is_root()) return false;
    return x.parent() == z && y.parent() == z;
}

std::size_t site_index_in_level(const SiteCoord& x) {
    std::size_t idx = 0;
    for (int branch : x.path) {
        idx = idx * static_cast<std::size_t>(x.order) + static_cast<std::size_t>(branch - 1);
    }
    return idx;
}

} // namespace qmt
