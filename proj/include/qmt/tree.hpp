#ifndef QMT_TREE_HPP
#define QMT_TREE_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace qmt {

// Vertex of the rooted Cayley tree of order k.  The root is the empty path;
// every other vertex is the path of branch choices (each in 1..k) leading to
// it from the root.  Vertices are ordered by level first, then
// lexicographically within a level.
struct SiteCoord {
    std::vector<int> path;  // branch choices from the root, each in 1..k
    int order = 0;          // tree order k >= 1

    SiteCoord() = default;
    SiteCoord(std::vector<int> p, int k);

    int level() const { return static_cast<int>(path.size()); }
    bool is_root() const { return path.empty(); }
    SiteCoord parent() const;          // error on the root
    SiteCoord child(int branch) const; // branch in 1..k

    std::string to_string() const;     // "()" for the root, "(1,2)" otherwise

    bool operator==(const SiteCoord& o) const { return order == o.order && path == o.path; }
    bool operator!=(const SiteCoord& o) const { return !(*this == o); }
    bool operator<(const SiteCoord& o) const;
};

SiteCoord root_site(int k);

// All k direct successors of x, in ascending branch order (descending when
// reversed is set).
std::vector<SiteCoord> direct_successors(const SiteCoord& x, bool reversed = false);

// Vertices at level n, lexicographically ordered; size k^n.
struct Level {
    int n = 0;
    std::vector<SiteCoord> vertices;
};
Level enumerate_level(int k, int n);

// Vertices of the ball of radius n around the root, level ascending and
// lexicographic within each level; size (k^{n+1}-1)/(k-1), or n+1 when k = 1.
std::vector<SiteCoord> lambda_sites(int k, int n);
std::size_t lambda_size(int k, int n);

// Graph distance between two vertices (paths to the nearest common ancestor).
int tree_distance(const SiteCoord& x, const SiteCoord& y);

// Position of x within the lexicographic enumeration of its level.
std::size_t site_index_in_level(const SiteCoord& x);

// True when x and y are distinct vertices sharing the direct predecessor z.
bool is_ternary(const SiteCoord& x, const SiteCoord& z, const SiteCoord& y);

} // namespace qmt

#endif
