#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>

#include "qmt/tree.hpp"

#include "oracles.hpp"

using namespace qmt;

TEST_CASE("root coordinate") {
    const SiteCoord r = root_site(2);
    CHECK(r.is_root());
    CHECK(r.level() == 0);
    CHECK(r.to_string() == "()");
    CHECK(r.child(1).to_string() == "(1)");
    CHECK(r.child(1).parent() == r);
}

TEST_CASE("level enumeration matches the expected vertex lists") {
    const Level l22 = enumerate_level(2, 2);
    REQUIRE(l22.vertices.size() == 4);
    CHECK(l22.vertices[0].path == std::vector<int>{1, 1});
    CHECK(l22.vertices[1].path == std::vector<int>{1, 2});
    CHECK(l22.vertices[2].path == std::vector<int>{2, 1});
    CHECK(l22.vertices[3].path == std::vector<int>{2, 2});

    const Level l30 = enumerate_level(3, 0);
    REQUIRE(l30.vertices.size() == 1);
    CHECK(l30.vertices[0].is_root());

    const Level l32 = enumerate_level(3, 2);
    REQUIRE(l32.vertices.size() == 9);
    CHECK(l32.vertices.front().path == std::vector<int>{1, 1});
    CHECK(l32.vertices.back().path == std::vector<int>{3, 3});
}

TEST_CASE("level sizes are powers of the order") {
    for (int k = 1; k <= 3; ++k) {
        std::size_t expected = 1;
        for (int n = 0; n <= 4; ++n) {
            CHECK(enumerate_level(k, n).vertices.size() == expected);
            expected *= static_cast<std::size_t>(k);
        }
    }
}

TEST_CASE("ball enumeration and sizes") {
    for (int k = 1; k <= 3; ++k) {
        std::size_t running = 0;
        for (int n = 0; n <= 3; ++n) {
            running += enumerate_level(k, n).vertices.size();
            const auto sites = lambda_sites(k, n);
            CHECK(sites.size() == running);
            CHECK(lambda_size(k, n) == running);
            // Level ascending, lexicographic within a level: strictly sorted.
            CHECK(std::is_sorted(sites.begin(), sites.end()));
            // The smaller ball is a prefix of the larger one.
            if (n > 0) {
                const auto prev = lambda_sites(k, n - 1);
                for (std::size_t i = 0; i < prev.size(); ++i) CHECK(sites[i] == prev[i]);
            }
        }
    }
}

TEST_CASE("direct successors in branch order") {
    const auto r2 = direct_successors(root_site(2));
    REQUIRE(r2.size() == 2);
    CHECK(r2[0].path == std::vector<int>{1});
    CHECK(r2[1].path == std::vector<int>{2});

    const SiteCoord x({1, 2}, 2);
    const auto s = direct_successors(x);
    REQUIRE(s.size() == 2);
    CHECK(s[0].path == std::vector<int>{1, 2, 1});
    CHECK(s[1].path == std::vector<int>{1, 2, 2});

    const SiteCoord y({2}, 3);
    const auto s3 = direct_successors(y);
    REQUIRE(s3.size() == 3);
    CHECK(s3[0].path == std::vector<int>{2, 1});
    CHECK(s3[1].path == std::vector<int>{2, 2});
    CHECK(s3[2].path == std::vector<int>{2, 3});

    const auto rev = direct_successors(y, true);
    REQUIRE(rev.size() == 3);
    CHECK(rev[0].path == std::vector<int>{2, 3});
    CHECK(rev[2].path == std::vector<int>{2, 1});
}

TEST_CASE("every deeper vertex has exactly one predecessor in the level above") {
    for (int k = 1; k <= 3; ++k) {
        for (int n = 0; n <= 2; ++n) {
            const Level upper = enumerate_level(k, n);
            const Level lower = enumerate_level(k, n + 1);
            for (const auto& v : lower.vertices) {
                int parents = 0;
                for (const auto& u : upper.vertices) {
                    const auto succ = direct_successors(u);
                    parents += static_cast<int>(std::count(succ.begin(), succ.end(), v));
                }
                CHECK(parents == 1);
            }
        }
    }
}

TEST_CASE("graph distance agrees with breadth-first search") {
    const SiteCoord r = root_site(2);
    CHECK(tree_distance(r, r) == 0);
    CHECK(tree_distance(r.child(1), r.child(2)) == 2);
    CHECK(tree_distance(r.child(1).child(1), r.child(1)) == 1);

    for (int k = 1; k <= 3; ++k) {
        const auto sites = lambda_sites(k, 3);
        for (const auto& x : sites) {
            for (const auto& y : sites) {
                CHECK(tree_distance(x, y) == oracle::bfs_distance(k, x, y, 3));
            }
        }
    }
}

TEST_CASE("distance is a metric on the radius-3 ball") {
    for (int k = 1; k <= 3; ++k) {
        const auto sites = lambda_sites(k, 3);
        for (const auto& x : sites) {
            for (const auto& y : sites) {
                const int dxy = tree_distance(x, y);
                CHECK(dxy == tree_distance(y, x));
                CHECK((dxy == 0) == (x == y));
                for (const auto& z : sites) {
                    CHECK(dxy <= tree_distance(x, z) + tree_distance(z, y));
                }
            }
        }
    }
}

TEST_CASE("position within a level") {
    for (int k = 2; k <= 3; ++k) {
        const Level l = enumerate_level(k, 2);
        for (std::size_t i = 0; i < l.vertices.size(); ++i) {
            CHECK(site_index_in_level(l.vertices[i]) == i);
        }
    }
    CHECK(site_index_in_level(root_site(2)) == 0);
}

TEST_CASE("ternary relation: distinct children of a common predecessor") {
    const SiteCoord z = root_site(2).child(1);
    const SiteCoord a = z.child(1);
    const SiteCoord b = z.child(2);
    CHECK(is_ternary(a, z, b));
    CHECK(is_ternary(b, z, a));
    CHECK_FALSE(is_ternary(a, z, a));            // not distinct
    CHECK_FALSE(is_ternary(a, root_site(2), b)); // wrong predecessor
    CHECK_FALSE(is_ternary(z, a, b));            // z is not a child of a

    // Exhaustive count on one generation: each predecessor contributes
    // k*(k-1) ordered ternary pairs.
    for (int k = 2; k <= 3; ++k) {
        const SiteCoord p = root_site(k);
        const auto kids = direct_successors(p);
        int count = 0;
        for (const auto& u : kids) {
            for (const auto& v : kids) {
                if (is_ternary(u, p, v)) ++count;
            }
        }
        CHECK(count == k * (k - 1));
    }
}
