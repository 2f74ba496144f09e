#include <doctest.h>

#include <set>
#include <vector>

#include "heom/errors.hpp"
#include "heom/layout.hpp"

using namespace heom;

namespace {

// Exhaustive enumeration of occupation vectors with sum <= L.
void enumerate(int n_cor, int left, std::vector<std::uint8_t>& cur, std::set<std::vector<std::uint8_t>>& out) {
    if (static_cast<int>(cur.size()) == n_cor) {
        out.insert(cur);
        return;
    }
    for (int v = 0; v <= left; ++v) {
        cur.push_back(static_cast<std::uint8_t>(v));
        enumerate(n_cor, left - v, cur, out);
        cur.pop_back();
    }
}

} // namespace

TEST_CASE("slot counts") {
    CHECK(HierarchyLayout(1, 1).size() == 2);
    CHECK(HierarchyLayout(2, 2).size() == 6);
    CHECK(*hierarchy_size(16, 6) == 74613);
    CHECK(HierarchyLayout(16, 6).size() == 74613);
    CHECK(*hierarchy_size(6, 7) == 1716);
    CHECK(HierarchyLayout(3, 0).size() == 1);
}

TEST_CASE("layout enumerates every occupation vector once") {
    for (auto [n, l] : {std::pair{2, 2}, std::pair{3, 4}, std::pair{6, 3}}) {
        std::set<std::vector<std::uint8_t>> ref;
        std::vector<std::uint8_t> cur;
        enumerate(n, l, cur, ref);
        const HierarchyLayout lay(n, l);
        REQUIRE(lay.size() == ref.size());
        std::set<std::vector<std::uint8_t>> seen;
        for (std::size_t s = 0; s < lay.size(); ++s) {
            auto occ = lay.occupation(s);
            std::vector<std::uint8_t> v(occ.begin(), occ.end());
            int sum = 0;
            for (auto x : v) sum += x;
            CHECK(sum == lay.level(s));
            CHECK(lay.find(occ) == s);
            seen.insert(v);
        }
        CHECK(seen == ref);
    }
}

TEST_CASE("graded lexicographic order") {
    const HierarchyLayout lay(2, 2);
    const std::vector<std::vector<std::uint8_t>> expected{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
    for (std::size_t s = 0; s < expected.size(); ++s) {
        auto occ = lay.occupation(s);
        CHECK(std::vector<std::uint8_t>(occ.begin(), occ.end()) == expected[s]);
    }
    CHECK(lay.level_begin(0) == 0);
    CHECK(lay.level_begin(1) == 1);
    CHECK(lay.level_begin(2) == 3);
    CHECK(lay.level_begin(3) == 6);
}

TEST_CASE("raise and lower are mutually inverse") {
    const HierarchyLayout lay(5, 4);
    for (std::size_t s = 0; s < lay.size(); ++s) {
        for (int k = 0; k < lay.modes(); ++k) {
            const auto up = lay.raise(s, k);
            if (up != HierarchyLayout::absent) {
                CHECK(lay.lower(static_cast<std::size_t>(up), k) == static_cast<std::int32_t>(s));
                CHECK(lay.level(static_cast<std::size_t>(up)) == lay.level(s) + 1);
            } else {
                CHECK(lay.level(s) == lay.max_level());
            }
            const auto down = lay.lower(s, k);
            if (down != HierarchyLayout::absent)
                CHECK(lay.raise(static_cast<std::size_t>(down), k) == static_cast<std::int32_t>(s));
            else
                CHECK(lay.occupation(s)[k] == 0);
        }
    }
}

TEST_CASE("layout limits") {
    CHECK_THROWS_AS(HierarchyLayout(16, 6, 1000), CapacityError);
    CHECK_THROWS_AS(HierarchyLayout(0, 2), ConfigError);
    CHECK_THROWS_AS(HierarchyLayout(2, -1), ConfigError);
    CHECK_FALSE(hierarchy_size(200, 200).has_value());
    const HierarchyLayout lay(3, 2);
    const std::vector<std::uint8_t> beyond{2, 1, 0};
    CHECK_FALSE(lay.find(beyond).has_value());
}
