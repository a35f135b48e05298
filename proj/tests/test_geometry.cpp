#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <vector>

#include "gibbsbox/geometry.hpp"

using namespace gibbsbox;

namespace {

// Independent O(n^2) reference for range queries.
template <std::size_t D>
std::vector<Point<D>> brute_neighbors(const std::vector<Point<D>>& pts, const Point<D>& x, double r) {
    std::vector<Point<D>> out;
    for (const auto& p : pts)
        if (!(p == x) && dist2(p, x) <= r * r) out.push_back(p);
    return out;
}

template <std::size_t D>
std::vector<std::vector<double>> sorted_coords(std::vector<Point<D>> pts) {
    std::vector<std::vector<double>> v;
    for (const auto& p : pts) v.emplace_back(p.x.begin(), p.x.end());
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

TEST_CASE("window volume and membership") {
    Window2 w = make_window(0, 0, 10, 10);
    CHECK(w.volume() == 100.0);
    CHECK(make_window(0, 0, 3, 2).volume() == 6.0);
    CHECK(w.contains(pt(0, 0)));
    CHECK(w.contains(pt(10, 10)));  // closed box
    CHECK_FALSE(w.contains(pt(10.0001, 5)));

    Window<3> c = Window<3>::cube(0, 2);
    CHECK(c.volume() == 8.0);
}

TEST_CASE("window erosion") {
    Window2 w = make_window(0, 0, 10, 10);
    Window2 e = w.eroded(1.0);
    CHECK(e.lo() == pt(1, 1));
    CHECK(e.hi() == pt(9, 9));
    CHECK(e.volume() == 64.0);
    CHECK(w.eroded(5.0).volume() == 0.0);  // degenerate -> empty
    CHECK(w.eroded(6.0).empty());
}

TEST_CASE("boundary distance") {
    Window2 w = make_window(0, 0, 10, 6);
    CHECK(w.boundary_distance(pt(5, 3)) == 3.0);
    CHECK(w.boundary_distance(pt(1, 3)) == 1.0);
    CHECK(w.boundary_distance(pt(9.5, 5.9)) == Catch::Approx(0.1));
}

TEST_CASE("insert rejects duplicates and outside points") {
    PointConfiguration2 cfg(make_window(0, 0, 1, 1), 0.25);
    CHECK(cfg.try_insert(pt(0.5, 0.5)));
    CHECK_FALSE(cfg.try_insert(pt(0.5, 0.5)));     // exact duplicate
    CHECK(cfg.try_insert(pt(0.5, 0.5 + 1e-15)));   // distinct coordinates are distinct points
    CHECK_FALSE(cfg.try_insert(pt(1.5, 0.5)));     // outside
    CHECK(cfg.size() == 2);
    CHECK_THROWS_AS(cfg.insert(pt(0.5, 0.5)), GibbsboxError);
}

TEST_CASE("query matches brute force on 100 uniform points") {
    Rng rng(7);
    Window2 w = make_window(0, 0, 1, 1);
    PointConfiguration2 cfg(w, 0.1);
    std::vector<Point2> pts;
    while (pts.size() < 100) {
        Point2 p = w.sample(rng);
        if (cfg.try_insert(p)) pts.push_back(p);
    }
    Point2 q = w.sample(rng);
    auto got = neighbors_within(cfg, q, 0.2);
    auto want = brute_neighbors(pts, q, 0.2);
    CHECK(sorted_coords(got) == sorted_coords(want));
}

TEST_CASE("range queries agree with brute force across radii and windows") {
    Rng rng(12345);
    std::size_t queries = 0;
    for (int rep = 0; rep < 60; ++rep) {
        double sx = rng.uniform(0.5, 12.0), sy = rng.uniform(0.5, 12.0);
        Window2 w = make_window(0, 0, sx, sy);
        double cell = rng.uniform(0.05, 2.0);
        PointConfiguration2 cfg(w, cell);
        std::vector<Point2> pts;
        int n = static_cast<int>(rng.index(120));
        for (int i = 0; i < n; ++i) {
            Point2 p = w.sample(rng);
            if (cfg.try_insert(p)) pts.push_back(p);
        }
        for (int q = 0; q < 20; ++q) {
            // Mix of interior centers, existing points, and larger radii than
            // the grid cell (the scan must stay exact regardless).
            Point2 c = (q % 3 == 0 && !pts.empty()) ? pts[rng.index(pts.size())] : w.sample(rng);
            double r = rng.uniform(0.0, q % 4 == 0 ? 8.0 * cell : 2.0 * cell);
            auto got = neighbors_within(cfg, c, r);
            auto want = brute_neighbors(pts, c, r);
            REQUIRE(sorted_coords(got) == sorted_coords(want));
            ++queries;
        }
    }
    CHECK(queries >= 1000);
}

TEST_CASE("neighbor query excludes the center point when present") {
    PointConfiguration2 cfg(make_window(0, 0, 1, 1));
    cfg.insert(pt(0.5, 0.5));
    cfg.insert(pt(0.6, 0.5));
    auto nb = neighbors_within(cfg, pt(0.5, 0.5), 0.5);
    REQUIRE(nb.size() == 1);
    CHECK(nb[0] == pt(0.6, 0.5));
}

TEST_CASE("insert then remove restores the point set") {
    Rng rng(3);
    Window2 w = make_window(0, 0, 2, 2);
    PointConfiguration2 cfg(w, 0.5);
    for (int i = 0; i < 30; ++i) cfg.try_insert(w.sample(rng));
    auto before = sorted_coords(cfg.points());
    Point2 p = pt(1.234, 0.567);
    REQUIRE(cfg.try_insert(p));
    std::size_t idx = SIZE_MAX;
    for (std::size_t i = 0; i < cfg.size(); ++i)
        if (cfg.point(i) == p) idx = i;
    REQUIRE(idx != SIZE_MAX);
    cfg.remove(idx);
    CHECK(sorted_coords(cfg.points()) == before);
}

TEST_CASE("random move sequences match a naive list replay") {
    Rng rng(99);
    Window2 w = make_window(0, 0, 3, 3);
    PointConfiguration2 cfg(w, 0.4);
    std::vector<Point2> naive;
    for (int i = 0; i < 10; ++i) {
        Point2 p = w.sample(rng);
        if (cfg.try_insert(p)) naive.push_back(p);
    }
    int applied = 0;
    while (applied < 50) {
        double u = rng.uniform();
        if (u < 0.4 || cfg.size() == 0) {
            Point2 p = w.sample(rng);
            cfg = apply_move(cfg, Move2::birth(p));
            naive.push_back(p);
        } else if (u < 0.7) {
            std::size_t i = rng.index(cfg.size());
            Point2 victim = cfg.point(i);
            cfg = apply_move(cfg, Move2::death(i));
            naive.erase(std::find_if(naive.begin(), naive.end(),
                                     [&](const Point2& q) { return q == victim; }));
        } else {
            std::size_t i = rng.index(cfg.size());
            Point2 from = cfg.point(i), to = w.sample(rng);
            cfg = apply_move(cfg, Move2::translate(i, to));
            *std::find_if(naive.begin(), naive.end(), [&](const Point2& q) { return q == from; }) = to;
        }
        ++applied;
        REQUIRE(sorted_coords(cfg.points()) == sorted_coords(naive));
    }
}

TEST_CASE("apply_move rejects invalid inputs") {
    PointConfiguration2 cfg(make_window(0, 0, 1, 1));
    cfg.insert(pt(0.25, 0.25));
    CHECK_THROWS_AS(apply_move(cfg, Move2::birth(pt(0.25, 0.25))), GibbsboxError);
    CHECK_THROWS_AS(apply_move(cfg, Move2::birth(pt(2, 2))), GibbsboxError);
    CHECK_THROWS_AS(apply_move(cfg, Move2::death(5)), GibbsboxError);
    CHECK_THROWS_AS(apply_move(cfg, Move2::translate(0, pt(-1, 0))), GibbsboxError);
}

TEST_CASE("apply_move is value-semantic") {
    PointConfiguration2 cfg(make_window(0, 0, 1, 1));
    cfg.insert(pt(0.1, 0.1));
    PointConfiguration2 grown = apply_move(cfg, Move2::birth(pt(0.9, 0.9)));
    CHECK(cfg.size() == 1);
    CHECK(grown.size() == 2);
}

TEST_CASE("frozen outside points participate in neighbor queries") {
    Window2 w = make_window(0, 0, 2, 2);
    PointConfiguration2 cfg(w, 0.5);
    cfg.insert(pt(1.9, 1.0));
    auto bc = BoundaryCondition2::frozen({pt(2.3, 1.0), pt(5.0, 5.0)}, w);
    auto nb = neighbors_within(cfg, pt(1.8, 1.0), 0.6, bc);
    REQUIRE(nb.size() == 2);  // the inside point and the near outside point
    CHECK_THROWS_AS(BoundaryCondition2::frozen({pt(1.0, 1.0)}, w), GibbsboxError);
}

TEST_CASE("exclusion band forbids points near the boundary") {
    Window2 w = make_window(0, 0, 10, 10);
    auto bc = BoundaryCondition2::exclusion(0.5);
    CHECK(bc.forbids(pt(0.2, 5.0), w));
    CHECK(bc.forbids(pt(5.0, 9.8), w));
    CHECK_FALSE(bc.forbids(pt(5.0, 5.0), w));
    CHECK_FALSE(bc.forbids(pt(0.5, 5.0), w));  // at exactly the band edge
    CHECK_THROWS_AS(BoundaryCondition2::exclusion(-1.0), GibbsboxError);
}

TEST_CASE("identical operation sequences give identical iteration order") {
    auto build = []() {
        Rng rng(2024);
        Window2 w = make_window(0, 0, 4, 4);
        PointConfiguration2 cfg(w, 0.3);
        for (int i = 0; i < 200; ++i) cfg.try_insert(w.sample(rng));
        for (int i = 0; i < 50; ++i) cfg.remove(rng.index(cfg.size()));
        return cfg;
    };
    PointConfiguration2 a = build(), b = build();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a.point(i) == b.point(i));
}

TEST_CASE("three-dimensional queries match brute force") {
    Rng rng(55);
    Window<3> w = Window<3>::cube(0, 2);
    PointConfiguration<3> cfg(w, 0.4);
    std::vector<Point<3>> pts;
    for (int i = 0; i < 150; ++i) {
        Point<3> p = w.sample(rng);
        if (cfg.try_insert(p)) pts.push_back(p);
    }
    for (int q = 0; q < 50; ++q) {
        Point<3> c = w.sample(rng);
        double r = rng.uniform(0.0, 1.2);
        auto got = neighbors_within(cfg, c, r);
        auto want = brute_neighbors(pts, c, r);
        REQUIRE(sorted_coords(got) == sorted_coords(want));
    }
}
