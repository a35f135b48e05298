#pragma once

// Planar disk geometry: the two-circle lens area, exact exposed-arc
// computation via angular-interval merging, and stratified Monte-Carlo
// quadrature for areas of disk differences.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <optional>
#include <vector>

#include "geometry.hpp"
#include "util.hpp"

namespace gibbsbox {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Area of the intersection of two radius-R disks with centers at distance d.
inline double lens_area(double d, double R) {
    if (d >= 2.0 * R) return 0.0;
    if (d <= 0.0) return std::numbers::pi * R * R;
    return 2.0 * R * R * std::acos(d / (2.0 * R)) - (d / 2.0) * std::sqrt(4.0 * R * R - d * d);
}

// Angle (in [0, 2pi]) of the circle of radius R around c left uncovered by
// the equal-radius disks centered at the given neighbors. A neighbor at
// distance d < 2R covers the angular interval of half-width acos(d/(2R))
// centered on its direction; intervals are merged exactly.
inline double exposed_angle(const Point2& c, double R, const std::vector<Point2>& neighbors) {
    std::vector<std::pair<double, double>> iv;  // non-wrapping [a,b] in [0, 2pi]
    for (const auto& nb : neighbors) {
        double d = dist(c, nb);
        if (d >= 2.0 * R) continue;
        if (d <= 0.0) return 0.0;  // coincident center covers the whole circle
        double mid = std::atan2(nb[1] - c[1], nb[0] - c[0]);
        double w = std::acos(std::clamp(d / (2.0 * R), -1.0, 1.0));
        double a = mid - w, b = mid + w;
        a = std::fmod(a + 2.0 * kTwoPi, kTwoPi);
        b = a + 2.0 * w;
        if (b <= kTwoPi) {
            iv.emplace_back(a, b);
        } else {  // wraps past 2pi: split
            iv.emplace_back(a, kTwoPi);
            iv.emplace_back(0.0, b - kTwoPi);
        }
    }
    if (iv.empty()) return kTwoPi;
    std::sort(iv.begin(), iv.end());
    double covered = 0.0, cur_a = iv[0].first, cur_b = iv[0].second;
    for (std::size_t i = 1; i < iv.size(); ++i) {
        if (iv[i].first <= cur_b) {
            cur_b = std::max(cur_b, iv[i].second);
        } else {
            covered += cur_b - cur_a;
            cur_a = iv[i].first;
            cur_b = iv[i].second;
        }
    }
    covered += cur_b - cur_a;
    return std::max(0.0, kTwoPi - covered);
}

// Deterministic per-location seed so repeated quadrature of the same disk
// reuses the same stratified draw.
inline std::uint64_t point_seed(std::uint64_t base, const Point2& p) {
    std::uint64_t a, b;
    std::memcpy(&a, &p.x[0], sizeof a);
    std::memcpy(&b, &p.x[1], sizeof b);
    return derive_seed(base, splitmix64(a) ^ b);
}

// Area of B(x,R) minus the union of equal-radius disks at `cover`, optionally
// intersected with `clip`. Stratified Monte-Carlo over the bounding square of
// B(x,R): one jittered sample per stratum.
inline double added_area_mc(const Point2& x, double R, const std::vector<Point2>& cover,
                            const std::optional<Window2>& clip, int samples, std::uint64_t seed) {
    const int k = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(samples)))));
    const double side = 2.0 * R / static_cast<double>(k);
    const double cell_area = side * side;
    const double R2 = R * R;
    Rng rng(seed);
    long hits = 0;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            Point2 s = pt(x[0] - R + (i + rng.uniform()) * side, x[1] - R + (j + rng.uniform()) * side);
            double dx = s[0] - x[0], dy = s[1] - x[1];
            if (dx * dx + dy * dy > R2) continue;
            if (clip && !clip->contains(s)) continue;
            bool covered = false;
            for (const auto& c : cover) {
                if (dist2(s, c) <= R2) {
                    covered = true;
                    break;
                }
            }
            if (!covered) ++hits;
        }
    }
    return static_cast<double>(hits) * cell_area;
}

}  // namespace gibbsbox
