#pragma once

// Points, rectangular windows, boundary conditions and a cell-grid indexed
// point configuration. Configurations are simple (no duplicate points) and
// live inside a bounded window; range queries are exact for any radius.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "util.hpp"

namespace gibbsbox {

template <std::size_t D>
struct Point {
    std::array<double, D> x{};

    double& operator[](std::size_t i) { return x[i]; }
    double operator[](std::size_t i) const { return x[i]; }
    bool operator==(const Point& o) const { return x == o.x; }
};

using Point2 = Point<2>;
using Point3 = Point<3>;

inline Point2 pt(double a, double b) { return Point2{{a, b}}; }

template <std::size_t D>
double dist2(const Point<D>& a, const Point<D>& b) {
    double s = 0.0;
    for (std::size_t d = 0; d < D; ++d) {
        double t = a[d] - b[d];
        s += t * t;
    }
    return s;
}

template <std::size_t D>
double dist(const Point<D>& a, const Point<D>& b) {
    return std::sqrt(dist2(a, b));
}

// Closed axis-aligned box; may be empty after erosion.
template <std::size_t D>
class Window {
  public:
    Window() = default;
    Window(Point<D> lo, Point<D> hi) : lo_(lo), hi_(hi) {}

    static Window cube(double lo, double hi) {
        Point<D> a, b;
        for (std::size_t d = 0; d < D; ++d) {
            a[d] = lo;
            b[d] = hi;
        }
        return Window(a, b);
    }

    const Point<D>& lo() const { return lo_; }
    const Point<D>& hi() const { return hi_; }
    double side(std::size_t d) const { return hi_[d] - lo_[d]; }

    bool empty() const {
        for (std::size_t d = 0; d < D; ++d)
            if (hi_[d] <= lo_[d]) return true;
        return false;
    }

    double volume() const {
        if (empty()) return 0.0;
        double v = 1.0;
        for (std::size_t d = 0; d < D; ++d) v *= side(d);
        return v;
    }

    bool contains(const Point<D>& p) const {
        for (std::size_t d = 0; d < D; ++d)
            if (p[d] < lo_[d] || p[d] > hi_[d]) return false;
        return true;
    }

    Window eroded(double r) const {
        Point<D> a = lo_, b = hi_;
        for (std::size_t d = 0; d < D; ++d) {
            a[d] += r;
            b[d] -= r;
        }
        return Window(a, b);
    }

    // Distance from p to the boundary of the window (p assumed inside).
    double boundary_distance(const Point<D>& p) const {
        double m = kInf;
        for (std::size_t d = 0; d < D; ++d) {
            m = std::min(m, p[d] - lo_[d]);
            m = std::min(m, hi_[d] - p[d]);
        }
        return m;
    }

    Point<D> sample(Rng& rng) const {
        Point<D> p;
        for (std::size_t d = 0; d < D; ++d) p[d] = rng.uniform(lo_[d], hi_[d]);
        return p;
    }

    bool operator==(const Window& o) const { return lo_ == o.lo_ && hi_ == o.hi_; }

  private:
    Point<D> lo_{};
    Point<D> hi_{};
};

using Window2 = Window<2>;

inline Window2 make_window(double x0, double y0, double x1, double y1) {
    return Window2(pt(x0, y0), pt(x1, y1));
}

// Outside information for finite-volume conditioning: free (nothing outside),
// a frozen configuration outside the window, or an exclusion band of given
// width just inside the boundary that must stay empty.
template <std::size_t D>
struct BoundaryCondition {
    enum class Mode { free, frozen_outside, exclusion_band };

    Mode mode = Mode::free;
    std::vector<Point<D>> outside;  // frozen_outside only
    double band = 0.0;              // exclusion_band only

    static BoundaryCondition free_boundary() { return {}; }

    static BoundaryCondition frozen(std::vector<Point<D>> pts, const Window<D>& win) {
        for (const auto& p : pts)
            if (win.contains(p)) throw GibbsboxError("frozen boundary point lies inside the window");
        BoundaryCondition bc;
        bc.mode = Mode::frozen_outside;
        bc.outside = std::move(pts);
        return bc;
    }

    static BoundaryCondition exclusion(double width) {
        if (width < 0.0) throw GibbsboxError("exclusion band width must be nonnegative");
        BoundaryCondition bc;
        bc.mode = Mode::exclusion_band;
        bc.band = width;
        return bc;
    }

    // True if a point of the window is forbidden by the exclusion band.
    bool forbids(const Point<D>& p, const Window<D>& win) const {
        if (mode != Mode::exclusion_band || band <= 0.0) return false;
        return win.contains(p) && win.boundary_distance(p) < band;
    }

    template <typename Fn>
    void for_each_outside_within(const Point<D>& c, double r, Fn&& fn) const {
        if (mode != Mode::frozen_outside) return;
        const double r2 = r * r;
        for (const auto& p : outside) {
            double d2 = dist2(c, p);
            if (d2 <= r2) fn(p, d2);
        }
    }
};

using BoundaryCondition2 = BoundaryCondition<2>;

// Finite point configuration with a uniform cell grid over its window.
// Mutating operations keep the grid synchronized; copies are independent.
template <std::size_t D>
class PointConfiguration {
  public:
    PointConfiguration() : PointConfiguration(Window<D>::cube(0.0, 1.0)) {}

    explicit PointConfiguration(const Window<D>& win, double cell_hint = 0.0) : win_(win) {
        // Cap the total cell count; the ring scan stays exact for any radius.
        const double per_axis_cap = std::floor(std::pow(1048576.0, 1.0 / D));
        std::size_t total = 1;
        for (std::size_t d = 0; d < D; ++d) {
            double side = std::max(win_.side(d), 1e-12);
            double want = cell_hint > 0.0 ? std::floor(side / cell_hint) : 32.0;
            double n = std::clamp(want, 1.0, per_axis_cap);
            ncell_[d] = static_cast<std::size_t>(n);
            cw_[d] = side / static_cast<double>(ncell_[d]);
            total *= ncell_[d];
        }
        cells_.resize(total);
    }

    const Window<D>& window() const { return win_; }
    std::size_t size() const { return pts_.size(); }
    const Point<D>& point(std::size_t i) const { return pts_[i]; }
    const std::vector<Point<D>>& points() const { return pts_; }

    bool contains_exact(const Point<D>& p) const {
        if (!win_.contains(p)) return false;
        for (std::uint32_t i : cells_[cell_index(p)])
            if (pts_[i] == p) return true;
        return false;
    }

    // Rejects points outside the window and exact-coordinate duplicates.
    bool try_insert(const Point<D>& p) {
        if (!win_.contains(p) || contains_exact(p)) return false;
        std::uint32_t idx = static_cast<std::uint32_t>(pts_.size());
        std::uint32_t c = static_cast<std::uint32_t>(cell_index(p));
        pts_.push_back(p);
        cell_of_.push_back(c);
        cells_[c].push_back(idx);
        return true;
    }

    void insert(const Point<D>& p) {
        if (!try_insert(p)) throw GibbsboxError("insert: point outside window or duplicate");
    }

    void remove(std::size_t i) {
        if (i >= pts_.size()) throw GibbsboxError("remove: index out of range");
        detach(static_cast<std::uint32_t>(i));
        std::uint32_t last = static_cast<std::uint32_t>(pts_.size() - 1);
        if (i != last) {
            pts_[i] = pts_[last];
            cell_of_[i] = cell_of_[last];
            auto& cl = cells_[cell_of_[i]];
            *std::find(cl.begin(), cl.end(), last) = static_cast<std::uint32_t>(i);
        }
        pts_.pop_back();
        cell_of_.pop_back();
    }

    bool try_translate(std::size_t i, const Point<D>& to) {
        if (i >= pts_.size()) throw GibbsboxError("translate: index out of range");
        if (!win_.contains(to)) return false;
        if (!(pts_[i] == to) && contains_exact(to)) return false;
        detach(static_cast<std::uint32_t>(i));
        pts_[i] = to;
        std::uint32_t c = static_cast<std::uint32_t>(cell_index(to));
        cell_of_[i] = c;
        cells_[c].push_back(static_cast<std::uint32_t>(i));
        return true;
    }

    // Visit every stored point within distance r of c (closed ball) as
    // fn(index, point, squared distance). Exact for any r.
    template <typename Fn>
    void for_each_within(const Point<D>& c, double r, Fn&& fn) const {
        if (r < 0.0 || pts_.empty()) return;
        const double r2 = r * r;
        std::array<std::size_t, D> lo{}, hi{}, it{};
        for (std::size_t d = 0; d < D; ++d) {
            lo[d] = clamp_cell(d, c[d] - r);
            hi[d] = clamp_cell(d, c[d] + r);
            it[d] = lo[d];
        }
        while (true) {
            std::size_t flat = 0;
            for (std::size_t d = 0; d < D; ++d) flat = flat * ncell_[d] + it[d];
            for (std::uint32_t i : cells_[flat]) {
                double d2 = dist2(c, pts_[i]);
                if (d2 <= r2) fn(static_cast<std::size_t>(i), pts_[i], d2);
            }
            std::size_t d = D;
            while (d > 0) {
                --d;
                if (it[d] < hi[d]) {
                    ++it[d];
                    break;
                }
                it[d] = lo[d];
                if (d == 0) return;
            }
        }
    }

    std::size_t count_within(const Point<D>& c, double r, std::size_t exclude = SIZE_MAX) const {
        std::size_t n = 0;
        for_each_within(c, r, [&](std::size_t i, const Point<D>&, double) {
            if (i != exclude) ++n;
        });
        return n;
    }

  private:
    std::size_t clamp_cell(std::size_t d, double coord) const {
        double t = (coord - win_.lo()[d]) / cw_[d];
        if (t < 0.0) return 0;
        std::size_t i = static_cast<std::size_t>(t);
        return std::min(i, ncell_[d] - 1);
    }

    std::size_t cell_index(const Point<D>& p) const {
        std::size_t flat = 0;
        for (std::size_t d = 0; d < D; ++d) flat = flat * ncell_[d] + clamp_cell(d, p[d]);
        return flat;
    }

    void detach(std::uint32_t i) {
        auto& cl = cells_[cell_of_[i]];
        cl.erase(std::find(cl.begin(), cl.end(), i));
    }

    Window<D> win_;
    std::array<std::size_t, D> ncell_{};
    std::array<double, D> cw_{};
    std::vector<Point<D>> pts_;
    std::vector<std::uint32_t> cell_of_;
    std::vector<std::vector<std::uint32_t>> cells_;
};

using PointConfiguration2 = PointConfiguration<2>;

// Neighbors of x within r, drawn from the configuration plus any frozen
// outside points, excluding x itself when present.
template <std::size_t D>
std::vector<Point<D>> neighbors_within(const PointConfiguration<D>& cfg, const Point<D>& x, double r,
                                       const BoundaryCondition<D>& bc = BoundaryCondition<D>::free_boundary()) {
    std::vector<Point<D>> out;
    cfg.for_each_within(x, r, [&](std::size_t, const Point<D>& p, double) {
        if (!(p == x)) out.push_back(p);
    });
    bc.for_each_outside_within(x, r, [&](const Point<D>& p, double) {
        if (!(p == x)) out.push_back(p);
    });
    return out;
}

template <std::size_t D>
struct Move {
    enum class Kind { birth, death, translate };
    Kind kind = Kind::birth;
    Point<D> location{};      // birth target or translate destination
    std::size_t index = 0;    // death / translate subject

    static Move birth(const Point<D>& p) { return {Kind::birth, p, 0}; }
    static Move death(std::size_t i) { return {Kind::death, {}, i}; }
    static Move translate(std::size_t i, const Point<D>& p) { return {Kind::translate, p, i}; }
};

using Move2 = Move<2>;

// Value-semantics move application: returns the updated configuration,
// throwing on invalid births (outside window, duplicate) or bad indices.
template <std::size_t D>
PointConfiguration<D> apply_move(const PointConfiguration<D>& cfg, const Move<D>& mv) {
    PointConfiguration<D> out = cfg;
    switch (mv.kind) {
        case Move<D>::Kind::birth:
            out.insert(mv.location);
            break;
        case Move<D>::Kind::death:
            out.remove(mv.index);
            break;
        case Move<D>::Kind::translate:
            if (!out.try_translate(mv.index, mv.location))
                throw GibbsboxError("translate: destination outside window or duplicate");
            break;
    }
    return out;
}

}  // namespace gibbsbox
