#pragma once

// Energy families: pairwise potentials (Strauss, multi-Strauss, hard core,
// smooth core, truncated Lennard-Jones), the disk-union area interaction and
// the connected-component interaction, together with local energies,
// gradients for smooth potentials, and the germ-grain boundary observables.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "disks.hpp"
#include "geometry.hpp"
#include "union_find.hpp"
#include "util.hpp"

namespace gibbsbox {

class PairPotential {
  public:
    enum class Kind { strauss, multi_strauss, hard_core, smooth_core, truncated_lj };

    static PairPotential strauss(double R) {
        check_range(R);
        PairPotential p(Kind::strauss, R);
        p.A_ = 0.0;
        p.A_exact_ = true;
        return p;
    }

    static PairPotential hard_core(double R) {
        check_range(R);
        PairPotential p(Kind::hard_core, R);
        p.A_ = 0.0;
        p.A_exact_ = true;
        return p;
    }

    static PairPotential smooth_core(double R) {
        check_range(R);
        PairPotential p(Kind::smooth_core, R);
        p.A_ = 0.0;
        p.A_exact_ = true;
        return p;
    }

    // phi(r) = sum_i a_i on (breaks[i-1], breaks[i]]; breaks strictly increasing,
    // size(breaks) = size(a) + 1. The stability constant cannot be derived for
    // attractive shells and must then come from the user.
    static PairPotential multi_strauss(std::vector<double> a, std::vector<double> breaks,
                                       std::optional<double> A = std::nullopt) {
        if (a.empty() || breaks.size() != a.size() + 1)
            throw GibbsboxError("multi_strauss: need k coefficients and k+1 increasing radii");
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
            if (!(breaks[i] < breaks[i + 1])) throw GibbsboxError("multi_strauss: radii must increase");
        if (breaks.front() < 0.0) throw GibbsboxError("multi_strauss: radii must be nonnegative");
        check_range(breaks.back());
        PairPotential p(Kind::multi_strauss, breaks.back());
        p.a_ = std::move(a);
        p.breaks_ = std::move(breaks);
        bool nonneg = true;
        for (double c : p.a_) nonneg = nonneg && c >= 0.0;
        if (nonneg) {
            p.A_ = 0.0;
            p.A_exact_ = true;
        } else if (A) {
            p.A_ = *A;
            p.A_exact_ = true;  // asserted by the caller
        }
        p.nonnegative_ = nonneg;
        return p;
    }

    // phi(r) = a r^-12 + b r^-6 on (0, rcut]. The derived stability constant
    // uses a packing-count bound and is only approximate.
    static PairPotential truncated_lennard_jones(double a, double b, double rcut,
                                                 std::optional<double> A = std::nullopt) {
        check_range(rcut);
        if (a <= 0.0) throw GibbsboxError("truncated_lennard_jones: repulsive coefficient a must be positive");
        PairPotential p(Kind::truncated_lj, rcut);
        p.lj_a_ = a;
        p.lj_b_ = b;
        p.nonnegative_ = b >= 0.0;
        if (A) {
            p.A_ = *A;
            p.A_exact_ = true;
        } else if (b >= 0.0) {
            p.A_ = 0.0;
            p.A_exact_ = true;
        } else {
            p.A_ = approximate_lj_bound(a, b, rcut);
            p.A_exact_ = false;
        }
        return p;
    }

    Kind kind() const { return kind_; }
    double range() const { return range_; }

    double operator()(double r) const {
        if (r > range_) return 0.0;
        switch (kind_) {
            case Kind::strauss:
                return 1.0;
            case Kind::hard_core:
                return kInf;
            case Kind::smooth_core: {
                double t = 1.0 - r / range_;
                return t * t;
            }
            case Kind::multi_strauss: {
                if (r <= breaks_.front()) return 0.0;
                for (std::size_t i = 0; i < a_.size(); ++i)
                    if (r <= breaks_[i + 1]) return a_[i];
                return 0.0;
            }
            case Kind::truncated_lj: {
                if (r <= 0.0) return kInf;
                double r6 = r * r * r * r * r * r;
                return lj_a_ / (r6 * r6) + lj_b_ / r6;
            }
        }
        return 0.0;
    }

    bool smooth() const { return kind_ == Kind::smooth_core || kind_ == Kind::truncated_lj; }

    double derivative(double r) const {
        require_smooth();
        if (r > range_) return 0.0;
        if (kind_ == Kind::smooth_core) return -2.0 * (1.0 - r / range_) / range_;
        double r7 = std::pow(r, 7.0);
        return -12.0 * lj_a_ / (std::pow(r, 13.0)) - 6.0 * lj_b_ / r7;
    }

    double second_derivative(double r) const {
        require_smooth();
        if (r > range_) return 0.0;
        if (kind_ == Kind::smooth_core) return 2.0 / (range_ * range_);
        return 156.0 * lj_a_ / std::pow(r, 14.0) + 42.0 * lj_b_ / std::pow(r, 8.0);
    }

    // phi >= 0 everywhere (then local energies are nonnegative as well).
    bool nonnegative() const { return nonnegative_; }
    std::optional<double> stability_constant() const { return A_; }
    bool stability_exact() const { return A_exact_; }

    const std::vector<double>& coefficients() const { return a_; }
    const std::vector<double>& break_radii() const { return breaks_; }
    double lj_a() const { return lj_a_; }
    double lj_b() const { return lj_b_; }

  private:
    PairPotential(Kind k, double range) : kind_(k), range_(range) {}

    static void check_range(double R) {
        if (!(R > 0.0)) throw GibbsboxError("pair potential range must be positive");
    }

    void require_smooth() const {
        if (!smooth())
            throw GibbsboxError("unsupported model: derivative requires a smooth pair potential");
    }

    // Packing-count estimate: phi >= -eps with eps the well depth; below
    // separation s the potential exceeds 2*eps, so at most (1+2*rcut/s)^2
    // relevant neighbors fit. Flagged approximate via stability_exact().
    static double approximate_lj_bound(double a, double b, double rcut) {
        double eps = b * b / (4.0 * a);
        double lo = 1e-9, hi = std::pow(2.0 * a / -b, 1.0 / 6.0);  // minimum location
        for (int i = 0; i < 200; ++i) {
            double mid = 0.5 * (lo + hi);
            double r6 = std::pow(mid, 6.0);
            double v = a / (r6 * r6) + b / r6;
            (v > 2.0 * eps ? lo : hi) = mid;
        }
        double s = lo;
        double m = std::pow(1.0 + 2.0 * rcut / s, 2.0);
        return -0.5 * eps * m;
    }

    Kind kind_;
    double range_;
    std::vector<double> a_, breaks_;
    double lj_a_ = 0.0, lj_b_ = 0.0;
    bool nonnegative_ = true;
    std::optional<double> A_;
    bool A_exact_ = false;
};

// Connected components of the geometric graph with edges at distance <= thr.
// Returns (label per point, component count).
template <std::size_t D>
std::pair<std::vector<std::size_t>, std::size_t> component_labels(const PointConfiguration<D>& cfg,
                                                                  double thr) {
    const std::size_t n = cfg.size();
    UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i) {
        cfg.for_each_within(cfg.point(i), thr, [&](std::size_t j, const Point<D>&, double) {
            if (j < i) uf.merge(i, j);
        });
    }
    std::vector<std::size_t> lab(n);
    for (std::size_t i = 0; i < n; ++i) lab[i] = uf.find(i);
    return {std::move(lab), uf.components()};
}

struct GermGrainSummary {
    double total_exposed_length = 0.0;
    long isolated_count = 0;
    double union_area = 0.0;
    std::vector<double> exposed_arcs;  // per ball, in length units
};

template <std::size_t D>
class EnergyModel {
  public:
    enum class Family { pairwise, area, random_cluster };

    static EnergyModel pairwise(PairPotential pot) {
        EnergyModel m;
        m.family_ = Family::pairwise;
        m.pot_ = std::move(pot);
        return m;
    }

    static EnergyModel hard_core(double R) { return pairwise(PairPotential::hard_core(R)); }

    // H = Area(L_R(gamma)), optionally intersected with a clip window.
    static EnergyModel area(double R, std::optional<Window<D>> clip = std::nullopt) {
        static_assert(D == 2, "area interaction is implemented for d=2");
        if (!(R > 0.0)) throw GibbsboxError("area model: R must be positive");
        EnergyModel m;
        m.family_ = Family::area;
        m.R_ = R;
        m.clip_ = std::move(clip);
        return m;
    }

    // H = number of connected components of the union of radius R/2 disks;
    // with inside_only, only components entirely inside the window count.
    static EnergyModel random_cluster(double R, bool inside_only = false) {
        static_assert(D == 2, "random-cluster interaction is implemented for d=2");
        if (!(R > 0.0)) throw GibbsboxError("random_cluster model: R must be positive");
        EnergyModel m;
        m.family_ = Family::random_cluster;
        m.R_ = R;
        m.inside_only_ = inside_only;
        return m;
    }

    EnergyModel& with_mc_samples(int n) {
        if (n < 16) throw GibbsboxError("mc_samples too small");
        mc_samples_ = n;
        return *this;
    }
    EnergyModel& with_mc_seed(std::uint64_t s) {
        mc_seed_ = s;
        return *this;
    }

    Family family() const { return family_; }
    const PairPotential& potential() const { return *pot_; }
    double disk_radius() const { return R_; }
    const std::optional<Window<D>>& clip() const { return clip_; }
    bool inside_only() const { return inside_only_; }
    int mc_samples() const { return mc_samples_; }
    std::uint64_t mc_seed() const { return mc_seed_; }

    double interaction_range() const {
        return family_ == Family::pairwise ? pot_->range() : 2.0 * R_;
    }

    bool smooth() const { return family_ == Family::pairwise && pot_->smooth(); }

    std::optional<double> stability_constant() const {
        if (family_ == Family::pairwise) return pot_->stability_constant();
        return 0.0;  // area >= 0 and Ncc >= 0
    }
    bool stability_exact() const {
        return family_ == Family::pairwise ? pot_->stability_exact() : true;
    }

    // True when H vanishes identically (a pair potential with all-zero
    // coefficients), which reduces the Gibbs measure to Poisson.
    bool provably_zero_energy() const {
        if (family_ != Family::pairwise || pot_->kind() != PairPotential::Kind::multi_strauss)
            return false;
        for (double a : pot_->coefficients())
            if (a != 0.0) return false;
        return true;
    }

    // Uniform lower bound C on local energies (h >= C), when known.
    std::optional<double> local_lower_bound() const {
        switch (family_) {
            case Family::pairwise:
                return pot_->nonnegative() ? std::optional<double>(0.0) : std::nullopt;
            case Family::area:
                return 0.0;
            case Family::random_cluster:
                return -4.0;  // an added disk can merge at most 5 disjoint components in d=2
        }
        return std::nullopt;
    }

    double total_energy(const PointConfiguration<D>& cfg,
                        const BoundaryCondition<D>& bc = BoundaryCondition<D>::free_boundary(),
                        const std::optional<Window<D>>& clip_override = std::nullopt) const {
        switch (family_) {
            case Family::pairwise:
                return pairwise_total(cfg, bc, clip_override);
            case Family::area:
                return area_total(cfg, bc, clip_override ? clip_override : clip_);
            case Family::random_cluster:
                return rc_total(cfg, bc, clip_override);
        }
        return 0.0;
    }

    // h(x, gamma) = H(gamma + x) - H(gamma); 0 when x already present.
    double local_energy(const Point<D>& x, const PointConfiguration<D>& cfg,
                        const BoundaryCondition<D>& bc = BoundaryCondition<D>::free_boundary()) const {
        if (cfg.contains_exact(x)) return 0.0;
        return local_energy_absent(x, cfg, bc, SIZE_MAX);
    }

    // h(x_i, gamma minus x_i) without copying the configuration.
    double local_energy_excluding(const PointConfiguration<D>& cfg, std::size_t i,
                                  const BoundaryCondition<D>& bc = BoundaryCondition<D>::free_boundary()) const {
        return local_energy_absent(cfg.point(i), cfg, bc, i);
    }

    // h(x, gamma minus x_i) for a fresh location x, e.g. translation targets.
    double local_energy_without(const Point<D>& x, const PointConfiguration<D>& cfg, std::size_t i,
                                const BoundaryCondition<D>& bc = BoundaryCondition<D>::free_boundary()) const {
        return local_energy_absent(x, cfg, bc, i);
    }

    std::array<double, D> local_energy_gradient(
        const Point<D>& x, const PointConfiguration<D>& cfg,
        const BoundaryCondition<D>& bc = BoundaryCondition<D>::free_boundary()) const {
        require_smooth_pairwise();
        std::array<double, D> g{};
        auto add = [&](const Point<D>& y, double d2) {
            if (y == x) return;
            double r = std::sqrt(d2);
            if (r <= 0.0 || r > pot_->range()) return;
            double w = pot_->derivative(r) / r;
            for (std::size_t d = 0; d < D; ++d) g[d] += w * (x[d] - y[d]);
        };
        cfg.for_each_within(x, pot_->range(), [&](std::size_t, const Point<D>& y, double d2) { add(y, d2); });
        bc.for_each_outside_within(x, pot_->range(), add);
        return g;
    }

    // Trace of the Hessian of h (sum of second partials), for smooth kinds.
    double local_energy_laplacian(const Point<D>& x, const PointConfiguration<D>& cfg,
                                  const BoundaryCondition<D>& bc = BoundaryCondition<D>::free_boundary()) const {
        require_smooth_pairwise();
        double lap = 0.0;
        auto add = [&](const Point<D>& y, double d2) {
            if (y == x) return;
            double r = std::sqrt(d2);
            if (r <= 0.0 || r > pot_->range()) return;
            lap += pot_->second_derivative(r) + (static_cast<double>(D) - 1.0) * pot_->derivative(r) / r;
        };
        cfg.for_each_within(x, pot_->range(), [&](std::size_t, const Point<D>& y, double d2) { add(y, d2); });
        bc.for_each_outside_within(x, pot_->range(), add);
        return lap;
    }

  private:
    void require_smooth_pairwise() const {
        if (family_ != Family::pairwise)
            throw GibbsboxError("unsupported model: gradients are defined for smooth pairwise models");
        if (!pot_->smooth())
            throw GibbsboxError("unsupported model: derivative requires a smooth pair potential");
    }

    double pair_interaction_sum(const Point<D>& x, const PointConfiguration<D>& cfg,
                                const BoundaryCondition<D>& bc, std::size_t exclude) const {
        double h = 0.0;
        const double rng = pot_->range();
        cfg.for_each_within(x, rng, [&](std::size_t j, const Point<D>& y, double d2) {
            if (j == exclude || y == x) return;
            h += (*pot_)(std::sqrt(d2));
        });
        bc.for_each_outside_within(x, rng, [&](const Point<D>& y, double d2) {
            if (y == x) return;
            h += (*pot_)(std::sqrt(d2));
        });
        return h;
    }

    double pairwise_total(const PointConfiguration<D>& cfg, const BoundaryCondition<D>& bc,
                          const std::optional<Window<D>>& clip) const {
        double h = 0.0;
        const double rng = pot_->range();
        for (std::size_t i = 0; i < cfg.size(); ++i) {
            const Point<D>& xi = cfg.point(i);
            bool i_in = !clip || clip->contains(xi);
            cfg.for_each_within(xi, rng, [&](std::size_t j, const Point<D>& xj, double d2) {
                if (j <= i) return;
                if (clip && !i_in && !clip->contains(xj)) return;  // pair entirely outside clip
                h += (*pot_)(std::sqrt(d2));
            });
            // Cross terms against the frozen outside configuration.
            bc.for_each_outside_within(xi, rng, [&](const Point<D>& o, double d2) {
                if (clip && !i_in && !clip->contains(o)) return;
                h += (*pot_)(std::sqrt(d2));
            });
        }
        return h;
    }

    // Union area as a sum of per-disk additions over earlier disks and the
    // frozen outside disks, each by stratified quadrature with a seed fixed
    // by the disk center.
    double area_total(const PointConfiguration<D>& cfg, const BoundaryCondition<D>& bc,
                      const std::optional<Window<D>>& clip) const {
        if constexpr (D != 2) {
            return 0.0;
        } else {
            double total = 0.0;
            for (std::size_t i = 0; i < cfg.size(); ++i) {
                const Point2& xi = cfg.point(i);
                std::vector<Point2> cover;
                cfg.for_each_within(xi, 2.0 * R_, [&](std::size_t j, const Point2& xj, double) {
                    if (j < i) cover.push_back(xj);
                });
                bc.for_each_outside_within(xi, 2.0 * R_,
                                           [&](const Point2& y, double) { cover.push_back(y); });
                total += added_area_mc(xi, R_, cover, clip, mc_samples_, point_seed(mc_seed_, xi));
            }
            return total;
        }
    }

    struct RcView {
        std::vector<Point<D>> pts;       // config points then outside points
        std::vector<std::size_t> label;  // root per point
        std::vector<bool> root_inside;   // indexed by root: union entirely inside the window
        std::size_t ncc_all = 0;
        std::size_t ncc_counted = 0;
    };

    // Disks of radius R/2 overlap iff centers are within R.
    RcView rc_view(const PointConfiguration<D>& cfg, const BoundaryCondition<D>& bc,
                   const Window<D>& win) const {
        RcView v;
        v.pts = cfg.points();
        if (bc.mode == BoundaryCondition<D>::Mode::frozen_outside)
            v.pts.insert(v.pts.end(), bc.outside.begin(), bc.outside.end());
        const std::size_t n = v.pts.size();
        UnionFind uf(n);
        const std::size_t ncfg = cfg.size();
        for (std::size_t i = 0; i < n; ++i) {
            // Grid for config points, linear scan for the (few) outside points.
            cfg.for_each_within(v.pts[i], R_, [&](std::size_t j, const Point<D>&, double) {
                if (j < i) uf.merge(i, j);
            });
            for (std::size_t j = ncfg; j < i; ++j)
                if (dist2(v.pts[i], v.pts[j]) <= R_ * R_) uf.merge(i, j);
        }
        v.label.resize(n);
        v.root_inside.assign(n, true);
        for (std::size_t i = 0; i < n; ++i) {
            v.label[i] = uf.find(i);
            bool inside = win.contains(v.pts[i]) && win.boundary_distance(v.pts[i]) >= R_ / 2.0;
            if (!inside) v.root_inside[v.label[i]] = false;
        }
        v.ncc_all = uf.components();
        std::vector<bool> seen(n, false);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = v.label[i];
            if (!seen[r]) {
                seen[r] = true;
                if (!inside_only_ || v.root_inside[r]) ++v.ncc_counted;
            }
        }
        return v;
    }

    double rc_total(const PointConfiguration<D>& cfg, const BoundaryCondition<D>& bc,
                    const std::optional<Window<D>>& clip) const {
        const Window<D>& win = clip ? *clip : cfg.window();
        double with = static_cast<double>(rc_view(cfg, bc, win).ncc_counted);
        if (bc.mode == BoundaryCondition<D>::Mode::frozen_outside && !bc.outside.empty()) {
            // Conditional energy: subtract the component count of the outside
            // configuration alone.
            PointConfiguration<D> empty(cfg.window(), interaction_range());
            double base = static_cast<double>(rc_view(empty, bc, win).ncc_counted);
            return with - base;
        }
        return with;
    }

    double local_energy_absent(const Point<D>& x, const PointConfiguration<D>& cfg,
                               const BoundaryCondition<D>& bc, std::size_t exclude) const {
        switch (family_) {
            case Family::pairwise:
                return pair_interaction_sum(x, cfg, bc, exclude);
            case Family::area: {
                if constexpr (D == 2) {
                    std::vector<Point2> cover;
                    cfg.for_each_within(x, 2.0 * R_, [&](std::size_t j, const Point2& y, double) {
                        if (j != exclude && !(y == x)) cover.push_back(y);
                    });
                    bc.for_each_outside_within(x, 2.0 * R_,
                                               [&](const Point2& y, double) { cover.push_back(y); });
                    return added_area_mc(x, R_, cover, clip_, mc_samples_, point_seed(mc_seed_, x));
                }
                return 0.0;
            }
            case Family::random_cluster: {
                // Adding x merges the distinct neighbor components into one new
                // component containing x; the count delta follows from their
                // inside flags. Connectivity is resolved on the full pattern.
                if (exclude != SIZE_MAX) {
                    PointConfiguration<D> reduced = cfg;
                    reduced.remove(exclude);
                    return local_energy_absent(x, reduced, bc, SIZE_MAX);
                }
                const Window<D>& win = cfg.window();
                RcView v = rc_view(cfg, bc, win);
                std::vector<std::size_t> roots;
                const std::size_t ncfg = cfg.size();
                cfg.for_each_within(x, R_, [&](std::size_t j, const Point<D>& y, double) {
                    if (!(y == x)) roots.push_back(v.label[j]);
                });
                for (std::size_t j = ncfg; j < v.pts.size(); ++j)
                    if (dist2(x, v.pts[j]) <= R_ * R_) roots.push_back(v.label[j]);
                std::sort(roots.begin(), roots.end());
                roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
                bool x_inside = win.contains(x) && win.boundary_distance(x) >= R_ / 2.0;
                bool merged_inside = x_inside;
                double before = 0.0;
                for (std::size_t r : roots) {
                    merged_inside = merged_inside && v.root_inside[r];
                    if (!inside_only_ || v.root_inside[r]) before += 1.0;
                }
                double after = (!inside_only_ || merged_inside) ? 1.0 : 0.0;
                return after - before;
            }
        }
        return 0.0;
    }

    Family family_ = Family::pairwise;
    std::optional<PairPotential> pot_;
    double R_ = 1.0;
    std::optional<Window<D>> clip_;
    bool inside_only_ = false;
    int mc_samples_ = 4096;
    std::uint64_t mc_seed_ = 0x67b5a1d2c4e3f809ULL;
};

using EnergyModel2 = EnergyModel<2>;

// Boundary observables of the union of radius-R disks centered at the
// configuration points inside `window`: exact per-ball exposed arcs, isolated
// count (nearest neighbor beyond 2R) and quadrature union area.
inline GermGrainSummary germ_grain_summary(const PointConfiguration2& cfg, double R,
                                           const Window2& window, int mc_samples = 4096,
                                           std::uint64_t mc_seed = 0x2f8c1d5e9ab37641ULL) {
    GermGrainSummary out;
    std::vector<std::size_t> sel;
    for (std::size_t i = 0; i < cfg.size(); ++i)
        if (window.contains(cfg.point(i))) sel.push_back(i);
    std::vector<bool> selected(cfg.size(), false);
    for (std::size_t i : sel) selected[i] = true;

    std::vector<Point2> earlier;
    for (std::size_t rank = 0; rank < sel.size(); ++rank) {
        const Point2& x = cfg.point(sel[rank]);
        std::vector<Point2> nbs;
        bool isolated = true;
        cfg.for_each_within(x, 2.0 * R, [&](std::size_t j, const Point2& y, double) {
            if (j == sel[rank] || !selected[j]) return;
            nbs.push_back(y);
            isolated = false;
        });
        double arc = R * exposed_angle(x, R, nbs);
        out.exposed_arcs.push_back(arc);
        out.total_exposed_length += arc;
        if (isolated) ++out.isolated_count;

        earlier.clear();
        for (std::size_t r2 = 0; r2 < rank; ++r2)
            if (dist2(cfg.point(sel[r2]), x) < 4.0 * R * R) earlier.push_back(cfg.point(sel[r2]));
        out.union_area += added_area_mc(x, R, earlier, std::nullopt, mc_samples, point_seed(mc_seed, x));
    }
    return out;
}

}  // namespace gibbsbox
