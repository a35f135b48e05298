#pragma once

// Samplers for finite-volume Gibbs measures: i.i.d. Poisson draws, an exact
// rejection sampler backed by the stability bound, a birth-death-translate
// Metropolis-Hastings chain, and the two-type Widom-Rowlinson constructions
// (direct bicolor chain and the random-cluster splitting route).

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <type_traits>
#include <utility>
#include <vector>

#include "energy.hpp"
#include "geometry.hpp"
#include "util.hpp"

namespace gibbsbox {

struct SamplerConfig {
    double z = 1.0;
    double beta = 0.0;
    std::array<double, 3> move_mix{0.4, 0.4, 0.2};  // birth, death, translate
    long sweeps = 10000;                            // proposed moves after burn-in
    long burn_in = 0;
    long thinning = 10;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(z > 0.0)) throw GibbsboxError("sampler: activity z must be positive");
        if (!(beta >= 0.0)) throw GibbsboxError("sampler: beta must be nonnegative");
        double s = 0.0;
        for (double p : move_mix) {
            if (p < 0.0) throw GibbsboxError("sampler: move probabilities must be nonnegative");
            s += p;
        }
        if (std::fabs(s - 1.0) > 1e-9) throw GibbsboxError("sampler: move probabilities must sum to 1");
        if (sweeps < 1) throw GibbsboxError("sampler: sweeps must be >= 1");
        if (thinning < 1) throw GibbsboxError("sampler: thinning must be >= 1");
        if (burn_in < 0) throw GibbsboxError("sampler: burn-in must be >= 0");
    }

    // Default burn-in rule: 10^3 sweeps per unit of expected intensity*area.
    template <std::size_t D>
    static SamplerConfig defaults(double z, double beta, const Window<D>& win, std::uint64_t seed) {
        SamplerConfig sc;
        sc.z = z;
        sc.beta = beta;
        sc.seed = seed;
        sc.burn_in = static_cast<long>(1000.0 * std::max(1.0, z * win.volume()));
        sc.thinning = 10;
        return sc;
    }
};

template <std::size_t D>
struct ChainState {
    PointConfiguration<D> config;
    double energy = 0.0;  // cached total energy (quadrature families drift at MC tolerance)
    long steps = 0;
    std::array<long, 3> proposed{};
    std::array<long, 3> accepted{};

    double acceptance_rate(std::size_t kind) const {
        return proposed[kind] ? static_cast<double>(accepted[kind]) / static_cast<double>(proposed[kind])
                              : 0.0;
    }
};

template <std::size_t D>
struct MhResult {
    std::vector<PointConfiguration<D>> samples;
    ChainState<D> state;
};

template <std::size_t D>
PointConfiguration<D> sample_poisson(const Window<D>& win, double z, std::uint64_t seed,
                                     double cell_hint = 0.0) {
    if (z < 0.0) throw GibbsboxError("sample_poisson: z must be nonnegative");
    Rng rng(derive_seed(seed, 0x9051a2b7));
    PointConfiguration<D> cfg(win, cell_hint);
    long n = rng.poisson(z * win.volume());
    for (long i = 0; i < n; ++i) {
        while (!cfg.try_insert(win.sample(rng))) {
        }
    }
    return cfg;
}

namespace detail {

// Raw Metropolis-Hastings ratio pi(gamma')q(gamma'->gamma) / pi(gamma)q(gamma->gamma'),
// in log scale. The move-mix correction cancels at the default symmetric mix.
template <std::size_t D>
double mh_log_ratio(const EnergyModel<D>& model, const SamplerConfig& sc, const Window<D>& win,
                    const ChainState<D>& st, const Move<D>& mv, const BoundaryCondition<D>& bc) {
    const double zvol = sc.z * win.volume();
    const double pb = sc.move_mix[0], pd = sc.move_mix[1];
    switch (mv.kind) {
        case Move<D>::Kind::birth: {
            double h = model.local_energy(mv.location, st.config, bc);
            double bh = sc.beta == 0.0 ? 0.0 : sc.beta * h;
            return std::log(zvol) - bh - std::log(static_cast<double>(st.config.size()) + 1.0) +
                   std::log(pd) - std::log(pb);
        }
        case Move<D>::Kind::death: {
            double h = model.local_energy_excluding(st.config, mv.index, bc);
            double bh = sc.beta == 0.0 ? 0.0 : sc.beta * h;
            return std::log(static_cast<double>(st.config.size())) + bh - std::log(zvol) +
                   std::log(pb) - std::log(pd);
        }
        case Move<D>::Kind::translate: {
            double h_old = model.local_energy_excluding(st.config, mv.index, bc);
            double h_new = model.local_energy_without(mv.location, st.config, mv.index, bc);
            if (sc.beta == 0.0) return 0.0;
            return -sc.beta * ext_minus(h_new, h_old);
        }
    }
    return 0.0;
}

template <std::size_t D>
void mh_step(const EnergyModel<D>& model, const SamplerConfig& sc, const Window<D>& win,
             const BoundaryCondition<D>& bc, ChainState<D>& st, Rng& rng) {
    ++st.steps;
    const double u = rng.uniform();
    const bool skip_energy = sc.beta == 0.0;
    if (u < sc.move_mix[0]) {  // birth
        ++st.proposed[0];
        Point<D> x = win.sample(rng);
        if (bc.forbids(x, win) || st.config.contains_exact(x)) return;
        double h = skip_energy ? 0.0 : model.local_energy(x, st.config, bc);
        double lr = std::log(sc.z * win.volume()) - (skip_energy ? 0.0 : sc.beta * h) -
                    std::log(static_cast<double>(st.config.size()) + 1.0) +
                    std::log(sc.move_mix[1]) - std::log(sc.move_mix[0]);
        if (lr >= 0.0 || std::log(rng.uniform()) < lr) {
            st.config.insert(x);
            st.energy += skip_energy ? 0.0 : h;
            ++st.accepted[0];
        }
    } else if (u < sc.move_mix[0] + sc.move_mix[1]) {  // death
        ++st.proposed[1];
        if (st.config.size() == 0) return;
        std::size_t i = rng.index(st.config.size());
        double h = skip_energy ? 0.0 : model.local_energy_excluding(st.config, i, bc);
        double lr = std::log(static_cast<double>(st.config.size())) +
                    (skip_energy ? 0.0 : sc.beta * h) - std::log(sc.z * win.volume()) +
                    std::log(sc.move_mix[0]) - std::log(sc.move_mix[1]);
        if (lr >= 0.0 || std::log(rng.uniform()) < lr) {
            st.config.remove(i);
            st.energy -= skip_energy ? 0.0 : h;
            ++st.accepted[1];
        }
    } else {  // translate: uniform re-draw in the window
        ++st.proposed[2];
        if (st.config.size() == 0) return;
        std::size_t i = rng.index(st.config.size());
        Point<D> x = win.sample(rng);
        if (bc.forbids(x, win) || st.config.contains_exact(x)) return;
        double h_old = skip_energy ? 0.0 : model.local_energy_excluding(st.config, i, bc);
        double h_new = skip_energy ? 0.0 : model.local_energy_without(x, st.config, i, bc);
        double lr = skip_energy ? 0.0 : -sc.beta * ext_minus(h_new, h_old);
        if (lr >= 0.0 || std::log(rng.uniform()) < lr) {
            st.config.try_translate(i, x);
            st.energy += skip_energy ? 0.0 : ext_minus(h_new, h_old);
            ++st.accepted[2];
        }
    }
}

}  // namespace detail

// Birth-death-translate chain targeting the finite-volume Gibbs measure with
// the given boundary condition; returns the thinned post-burn-in states.
template <std::size_t D>
MhResult<D> run_mh(const EnergyModel<D>& model, const Window<D>& win, const SamplerConfig& sc,
                   const BoundaryCondition<D>& bc = BoundaryCondition<D>::free_boundary(),
                   std::type_identity_t<std::optional<PointConfiguration<D>>> init = std::nullopt) {
    sc.validate();
    if (win.empty()) throw GibbsboxError("mh_sample: window is empty");
    Rng rng(derive_seed(sc.seed, 0x6d2c7be1));
    ChainState<D> st;
    if (init) {
        st.config = *init;
        for (std::size_t i = 0; i < st.config.size(); ++i)
            if (bc.forbids(st.config.point(i), win))
                throw GibbsboxError("mh_sample: initial configuration intersects the exclusion band");
    } else {
        st.config = PointConfiguration<D>(win, std::max(model.interaction_range(), 1e-6));
    }
    st.energy = sc.beta == 0.0 ? 0.0 : model.total_energy(st.config, bc);
    if (!std::isfinite(st.energy))
        throw GibbsboxError("mh_sample: initial configuration has infinite energy");

    MhResult<D> out;
    for (long s = 0; s < sc.burn_in; ++s) detail::mh_step(model, sc, win, bc, st, rng);
    long kept = sc.sweeps / sc.thinning;
    out.samples.reserve(static_cast<std::size_t>(std::max(0L, kept)));
    for (long s = 0; s < sc.sweeps; ++s) {
        detail::mh_step(model, sc, win, bc, st, rng);
        if ((s + 1) % sc.thinning == 0) out.samples.push_back(st.config);
    }
    out.state = std::move(st);
    return out;
}

template <std::size_t D>
std::vector<PointConfiguration<D>> mh_sample(const EnergyModel<D>& model, const Window<D>& win,
                                             const SamplerConfig& sc,
                                             const BoundaryCondition<D>& bc = BoundaryCondition<D>::free_boundary(),
                                             std::type_identity_t<std::optional<PointConfiguration<D>>> init = std::nullopt) {
    return run_mh(model, win, sc, bc, std::move(init)).samples;
}

// Exact sampler: propose from the dominating Poisson process of intensity
// z e^{-beta A} and accept with probability e^{-beta(H - A N)} <= 1. With a
// frozen outside configuration the telescoped local lower bound C replaces A.
template <std::size_t D>
PointConfiguration<D> rejection_sample(const EnergyModel<D>& model, const Window<D>& win,
                                       const SamplerConfig& sc,
                                       const BoundaryCondition<D>& bc = BoundaryCondition<D>::free_boundary()) {
    sc.validate();
    std::optional<double> bound;
    if (bc.mode == BoundaryCondition<D>::Mode::frozen_outside && !bc.outside.empty()) {
        bound = model.local_lower_bound();
        if (!bound)
            throw GibbsboxError(
                "rejection_sample: unsupported with a frozen boundary (no uniform local lower bound)");
    } else {
        bound = model.stability_constant();
        if (!bound) throw GibbsboxError("rejection_sample: unknown stability constant");
    }
    const double A = *bound;

    // Exclusion bands restrict the support; proposing in the eroded window is
    // an exact draw from the restricted measure.
    Window<D> support = win;
    if (bc.mode == BoundaryCondition<D>::Mode::exclusion_band) {
        support = win.eroded(bc.band);
        if (support.empty()) return PointConfiguration<D>(win, model.interaction_range());
    }

    const double intensity = sc.z * std::exp(-sc.beta * A);
    const double expected = intensity * support.volume();
    if (expected > 5e4)
        throw GibbsboxError("rejection_sample: dominating Poisson intensity is impractically large");

    Rng rng(derive_seed(sc.seed, 0x4e9f01d7));
    auto propose = [&]() {
        PointConfiguration<D> cfg(win, std::max(model.interaction_range(), 1e-6));
        long n = rng.poisson(expected);
        for (long i = 0; i < n; ++i)
            while (!cfg.try_insert(support.sample(rng))) {
            }
        return cfg;
    };

    if (sc.beta == 0.0) return propose();  // weights are identically one

    // Pilot estimate of the mean acceptance probability.
    double acc_sum = 0.0;
    const int pilot = 256;
    for (int i = 0; i < pilot; ++i) {
        PointConfiguration<D> cfg = propose();
        double H = model.total_energy(cfg, bc);
        double w = std::exp(-sc.beta * (H - A * static_cast<double>(cfg.size())));
        acc_sum += std::isfinite(w) ? std::min(w, 1.0) : 0.0;
    }
    double p_hat = acc_sum / pilot;
    if (p_hat < 1e-6) {
        std::ostringstream ss;
        ss << "rejection_sample: estimated acceptance " << p_hat
           << " below 1e-6; use the Markov chain sampler instead";
        throw GibbsboxError(ss.str());
    }

    long budget = 1000 + static_cast<long>(50.0 / std::max(p_hat, 1e-6));
    for (long attempt = 0; attempt < budget; ++attempt) {
        PointConfiguration<D> cfg = propose();
        double H = model.total_energy(cfg, bc);
        double w = std::exp(-sc.beta * (H - A * static_cast<double>(cfg.size())));
        if (w > 1.0 + 1e-9) throw GibbsboxError("rejection_sample: stability bound violated");
        if (rng.uniform() < w) return cfg;
    }
    throw GibbsboxError("rejection_sample: no acceptance within the proposal budget");
}

// ---------------------------------------------------------------------------
// Two-type Widom-Rowlinson sampling on a planar window.

enum class WrVariant { direct, via_random_cluster };

namespace detail {

struct WrPair {
    PointConfiguration2 first;
    PointConfiguration2 second;
};

// Bicolor chain: independent activity-z births per color under the hard
// constraints (cross-type distance > R; type-1 balls of radius R/2 inside).
inline WrPair wr_direct(const Window2& win, double z, double R, std::uint64_t seed, long moves) {
    Rng rng(derive_seed(seed, 0x77d1));
    PointConfiguration2 g1(win, R), g2(win, R);
    const double zvol = z * win.volume();
    auto cross_free = [&](const PointConfiguration2& other, const Point2& x) {
        return other.count_within(x, R) == 0;
    };
    auto type1_ok = [&](const Point2& x) { return win.boundary_distance(x) >= R / 2.0; };

    for (long s = 0; s < moves; ++s) {
        bool color1 = rng.bernoulli(0.5);
        PointConfiguration2& mine = color1 ? g1 : g2;
        const PointConfiguration2& other = color1 ? g2 : g1;
        double u = rng.uniform();
        if (u < 0.4) {  // birth
            Point2 x = win.sample(rng);
            if (color1 && !type1_ok(x)) continue;
            if (!cross_free(other, x)) continue;
            if (rng.uniform() < std::min(1.0, zvol / (static_cast<double>(mine.size()) + 1.0)))
                mine.try_insert(x);
        } else if (u < 0.8) {  // death
            if (mine.size() == 0) continue;
            if (rng.uniform() < std::min(1.0, static_cast<double>(mine.size()) / zvol))
                mine.remove(rng.index(mine.size()));
        } else {  // translate
            if (mine.size() == 0) continue;
            std::size_t i = rng.index(mine.size());
            Point2 x = win.sample(rng);
            if (color1 && !type1_ok(x)) continue;
            if (!cross_free(other, x)) continue;
            mine.try_translate(i, x);
        }
    }
    return {std::move(g1), std::move(g2)};
}

// Chain on single-color configurations with density proportional to
// z^N 2^{Ncc}, where Ncc counts components of the radius R/2 disk union
// lying entirely inside the window; then Bernoulli component splitting.
inline WrPair wr_via_rc(const Window2& win, double z, double R, std::uint64_t seed, long moves) {
    auto rc = EnergyModel2::random_cluster(R, /*inside_only=*/true);
    Rng rng(derive_seed(seed, 0x2c5e));
    PointConfiguration2 cfg(win, R);
    const double zvol = z * win.volume();
    const double ln2 = std::log(2.0);

    for (long s = 0; s < moves; ++s) {
        double u = rng.uniform();
        if (u < 0.4) {
            Point2 x = win.sample(rng);
            if (cfg.contains_exact(x)) continue;
            double h = rc.local_energy(x, cfg);
            double lr = std::log(zvol) - std::log(static_cast<double>(cfg.size()) + 1.0) + ln2 * h;
            if (lr >= 0.0 || std::log(rng.uniform()) < lr) cfg.insert(x);
        } else if (u < 0.8) {
            if (cfg.size() == 0) continue;
            std::size_t i = rng.index(cfg.size());
            double h = rc.local_energy_excluding(cfg, i);
            double lr = std::log(static_cast<double>(cfg.size())) - std::log(zvol) - ln2 * h;
            if (lr >= 0.0 || std::log(rng.uniform()) < lr) cfg.remove(i);
        } else {
            if (cfg.size() == 0) continue;
            std::size_t i = rng.index(cfg.size());
            Point2 x = win.sample(rng);
            if (cfg.contains_exact(x)) continue;
            double h_old = rc.local_energy_excluding(cfg, i);
            double h_new = rc.local_energy_without(x, cfg, i);
            double lr = ln2 * (h_new - h_old);
            if (lr >= 0.0 || std::log(rng.uniform()) < lr) cfg.try_translate(i, x);
        }
    }

    // Split: interior components to a uniform type, boundary components to type 2.
    auto [labels, ncc] = component_labels(cfg, R);
    (void)ncc;
    std::vector<bool> root_inside(cfg.size(), true);
    for (std::size_t i = 0; i < cfg.size(); ++i)
        if (win.boundary_distance(cfg.point(i)) < R / 2.0) root_inside[labels[i]] = false;
    std::vector<int> choice(cfg.size(), -1);  // per root: 1 or 2
    WrPair out{PointConfiguration2(win, R), PointConfiguration2(win, R)};
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        std::size_t r = labels[i];
        if (choice[r] == -1) {
            if (!root_inside[r])
                choice[r] = 2;
            else
                choice[r] = rng.bernoulli(0.5) ? 1 : 2;
        }
        (choice[r] == 1 ? out.first : out.second).try_insert(cfg.point(i));
    }
    return out;
}

}  // namespace detail

inline std::pair<PointConfiguration2, PointConfiguration2> sample_two_type_wr(
    const Window2& win, double z, double R, std::uint64_t seed, WrVariant variant,
    long moves = -1) {
    if (!(z > 0.0) || !(R > 0.0)) throw GibbsboxError("two-type WR: z and R must be positive");
    if (moves < 0) moves = 4000 + static_cast<long>(2000.0 * z * win.volume());
    auto pair = variant == WrVariant::direct ? detail::wr_direct(win, z, R, seed, moves)
                                             : detail::wr_via_rc(win, z, R, seed, moves);
    return {std::move(pair.first), std::move(pair.second)};
}

}  // namespace gibbsbox
