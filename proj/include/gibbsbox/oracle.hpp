// Brute-force reference values on tiny windows. The partition function is
// expanded as Z = e^{-|W|} sum_n (z l_s)^n / n! * I_n where l_s is the volume
// of the admissible support and I_n is the Monte-Carlo mean of e^{-beta H}
// over n independent uniform points. Expectations are ratios of two such
// series sharing the same draws; standard errors come from batch means. The
// series tail is bounded analytically through the stability estimate
// H >= A n (or its conditional analogue h >= C under a frozen boundary).
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <vector>

#include "energy.hpp"
#include "geometry.hpp"
#include "stats.hpp"
#include "util.hpp"

namespace gibbsbox {

struct OracleConfig {
    int n_max = 10;            // series truncation level
    long mc_samples = 20000;   // uniform draws per series order
    int batches = 20;          // batch means used for standard errors
    double truncation_tolerance = 0.01;  // allowed tail bound relative to Z
    std::uint64_t seed = 20260825;

    void validate() const {
        if (n_max < 0 || n_max > 12)
            throw GibbsboxError("oracle: n_max must lie in [0, 12]; higher orders are impractical");
        if (batches < 2) throw GibbsboxError("oracle: need at least two batches");
        if (mc_samples < batches || mc_samples % batches != 0)
            throw GibbsboxError("oracle: mc_samples must be a positive multiple of batches");
        if (!(truncation_tolerance > 0.0)) throw GibbsboxError("oracle: tolerance must be positive");
    }
};

struct OracleValue {
    double estimate = 0.0;
    double se = 0.0;
};

struct PartitionResult {
    double estimate = 0.0;
    double se = 0.0;
    double truncation_bound = 0.0;
};

// Statistic whose Gibbs expectation the oracle evaluates.
struct OracleStatistic {
    enum class Kind { count, energy, count_squared, count_at_least };
    Kind kind = Kind::count;
    long k = 0;  // threshold for count_at_least

    static OracleStatistic count() { return {Kind::count, 0}; }
    static OracleStatistic energy() { return {Kind::energy, 0}; }
    static OracleStatistic count_squared() { return {Kind::count_squared, 0}; }
    static OracleStatistic count_at_least(long k) { return {Kind::count_at_least, k}; }

    // Multiplier applied to the Boltzmann weight at series order n
    // (energy uses its own integrand instead).
    double factor(long n) const {
        switch (kind) {
            case Kind::count: return static_cast<double>(n);
            case Kind::count_squared: return static_cast<double>(n) * static_cast<double>(n);
            case Kind::count_at_least: return n >= k ? 1.0 : 0.0;
            case Kind::energy: break;
        }
        throw GibbsboxError("oracle: statistic has no count factor");
    }
};

namespace detail {

template <std::size_t D>
struct OracleTable {
    double lambda_win = 0.0;
    double lambda_supp = 0.0;
    std::vector<double> term;                // t_n = (z l_s)^n e^{-|W|} / n!
    std::vector<std::vector<double>> wbar;   // [n][b] batch means of e^{-beta H}
    std::vector<std::vector<double>> hbar;   // [n][b] batch means of H e^{-beta H}
};

// Stability constant controlling both the rejection envelope and the series
// tail: free/exclusion boundaries use H >= A n, frozen boundaries the
// telescoped local bound h >= C.
template <std::size_t D>
double stability_floor(const EnergyModel<D>& model, const BoundaryCondition<D>& bc) {
    std::optional<double> a = bc.mode == BoundaryCondition<D>::Mode::frozen_outside
                                  ? model.local_lower_bound()
                                  : model.stability_constant();
    if (!a)
        throw GibbsboxError(
            "oracle: no stability bound is known for this model, so the series tail "
            "cannot be controlled; supply a stability constant");
    return *a;
}

template <std::size_t D>
OracleTable<D> build_oracle_table(const EnergyModel<D>& model, const Window<D>& win, double z,
                                  double beta, const BoundaryCondition<D>& bc,
                                  const OracleConfig& oc, bool need_energy) {
    OracleTable<D> tab;
    tab.lambda_win = win.volume();
    Window<D> supp = bc.mode == BoundaryCondition<D>::Mode::exclusion_band ? win.eroded(bc.band) : win;
    tab.lambda_supp = supp.empty() ? 0.0 : supp.volume();

    const long orders = oc.n_max + 1;
    tab.term.resize(orders);
    for (long n = 0; n < orders; ++n) {
        if (n == 0)
            tab.term[0] = std::exp(-tab.lambda_win);
        else if (z * tab.lambda_supp <= 0.0)
            tab.term[n] = 0.0;
        else
            tab.term[n] = std::exp(static_cast<double>(n) * std::log(z * tab.lambda_supp) -
                                   tab.lambda_win - std::lgamma(static_cast<double>(n) + 1.0));
    }

    const long per_batch = oc.mc_samples / oc.batches;
    struct PerOrder {
        std::vector<double> w, h;
    };
    auto rows = parallel_map<PerOrder>(static_cast<std::size_t>(orders), [&](std::size_t n) {
        PerOrder row;
        row.w.assign(oc.batches, n == 0 ? 1.0 : 0.0);
        row.h.assign(oc.batches, 0.0);
        if (n == 0 || tab.term[n] == 0.0) return row;
        Rng rng(derive_seed(oc.seed, 0x0c17a9d3u + static_cast<std::uint64_t>(n)));
        const double cell = std::max(model.interaction_range(), 1e-6);
        for (int b = 0; b < oc.batches; ++b) {
            double wsum = 0.0, hsum = 0.0;
            for (long s = 0; s < per_batch; ++s) {
                PointConfiguration<D> cfg(supp, cell);
                for (std::size_t i = 0; i < n; ++i)
                    while (!cfg.try_insert(supp.sample(rng))) {
                    }
                double H = model.total_energy(cfg, bc);
                double w = beta == 0.0 ? 1.0 : std::exp(-beta * H);
                wsum += w;
                if (need_energy && w > 0.0) hsum += H * w;
            }
            row.w[b] = wsum / static_cast<double>(per_batch);
            row.h[b] = hsum / static_cast<double>(per_batch);
        }
        return row;
    });
    tab.wbar.resize(orders);
    tab.hbar.resize(orders);
    for (long n = 0; n < orders; ++n) {
        tab.wbar[n] = std::move(rows[static_cast<std::size_t>(n)].w);
        tab.hbar[n] = std::move(rows[static_cast<std::size_t>(n)].h);
    }
    return tab;
}

// Analytic bound on e^{-|W|} sum_{n > n_max} (z e^{-beta A} l_s)^n / n!.
template <std::size_t D>
double series_tail_bound(const EnergyModel<D>& model, double z, double beta,
                         const BoundaryCondition<D>& bc, const OracleConfig& oc,
                         double lambda_win, double lambda_supp) {
    double mu = z * std::exp(-beta * stability_floor(model, bc)) * lambda_supp;
    if (mu <= 0.0) return 0.0;
    return std::exp(mu - lambda_win) * poisson_sf(oc.n_max, mu);
}

inline double batch_series(const std::vector<double>& term,
                           const std::vector<std::vector<double>>& bars, int b) {
    double s = 0.0;
    for (std::size_t n = 0; n < term.size(); ++n) s += term[n] * bars[n][b];
    return s;
}

inline double full_series(const std::vector<double>& term,
                          const std::vector<std::vector<double>>& bars) {
    double s = 0.0;
    for (std::size_t n = 0; n < term.size(); ++n) {
        double m = 0.0;
        for (double v : bars[n]) m += v;
        s += term[n] * m / static_cast<double>(bars[n].size());
    }
    return s;
}

inline void check_tail(const OracleConfig& oc, double z_estimate, double bound) {
    if (bound <= oc.truncation_tolerance * z_estimate) return;
    std::ostringstream msg;
    msg << "oracle: series tail bound " << bound << " exceeds " << oc.truncation_tolerance
        << " of the partition estimate " << z_estimate << "; increase n_max (currently " << oc.n_max
        << ") or loosen the tolerance";
    throw GibbsboxError(msg.str());
}

}  // namespace detail

template <std::size_t D>
PartitionResult partition_function(const EnergyModel<D>& model, const Window<D>& win, double z,
                                   double beta, const BoundaryCondition<D>& bc,
                                   const OracleConfig& oc) {
    oc.validate();
    if (z < 0.0 || beta < 0.0) throw GibbsboxError("oracle: z and beta must be nonnegative");
    if (win.empty()) throw GibbsboxError("oracle: window is empty");

    if (beta == 0.0) {
        // Boltzmann factors are identically one, so the series sums in closed form.
        Window<D> supp = bc.mode == BoundaryCondition<D>::Mode::exclusion_band ? win.eroded(bc.band) : win;
        double ls = supp.empty() ? 0.0 : supp.volume();
        return {std::exp(z * ls - win.volume()), 0.0, 0.0};
    }

    auto tab = detail::build_oracle_table(model, win, z, beta, bc, oc, false);
    double bound = detail::series_tail_bound(model, z, beta, bc, oc, tab.lambda_win, tab.lambda_supp);
    PartitionResult out;
    out.estimate = detail::full_series(tab.term, tab.wbar);
    out.truncation_bound = bound;
    std::vector<double> zb(oc.batches);
    for (int b = 0; b < oc.batches; ++b) zb[b] = detail::batch_series(tab.term, tab.wbar, b);
    out.se = mean_se(zb).se;
    detail::check_tail(oc, out.estimate, bound);
    return out;
}

template <std::size_t D>
OracleValue oracle_expectation(const OracleStatistic& stat, const EnergyModel<D>& model,
                               const Window<D>& win, double z, double beta,
                               const BoundaryCondition<D>& bc, const OracleConfig& oc) {
    oc.validate();
    if (z < 0.0 || beta < 0.0) throw GibbsboxError("oracle: z and beta must be nonnegative");
    if (win.empty()) throw GibbsboxError("oracle: window is empty");

    Window<D> supp = bc.mode == BoundaryCondition<D>::Mode::exclusion_band ? win.eroded(bc.band) : win;
    double ls = supp.empty() ? 0.0 : supp.volume();
    if (beta == 0.0 && stat.kind != OracleStatistic::Kind::energy) {
        // Poisson(z) restricted to the admissible support: moments in closed form.
        double m = z * ls;
        switch (stat.kind) {
            case OracleStatistic::Kind::count: return {m, 0.0};
            case OracleStatistic::Kind::count_squared: return {m + m * m, 0.0};
            case OracleStatistic::Kind::count_at_least: return {poisson_sf(stat.k - 1, m), 0.0};
            default: break;
        }
    }

    bool need_h = stat.kind == OracleStatistic::Kind::energy;
    auto tab = detail::build_oracle_table(model, win, z, beta, bc, oc, need_h);
    double bound = detail::series_tail_bound(model, z, beta, bc, oc, tab.lambda_win, tab.lambda_supp);

    auto numer_term = tab.term;
    const auto& bars = need_h ? tab.hbar : tab.wbar;
    if (!need_h)
        for (long n = 0; n <= oc.n_max; ++n)
            numer_term[static_cast<std::size_t>(n)] *= stat.factor(n);

    double z_full = detail::full_series(tab.term, tab.wbar);
    double s_full = detail::full_series(numer_term, bars);
    detail::check_tail(oc, z_full, bound);

    std::vector<double> ratio(oc.batches);
    for (int b = 0; b < oc.batches; ++b) {
        double zb = detail::batch_series(tab.term, tab.wbar, b);
        double sb = detail::batch_series(numer_term, bars, b);
        if (zb <= 0.0) throw GibbsboxError("oracle: a batch produced a vanishing partition estimate");
        ratio[b] = sb / zb;
    }
    return {s_full / z_full, mean_se(ratio).se};
}

// Variance of the point count, with an honest batch standard error (the two
// moment series share their draws, so independent errors would be wrong).
template <std::size_t D>
OracleValue oracle_count_variance(const EnergyModel<D>& model, const Window<D>& win, double z,
                                  double beta, const BoundaryCondition<D>& bc,
                                  const OracleConfig& oc) {
    oc.validate();
    Window<D> supp = bc.mode == BoundaryCondition<D>::Mode::exclusion_band ? win.eroded(bc.band) : win;
    if (beta == 0.0) return {z * (supp.empty() ? 0.0 : supp.volume()), 0.0};

    auto tab = detail::build_oracle_table(model, win, z, beta, bc, oc, false);
    double bound = detail::series_tail_bound(model, z, beta, bc, oc, tab.lambda_win, tab.lambda_supp);
    auto t1 = tab.term, t2 = tab.term;
    for (long n = 0; n <= oc.n_max; ++n) {
        t1[static_cast<std::size_t>(n)] *= static_cast<double>(n);
        t2[static_cast<std::size_t>(n)] *= static_cast<double>(n) * static_cast<double>(n);
    }
    double zf = detail::full_series(tab.term, tab.wbar);
    detail::check_tail(oc, zf, bound);
    double m1 = detail::full_series(t1, tab.wbar) / zf;
    double m2 = detail::full_series(t2, tab.wbar) / zf;
    std::vector<double> vb(oc.batches);
    for (int b = 0; b < oc.batches; ++b) {
        double zb = detail::batch_series(tab.term, tab.wbar, b);
        double a = detail::batch_series(t1, tab.wbar, b) / zb;
        double q = detail::batch_series(t2, tab.wbar, b) / zb;
        vb[b] = q - a * a;
    }
    return {m2 - m1 * m1, mean_se(vb).se};
}

template <std::size_t D>
OracleValue finite_pressure(const EnergyModel<D>& model, const Window<D>& win, double z, double beta,
                            const OracleConfig& oc) {
    if (beta == 0.0) return {z - 1.0, 0.0};
    auto pr = partition_function(model, win, z, beta, BoundaryCondition<D>::free_boundary(), oc);
    if (pr.estimate <= 0.0) throw GibbsboxError("oracle: partition estimate is not positive");
    double lam = win.volume();
    return {std::log(pr.estimate) / lam, pr.se / (pr.estimate * lam)};
}

}  // namespace gibbsbox
