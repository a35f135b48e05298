#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "gibbsbox/sampler.hpp"
#include "gibbsbox/stats.hpp"

using namespace gibbsbox;
using Catch::Approx;

namespace {

double min_pairwise_distance(const PointConfiguration2& cfg) {
    double m = kInf;
    for (std::size_t i = 0; i < cfg.size(); ++i)
        for (std::size_t j = i + 1; j < cfg.size(); ++j)
            m = std::min(m, dist(cfg.point(i), cfg.point(j)));
    return m;
}

double min_cross_distance(const PointConfiguration2& a, const PointConfiguration2& b) {
    double m = kInf;
    for (const auto& p : a.points())
        for (const auto& q : b.points()) m = std::min(m, dist(p, q));
    return m;
}

}  // namespace

TEST_CASE("poisson sampler basics") {
    Window2 w = make_window(0, 0, 10, 10);
    CHECK(sample_poisson(w, 0.0, 1).size() == 0);

    std::vector<double> counts;
    for (int i = 0; i < 1000; ++i)
        counts.push_back(static_cast<double>(sample_poisson(w, 2.0, 1000 + i).size()));
    auto ms = mean_se(counts);
    CHECK(std::fabs(ms.mean - 200.0) <= 3.0 * ms.se);
    double fano = variance(counts) / ms.mean;
    CHECK(std::fabs(fano - 1.0) <= 0.1);
}

TEST_CASE("rejection sampler at beta zero is poisson") {
    Window2 w = make_window(0, 0, 3, 3);
    auto model = EnergyModel2::pairwise(PairPotential::strauss(0.5));
    std::vector<double> rej, poi;
    for (int i = 0; i < 2000; ++i) {
        SamplerConfig sc;
        sc.z = 1.0;
        sc.beta = 0.0;
        sc.seed = 50000 + i;
        rej.push_back(static_cast<double>(rejection_sample(model, w, sc).size()));
        poi.push_back(static_cast<double>(sample_poisson(w, 1.0, 90000 + i).size()));
    }
    CHECK(ks_two_sample_p(rej, poi) > 0.01);
}

TEST_CASE("rejection sampler respects the hard core") {
    Window2 w = make_window(0, 0, 2, 2);
    auto model = EnergyModel2::hard_core(0.5);
    for (int i = 0; i < 50; ++i) {
        SamplerConfig sc;
        sc.z = 1.0;
        sc.beta = 1.0;
        sc.seed = 777 + i;
        auto cfg = rejection_sample(model, w, sc);
        if (cfg.size() >= 2) REQUIRE(min_pairwise_distance(cfg) > 0.5);
    }
}

TEST_CASE("rejection sampler guards") {
    Window2 w = make_window(0, 0, 3, 3);
    SamplerConfig sc;
    sc.z = 1.0;
    sc.beta = 1.0;
    sc.seed = 5;

    auto unknown = EnergyModel2::pairwise(PairPotential::multi_strauss({-0.5}, {0.0, 0.4}));
    CHECK_THROWS_AS(rejection_sample(unknown, w, sc), GibbsboxError);

    SamplerConfig hot = sc;
    hot.z = 5.0;
    hot.beta = 30.0;  // acceptance probability collapses
    auto strauss = EnergyModel2::pairwise(PairPotential::strauss(0.5));
    CHECK_THROWS_WITH(rejection_sample(strauss, w, hot),
                      Catch::Matchers::ContainsSubstring("estimated acceptance"));

    Window2 big = make_window(0, 0, 300, 300);
    CHECK_THROWS_WITH(rejection_sample(strauss, big, sc),
                      Catch::Matchers::ContainsSubstring("impractically large"));
}

TEST_CASE("rejection sampler honours frozen hard-core boundaries") {
    Window2 w = make_window(0, 0, 2, 2);
    auto model = EnergyModel2::hard_core(0.6);
    auto bc = BoundaryCondition2::frozen({pt(2.1, 1.0)}, w);
    for (int i = 0; i < 30; ++i) {
        SamplerConfig sc;
        sc.z = 1.0;
        sc.beta = 1.0;
        sc.seed = 31337 + i;
        auto cfg = rejection_sample(model, w, sc, bc);
        for (const auto& p : cfg.points()) REQUIRE(dist(p, pt(2.1, 1.0)) > 0.6);
    }
}

TEST_CASE("sampler config validation") {
    SamplerConfig sc;
    sc.z = -1.0;
    CHECK_THROWS_AS(sc.validate(), GibbsboxError);
    sc.z = 1.0;
    sc.move_mix = {0.5, 0.5, 0.5};
    CHECK_THROWS_AS(sc.validate(), GibbsboxError);
    sc.move_mix = {0.4, 0.4, 0.2};
    sc.thinning = 0;
    CHECK_THROWS_AS(sc.validate(), GibbsboxError);
    sc.thinning = 10;
    sc.beta = -0.1;
    CHECK_THROWS_AS(sc.validate(), GibbsboxError);
}

TEST_CASE("mh chain at beta zero matches the poisson count law") {
    Window2 w = make_window(0, 0, 5, 5);
    auto model = EnergyModel2::pairwise(PairPotential::strauss(0.5));
    SamplerConfig sc;
    sc.z = 1.0;
    sc.beta = 0.0;
    sc.burn_in = 20000;
    sc.thinning = 400;
    sc.sweeps = 400L * 1000L;
    sc.seed = 99;
    auto samples = mh_sample(model, w, sc);
    REQUIRE(samples.size() == 1000);
    std::vector<long> counts;
    for (const auto& s : samples) counts.push_back(static_cast<long>(s.size()));
    double p = chi_square_gof_p(counts, [](long k) { return poisson_pmf(k, 25.0); });
    CHECK(p > 0.01);
}

TEST_CASE("mh chain matches the exact sampler for a strauss model") {
    Window2 w = make_window(0, 0, 3, 3);
    auto model = EnergyModel2::pairwise(PairPotential::strauss(0.5));
    SamplerConfig mc;
    mc.z = 1.0;
    mc.beta = 1.0;
    mc.burn_in = 20000;
    mc.thinning = 500;
    mc.sweeps = 500L * 600L;
    mc.seed = 4242;
    auto chain = mh_sample(model, w, mc);
    std::vector<double> mh_counts, exact_counts;
    for (const auto& s : chain) mh_counts.push_back(static_cast<double>(s.size()));
    for (int i = 0; i < 600; ++i) {
        SamplerConfig sc;
        sc.z = 1.0;
        sc.beta = 1.0;
        sc.seed = 31000 + i;
        exact_counts.push_back(static_cast<double>(rejection_sample(model, w, sc).size()));
    }
    CHECK(ks_two_sample_p(mh_counts, exact_counts) > 0.01);
}

TEST_CASE("detailed balance holds for every move type") {
    Window2 w = make_window(0, 0, 2, 2);
    const double vol = w.volume();
    auto strauss = EnergyModel2::pairwise(PairPotential::strauss(0.7));
    auto smooth = EnergyModel2::pairwise(PairPotential::smooth_core(0.9));

    // Deliberately asymmetric move mix to exercise the Hastings correction.
    SamplerConfig sc;
    sc.z = 1.7;
    sc.beta = 0.8;
    sc.move_mix = {0.3, 0.5, 0.2};

    Rng rng(2718);
    for (const auto* model : {&strauss, &smooth}) {
        for (int rep = 0; rep < 40; ++rep) {
            ChainState<2> st;
            st.config = PointConfiguration2(w, 1.0);
            int n = 1 + static_cast<int>(rng.index(8));
            for (int i = 0; i < n; ++i) st.config.try_insert(w.sample(rng));
            double H_before = model->total_energy(st.config);

            // Birth of x, reversed by the death of the same point.
            Point2 x = w.sample(rng);
            if (st.config.contains_exact(x)) continue;
            auto mv = Move2::birth(x);
            double lr_f = detail::mh_log_ratio(*model, sc, w, st, mv, BoundaryCondition2::free_boundary());
            ChainState<2> st2;
            st2.config = apply_move(st.config, mv);
            double H_after = model->total_energy(st2.config);
            std::size_t born = SIZE_MAX;
            for (std::size_t i = 0; i < st2.config.size(); ++i)
                if (st2.config.point(i) == x) born = i;
            double lr_b =
                detail::mh_log_ratio(*model, sc, w, st2, Move2::death(born), BoundaryCondition2::free_boundary());

            double alpha_f = std::min(1.0, std::exp(lr_f));
            double alpha_b = std::min(1.0, std::exp(lr_b));
            double q_f = sc.move_mix[0] / vol;
            double q_b = sc.move_mix[1] / (static_cast<double>(st.config.size()) + 1.0);
            double lhs = (alpha_f * q_f) / (alpha_b * q_b);
            double rhs = sc.z * std::exp(-sc.beta * (H_after - H_before));
            REQUIRE(lhs == Approx(rhs).epsilon(1e-9));

            // Translate: symmetric proposal, ratio must equal the density ratio.
            std::size_t i = rng.index(st.config.size());
            Point2 dest = w.sample(rng);
            if (st.config.contains_exact(dest)) continue;
            double lr_t = detail::mh_log_ratio(*model, sc, w, st, Move2::translate(i, dest),
                                               BoundaryCondition2::free_boundary());
            auto moved = apply_move(st.config, Move2::translate(i, dest));
            double dH = model->total_energy(moved) - H_before;
            REQUIRE(lr_t == Approx(-sc.beta * dH).margin(1e-9));
        }
    }
}

TEST_CASE("energy cache stays consistent over long runs") {
    Window2 w = make_window(0, 0, 4, 4);
    SamplerConfig sc;
    sc.z = 1.5;
    sc.beta = 1.0;
    sc.burn_in = 0;
    sc.sweeps = 100000;
    sc.thinning = 100000;
    sc.seed = 11;

    auto strauss = EnergyModel2::pairwise(PairPotential::strauss(0.5));
    auto run = run_mh(strauss, w, sc);
    CHECK(std::fabs(run.state.energy - strauss.total_energy(run.state.config)) <= 1e-6);

    auto rc = EnergyModel2::random_cluster(0.8);
    SamplerConfig rcsc = sc;
    rcsc.sweeps = 20000;
    rcsc.thinning = 20000;
    auto run2 = run_mh(rc, w, rcsc);
    CHECK(std::fabs(run2.state.energy - rc.total_energy(run2.state.config)) <= 1e-6);

    // The area family accumulates quadrature deltas; drift stays at the
    // Monte-Carlo tolerance rather than machine precision.
    auto area = EnergyModel2::area(0.6).with_mc_samples(1024);
    SamplerConfig asc = sc;
    asc.sweeps = 10000;
    asc.thinning = 10000;
    auto run3 = run_mh(area, w, asc);
    CHECK(std::fabs(run3.state.energy - area.total_energy(run3.state.config)) <= 2.0);
}

TEST_CASE("hard-core chain never visits forbidden states") {
    Window2 w = make_window(0, 0, 3, 3);
    auto model = EnergyModel2::hard_core(0.5);
    SamplerConfig sc;
    sc.z = 2.0;
    sc.beta = 1.0;
    sc.burn_in = 5000;
    sc.sweeps = 20000;
    sc.thinning = 1000;
    sc.seed = 8;
    for (const auto& s : mh_sample(model, w, sc)) {
        if (s.size() >= 2) REQUIRE(min_pairwise_distance(s) > 0.5);
    }
}

TEST_CASE("strauss counts are dominated by the reference poisson") {
    Window2 w = make_window(0, 0, 5, 5);
    auto model = EnergyModel2::pairwise(PairPotential::strauss(0.5));
    SamplerConfig sc;
    sc.z = 1.0;
    sc.beta = 1.0;
    sc.burn_in = 20000;
    sc.thinning = 300;
    sc.sweeps = 300L * 500L;
    sc.seed = 1234;
    auto samples = mh_sample(model, w, sc);
    std::vector<long> counts;
    for (const auto& s : samples) counts.push_back(static_cast<long>(s.size()));
    const double n = static_cast<double>(counts.size());
    for (long k = 0; k <= 45; ++k) {
        double emp = 0.0;
        for (long c : counts)
            if (c >= k) emp += 1.0;
        emp /= n;
        double tail = poisson_sf(k - 1, 25.0);  // P(N >= k) for Poisson(z |win|)
        // One-sided binomial z-test against the dominating tail.
        double se = std::sqrt(tail * (1.0 - tail) / n);
        REQUIRE(emp <= tail + 3.0 * se);
    }
}

TEST_CASE("chains are reproducible and seed-sensitive") {
    Window2 w = make_window(0, 0, 3, 3);
    auto model = EnergyModel2::pairwise(PairPotential::strauss(0.5));
    SamplerConfig sc;
    sc.z = 1.0;
    sc.beta = 0.7;
    sc.burn_in = 2000;
    sc.sweeps = 5000;
    sc.thinning = 500;
    sc.seed = 321;
    auto a = mh_sample(model, w, sc);
    auto b = mh_sample(model, w, sc);
    REQUIRE(a.size() == b.size());
    for (std::size_t s = 0; s < a.size(); ++s) {
        REQUIRE(a[s].size() == b[s].size());
        for (std::size_t i = 0; i < a[s].size(); ++i) REQUIRE(a[s].point(i) == b[s].point(i));
    }
    sc.seed = 322;
    auto c = mh_sample(model, w, sc);
    bool all_same = a.back().size() == c.back().size();
    if (all_same)
        for (std::size_t i = 0; i < a.back().size(); ++i)
            all_same = all_same && (a.back().point(i) == c.back().point(i));
    CHECK_FALSE(all_same);
}

TEST_CASE("exclusion band keeps the band empty") {
    Window2 w = make_window(0, 0, 4, 4);
    auto model = EnergyModel2::pairwise(PairPotential::strauss(0.5));
    auto bc = BoundaryCondition2::exclusion(0.5);
    SamplerConfig sc;
    sc.z = 2.0;
    sc.beta = 0.5;
    sc.burn_in = 10000;
    sc.sweeps = 30000;
    sc.thinning = 1000;
    sc.seed = 77;
    for (const auto& s : mh_sample(model, w, sc, bc))
        for (const auto& p : s.points()) REQUIRE(w.boundary_distance(p) >= 0.5);

    // Rejection sampling under the band restricts the support identically.
    SamplerConfig rs;
    rs.z = 1.0;
    rs.beta = 0.5;
    rs.seed = 12;
    auto cfg = rejection_sample(model, w, rs, bc);
    for (const auto& p : cfg.points()) REQUIRE(w.boundary_distance(p) >= 0.5);
}

TEST_CASE("mh sample count and initial state handling") {
    Window2 w = make_window(0, 0, 2, 2);
    auto model = EnergyModel2::pairwise(PairPotential::strauss(0.5));
    SamplerConfig sc;
    sc.z = 1.0;
    sc.beta = 1.0;
    sc.burn_in = 100;
    sc.sweeps = 1000;
    sc.thinning = 100;
    sc.seed = 5;
    CHECK(mh_sample(model, w, sc).size() == 10);

    auto hc = EnergyModel2::hard_core(1.0);
    PointConfiguration2 bad(w, 1.0);
    bad.insert(pt(1.0, 1.0));
    bad.insert(pt(1.2, 1.0));
    CHECK_THROWS_WITH(run_mh(hc, w, sc, BoundaryCondition2::free_boundary(), bad),
                      Catch::Matchers::ContainsSubstring("infinite energy"));
}

TEST_CASE("two-type wr draws satisfy the exclusion constraints") {
    Window2 w = make_window(0, 0, 4, 4);
    for (int i = 0; i < 25; ++i) {
        for (auto variant : {WrVariant::direct, WrVariant::via_random_cluster}) {
            auto [g1, g2] = sample_two_type_wr(w, 0.5, 1.0, 900 + i, variant);
            if (g1.size() && g2.size()) REQUIRE(min_cross_distance(g1, g2) > 1.0);
            for (const auto& p : g1.points()) REQUIRE(w.boundary_distance(p) >= 0.5);
        }
    }
}

TEST_CASE("interior components split symmetrically at small activity") {
    Window2 w = make_window(0, 0, 2, 2);
    const double R = 0.4;
    long type1 = 0, total = 0;
    for (int i = 0; i < 500; ++i) {
        auto [g1, g2] = sample_two_type_wr(w, 0.05, R, 7000 + i, WrVariant::via_random_cluster, 3000);
        auto c1 = component_labels(g1, R).second;
        // Interior components of the second type only (boundary ones are forced).
        std::size_t c2 = 0;
        auto [labels, ncc] = component_labels(g2, R);
        (void)ncc;
        std::vector<bool> inside(g2.size(), true);
        for (std::size_t k = 0; k < g2.size(); ++k)
            if (w.boundary_distance(g2.point(k)) < R / 2.0) inside[labels[k]] = false;
        std::set<std::size_t> seen;
        for (std::size_t k = 0; k < g2.size(); ++k)
            if (inside[labels[k]] && seen.insert(labels[k]).second) ++c2;
        type1 += static_cast<long>(c1);
        total += static_cast<long>(c1) + static_cast<long>(c2);
    }
    REQUIRE(total > 100);
    CHECK(sign_test_p(type1, total) > 0.01);
}

TEST_CASE("wr variants agree on the type-1 count distribution") {
    Window2 w = make_window(0, 0, 4, 4);
    std::vector<double> a, b;
    for (int i = 0; i < 400; ++i) {
        a.push_back(static_cast<double>(
            sample_two_type_wr(w, 0.5, 1.0, 100000 + i, WrVariant::direct).first.size()));
        b.push_back(static_cast<double>(
            sample_two_type_wr(w, 0.5, 1.0, 200000 + i, WrVariant::via_random_cluster).first.size()));
    }
    CHECK(ks_two_sample_p(a, b) > 0.01);
}
