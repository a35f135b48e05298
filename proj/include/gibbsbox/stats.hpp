#pragma once

// Small statistics toolkit used by the validation suite: moment summaries,
// regularized incomplete gamma, chi-square and Kolmogorov-Smirnov tests,
// binomial sign test and Poisson tail helpers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <vector>

#include "util.hpp"

namespace gibbsbox {

struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

inline MeanSE mean_se(const std::vector<double>& xs) {
    MeanSE r;
    r.n = xs.size();
    if (r.n == 0) return r;
    r.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(r.n);
    if (r.n > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - r.mean) * (x - r.mean);
        r.se = std::sqrt(ss / (static_cast<double>(r.n) * (static_cast<double>(r.n) - 1.0)));
    }
    return r;
}

inline double variance(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double m = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return ss / (static_cast<double>(xs.size()) - 1.0);
}

// Regularized incomplete gamma Q(a,x) = Gamma(a,x)/Gamma(a); series expansion
// below a+1, Lentz continued fraction above.
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) return 1.0;
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::fabs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

inline double chi_square_sf(double chi2, double dof) { return gamma_q(dof / 2.0, chi2 / 2.0); }

inline double poisson_pmf(long k, double mean) {
    if (k < 0) return 0.0;
    if (mean <= 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(k * std::log(mean) - mean - std::lgamma(static_cast<double>(k) + 1.0));
}

inline double poisson_cdf(long k, double mean) {
    if (k < 0) return 0.0;
    return gamma_q(static_cast<double>(k) + 1.0, mean);
}

inline double poisson_sf(long k, double mean) {  // P(X > k)
    return 1.0 - poisson_cdf(k, mean);
}

// Chi-square goodness of fit of integer draws against a discrete pmf.
// Bins with expected count below `min_expected` are pooled into the tails.
inline double chi_square_gof_p(const std::vector<long>& draws,
                               const std::function<double(long)>& pmf,
                               double min_expected = 5.0) {
    if (draws.empty()) return 1.0;
    long lo = *std::min_element(draws.begin(), draws.end());
    long hi = *std::max_element(draws.begin(), draws.end());
    std::map<long, std::size_t> counts;
    for (long d : draws) counts[d]++;
    const double n = static_cast<double>(draws.size());

    // Expected mass per raw bin, with everything < lo and > hi folded in.
    std::vector<double> exp_mass;
    std::vector<double> obs;
    for (long k = lo; k <= hi; ++k) {
        double p = pmf(k);
        if (k == lo) {
            for (long j = 0; j < lo; ++j) p += pmf(j);
        }
        exp_mass.push_back(p * n);
        auto it = counts.find(k);
        obs.push_back(it == counts.end() ? 0.0 : static_cast<double>(it->second));
    }
    double tail = 0.0;
    for (long k = hi + 1; k <= hi + 200; ++k) tail += pmf(k);
    exp_mass.back() += tail * n;

    // Pool small-expectation bins left to right.
    std::vector<double> e2, o2;
    double ea = 0.0, oa = 0.0;
    for (std::size_t i = 0; i < exp_mass.size(); ++i) {
        ea += exp_mass[i];
        oa += obs[i];
        if (ea >= min_expected) {
            e2.push_back(ea);
            o2.push_back(oa);
            ea = oa = 0.0;
        }
    }
    if (ea > 0.0 || oa > 0.0) {
        if (e2.empty()) {
            e2.push_back(ea);
            o2.push_back(oa);
        } else {
            e2.back() += ea;
            o2.back() += oa;
        }
    }
    if (e2.size() < 2) return 1.0;
    double chi2 = 0.0;
    for (std::size_t i = 0; i < e2.size(); ++i) {
        if (e2[i] > 0.0) chi2 += (o2[i] - e2[i]) * (o2[i] - e2[i]) / e2[i];
    }
    return chi_square_sf(chi2, static_cast<double>(e2.size() - 1));
}

// Kolmogorov survival Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_sf(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0, sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-12) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

// Two-sample Kolmogorov-Smirnov p-value; ties (e.g. integer counts) make the
// test conservative, which is the safe direction for agreement checks.
inline double ks_two_sample_p(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) return 1.0;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    double d = 0.0, fa = 0.0, fb = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        fa = static_cast<double>(i) / na;
        fb = static_cast<double>(j) / nb;
        d = std::max(d, std::fabs(fa - fb));
    }
    double ne = std::sqrt(na * nb / (na + nb));
    return kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d);
}

inline double binomial_cdf(long k, long n, double p) {
    if (k < 0) return 0.0;
    if (k >= n) return 1.0;
    double c = 0.0;
    for (long i = 0; i <= k; ++i) {
        double lg = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
        c += std::exp(lg + i * std::log(p) + (n - i) * std::log1p(-p));
    }
    return std::min(c, 1.0);
}

// Two-sided sign test: m trials, k successes, null p = 1/2.
inline double sign_test_p(long k, long m) {
    if (m == 0) return 1.0;
    long lo = std::min(k, m - k);
    double p = 2.0 * binomial_cdf(lo, m, 0.5);
    return std::min(p, 1.0);
}

}  // namespace gibbsbox
