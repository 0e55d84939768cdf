#pragma once

// Statistical helpers for tests: Kolmogorov-Smirnov and chi-square p-values,
// plus small moment utilities. Test-side oracles only.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace stat_test {

// Kolmogorov distribution tail Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_q(double lambda) {
    if (lambda < 1e-8) {
        return 1.0;
    }
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-12) {
            break;
        }
    }
    return std::min(1.0, std::max(0.0, sum));
}

// One-sample KS test against an exact CDF; n_eff allows discounting for
// autocorrelated samples.
inline double ks_test(std::vector<double> samples, const std::function<double(double)>& cdf,
                      double n_eff = -1.0) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    const double m = n_eff > 0 ? n_eff : n;
    return kolmogorov_q((std::sqrt(m) + 0.12 + 0.11 / std::sqrt(m)) * d);
}

// Two-sample KS test with optional effective sample sizes.
inline double ks_test_two_sample(std::vector<double> a, std::vector<double> b, double n_eff_a = -1.0,
                                 double n_eff_b = -1.0) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = n_eff_a > 0 ? n_eff_a : static_cast<double>(a.size());
    const double nb = n_eff_b > 0 ? n_eff_b : static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) {
            ++i;
        } else {
            ++j;
        }
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    const double m = std::sqrt(na * nb / (na + nb));
    return kolmogorov_q((m + 0.12 + 0.11 / m) * d);
}

// Regularized lower incomplete gamma P(a, x) (series + continued fraction).
inline double gamma_p(double a, double x) {
    if (x <= 0.0) {
        return 0.0;
    }
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int n = 1; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-14) {
                break;
            }
        }
        return sum * std::exp(-x + a * std::log(x) - gln);
    }
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int n = 1; n < 500; ++n) {
        const double an = -n * (n - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) {
            d = 1e-300;
        }
        c = b + an / c;
        if (std::abs(c) < 1e-300) {
            c = 1e-300;
        }
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-14) {
            break;
        }
    }
    return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

// Chi-square upper tail p-value.
inline double chi_square_p(double stat, int dof) {
    return 1.0 - gamma_p(0.5 * dof, 0.5 * stat);
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (const double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (const double x : v) {
        s += (x - m) * (x - m);
    }
    return s / (static_cast<double>(v.size()) - 1.0);
}

} // namespace stat_test
