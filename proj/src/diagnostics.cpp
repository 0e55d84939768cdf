#include "pmcmc/diagnostics.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace pmcmc {
namespace diagnostics {

double ess(const Eigen::VectorXd& prob) {
    return 1.0 / prob.squaredNorm();
}

Eigen::VectorXd acf(const Eigen::VectorXd& series, int max_lag) {
    const Eigen::Index m = series.size();
    if (m < 2) {
        throw std::invalid_argument("acf: need at least two points");
    }
    if (max_lag >= m) {
        throw std::invalid_argument("acf: max_lag must be < series length");
    }
    const double mean = series.mean();
    const Eigen::VectorXd centered = series.array() - mean;
    const double denom = centered.squaredNorm();
    if (denom == 0.0) {
        throw std::invalid_argument("acf: zero variance");
    }
    Eigen::VectorXd r(max_lag + 1);
    for (int k = 0; k <= max_lag; ++k) {
        r[k] = centered.head(m - k).dot(centered.tail(m - k)) / denom;
    }
    return r;
}

double integrated_autocorr_time(const Eigen::VectorXd& series) {
    const Eigen::Index m = series.size();
    if (m < 4) {
        return 1.0;
    }
    const int max_lag = static_cast<int>(std::min<Eigen::Index>(m - 1, m / 2));
    Eigen::VectorXd r;
    try {
        r = acf(series, max_lag);
    } catch (const std::invalid_argument&) {
        return 1.0; // constant series: no autocorrelation to integrate
    }
    double tau = 1.0;
    for (int k = 1; k <= max_lag; ++k) {
        if (r[k] <= 0.0) {
            break;
        }
        tau += 2.0 * r[k];
    }
    return tau;
}

double silverman_bandwidth(const Eigen::VectorXd& samples) {
    const Eigen::Index m = samples.size();
    const double mean = samples.mean();
    const double sd = std::sqrt((samples.array() - mean).square().sum() / static_cast<double>(m - 1));
    return 1.06 * sd * std::pow(static_cast<double>(m), -0.2);
}

Eigen::VectorXd kde(const Eigen::VectorXd& samples, const Eigen::VectorXd& grid, double bandwidth) {
    if (samples.size() < 2 && bandwidth <= 0.0) {
        throw std::invalid_argument("kde: need at least two samples for an automatic bandwidth");
    }
    const double h = bandwidth > 0.0 ? bandwidth : silverman_bandwidth(samples);
    const double norm = 1.0 / (static_cast<double>(samples.size()) * h * std::sqrt(2.0 * M_PI));
    Eigen::VectorXd density(grid.size());
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
        const Eigen::ArrayXd z = (samples.array() - grid[g]) / h;
        density[g] = norm * (-0.5 * z.square()).exp().sum();
    }
    return density;
}

void write_acf_csv(std::ostream& os, const Eigen::VectorXd& acf_values) {
    os << "lag,acf\n";
    os.precision(12);
    for (Eigen::Index k = 0; k < acf_values.size(); ++k) {
        os << k << ',' << acf_values[k] << '\n';
    }
}

void write_kde_csv(std::ostream& os, const Eigen::VectorXd& grid, const Eigen::VectorXd& density) {
    os << "grid,density\n";
    os.precision(12);
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
        os << grid[g] << ',' << density[g] << '\n';
    }
}

void write_ess_csv(std::ostream& os, const Eigen::VectorXd& ess_per_t) {
    os << "t,ess\n";
    os.precision(12);
    for (Eigen::Index t = 0; t < ess_per_t.size(); ++t) {
        os << (t + 1) << ',' << ess_per_t[t] << '\n';
    }
}

} // namespace diagnostics
} // namespace pmcmc
