#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace pmcmc {
namespace diagnostics {

/// Effective sample size 1/sum(w_i^2) of a normalized weight vector.
double ess(const Eigen::VectorXd& prob);

/// Autocorrelation r_0..r_max_lag with the overall-mean, divide-by-total-
/// variance estimator; r_0 = 1. Throws on a constant series.
Eigen::VectorXd acf(const Eigen::VectorXd& series, int max_lag);

/// Integrated autocorrelation time via the initial-positive-sequence rule;
/// >= 1. Used to turn chain standard deviations into standard errors.
double integrated_autocorr_time(const Eigen::VectorXd& series);

/// Silverman's rule 1.06 sd M^(-1/5).
double silverman_bandwidth(const Eigen::VectorXd& samples);

/// Gaussian kernel-density estimate on a grid; bandwidth <= 0 picks
/// Silverman's rule.
Eigen::VectorXd kde(const Eigen::VectorXd& samples, const Eigen::VectorXd& grid, double bandwidth = -1.0);

// CSV exports: `lag,acf`, `grid,density`, `t,ess`.
void write_acf_csv(std::ostream& os, const Eigen::VectorXd& acf_values);
void write_kde_csv(std::ostream& os, const Eigen::VectorXd& grid, const Eigen::VectorXd& density);
void write_ess_csv(std::ostream& os, const Eigen::VectorXd& ess_per_t);

} // namespace diagnostics
} // namespace pmcmc
