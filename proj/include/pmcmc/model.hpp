#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "pmcmc/rng.hpp"

namespace pmcmc {

/// Model parameters (a0, a1) are the diagonal/off-diagonal band of the
/// transition matrix; sigma and tau are the transition and observation
/// standard deviations.
struct Theta {
    double a0 = 0.5;
    double a1 = 0.2;
    double sigma = 1.0;
    double tau = 1.0;

    bool in_prior_support() const noexcept {
        return a0 > -1.0 && a0 < 1.0 && a1 > -1.0 && a1 < 1.0 && sigma > 0.0 && tau > 0.0;
    }

    double operator[](int k) const {
        switch (k) {
            case 0: return a0;
            case 1: return a1;
            case 2: return sigma;
            default: return tau;
        }
    }
    double& operator[](int k) {
        switch (k) {
            case 0: return a0;
            case 1: return a1;
            case 2: return sigma;
            default: return tau;
        }
    }

    static constexpr int dim = 4;
};

/// State/observation dimension and time horizon. The initial mean m0 = 0_d and
/// initial covariance C0 = I_d are known constants of the model.
struct ModelDims {
    int d = 1;
    int T = 1;
};

struct GaussianMoments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;

    /// Checks symmetry (1e-10) and eigenvalues >= -1e-10.
    void validate() const;
};

/// Observations plus (optionally) the latent states they were simulated from.
struct DataSet {
    Eigen::MatrixXd y;        // T x d
    Eigen::MatrixXd x_true;   // T x d; empty if unknown
    std::uint64_t seed = 0;

    bool has_states() const { return x_true.size() > 0; }

    /// CSV with header `t,dim,y[,x]`, one row per (t, dimension), 1-based.
    void write_csv(std::ostream& os) const;
    static DataSet read_csv(std::istream& is);
};

/// Symmetric banded transition matrix: a0 on the diagonal, a1 on the first
/// off-diagonals.
Eigen::MatrixXd build_transition_matrix(double a0, double a1, int d);

/// The d-dimensional linear-Gaussian state-space model:
///   x_1 ~ N(0, I),  x_t | x_{t-1} ~ N(A x_{t-1}, sigma^2 I),
///   y_t | x_t ~ N(x_t, tau^2 I).
/// All densities are computed and returned in log space. Evaluators are pure
/// given (theta, dims) and safe for concurrent use.
class LinearGaussianModel {
public:
    LinearGaussianModel(const Theta& theta, const ModelDims& dims);

    const Theta& theta() const noexcept { return theta_; }
    const ModelDims& dims() const noexcept { return dims_; }
    int d() const noexcept { return dims_.d; }
    int T() const noexcept { return dims_.T; }

    /// A x without forming the dense matrix (banded structure).
    Eigen::VectorXd apply_transition(const Eigen::VectorXd& x) const;

    Eigen::MatrixXd transition_matrix() const { return build_transition_matrix(theta_.a0, theta_.a1, dims_.d); }

    // --- simulation ---
    DataSet simulate(std::uint64_t seed) const;
    Eigen::VectorXd sample_initial(RngStream& rng) const;
    Eigen::VectorXd sample_transition(const Eigen::VectorXd& x_prev, RngStream& rng) const;
    Eigen::VectorXd sample_observation(const Eigen::VectorXd& x, RngStream& rng) const;

    // --- log densities (throw std::invalid_argument on non-finite input) ---
    double log_initial(const Eigen::VectorXd& x1) const;                                   // log mu(x1)
    double log_transition(const Eigen::VectorXd& x, const Eigen::VectorXd& x_prev) const;  // log f(x|x_prev)
    double log_observation(const Eigen::VectorXd& y, const Eigen::VectorXd& x) const;      // log g(y|x)

    /// log p(x_{1:T}, y_{1:T}); paths are stored row-per-time (T x d).
    double log_joint(const Eigen::MatrixXd& x_path, const Eigen::MatrixXd& y) const;

    // --- locally optimal proposal and predictive likelihood (closed form) ---
    // p(x_t | x_{t-1}, y_t) = N(m*, s^2 I) with s^2 = sigma^2 tau^2/(sigma^2+tau^2),
    // m* = s^2 (A x_{t-1}/sigma^2 + y_t/tau^2); p(y_t | x_{t-1}) = N(y_t; A x_{t-1}, (sigma^2+tau^2) I).
    Eigen::VectorXd sample_optimal(const Eigen::VectorXd& y, const Eigen::VectorXd& x_prev, RngStream& rng) const;
    double log_optimal(const Eigen::VectorXd& y, const Eigen::VectorXd& x_prev, const Eigen::VectorXd& x) const;
    double log_predictive(const Eigen::VectorXd& y, const Eigen::VectorXd& x_prev) const;
    double optimal_variance() const noexcept { return opt_var_; }
    Eigen::VectorXd optimal_mean(const Eigen::VectorXd& y, const Eigen::VectorXd& x_prev) const;

    // t = 1 counterparts: p(x_1 | y_1) and p(y_1) = N(y_1; 0, (1 + tau^2) I).
    Eigen::VectorXd sample_initial_posterior(const Eigen::VectorXd& y1, RngStream& rng) const;
    double log_initial_posterior(const Eigen::VectorXd& y1, const Eigen::VectorXd& x) const;
    double log_predictive_initial(const Eigen::VectorXd& y1) const;

private:
    Theta theta_;
    ModelDims dims_;
    double opt_var_;       // s^2 above
    double opt_var_init_;  // t=1 version: tau^2/(1+tau^2)
};

/// Zero-mean stationary law of the latent chain; Sigma solves
/// Sigma = A Sigma A^T + sigma^2 I by fixed-point iteration. Throws
/// std::runtime_error("no stationary distribution") if the spectral radius of
/// A is >= 1.
GaussianMoments stationary_moments(const Theta& theta, int d);

/// Uniform(-1,1) on a0, a1 and inverse-gamma(shape 1, scale 0.5) on sigma,
/// tau; -inf outside the support.
double log_prior(const Theta& theta);
Theta sample_prior(RngStream& rng);

/// log of the inverse-gamma density, parameterized so the density is
/// proportional to x^-(shape+1) exp(-scale/x).
double log_inverse_gamma(double x, double shape, double scale);

namespace density {
/// Isotropic Gaussian: log N(x; mean, var * I).
double log_iso_normal(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, double var);
} // namespace density

} // namespace pmcmc
