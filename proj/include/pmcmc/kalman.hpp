#pragma once

#include <vector>

#include <Eigen/Dense>

#include "pmcmc/model.hpp"
#include "pmcmc/rng.hpp"

namespace pmcmc {

/// Exact filter/smoother for the linear-Gaussian model; the ground truth the
/// samplers are validated against. Kept fully dense and generic even though
/// the model covariances are isotropic.
struct KalmanResult {
    double loglik = 0.0;                      // log p_theta(y_{1:T})
    std::vector<GaussianMoments> predicted;   // p(x_t | y_{1:t-1}), T entries
    std::vector<GaussianMoments> filtered;    // p(x_t | y_{1:t})
    std::vector<GaussianMoments> smoothed;    // p(x_t | y_{1:T})
};

/// Standard Kalman recursions plus an RTS smoothing pass. Throws
/// std::runtime_error if an innovation covariance is not positive definite.
KalmanResult kalman(const LinearGaussianModel& model, const Eigen::MatrixXd& y);

/// Draws x_{1:T} ~ p(. | y_{1:T}) exactly by backward simulation from the
/// filter moments. Returns a T x d path.
Eigen::MatrixXd sample_posterior_path(const LinearGaussianModel& model, const KalmanResult& kf, RngStream& rng);

} // namespace pmcmc
