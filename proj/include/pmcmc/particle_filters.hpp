#pragma once

#include <Eigen/Dense>

#include "pmcmc/model.hpp"
#include "pmcmc/particle_system.hpp"
#include "pmcmc/proposals.hpp"
#include "pmcmc/rng.hpp"

namespace pmcmc {

/// Bootstrap filter: x_1 ~ mu, multinomial resampling on the g-weights,
/// propagation by f. exp(sum(loglik_terms)) is the standard unbiased
/// likelihood estimate prod_t N^-1 sum_i g(y_t|x_t^i).
ParticleSystem bootstrap_pf(const LinearGaussianModel& model, const Eigen::MatrixXd& y, int N, RngStream& rng);

/// Fully-adapted auxiliary filter: x_1 ~ p(x_1|y_1), resampling weights
/// p(y_t|x_{t-1}^i), propagation by p(x_t|x_{t-1}, y_t). Estimate
/// p(y_1) prod_{t>=2} N^-1 sum_i p(y_t|x_{t-1}^i).
ParticleSystem faapf(const LinearGaussianModel& model, const Eigen::MatrixXd& y, int N, RngStream& rng);

/// General auxiliary filter for an arbitrary proposal family; weights follow
/// the three-case v formula and the estimate is prod_t N^-1 sum_i v_t^i.
ParticleSystem apf(const LinearGaussianModel& model, const Eigen::MatrixXd& y, int N, const Proposal& proposal,
                   RngStream& rng);

/// Conditional counterparts: slot b_t is pinned to the retained path, the
/// other N-1 slots are drawn as in the unconditional filter. The pinned
/// slot's ancestor is b_{t-1} under backward_sampling mode and redrawn via
/// ancestor_sample under ancestor_sampling mode.
ParticleSystem conditional_bootstrap_pf(const RetainedPath& retained, const LinearGaussianModel& model,
                                        const Eigen::MatrixXd& y, int N, IndexMode mode, RngStream& rng);
ParticleSystem conditional_faapf(const RetainedPath& retained, const LinearGaussianModel& model,
                                 const Eigen::MatrixXd& y, int N, IndexMode mode, RngStream& rng);
ParticleSystem conditional_apf(const RetainedPath& retained, const LinearGaussianModel& model,
                               const Eigen::MatrixXd& y, int N, const Proposal& proposal, IndexMode mode,
                               RngStream& rng);

/// One row of variant weights at (0-based) time t for a filled cloud x_t.
/// a_prev/x_prev are required for t > 0; proposal for the auxiliary kinds.
Eigen::VectorXd compute_logw_row(FilterVariant variant, const LinearGaussianModel& model, const Eigen::MatrixXd& y,
                                 int t, const Eigen::MatrixXd& x_t, const std::vector<int>* a_prev,
                                 const Eigen::MatrixXd* x_prev, const Proposal* proposal);

/// log p~(y_{t+1}|x_t) as used by the variant's weights: 0 for bootstrap-type,
/// the exact predictive for fully-adapted-type, the proposal's approximation
/// for auxiliary-type.
double variant_log_predictive(FilterVariant variant, const LinearGaussianModel& model, const Eigen::MatrixXd& y,
                              int t, const Eigen::VectorXd& x, const Proposal* proposal);

/// Draw b_T from the variant's terminal path-selection law (the normalized
/// final weight row; uniform for fully-adapted kinds whose row is constant).
int sample_terminal_index(const ParticleSystem& system, RngStream& rng);

/// Backward-sampling pass over a completed system; returns b_{1:T}.
std::vector<int> backward_sample(const ParticleSystem& system, FilterVariant variant,
                                 const LinearGaussianModel& model, const Eigen::MatrixXd& y,
                                 const Proposal* proposal, RngStream& rng);

/// Ancestor-sampling draw for the pinned slot at time t (>= 1): index i with
/// probability proportional to w_{t-1}^i f(x_pinned|x_{t-1}^i) / p~(y_t|x_{t-1}^i).
int ancestor_sample(FilterVariant variant, const LinearGaussianModel& model, const Eigen::MatrixXd& y, int t,
                    const Eigen::MatrixXd& x_prev, const Eigen::VectorXd& logw_prev,
                    const Eigen::VectorXd& x_pinned, const Proposal* proposal, RngStream& rng);

} // namespace pmcmc
