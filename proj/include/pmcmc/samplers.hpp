#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>

#include <Eigen/Dense>

#include "pmcmc/ehmm.hpp"
#include "pmcmc/kalman.hpp"
#include "pmcmc/mcmc_filters.hpp"
#include "pmcmc/model.hpp"
#include "pmcmc/particle_filters.hpp"

namespace pmcmc {

/// Everything needed to run one of the six particle filters (conditionally or
/// not) at an arbitrary parameter value.
struct FilterSpec {
    FilterVariant variant = FilterVariant::bootstrap;
    int N = 100;
    ProposalKind proposal = ProposalKind::lookahead_bootstrap; // auxiliary kinds only
    KernelSpec kernel;                                         // mcmc kinds only
};

ParticleSystem run_filter(const FilterSpec& spec, const LinearGaussianModel& model, const Eigen::MatrixXd& y,
                          RngStream& rng, MoveStats* stats = nullptr);

ParticleSystem run_conditional_filter(const FilterSpec& spec, const RetainedPath& retained,
                                      const LinearGaussianModel& model, const Eigen::MatrixXd& y, IndexMode mode,
                                      RngStream& rng, MoveStats* stats = nullptr);

/// Likelihood-estimate producer for PMMH-type chains: one of the six particle
/// filters, the original embedded-HMM estimator p~(y_{1:T}), or the exact
/// Kalman evaluation (which turns PMMH into the idealized marginal sampler).
struct Estimator {
    bool ehmm = false;
    bool exact = false;
    FilterSpec filter;
    int ehmm_N = 100;
    PoolKernelSpec pool_kernel;

    static Estimator make_filter(const FilterSpec& spec) { return Estimator{false, false, spec, 0, {}}; }
    static Estimator make_ehmm(int N, const PoolKernelSpec& kernel) {
        return Estimator{true, false, FilterSpec{}, N, kernel};
    }
    static Estimator make_exact() { return Estimator{false, true, FilterSpec{}, 0, {}}; }

    double loglik(const LinearGaussianModel& model, const Eigen::MatrixXd& y, RngStream& rng) const;
    /// Estimate together with a path drawn from the estimator's own
    /// path-selection law (terminal weights + lineage, or the HMM path draw).
    std::pair<double, Eigen::MatrixXd> loglik_and_path(const LinearGaussianModel& model, const Eigen::MatrixXd& y,
                                                       RngStream& rng) const;
};

/// Configuration shared by the top-level chains.
struct SamplerConfig {
    long iterations = 1000;
    double burn_in_fraction = 0.1;
    int theta_updates_per_sweep = 100; // particle Gibbs / idealized Gibbs
    double rw_sd = -1.0;               // theta proposal std; <0 means (100 d_theta d T)^(-1/2)
    std::array<bool, 4> update_mask{true, true, true, true};
    std::uint64_t seed = 1;

    double effective_rw_sd(int d, int T) const {
        return rw_sd > 0 ? rw_sd : std::sqrt(1.0 / (100.0 * Theta::dim * d * static_cast<double>(T)));
    }
    void validate() const;
};

/// Current position of a PMMH or particle Gibbs chain.
struct ChainState {
    Theta theta;
    Eigen::MatrixXd path;      // T x d
    double cached_loglik = 0;  // likelihood estimate (PMMH) or unused (PG)
    long iteration = 0;
};

/// Gaussian random-walk proposal on theta, respecting the update mask.
Theta propose_theta(const Theta& theta, double sd, const std::array<bool, 4>& mask, RngStream& rng);

/// One PMMH step (general form: works with any Estimator). Prior-zero
/// proposals are rejected without running the estimator but still count as
/// proposed. Returns whether the proposal was accepted.
bool pmmh_step(ChainState& state, const Estimator& estimator, const ModelDims& dims, const Eigen::MatrixXd& y,
               const SamplerConfig& config, RngStream& rng);

/// Initialize a PMMH chain at the given theta by running the estimator once.
ChainState pmmh_init(const Theta& theta, const Estimator& estimator, const ModelDims& dims,
                     const Eigen::MatrixXd& y, RngStream& rng);

/// `count` Metropolis-Hastings updates of theta given a fixed path, targeting
/// p(theta) p_theta(x_{1:T}, y_{1:T}). Returns the number of acceptances.
int theta_moves(Theta& theta, const Eigen::MatrixXd& path, const ModelDims& dims, const Eigen::MatrixXd& y,
                const SamplerConfig& config, int count, RngStream& rng);

/// One particle Gibbs sweep: theta moves, uniform slot indices, conditional
/// filter, then a backward-sampling pass (mode == backward_sampling) or the
/// terminal draw of the ancestor-sampling scheme.
void pg_sweep(ChainState& state, const FilterSpec& spec, IndexMode mode, const ModelDims& dims,
              const Eigen::MatrixXd& y, const SamplerConfig& config, RngStream& rng, MoveStats* stats = nullptr,
              int* theta_accepts = nullptr);

/// Idealized baselines: MH on theta with the exact Kalman likelihood, and the
/// Gibbs sampler alternating exact posterior path draws with theta moves.
bool idealized_mh_step(ChainState& state, const ModelDims& dims, const Eigen::MatrixXd& y,
                       const SamplerConfig& config, RngStream& rng);
void idealized_gibbs_sweep(ChainState& state, const ModelDims& dims, const Eigen::MatrixXd& y,
                           const SamplerConfig& config, RngStream& rng, int* theta_accepts = nullptr);

/// One MH step of the original embedded-HMM parameter sampler (a PMMH step
/// whose estimate is the N-state HMM filter's p~).
bool ehmm_mh_step(ChainState& state, int N, const PoolKernelSpec& kernel, const ModelDims& dims,
                  const Eigen::MatrixXd& y, const SamplerConfig& config, RngStream& rng);

} // namespace pmcmc
