#include "pmcmc/samplers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pmcmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool accept_log_ratio(double log_alpha, RngStream& rng) {
    if (log_alpha >= 0.0) {
        return true;
    }
    return std::log(rng.uniform()) < log_alpha;
}

int uniform_below(int n, RngStream& rng) {
    const int k = static_cast<int>(rng.uniform() * n);
    return k >= n ? n - 1 : k;
}

} // namespace

void SamplerConfig::validate() const {
    if (iterations < 1) {
        throw std::invalid_argument("SamplerConfig: iterations must be >= 1");
    }
    if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) {
        throw std::invalid_argument("SamplerConfig: burn-in fraction must lie in [0, 1)");
    }
    if (theta_updates_per_sweep < 0) {
        throw std::invalid_argument("SamplerConfig: theta updates per sweep must be >= 0");
    }
}

ParticleSystem run_filter(const FilterSpec& spec, const LinearGaussianModel& model, const Eigen::MatrixXd& y,
                          RngStream& rng, MoveStats* stats) {
    switch (spec.variant) {
        case FilterVariant::bootstrap: return bootstrap_pf(model, y, spec.N, rng);
        case FilterVariant::fully_adapted: return faapf(model, y, spec.N, rng);
        case FilterVariant::auxiliary: {
            const auto proposal = make_proposal(spec.proposal, model, y);
            return apf(model, y, spec.N, *proposal, rng);
        }
        case FilterVariant::mcmc_bootstrap: return mcmc_pf(model, y, spec.N, spec.kernel, rng, stats);
        case FilterVariant::mcmc_fully_adapted: return mcmc_faapf(model, y, spec.N, spec.kernel, rng, stats);
        case FilterVariant::mcmc_auxiliary: {
            const auto proposal = make_proposal(spec.proposal, model, y);
            return mcmc_apf(model, y, spec.N, *proposal, spec.kernel, rng, stats);
        }
    }
    throw std::logic_error("run_filter: unknown variant");
}

ParticleSystem run_conditional_filter(const FilterSpec& spec, const RetainedPath& retained,
                                      const LinearGaussianModel& model, const Eigen::MatrixXd& y, IndexMode mode,
                                      RngStream& rng, MoveStats* stats) {
    switch (spec.variant) {
        case FilterVariant::bootstrap:
            return conditional_bootstrap_pf(retained, model, y, spec.N, mode, rng);
        case FilterVariant::fully_adapted:
            return conditional_faapf(retained, model, y, spec.N, mode, rng);
        case FilterVariant::auxiliary: {
            const auto proposal = make_proposal(spec.proposal, model, y);
            return conditional_apf(retained, model, y, spec.N, *proposal, mode, rng);
        }
        default: {
            std::unique_ptr<Proposal> proposal;
            if (spec.variant == FilterVariant::mcmc_auxiliary) {
                proposal = make_proposal(spec.proposal, model, y);
            }
            return conditional_mcmc_filter(spec.variant, retained, model, y, spec.N, proposal.get(), spec.kernel,
                                           mode, rng, stats);
        }
    }
}

double Estimator::loglik(const LinearGaussianModel& model, const Eigen::MatrixXd& y, RngStream& rng) const {
    if (exact) {
        return kalman(model, y).loglik;
    }
    if (ehmm) {
        const Pool pool = generate_pool(model, ehmm_N, pool_kernel, rng);
        return hmm_forward(pool, model, y).log_ptilde;
    }
    return run_filter(filter, model, y, rng).loglik();
}

std::pair<double, Eigen::MatrixXd> Estimator::loglik_and_path(const LinearGaussianModel& model,
                                                              const Eigen::MatrixXd& y, RngStream& rng) const {
    if (exact) {
        const KalmanResult kf = kalman(model, y);
        return {kf.loglik, sample_posterior_path(model, kf, rng)};
    }
    if (ehmm) {
        const Pool pool = generate_pool(model, ehmm_N, pool_kernel, rng);
        const HmmFilterCache cache = hmm_forward(pool, model, y);
        const std::vector<int> b = sample_path_indices(cache, pool, model, rng);
        Eigen::MatrixXd path(pool.T(), static_cast<int>(pool.x.front().rows()));
        for (int t = 0; t < pool.T(); ++t) {
            path.row(t) = pool.x[static_cast<std::size_t>(t)].col(b[static_cast<std::size_t>(t)]).transpose();
        }
        return {cache.log_ptilde, path};
    }
    const ParticleSystem sys = run_filter(filter, model, y, rng);
    const int b_last = sample_terminal_index(sys, rng);
    return {sys.loglik(), sys.extract_path(sys.lineage(b_last))};
}

Theta propose_theta(const Theta& theta, double sd, const std::array<bool, 4>& mask, RngStream& rng) {
    Theta prop = theta;
    for (int k = 0; k < Theta::dim; ++k) {
        if (mask[static_cast<std::size_t>(k)]) {
            prop[k] += sd * rng.normal();
        }
    }
    return prop;
}

ChainState pmmh_init(const Theta& theta, const Estimator& estimator, const ModelDims& dims,
                     const Eigen::MatrixXd& y, RngStream& rng) {
    if (log_prior(theta) == kNegInf) {
        throw std::invalid_argument("pmmh_init: initial theta outside the prior support");
    }
    const LinearGaussianModel model(theta, dims);
    ChainState state;
    state.theta = theta;
    auto [ll, path] = estimator.loglik_and_path(model, y, rng);
    state.cached_loglik = ll;
    state.path = std::move(path);
    return state;
}

bool pmmh_step(ChainState& state, const Estimator& estimator, const ModelDims& dims, const Eigen::MatrixXd& y,
               const SamplerConfig& config, RngStream& rng) {
    const double sd = config.effective_rw_sd(dims.d, dims.T);
    const Theta prop = propose_theta(state.theta, sd, config.update_mask, rng);
    ++state.iteration;
    const double lp_prop = log_prior(prop);
    if (lp_prop == kNegInf) {
        return false; // rejected without running a filter
    }
    double ll_prop;
    Eigen::MatrixXd path_prop;
    try {
        const LinearGaussianModel model(prop, dims);
        auto res = estimator.loglik_and_path(model, y, rng);
        ll_prop = res.first;
        path_prop = std::move(res.second);
    } catch (const std::runtime_error&) {
        // e.g. no stationary pool distribution for the proposed theta
        return false;
    }
    const double log_alpha = ll_prop + lp_prop - state.cached_loglik - log_prior(state.theta);
    if (accept_log_ratio(log_alpha, rng)) {
        state.theta = prop;
        state.cached_loglik = ll_prop;
        state.path = std::move(path_prop);
        return true;
    }
    return false;
}

int theta_moves(Theta& theta, const Eigen::MatrixXd& path, const ModelDims& dims, const Eigen::MatrixXd& y,
                const SamplerConfig& config, int count, RngStream& rng) {
    const double sd = config.effective_rw_sd(dims.d, dims.T);
    double cur_target = log_prior(theta) + LinearGaussianModel(theta, dims).log_joint(path, y);
    int accepts = 0;
    for (int k = 0; k < count; ++k) {
        const Theta prop = propose_theta(theta, sd, config.update_mask, rng);
        const double lp = log_prior(prop);
        if (lp == kNegInf) {
            continue;
        }
        const double target = lp + LinearGaussianModel(prop, dims).log_joint(path, y);
        if (accept_log_ratio(target - cur_target, rng)) {
            theta = prop;
            cur_target = target;
            ++accepts;
        }
    }
    return accepts;
}

void pg_sweep(ChainState& state, const FilterSpec& spec, IndexMode mode, const ModelDims& dims,
              const Eigen::MatrixXd& y, const SamplerConfig& config, RngStream& rng, MoveStats* stats,
              int* theta_accepts) {
    const int accepts = theta_moves(state.theta, state.path, dims, y, config, config.theta_updates_per_sweep, rng);
    if (theta_accepts != nullptr) {
        *theta_accepts += accepts;
    }

    RetainedPath retained;
    retained.x = state.path;
    retained.b.resize(static_cast<std::size_t>(dims.T));
    for (int t = 0; t < dims.T; ++t) {
        retained.b[static_cast<std::size_t>(t)] = uniform_below(spec.N, rng);
    }

    const LinearGaussianModel model(state.theta, dims);
    const ParticleSystem sys = run_conditional_filter(spec, retained, model, y, mode, rng, stats);

    std::vector<int> b;
    if (mode == IndexMode::backward_sampling) {
        const auto proposal = make_proposal(spec.proposal, model, y);
        b = backward_sample(sys, spec.variant, model, y, proposal.get(), rng);
    } else {
        b = sys.lineage(sample_terminal_index(sys, rng));
    }
    state.path = sys.extract_path(b);
    ++state.iteration;
}

bool idealized_mh_step(ChainState& state, const ModelDims& dims, const Eigen::MatrixXd& y,
                       const SamplerConfig& config, RngStream& rng) {
    const double sd = config.effective_rw_sd(dims.d, dims.T);
    const Theta prop = propose_theta(state.theta, sd, config.update_mask, rng);
    ++state.iteration;
    const double lp = log_prior(prop);
    if (lp == kNegInf) {
        return false;
    }
    const double ll = kalman(LinearGaussianModel(prop, dims), y).loglik;
    const double log_alpha = ll + lp - state.cached_loglik - log_prior(state.theta);
    if (accept_log_ratio(log_alpha, rng)) {
        state.theta = prop;
        state.cached_loglik = ll;
        return true;
    }
    return false;
}

void idealized_gibbs_sweep(ChainState& state, const ModelDims& dims, const Eigen::MatrixXd& y,
                           const SamplerConfig& config, RngStream& rng, int* theta_accepts) {
    const int accepts = theta_moves(state.theta, state.path, dims, y, config, config.theta_updates_per_sweep, rng);
    if (theta_accepts != nullptr) {
        *theta_accepts += accepts;
    }
    const LinearGaussianModel model(state.theta, dims);
    state.path = sample_posterior_path(model, kalman(model, y), rng);
    ++state.iteration;
}

bool ehmm_mh_step(ChainState& state, int N, const PoolKernelSpec& kernel, const ModelDims& dims,
                  const Eigen::MatrixXd& y, const SamplerConfig& config, RngStream& rng) {
    return pmmh_step(state, Estimator::make_ehmm(N, kernel), dims, y, config, rng);
}

} // namespace pmcmc
