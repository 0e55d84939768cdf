#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "pmcmc/weights.hpp"

namespace pmcmc {

/// The six particle-filter flavours. The mcmc_* variants fill each time step
/// with a chain of Metropolis-Hastings moves instead of conditionally
/// independent draws; weight bookkeeping and likelihood estimates match the
/// corresponding plain variant.
enum class FilterVariant {
    bootstrap,
    fully_adapted,
    auxiliary,
    mcmc_bootstrap,
    mcmc_fully_adapted,
    mcmc_auxiliary,
};

inline bool is_mcmc_variant(FilterVariant v) {
    return v == FilterVariant::mcmc_bootstrap || v == FilterVariant::mcmc_fully_adapted ||
           v == FilterVariant::mcmc_auxiliary;
}

/// Variants whose terminal path-selection law is uniform (their final weight
/// row is constant).
inline bool is_fully_adapted_variant(FilterVariant v) {
    return v == FilterVariant::fully_adapted || v == FilterVariant::mcmc_fully_adapted;
}

const char* variant_name(FilterVariant v);

/// Output of one (conditional or unconditional) filter run.
///
/// Conventions: clouds x[t] are d x N (one column per particle); ancestor row
/// ancestors[t-1][i] is the index of particle i's parent in cloud t-1; logw[t]
/// holds the variant's unnormalised log weights (g-weights for bootstrap-type,
/// predictive weights for fully-adapted-type with a zero row at t = T-1,
/// v-weights for auxiliary-type). loglik_terms sums to the variant's
/// log marginal-likelihood estimate.
struct ParticleSystem {
    int N = 0;
    int d = 0;
    int T = 0;
    std::vector<Eigen::MatrixXd> x;
    std::vector<std::vector<int>> ancestors;
    std::vector<Eigen::VectorXd> logw;
    Eigen::VectorXd loglik_terms;

    void allocate(int T_, int N_, int d_);

    double loglik() const { return loglik_terms.sum(); }

    /// Index path b_{1:T} obtained from a terminal index via b_t = a_t^{b_{t+1}}.
    std::vector<int> lineage(int b_last) const;

    /// T x d state path along the given index path.
    Eigen::MatrixXd extract_path(const std::vector<int>& b) const;

    /// CSV `t,i,ancestor,logw,x_1..x_d` (1-based t, i, ancestor; ancestor 0 at t=1).
    void write_trace_csv(std::ostream& os) const;
};

/// A retained trajectory with its slot indices; the conditional filters pin
/// x_t^{b_t} to these states bitwise.
struct RetainedPath {
    Eigen::MatrixXd x;     // T x d
    std::vector<int> b;    // T slot indices, 0-based
};

/// How the pinned slot's ancestor is treated inside a conditional filter:
/// backward_sampling keeps a_{t-1}^{b_t} = b_{t-1} and redraws the whole index
/// path afterwards; ancestor_sampling redraws a_{t-1}^{b_t} during the forward
/// pass.
enum class IndexMode {
    backward_sampling,
    ancestor_sampling,
};

} // namespace pmcmc
