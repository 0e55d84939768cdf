#pragma once

#include <vector>

#include <Eigen/Dense>

#include "pmcmc/kalman.hpp"
#include "pmcmc/model.hpp"
#include "pmcmc/rng.hpp"

namespace pmcmc {

/// Pool-generating kernel for the original embedded-HMM method. Both options
/// are reversible with respect to the pool density rho (the stationary law of
/// the latent chain), so the reversal kernel equals the kernel itself.
enum class PoolKernelKind {
    independence, // R(x'|x) = rho(x')
    random_walk,  // MH with proposal N(x, scale * I), default scale 1/d
};

struct PoolKernelSpec {
    PoolKernelKind kind = PoolKernelKind::random_walk;
    double rw_scale = -1.0; // variance; <0 means 1/d

    double effective_scale(int d) const { return rw_scale > 0 ? rw_scale : 1.0 / d; }
};

/// Dense zero-mean Gaussian with cached Cholesky factor; the pool density.
class StationaryDensity {
public:
    explicit StationaryDensity(GaussianMoments moments);
    double logpdf(const Eigen::VectorXd& x) const;
    Eigen::VectorXd sample(RngStream& rng) const;
    const GaussianMoments& moments() const { return moments_; }

private:
    GaussianMoments moments_;
    Eigen::MatrixXd chol_lower_;
    double log_norm_const_ = 0.0;
};

/// Per-time pools of N states, each marginally distributed according to the
/// (time-constant) stationary density.
struct Pool {
    std::vector<Eigen::MatrixXd> x; // T entries, d x N
    StationaryDensity rho;
    PoolKernelSpec kernel;

    int T() const { return static_cast<int>(x.size()); }
    int N() const { return x.empty() ? 0 : static_cast<int>(x.front().cols()); }
};

/// Unconditional pool generation: x_t^1 ~ rho, x_t^i ~ R(.|x_t^{i-1}).
/// Throws if the stationary distribution does not exist.
Pool generate_pool(const LinearGaussianModel& model, int N, const PoolKernelSpec& kernel, RngStream& rng);

/// Conditional pool generation: pins x_t^{b_t} to the given path, fills
/// indices above the pivot forwards with R and below it backwards with the
/// reversal of R (= R here).
Pool conditional_generate_pool(const Eigen::MatrixXd& path, const std::vector<int>& pivots,
                               const LinearGaussianModel& model, int N, const PoolKernelSpec& kernel,
                               RngStream& rng);

/// Forward messages of the embedded N-state HMM, kept in normalized log space
/// with per-step log normalizers; sum(log_c) is the unbiased estimate
/// log p~(y_{1:T}). Cost O(N^2 T).
struct HmmFilterCache {
    Eigen::MatrixXd log_alpha; // T x N, logsumexp of each row is 0
    Eigen::VectorXd log_c;     // T per-step normalizers
    double log_ptilde = 0.0;
};

HmmFilterCache hmm_forward(const Pool& pool, const LinearGaussianModel& model, const Eigen::MatrixXd& y);

/// Backward simulation of the index path b_{1:T} from the forward messages;
/// the joint law is exactly the HMM path posterior over the pool.
std::vector<int> sample_path_indices(const HmmFilterCache& cache, const Pool& pool,
                                     const LinearGaussianModel& model, RngStream& rng);

/// One collapsed-Gibbs state update: uniform pivots, conditional pool, forward
/// filter, backward index draw. Leaves p(x_{1:T} | y_{1:T}) invariant.
Eigen::MatrixXd ehmm_gibbs_step(const Eigen::MatrixXd& path, const LinearGaussianModel& model,
                                const Eigen::MatrixXd& y, int N, const PoolKernelSpec& kernel, RngStream& rng);

} // namespace pmcmc
