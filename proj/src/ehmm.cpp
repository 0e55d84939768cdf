#include "pmcmc/ehmm.hpp"

#include <cmath>
#include <stdexcept>

#include "pmcmc/weights.hpp"

namespace pmcmc {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// One application of the pool kernel.
Eigen::VectorXd pool_kernel_step(const StationaryDensity& rho, const PoolKernelSpec& kernel,
                                 const Eigen::VectorXd& x, RngStream& rng) {
    if (kernel.kind == PoolKernelKind::independence) {
        return rho.sample(rng);
    }
    const int d = static_cast<int>(x.size());
    const double sd = std::sqrt(kernel.effective_scale(d));
    Eigen::VectorXd x_star(d);
    for (int j = 0; j < d; ++j) {
        x_star[j] = x[j] + sd * rng.normal();
    }
    const double log_alpha = rho.logpdf(x_star) - rho.logpdf(x);
    if (log_alpha >= 0.0 || std::log(rng.uniform()) < log_alpha) {
        return x_star;
    }
    return x;
}

} // namespace

StationaryDensity::StationaryDensity(GaussianMoments moments) : moments_(std::move(moments)) {
    Eigen::LLT<Eigen::MatrixXd> llt(moments_.cov);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("StationaryDensity: covariance not positive definite");
    }
    chol_lower_ = llt.matrixL();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < chol_lower_.rows(); ++i) {
        log_det += 2.0 * std::log(chol_lower_(i, i));
    }
    log_norm_const_ = -0.5 * (static_cast<double>(moments_.cov.rows()) * kLog2Pi + log_det);
}

double StationaryDensity::logpdf(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd z = chol_lower_.triangularView<Eigen::Lower>().solve(x - moments_.mean);
    return log_norm_const_ - 0.5 * z.squaredNorm();
}

Eigen::VectorXd StationaryDensity::sample(RngStream& rng) const {
    Eigen::VectorXd z(moments_.mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        z[i] = rng.normal();
    }
    return moments_.mean + chol_lower_ * z;
}

Pool generate_pool(const LinearGaussianModel& model, int N, const PoolKernelSpec& kernel, RngStream& rng) {
    if (N < 1) {
        throw std::invalid_argument("generate_pool: N must be >= 1");
    }
    Pool pool{{}, StationaryDensity(stationary_moments(model.theta(), model.d())), kernel};
    pool.x.assign(static_cast<std::size_t>(model.T()), Eigen::MatrixXd(model.d(), N));
    for (int t = 0; t < model.T(); ++t) {
        auto& grid = pool.x[static_cast<std::size_t>(t)];
        grid.col(0) = pool.rho.sample(rng);
        for (int i = 1; i < N; ++i) {
            grid.col(i) = pool_kernel_step(pool.rho, kernel, grid.col(i - 1), rng);
        }
    }
    return pool;
}

Pool conditional_generate_pool(const Eigen::MatrixXd& path, const std::vector<int>& pivots,
                               const LinearGaussianModel& model, int N, const PoolKernelSpec& kernel,
                               RngStream& rng) {
    const int T = model.T();
    if (path.rows() != T || path.cols() != model.d() || static_cast<int>(pivots.size()) != T) {
        throw std::invalid_argument("conditional_generate_pool: path shape mismatch");
    }
    Pool pool{{}, StationaryDensity(stationary_moments(model.theta(), model.d())), kernel};
    pool.x.assign(static_cast<std::size_t>(T), Eigen::MatrixXd(model.d(), N));
    for (int t = 0; t < T; ++t) {
        const int pivot = pivots[static_cast<std::size_t>(t)];
        if (pivot < 0 || pivot >= N) {
            throw std::invalid_argument("conditional_generate_pool: pivot out of range");
        }
        auto& grid = pool.x[static_cast<std::size_t>(t)];
        grid.col(pivot) = path.row(t).transpose();
        for (int i = pivot - 1; i >= 0; --i) {
            grid.col(i) = pool_kernel_step(pool.rho, kernel, grid.col(i + 1), rng);
        }
        for (int i = pivot + 1; i < N; ++i) {
            grid.col(i) = pool_kernel_step(pool.rho, kernel, grid.col(i - 1), rng);
        }
    }
    return pool;
}

HmmFilterCache hmm_forward(const Pool& pool, const LinearGaussianModel& model, const Eigen::MatrixXd& y) {
    const int T = pool.T();
    const int N = pool.N();
    if (y.rows() != T || y.cols() != model.d()) {
        throw std::invalid_argument("hmm_forward: observation shape mismatch");
    }
    HmmFilterCache cache;
    cache.log_alpha.resize(T, N);
    cache.log_c.resize(T);
    const double log_n = std::log(static_cast<double>(N));

    Eigen::VectorXd prev(N);
    for (int t = 0; t < T; ++t) {
        const auto& grid = pool.x[static_cast<std::size_t>(t)];
        const Eigen::VectorXd yt = y.row(t).transpose();
        Eigen::VectorXd cur(N);
        if (t == 0) {
            for (int j = 0; j < N; ++j) {
                const Eigen::VectorXd xj = grid.col(j);
                cur[j] = -log_n + model.log_initial(xj) + model.log_observation(yt, xj) - pool.rho.logpdf(xj);
            }
        } else {
            const auto& grid_prev = pool.x[static_cast<std::size_t>(t - 1)];
            Eigen::VectorXd terms(N);
            for (int j = 0; j < N; ++j) {
                const Eigen::VectorXd xj = grid.col(j);
                for (int i = 0; i < N; ++i) {
                    terms[i] = prev[i] + model.log_transition(xj, grid_prev.col(i));
                }
                cur[j] = -log_n + model.log_observation(yt, xj) - pool.rho.logpdf(xj) + logsumexp(terms);
            }
        }
        const double c = logsumexp(cur);
        if (!std::isfinite(c)) {
            throw std::runtime_error("hmm_forward: all-zero emission row at time step " + std::to_string(t + 1));
        }
        cache.log_alpha.row(t) = (cur.array() - c).transpose();
        cache.log_c[t] = c;
        prev = cache.log_alpha.row(t).transpose();
    }
    cache.log_ptilde = cache.log_c.sum();
    return cache;
}

std::vector<int> sample_path_indices(const HmmFilterCache& cache, const Pool& pool,
                                     const LinearGaussianModel& model, RngStream& rng) {
    const int T = pool.T();
    const int N = pool.N();
    std::vector<int> b(static_cast<std::size_t>(T));
    Eigen::VectorXd last = cache.log_alpha.row(T - 1).transpose();
    b[static_cast<std::size_t>(T - 1)] = categorical(normalize(last, T).prob, rng);
    for (int t = T - 2; t >= 0; --t) {
        const Eigen::VectorXd next_state =
            pool.x[static_cast<std::size_t>(t + 1)].col(b[static_cast<std::size_t>(t + 1)]);
        Eigen::VectorXd lw(N);
        for (int i = 0; i < N; ++i) {
            lw[i] = cache.log_alpha(t, i) +
                    model.log_transition(next_state, pool.x[static_cast<std::size_t>(t)].col(i));
        }
        b[static_cast<std::size_t>(t)] = categorical(normalize(lw, t + 1).prob, rng);
    }
    return b;
}

Eigen::MatrixXd ehmm_gibbs_step(const Eigen::MatrixXd& path, const LinearGaussianModel& model,
                                const Eigen::MatrixXd& y, int N, const PoolKernelSpec& kernel, RngStream& rng) {
    const int T = model.T();
    std::vector<int> pivots(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
        pivots[static_cast<std::size_t>(t)] = static_cast<int>(rng.uniform() * N);
        if (pivots[static_cast<std::size_t>(t)] >= N) {
            pivots[static_cast<std::size_t>(t)] = N - 1;
        }
    }
    const Pool pool = conditional_generate_pool(path, pivots, model, N, kernel, rng);
    const HmmFilterCache cache = hmm_forward(pool, model, y);
    const std::vector<int> b = sample_path_indices(cache, pool, model, rng);
    Eigen::MatrixXd out(T, model.d());
    for (int t = 0; t < T; ++t) {
        out.row(t) = pool.x[static_cast<std::size_t>(t)].col(b[static_cast<std::size_t>(t)]).transpose();
    }
    return out;
}

} // namespace pmcmc
