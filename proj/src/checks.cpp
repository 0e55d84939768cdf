#include "pmcmc/checks.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "pmcmc/diagnostics.hpp"
#include "pmcmc/parallel.hpp"

namespace pmcmc {
namespace checks {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::string format(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

// Shared small fixture: true parameters on a simulated dataset.
struct Fixture {
    Theta theta;
    ModelDims dims;
    LinearGaussianModel model;
    MatrixXd y;

    Fixture(int d, int T, std::uint64_t seed, Theta th = Theta{0.5, 0.2, 1.0, 1.0})
        : theta(th), dims{d, T}, model(theta, dims), y(model.simulate(seed).y) {}
};

// gamma_t of the general framework: the unnormalised density targeted at step
// t (0-based prefix of length t+1), including the variant's predictive factor.
double log_gamma(FilterVariant variant, const LinearGaussianModel& model, const MatrixXd& y,
                 const MatrixXd& path_prefix, const Proposal* prop) {
    const int t = static_cast<int>(path_prefix.rows()) - 1;
    double acc = model.log_joint(path_prefix, y.topRows(t + 1));
    if (t + 1 < y.rows()) {
        acc += variant_log_predictive(variant, model, y, t, path_prefix.row(t).transpose(), prop);
    }
    return acc;
}

// log tilde-v of lineage m at time t, up to the common 1/N^t constant.
double log_tilde_v(FilterVariant variant, const ParticleSystem& sys, const LinearGaussianModel& model,
                   const MatrixXd& y, int t, int m, const Proposal* prop) {
    std::vector<int> lineage(static_cast<std::size_t>(t + 1));
    lineage[static_cast<std::size_t>(t)] = m;
    for (int n = t - 1; n >= 0; --n) {
        lineage[static_cast<std::size_t>(n)] =
            sys.ancestors[static_cast<std::size_t>(n)]
                         [static_cast<std::size_t>(lineage[static_cast<std::size_t>(n + 1)])];
    }
    MatrixXd prefix(t + 1, sys.d);
    for (int n = 0; n <= t; ++n) {
        prefix.row(n) =
            sys.x[static_cast<std::size_t>(n)].col(lineage[static_cast<std::size_t>(n)]).transpose();
    }
    const InvariantTarget::Tag tag = target_tag(variant);
    double log_psi = InvariantTarget::initial(tag, model, y, prop).log_density(0, prefix.row(0).transpose());
    for (int n = 1; n <= t; ++n) {
        const InvariantTarget target =
            InvariantTarget::at_time(tag, model, y, n, sys.x[static_cast<std::size_t>(n - 1)],
                                     sys.logw[static_cast<std::size_t>(n - 1)], prop);
        log_psi += target.log_density(lineage[static_cast<std::size_t>(n - 1)], prefix.row(n).transpose());
    }
    return log_gamma(variant, model, y, prefix, prop) - log_psi;
}

// Full lineage path of slot m at time t as a (t+1) x d matrix.
MatrixXd lineage_prefix(const ParticleSystem& sys, int t, int m) {
    std::vector<int> lineage(static_cast<std::size_t>(t + 1));
    lineage[static_cast<std::size_t>(t)] = m;
    for (int n = t - 1; n >= 0; --n) {
        lineage[static_cast<std::size_t>(n)] =
            sys.ancestors[static_cast<std::size_t>(n)]
                         [static_cast<std::size_t>(lineage[static_cast<std::size_t>(n + 1)])];
    }
    MatrixXd prefix(t + 1, sys.d);
    for (int n = 0; n <= t; ++n) {
        prefix.row(n) =
            sys.x[static_cast<std::size_t>(n)].col(lineage[static_cast<std::size_t>(n)]).transpose();
    }
    return prefix;
}

VectorXd center_by_lse(const VectorXd& lw) {
    return lw.array() - logsumexp(lw);
}

ParticleSystem run_variant(FilterVariant variant, const LinearGaussianModel& model, const MatrixXd& y, int N,
                           const Proposal* prop, RngStream& rng) {
    KernelSpec kernel;
    kernel.proposal = MoveProposal::random_walk;
    switch (variant) {
        case FilterVariant::bootstrap: return bootstrap_pf(model, y, N, rng);
        case FilterVariant::fully_adapted: return faapf(model, y, N, rng);
        case FilterVariant::auxiliary: return apf(model, y, N, *prop, rng);
        case FilterVariant::mcmc_bootstrap: return mcmc_pf(model, y, N, kernel, rng);
        case FilterVariant::mcmc_fully_adapted: return mcmc_faapf(model, y, N, kernel, rng);
        case FilterVariant::mcmc_auxiliary: return mcmc_apf(model, y, N, *prop, kernel, rng);
    }
    throw std::logic_error("run_variant");
}

bool approx_equal_systems(const ParticleSystem& a, const ParticleSystem& b, std::string& why) {
    if (a.T != b.T || a.N != b.N || a.d != b.d) {
        why = "shape mismatch";
        return false;
    }
    for (int t = 0; t < a.T; ++t) {
        if (a.x[static_cast<std::size_t>(t)] != b.x[static_cast<std::size_t>(t)]) {
            why = "particle arrays differ at t=" + std::to_string(t + 1);
            return false;
        }
        if (a.logw[static_cast<std::size_t>(t)] != b.logw[static_cast<std::size_t>(t)]) {
            why = "weight rows differ at t=" + std::to_string(t + 1);
            return false;
        }
        if (t > 0 && a.ancestors[static_cast<std::size_t>(t - 1)] != b.ancestors[static_cast<std::size_t>(t - 1)]) {
            why = "ancestors differ at t=" + std::to_string(t + 1);
            return false;
        }
    }
    if (a.loglik_terms != b.loglik_terms) {
        why = "loglik terms differ";
        return false;
    }
    return true;
}

} // namespace

CheckResult run_check(const std::string& name, const std::function<bool(std::string&)>& fn) {
    CheckResult result;
    result.name = name;
    const double start = now_seconds();
    try {
        result.pass = fn(result.detail);
    } catch (const std::exception& e) {
        result.pass = false;
        result.detail = std::string("exception: ") + e.what();
    }
    result.seconds = now_seconds() - start;
    return result;
}

CheckResult check_kalman_dense_oracle() {
    return run_check("kalman-dense-oracle", [](std::string& detail) {
        double worst = 0.0;
        for (const int d : {1, 2}) {
            for (const int T : {1, 3, 5}) {
                const Fixture fx(d, T, 1234 + static_cast<std::uint64_t>(10 * d + T));
                const double kl = kalman(fx.model, fx.y).loglik;

                // Dense joint covariance of the stacked observations.
                const MatrixXd a = fx.model.transition_matrix();
                const double s2 = fx.theta.sigma * fx.theta.sigma;
                const double t2 = fx.theta.tau * fx.theta.tau;
                std::vector<MatrixXd> marg(static_cast<std::size_t>(T));
                marg[0] = MatrixXd::Identity(d, d);
                for (int t = 1; t < T; ++t) {
                    marg[static_cast<std::size_t>(t)] =
                        a * marg[static_cast<std::size_t>(t - 1)] * a.transpose() +
                        s2 * MatrixXd::Identity(d, d);
                }
                MatrixXd big = MatrixXd::Zero(T * d, T * d);
                for (int t = 0; t < T; ++t) {
                    MatrixXd cross = marg[static_cast<std::size_t>(t)]; // Cov(x_s, x_t), s >= t
                    for (int s = t; s < T; ++s) {
                        if (s > t) {
                            cross = a * cross;
                        }
                        big.block(s * d, t * d, d, d) = cross;
                        big.block(t * d, s * d, d, d) = cross.transpose();
                    }
                    big.block(t * d, t * d, d, d) += t2 * MatrixXd::Identity(d, d);
                }
                VectorXd stacked(T * d);
                for (int t = 0; t < T; ++t) {
                    stacked.segment(t * d, d) = fx.y.row(t).transpose();
                }
                const Eigen::LLT<MatrixXd> llt(big);
                const MatrixXd l = llt.matrixL();
                double log_det = 0.0;
                for (Eigen::Index i = 0; i < l.rows(); ++i) {
                    log_det += 2.0 * std::log(l(i, i));
                }
                const VectorXd z = l.triangularView<Eigen::Lower>().solve(stacked);
                const double dense =
                    -0.5 * (T * d * std::log(2.0 * M_PI) + log_det + z.squaredNorm());
                worst = std::max(worst, std::abs(kl - dense) / std::abs(dense));
            }
        }
        detail = "max rel err " + format(worst);
        return worst < 1e-8;
    });
}

CheckResult check_optimal_proposal_factorization(std::uint64_t seed) {
    return run_check("optimal-proposal-factorization", [seed](std::string& detail) {
        double worst = 0.0;
        for (const int d : {1, 3}) {
            const Fixture fx(d, 2, seed + static_cast<std::uint64_t>(d));
            RngStream rng(seed, 77 + static_cast<std::uint64_t>(d));
            for (int k = 0; k < 1000; ++k) {
                VectorXd xp(d), x(d), y(d);
                for (int j = 0; j < d; ++j) {
                    xp[j] = 2.0 * rng.normal();
                    x[j] = 2.0 * rng.normal();
                    y[j] = 2.0 * rng.normal();
                }
                const double lhs = fx.model.log_transition(x, xp) + fx.model.log_observation(y, x);
                const double rhs = fx.model.log_optimal(y, xp, x) + fx.model.log_predictive(y, xp);
                worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
                // Same factorization at t = 1: mu(x) g(y|x) = p(x|y) p(y).
                const double lhs1 = fx.model.log_initial(x) + fx.model.log_observation(y, x);
                const double rhs1 = fx.model.log_initial_posterior(y, x) + fx.model.log_predictive_initial(y);
                worst = std::max(worst, std::abs(lhs1 - rhs1) / std::max(1.0, std::abs(lhs1)));
            }
        }
        detail = "max rel err " + format(worst);
        return worst < 1e-10;
    });
}

CheckResult check_stationary_residual() {
    return run_check("stationary-lyapunov-residual", [](std::string& detail) {
        const Theta theta{0.5, 0.2, 1.0, 1.0};
        double worst = 0.0;
        for (const int d : {1, 3, 10}) {
            const GaussianMoments mom = stationary_moments(theta, d);
            const MatrixXd a = build_transition_matrix(theta.a0, theta.a1, d);
            const double s2 = theta.sigma * theta.sigma;
            const MatrixXd res = a * mom.cov * a.transpose() + s2 * MatrixXd::Identity(d, d) - mom.cov;
            worst = std::max(worst, res.cwiseAbs().maxCoeff());
        }
        // Scalar AR(1) closed form.
        const double v1 = stationary_moments(theta, 1).cov(0, 0);
        worst = std::max(worst, std::abs(v1 - 1.0 / (1.0 - 0.25)));
        detail = "max residual " + format(worst);
        return worst < 1e-10;
    });
}

CheckResult check_prior_normalization() {
    return run_check("prior-quadrature", [](std::string& detail) {
        // Uniform(-1, 1) coordinate on an even grid.
        const int n_u = 20001;
        double mass_u = 0.0;
        const double du = 2.0 / (n_u - 1);
        for (int i = 0; i < n_u; ++i) {
            const double w = (i == 0 || i == n_u - 1) ? 0.5 : 1.0;
            mass_u += 0.5 * w * du; // density 1/2 inside the support
        }
        // Inverse-gamma(1, 1/2) on a log-spaced grid (heavy right tail).
        const int n_g = 40000;
        const double lo = std::log(1e-5), hi = std::log(5e4);
        const double dl = (hi - lo) / (n_g - 1);
        double mass_g = 0.0;
        for (int i = 0; i < n_g; ++i) {
            const double w = (i == 0 || i == n_g - 1) ? 0.5 : 1.0;
            const double x = std::exp(lo + i * dl);
            mass_g += w * std::exp(log_inverse_gamma(x, 1.0, 0.5)) * x * dl;
        }
        const double err = std::max(std::abs(mass_u - 1.0), std::abs(mass_g - 1.0));
        detail = "uniform mass " + format(mass_u) + ", inv-gamma mass " + format(mass_g);
        return err < 1e-3;
    });
}

CheckResult check_posterior_path_sampler(std::uint64_t seed, long reps, int workers) {
    return run_check("kalman-path-sampler-moments", [=](std::string& detail) {
        const Fixture fx(1, 3, seed);
        const KalmanResult kf = kalman(fx.model, fx.y);
        const int T = fx.dims.T;
        std::vector<VectorXd> draws(static_cast<std::size_t>(reps));
        RngStream master(seed, 50);
        parallel_for(reps, workers, [&](long r) {
            RngStream rng = master.split(static_cast<std::uint64_t>(r));
            const MatrixXd path = sample_posterior_path(fx.model, kf, rng);
            draws[static_cast<std::size_t>(r)] = path.col(0);
        });
        double worst_z = 0.0;
        for (int t = 0; t < T; ++t) {
            double sum = 0.0, sum2 = 0.0;
            for (long r = 0; r < reps; ++r) {
                const double v = draws[static_cast<std::size_t>(r)][t];
                sum += v;
                sum2 += v * v;
            }
            const double mean = sum / reps;
            const double var = (sum2 - reps * mean * mean) / (reps - 1);
            const double m_ref = kf.smoothed[static_cast<std::size_t>(t)].mean[0];
            const double v_ref = kf.smoothed[static_cast<std::size_t>(t)].cov(0, 0);
            worst_z = std::max(worst_z, std::abs(mean - m_ref) / std::sqrt(v_ref / reps));
            worst_z = std::max(worst_z, std::abs(var - v_ref) / (v_ref * std::sqrt(2.0 / (reps - 1.0))));
        }
        detail = "worst z " + format(worst_z);
        return worst_z < 4.0;
    });
}

CheckResult check_unbiasedness(const std::string& name, const Estimator& estimator, const Theta& theta,
                               const ModelDims& dims, const MatrixXd& y, double ref_loglik, long reps,
                               std::uint64_t seed, int workers) {
    return run_check(name, [&, reps, seed, workers](std::string& detail) {
        const LinearGaussianModel model(theta, dims);
        std::vector<double> ratio(static_cast<std::size_t>(reps));
        RngStream master(seed, 7);
        parallel_for(reps, workers, [&](long r) {
            RngStream rng = master.split(static_cast<std::uint64_t>(r));
            ratio[static_cast<std::size_t>(r)] = std::exp(estimator.loglik(model, y, rng) - ref_loglik);
        });
        double sum = 0.0, sum2 = 0.0;
        for (const double v : ratio) {
            sum += v;
            sum2 += v * v;
        }
        const double mean = sum / reps;
        const double sd = std::sqrt((sum2 - reps * mean * mean) / (reps - 1));
        const double se = sd / std::sqrt(static_cast<double>(reps));
        detail = "mean ratio " + format(mean) + " +/- " + format(se) + " (3 SE band)";
        return std::abs(mean - 1.0) <= 3.0 * se;
    });
}

CheckResult check_hmm_enumeration(std::uint64_t seed) {
    return run_check("ehmm-forward-enumeration", [seed](std::string& detail) {
        const int N = 3, T = 3;
        const Fixture fx(1, T, seed);
        RngStream rng(seed, 11);
        PoolKernelSpec kernel;
        kernel.kind = PoolKernelKind::random_walk;
        const Pool pool = generate_pool(fx.model, N, kernel, rng);
        const HmmFilterCache cache = hmm_forward(pool, fx.model, fx.y);

        // Exhaustive sum over the N^T index paths of p~(x^b, y) / N^T.
        std::vector<double> terms;
        std::vector<int> b(T, 0);
        while (true) {
            double lp = 0.0;
            for (int t = 0; t < T; ++t) {
                const VectorXd xt = pool.x[static_cast<std::size_t>(t)].col(b[static_cast<std::size_t>(t)]);
                lp += fx.model.log_observation(fx.y.row(t).transpose(), xt) - pool.rho.logpdf(xt);
                lp += t == 0 ? fx.model.log_initial(xt)
                             : fx.model.log_transition(
                                   xt, pool.x[static_cast<std::size_t>(t - 1)].col(b[static_cast<std::size_t>(t - 1)]));
            }
            terms.push_back(lp);
            int k = T - 1;
            while (k >= 0 && ++b[static_cast<std::size_t>(k)] == N) {
                b[static_cast<std::size_t>(k)] = 0;
                --k;
            }
            if (k < 0) {
                break;
            }
        }
        const double brute =
            logsumexp(Eigen::Map<VectorXd>(terms.data(), static_cast<Eigen::Index>(terms.size()))) -
            T * std::log(static_cast<double>(N));
        const double err = std::abs(brute - cache.log_ptilde);
        detail = "log-scale err " + format(err);
        return err < 1e-10;
    });
}

CheckResult check_ehmm_path_enumeration(std::uint64_t seed, long draws) {
    return run_check("ehmm-path-law-enumeration", [seed, draws](std::string& detail) {
        const int N = 2, T = 2;
        const Fixture fx(1, T, seed);
        RngStream rng(seed, 13);
        PoolKernelSpec kernel;
        kernel.kind = PoolKernelKind::random_walk;
        const Pool pool = generate_pool(fx.model, N, kernel, rng);
        const HmmFilterCache cache = hmm_forward(pool, fx.model, fx.y);

        // Exact q(b_{1:T} | pool) by direct enumeration of p~(x^b, y).
        const int paths = static_cast<int>(std::pow(N, T));
        VectorXd logp(paths);
        for (int code = 0; code < paths; ++code) {
            int c = code;
            std::vector<int> b(static_cast<std::size_t>(T));
            for (int t = 0; t < T; ++t) {
                b[static_cast<std::size_t>(t)] = c % N;
                c /= N;
            }
            double lp = 0.0;
            for (int t = 0; t < T; ++t) {
                const VectorXd xt = pool.x[static_cast<std::size_t>(t)].col(b[static_cast<std::size_t>(t)]);
                lp += fx.model.log_observation(fx.y.row(t).transpose(), xt) - pool.rho.logpdf(xt);
                lp += t == 0 ? fx.model.log_initial(xt)
                             : fx.model.log_transition(
                                   xt, pool.x[0].col(b[0]));
            }
            logp[code] = lp;
        }
        const VectorXd exact = normalize(logp).prob;

        std::vector<long> counts(static_cast<std::size_t>(paths), 0);
        RngStream draw_rng(seed, 14);
        for (long k = 0; k < draws; ++k) {
            const std::vector<int> b = sample_path_indices(cache, pool, fx.model, draw_rng);
            int code = 0;
            for (int t = T - 1; t >= 0; --t) {
                code = code * N + b[static_cast<std::size_t>(t)];
            }
            ++counts[static_cast<std::size_t>(code)];
        }
        double worst = 0.0;
        for (int code = 0; code < paths; ++code) {
            worst = std::max(worst, std::abs(static_cast<double>(counts[static_cast<std::size_t>(code)]) / draws -
                                             exact[code]));
        }
        detail = "max abs prob err " + format(worst);
        return worst < 0.005;
    });
}

CheckResult check_backward_sampling_enumeration(FilterVariant variant, std::uint64_t seed, long draws) {
    const std::string name = std::string("backward-sampling-law-") + variant_name(variant);
    return run_check(name, [variant, seed, draws](std::string& detail) {
        const int N = 3, T = 3;
        const Fixture fx(1, T, seed);
        RngStream rng(seed, 17);
        const auto prop = make_proposal(ProposalKind::lookahead_bootstrap, fx.model, fx.y);
        const ParticleSystem sys = run_variant(variant, fx.model, fx.y, N, prop.get(), rng);

        // Exact joint law of b_{1:T}: terminal categorical times the
        // normalized backward conditionals, evaluated from model primitives.
        const VectorXd terminal = normalize(sys.logw[static_cast<std::size_t>(T - 1)]).prob;
        const int paths = static_cast<int>(std::pow(N, T));
        VectorXd exact(paths);
        for (int code = 0; code < paths; ++code) {
            int c = code;
            std::vector<int> b(static_cast<std::size_t>(T));
            for (int t = 0; t < T; ++t) {
                b[static_cast<std::size_t>(t)] = c % N;
                c /= N;
            }
            double p = terminal[b[static_cast<std::size_t>(T - 1)]];
            for (int t = T - 2; t >= 0; --t) {
                VectorXd lw(N);
                for (int m = 0; m < N; ++m) {
                    lw[m] = sys.logw[static_cast<std::size_t>(t)][m] +
                            fx.model.log_transition(
                                sys.x[static_cast<std::size_t>(t + 1)].col(b[static_cast<std::size_t>(t + 1)]),
                                sys.x[static_cast<std::size_t>(t)].col(m)) -
                            variant_log_predictive(variant, fx.model, fx.y, t,
                                                   sys.x[static_cast<std::size_t>(t)].col(m), prop.get());
                }
                p *= normalize(lw).prob[b[static_cast<std::size_t>(t)]];
            }
            exact[code] = p;
        }

        std::vector<long> counts(static_cast<std::size_t>(paths), 0);
        RngStream draw_rng(seed, 18);
        for (long k = 0; k < draws; ++k) {
            const std::vector<int> b = backward_sample(sys, variant, fx.model, fx.y, prop.get(), draw_rng);
            int code = 0;
            for (int t = T - 1; t >= 0; --t) {
                code = code * N + b[static_cast<std::size_t>(t)];
            }
            ++counts[static_cast<std::size_t>(code)];
        }
        double worst = 0.0;
        for (int code = 0; code < paths; ++code) {
            worst = std::max(worst, std::abs(static_cast<double>(counts[static_cast<std::size_t>(code)]) / draws -
                                             exact[code]));
        }
        detail = "max abs prob err " + format(worst);
        return worst < 0.005;
    });
}

CheckResult check_ancestor_sampling_enumeration(FilterVariant variant, std::uint64_t seed, long draws) {
    const std::string name = std::string("ancestor-sampling-law-") + variant_name(variant);
    return run_check(name, [variant, seed, draws](std::string& detail) {
        const int N = 3, T = 3;
        const Fixture fx(1, T, seed);
        RngStream rng(seed, 19);
        const auto prop = make_proposal(ProposalKind::lookahead_bootstrap, fx.model, fx.y);
        const ParticleSystem sys = run_variant(variant, fx.model, fx.y, N, prop.get(), rng);
        const int t = 1; // pinned time
        VectorXd pinned(1);
        pinned[0] = 0.37;

        VectorXd lw(N);
        for (int i = 0; i < N; ++i) {
            lw[i] = sys.logw[static_cast<std::size_t>(t - 1)][i] +
                    fx.model.log_transition(pinned, sys.x[static_cast<std::size_t>(t - 1)].col(i)) -
                    variant_log_predictive(variant, fx.model, fx.y, t - 1,
                                           sys.x[static_cast<std::size_t>(t - 1)].col(i), prop.get());
        }
        const VectorXd exact = normalize(lw).prob;

        std::vector<long> counts(static_cast<std::size_t>(N), 0);
        RngStream draw_rng(seed, 20);
        for (long k = 0; k < draws; ++k) {
            const int a = ancestor_sample(variant, fx.model, fx.y, t, sys.x[static_cast<std::size_t>(t - 1)],
                                          sys.logw[static_cast<std::size_t>(t - 1)], pinned, prop.get(), draw_rng);
            ++counts[static_cast<std::size_t>(a)];
        }
        double worst = 0.0;
        for (int i = 0; i < N; ++i) {
            worst = std::max(worst,
                             std::abs(static_cast<double>(counts[static_cast<std::size_t>(i)]) / draws - exact[i]));
        }
        detail = "max abs prob err " + format(worst);
        return worst < 0.005;
    });
}

CheckResult check_generic_index_weights(FilterVariant variant, std::uint64_t seed) {
    const std::string name = std::string("generic-index-weights-") + variant_name(variant);
    return run_check(name, [variant, seed](std::string& detail) {
        const int N = 3, T = 3;
        const Fixture fx(1, T, seed);
        RngStream rng(seed, 23);
        const auto prop = make_proposal(ProposalKind::lookahead_bootstrap, fx.model, fx.y);
        const ParticleSystem sys = run_variant(variant, fx.model, fx.y, N, prop.get(), rng);
        const MatrixXd future_src = sys.extract_path(sys.lineage(0));

        double worst = 0.0;
        // Backward weights at each interior time, for a fixed retained future.
        for (int t = 0; t < T - 1; ++t) {
            const VectorXd next = future_src.row(t + 1).transpose();
            VectorXd specialized(N), generic(N);
            for (int m = 0; m < N; ++m) {
                specialized[m] = sys.logw[static_cast<std::size_t>(t)][m] +
                                 fx.model.log_transition(next, sys.x[static_cast<std::size_t>(t)].col(m)) -
                                 variant_log_predictive(variant, fx.model, fx.y, t,
                                                        sys.x[static_cast<std::size_t>(t)].col(m), prop.get());
                // Generic Algorithm-2 form: tilde-v times the gamma ratio.
                const MatrixXd prefix = lineage_prefix(sys, t, m);
                MatrixXd full(T, sys.d);
                full.topRows(t + 1) = prefix;
                full.bottomRows(T - t - 1) = future_src.bottomRows(T - t - 1);
                generic[m] = log_tilde_v(variant, sys, fx.model, fx.y, t, m, prop.get()) +
                             (fx.model.log_joint(full, fx.y) -
                              log_gamma(variant, fx.model, fx.y, prefix, prop.get()));
            }
            worst = std::max(worst,
                             (center_by_lse(specialized) - center_by_lse(generic)).cwiseAbs().maxCoeff());
        }
        // Ancestor weights at each t >= 1 for the same retained future.
        for (int t = 1; t < T; ++t) {
            VectorXd specialized(N), generic(N);
            const VectorXd pinned = future_src.row(t).transpose();
            for (int i = 0; i < N; ++i) {
                specialized[i] = sys.logw[static_cast<std::size_t>(t - 1)][i] +
                                 fx.model.log_transition(pinned, sys.x[static_cast<std::size_t>(t - 1)].col(i)) -
                                 variant_log_predictive(variant, fx.model, fx.y, t - 1,
                                                        sys.x[static_cast<std::size_t>(t - 1)].col(i), prop.get());
                const MatrixXd prefix = lineage_prefix(sys, t - 1, i);
                MatrixXd full(T, sys.d);
                full.topRows(t) = prefix;
                full.bottomRows(T - t) = future_src.bottomRows(T - t);
                generic[i] = log_tilde_v(variant, sys, fx.model, fx.y, t - 1, i, prop.get()) +
                             (fx.model.log_joint(full, fx.y) -
                              log_gamma(variant, fx.model, fx.y, prefix, prop.get()));
            }
            worst = std::max(worst,
                             (center_by_lse(specialized) - center_by_lse(generic)).cwiseAbs().maxCoeff());
        }
        detail = "max log-weight err " + format(worst);
        return worst < 1e-10;
    });
}

CheckResult check_bootstrap_apf_bitwise(std::uint64_t seed) {
    return run_check("reduction-bootstrap-vs-apf-bitwise", [seed](std::string& detail) {
        const Fixture fx(2, 5, seed);
        RngStream rng_a(seed, 31);
        RngStream rng_b(seed, 31);
        const ParticleSystem a = bootstrap_pf(fx.model, fx.y, 64, rng_a);
        const BootstrapProposal prop(fx.model, fx.y);
        const ParticleSystem b = apf(fx.model, fx.y, 64, prop, rng_b);
        std::string why;
        if (!approx_equal_systems(a, b, why)) {
            detail = why;
            return false;
        }
        detail = "bitwise equal";
        return true;
    });
}

CheckResult check_mcmc_independence_reduction(FilterVariant mcmc_variant, std::uint64_t seed) {
    const std::string name = std::string("reduction-independence-") + variant_name(mcmc_variant);
    return run_check(name, [mcmc_variant, seed](std::string& detail) {
        const Fixture fx(2, 5, seed);
        const int N = 32;
        KernelSpec spec;
        spec.proposal = MoveProposal::independence;
        RngStream rng_a(seed, 37);
        RngStream rng_b(seed, 37);
        const auto prop = make_proposal(ProposalKind::lookahead_bootstrap, fx.model, fx.y);
        ParticleSystem a, b;
        switch (mcmc_variant) {
            case FilterVariant::mcmc_bootstrap:
                a = mcmc_pf(fx.model, fx.y, N, spec, rng_a);
                b = bootstrap_pf(fx.model, fx.y, N, rng_b);
                break;
            case FilterVariant::mcmc_fully_adapted:
                a = mcmc_faapf(fx.model, fx.y, N, spec, rng_a);
                b = faapf(fx.model, fx.y, N, rng_b);
                break;
            default:
                a = mcmc_apf(fx.model, fx.y, N, *prop, spec, rng_a);
                b = apf(fx.model, fx.y, N, *prop, rng_b);
                break;
        }
        std::string why;
        if (!approx_equal_systems(a, b, why)) {
            detail = why;
            return false;
        }
        detail = "bitwise equal";
        return true;
    });
}

CheckResult check_fa_apf_loglik(std::uint64_t seed) {
    return run_check("reduction-faapf-vs-optimal-apf-loglik", [seed](std::string& detail) {
        const Fixture fx(2, 5, seed);
        RngStream rng_a(seed, 41);
        RngStream rng_b(seed, 41);
        const ParticleSystem a = faapf(fx.model, fx.y, 64, rng_a);
        const OptimalProposal prop(fx.model, fx.y);
        const ParticleSystem b = apf(fx.model, fx.y, 64, prop, rng_b);
        const double err = std::abs(a.loglik() - b.loglik());
        detail = "loglik diff " + format(err);
        return err < 1e-10;
    });
}

CheckResult check_rho_reductions(std::uint64_t seed) {
    return run_check("rho-target-reductions", [seed](std::string& detail) {
        const Fixture fx(1, 3, seed);
        RngStream rng(seed, 43);
        const int N = 3, t = 1;
        MatrixXd cloud(1, N);
        for (int i = 0; i < N; ++i) {
            cloud(0, i) = rng.normal();
        }
        const BootstrapProposal boot(fx.model, fx.y);
        const OptimalProposal opt(fx.model, fx.y);

        const InvariantTarget rb = rho_bootstrap(fx.model, fx.y, t, cloud);
        const VectorXd v_boot =
            compute_logw_row(FilterVariant::auxiliary, fx.model, fx.y, t - 1, cloud, nullptr, nullptr, &boot);
        const InvariantTarget ra_boot = rho_apf(fx.model, fx.y, t, cloud, v_boot, boot);

        const InvariantTarget rf = rho_fa(fx.model, fx.y, t, cloud);
        const VectorXd v_opt =
            compute_logw_row(FilterVariant::auxiliary, fx.model, fx.y, t - 1, cloud, nullptr, nullptr, &opt);
        const InvariantTarget ra_opt = rho_apf(fx.model, fx.y, t, cloud, v_opt, opt);

        double worst = 0.0;
        for (int k = 0; k < 200; ++k) {
            VectorXd x(1);
            x[0] = 3.0 * rng.normal();
            const int a = k % N;
            worst = std::max(worst, std::abs(rb.log_density(a, x) - ra_boot.log_density(a, x)));
            worst = std::max(worst, std::abs(rf.log_density(a, x) - ra_opt.log_density(a, x)));
        }

        // Normalization on a d=1 grid: sum over components, integrate over x.
        const int n_grid = 8001;
        const double lo = -12.0, hi = 12.0, dx = (hi - lo) / (n_grid - 1);
        double mass = 0.0;
        for (int g = 0; g < n_grid; ++g) {
            VectorXd x(1);
            x[0] = lo + g * dx;
            double cell = 0.0;
            for (int a = 0; a < N; ++a) {
                cell += std::exp(rf.log_density(a, x));
            }
            mass += cell * dx * ((g == 0 || g == n_grid - 1) ? 0.5 : 1.0);
        }
        detail = "max pointwise err " + format(worst) + ", rho mass " + format(mass);
        return worst < 1e-10 && std::abs(mass - 1.0) < 1e-3;
    });
}

CheckResult check_sweep_invariance(const std::string& name, const SweepFn& sweep,
                                   const LinearGaussianModel& model, const MatrixXd& y, long reps,
                                   std::uint64_t seed, int workers) {
    return run_check(name, [&, reps, seed, workers](std::string& detail) {
        const KalmanResult kf = kalman(model, y);
        const int T = static_cast<int>(y.rows());
        const int d = model.d();
        std::vector<MatrixXd> out(static_cast<std::size_t>(reps));
        RngStream master(seed, 53);
        parallel_for(reps, workers, [&](long r) {
            RngStream rng = master.split(static_cast<std::uint64_t>(r));
            const MatrixXd start = sample_posterior_path(model, kf, rng);
            out[static_cast<std::size_t>(r)] = sweep(start, rng);
        });
        double worst_z = 0.0;
        for (int t = 0; t < T; ++t) {
            for (int j = 0; j < d; ++j) {
                double sum = 0.0, sum2 = 0.0;
                for (long r = 0; r < reps; ++r) {
                    const double v = out[static_cast<std::size_t>(r)](t, j);
                    sum += v;
                    sum2 += v * v;
                }
                const double mean = sum / reps;
                const double var = (sum2 - reps * mean * mean) / (reps - 1);
                const double m_ref = kf.smoothed[static_cast<std::size_t>(t)].mean[j];
                const double v_ref = kf.smoothed[static_cast<std::size_t>(t)].cov(j, j);
                worst_z = std::max(worst_z, std::abs(mean - m_ref) / std::sqrt(v_ref / reps));
                worst_z =
                    std::max(worst_z, std::abs(var - v_ref) / (v_ref * std::sqrt(2.0 / (reps - 1.0))));
            }
        }
        detail = "worst z " + format(worst_z) + " (4 SE band, " + std::to_string(reps) + " reps)";
        return worst_z < 4.0;
    });
}

CheckResult check_conditional_consistency(const FilterSpec& spec, const LinearGaussianModel& model,
                                          const MatrixXd& y, long reps, std::uint64_t seed, int workers) {
    const std::string name = std::string("conditional-consistency-") + variant_name(spec.variant);
    return run_check(name, [&, reps, seed, workers](std::string& detail) {
        const KalmanResult kf = kalman(model, y);
        const int T = static_cast<int>(y.rows());
        const double log_py = kf.loglik;

        // Scalar functional of (b, x, a): retained final state plus a free slot.
        const auto functional = [&](const ParticleSystem& sys, const std::vector<int>& b) {
            double h = sys.x[static_cast<std::size_t>(T - 1)](0, b[static_cast<std::size_t>(T - 1)]);
            h += 0.5 * sys.x[0](0, 0);
            return h;
        };

        const int bins = 40;
        const double lo = -6.0, hi = 6.0;
        const auto bin_of = [&](double v) {
            int k = static_cast<int>((v - lo) / (hi - lo) * bins);
            return std::min(std::max(k, 0), bins - 1);
        };

        std::vector<double> w1(static_cast<std::size_t>(reps));
        std::vector<int> bin1(static_cast<std::size_t>(reps));
        std::vector<int> bin2(static_cast<std::size_t>(reps));
        RngStream master(seed, 59);
        parallel_for(reps, workers, [&](long r) {
            RngStream rng = master.split(static_cast<std::uint64_t>(r));
            // Route 1: unconditional filter + path selection, importance
            // weight p_hat / p(y).
            const ParticleSystem sys = run_filter(spec, model, y, rng);
            const int b_last = sample_terminal_index(sys, rng);
            const std::vector<int> b = sys.lineage(b_last);
            w1[static_cast<std::size_t>(r)] = std::exp(sys.loglik() - log_py);
            bin1[static_cast<std::size_t>(r)] = bin_of(functional(sys, b));

            // Route 2: exact posterior path, uniform slots, conditional filter.
            RetainedPath retained;
            retained.x = sample_posterior_path(model, kf, rng);
            retained.b.resize(static_cast<std::size_t>(T));
            for (int t = 0; t < T; ++t) {
                const int k = static_cast<int>(rng.uniform() * spec.N);
                retained.b[static_cast<std::size_t>(t)] = k >= spec.N ? spec.N - 1 : k;
            }
            const ParticleSystem cond = run_conditional_filter(spec, retained, model, y,
                                                               IndexMode::backward_sampling, rng);
            bin2[static_cast<std::size_t>(r)] = bin_of(functional(cond, retained.b));
        });

        std::vector<double> h1(static_cast<std::size_t>(bins), 0.0), h2(static_cast<std::size_t>(bins), 0.0);
        double wsum = 0.0;
        for (long r = 0; r < reps; ++r) {
            h1[static_cast<std::size_t>(bin1[static_cast<std::size_t>(r)])] += w1[static_cast<std::size_t>(r)];
            wsum += w1[static_cast<std::size_t>(r)];
            h2[static_cast<std::size_t>(bin2[static_cast<std::size_t>(r)])] += 1.0;
        }
        double worst = 0.0;
        for (int k = 0; k < bins; ++k) {
            worst = std::max(worst, std::abs(h1[static_cast<std::size_t>(k)] / wsum -
                                             h2[static_cast<std::size_t>(k)] / static_cast<double>(reps)));
        }
        detail = "max histogram diff " + format(worst) + ", mean weight " + format(wsum / reps);
        return worst < 0.01 && std::abs(wsum / reps - 1.0) < 0.05;
    });
}

CheckResult check_reversal_identity(std::uint64_t seed) {
    return run_check("reversal-kernel-identity", [seed](std::string& detail) {
        const int K = 5;
        VectorXd grid(K), rho(K);
        for (int k = 0; k < K; ++k) {
            grid[k] = -2.0 + k * (4.0 / (K - 1));
            rho[k] = std::exp(-0.5 * grid[k] * grid[k]) * (1.0 + 0.15 * k);
        }
        rho /= rho.sum();

        // Reversible MH kernel with a uniform global proposal.
        MatrixXd r1 = MatrixXd::Zero(K, K);
        for (int i = 0; i < K; ++i) {
            double stay = 0.0;
            for (int j = 0; j < K; ++j) {
                if (j == i) {
                    continue;
                }
                const double acc = std::min(1.0, rho[j] / rho[i]);
                r1(j, i) = acc / K;
                stay += acc / K;
            }
            r1(i, i) = 1.0 - stay;
        }
        // Reversible MH kernel with a clipped nearest-neighbour proposal.
        MatrixXd r2 = MatrixXd::Zero(K, K);
        for (int i = 0; i < K; ++i) {
            double stay = 1.0;
            for (const int j : {i - 1, i + 1}) {
                if (j < 0 || j >= K) {
                    continue;
                }
                const double q_fwd = (i == 0 || i == K - 1) ? 1.0 : 0.5;
                const double q_back = (j == 0 || j == K - 1) ? 1.0 : 0.5;
                const double acc = std::min(1.0, rho[j] * q_back / (rho[i] * q_fwd));
                r2(j, i) = q_fwd * acc;
                stay -= q_fwd * acc;
            }
            r2(i, i) = stay;
        }
        // Their composition is rho-invariant but not reversible.
        const MatrixXd r_comp = r2 * r1;

        const auto reversal = [&](const MatrixXd& r) {
            MatrixXd rt(K, K);
            for (int i = 0; i < K; ++i) {
                for (int j = 0; j < K; ++j) {
                    rt(j, i) = rho[j] * r(i, j) / rho[i];
                }
            }
            return rt;
        };

        double worst = 0.0;
        RngStream rng(seed, 61);
        const std::array<const MatrixXd*, 2> kernels = {&r1, &r_comp};
        for (const MatrixXd* r : kernels) {
            const MatrixXd rt = reversal(*r);
            for (int trial = 0; trial < 50; ++trial) {
                // Generate a pool by chaining the kernel forward from slot 1.
                const int n = 6;
                std::vector<int> pool(static_cast<std::size_t>(n));
                pool[0] = categorical(rho, rng);
                for (int i = 1; i < n; ++i) {
                    pool[static_cast<std::size_t>(i)] =
                        categorical((*r).col(pool[static_cast<std::size_t>(i - 1)]), rng);
                }
                // log density of the conditional generation for each pivot.
                VectorXd logdens(n);
                for (int pivot = 0; pivot < n; ++pivot) {
                    double lp = std::log(rho[pool[static_cast<std::size_t>(pivot)]]);
                    for (int i = pivot - 1; i >= 0; --i) {
                        lp += std::log(rt(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(i + 1)]));
                    }
                    for (int i = pivot + 1; i < n; ++i) {
                        lp += std::log((*r)(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(i - 1)]));
                    }
                    logdens[pivot] = lp;
                }
                worst = std::max(worst, logdens.maxCoeff() - logdens.minCoeff());
            }
        }
        detail = "max log-density spread " + format(worst);
        return worst < 1e-10;
    });
}

CheckResult check_pmmh_ratio_identity(std::uint64_t seed) {
    return run_check("pmmh-ratio-identity", [seed](std::string& detail) {
        const Fixture fx(1, 4, seed);
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            RngStream rng(seed, 67 + static_cast<std::uint64_t>(trial));
            const int N = 5;
            const ParticleSystem sys = bootstrap_pf(fx.model, fx.y, N, rng);
            const int b_last = sample_terminal_index(sys, rng);
            const std::vector<int> b = sys.lineage(b_last);
            const MatrixXd path = sys.extract_path(b);

            // Pinned factors of Psi / phi plus the selection probability.
            double pinned = fx.model.log_initial(path.row(0).transpose());
            for (int t = 1; t < sys.T; ++t) {
                const VectorXd wbar =
                    center_by_lse(sys.logw[static_cast<std::size_t>(t - 1)]);
                pinned += wbar[b[static_cast<std::size_t>(t - 1)]] +
                          fx.model.log_transition(path.row(t).transpose(), path.row(t - 1).transpose());
            }
            const double selection =
                center_by_lse(sys.logw[static_cast<std::size_t>(sys.T - 1)])[b[static_cast<std::size_t>(sys.T - 1)]];

            const double lhs = fx.model.log_joint(path, fx.y) -
                               sys.T * std::log(static_cast<double>(N)) - pinned - selection;
            const double rhs = sys.loglik();
            worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
        }
        detail = "max rel err " + format(worst);
        return worst < 1e-8;
    });
}

ChainSummary summarize_chain(const std::vector<Theta>& draws) {
    ChainSummary s;
    s.samples = static_cast<long>(draws.size());
    for (int k = 0; k < Theta::dim; ++k) {
        VectorXd series(s.samples);
        for (long i = 0; i < s.samples; ++i) {
            series[i] = draws[static_cast<std::size_t>(i)][k];
        }
        const double mean = series.mean();
        const double var = (series.array() - mean).square().sum() / (s.samples - 1);
        const double sd = std::sqrt(var);
        const double tau = diagnostics::integrated_autocorr_time(series);
        const double neff = std::max(4.0, s.samples / tau);
        s.mean[k] = mean;
        s.sd[k] = sd;
        s.se_mean[k] = sd / std::sqrt(neff);
        s.se_sd[k] = sd / std::sqrt(2.0 * neff);
    }
    return s;
}

bool chains_agree(const ChainSummary& a, const ChainSummary& b, double k, const std::array<bool, 4>& coords,
                  std::string& detail) {
    double worst = 0.0;
    bool ok = true;
    for (int c = 0; c < Theta::dim; ++c) {
        if (!coords[static_cast<std::size_t>(c)]) {
            continue;
        }
        const double z_mean =
            std::abs(a.mean[c] - b.mean[c]) / std::hypot(a.se_mean[c], b.se_mean[c]);
        const double z_sd = std::abs(a.sd[c] - b.sd[c]) / std::hypot(a.se_sd[c], b.se_sd[c]);
        worst = std::max({worst, z_mean, z_sd});
        ok = ok && z_mean <= k && z_sd <= k;
    }
    detail = "worst z " + format(worst) + " (band " + format(k) + ")";
    return ok;
}

} // namespace checks
} // namespace pmcmc
