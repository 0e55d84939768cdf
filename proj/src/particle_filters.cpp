#include "pmcmc/particle_filters.hpp"

#include <cmath>
#include <stdexcept>

namespace pmcmc {

namespace {

// Per-variant samplers for the initial draw and the propagation draw.
struct StandardOps {
    FilterVariant variant;
    const LinearGaussianModel* model;
    const Eigen::MatrixXd* y;
    const Proposal* proposal;

    Eigen::VectorXd sample_initial(RngStream& rng) const {
        switch (variant) {
            case FilterVariant::bootstrap: return model->sample_initial(rng);
            case FilterVariant::fully_adapted:
                return model->sample_initial_posterior(y->row(0).transpose(), rng);
            default: return proposal->sample(0, nullptr, rng);
        }
    }

    Eigen::VectorXd propagate(int t, const Eigen::VectorXd& parent, RngStream& rng) const {
        switch (variant) {
            case FilterVariant::bootstrap: return model->sample_transition(parent, rng);
            case FilterVariant::fully_adapted:
                return model->sample_optimal(y->row(t).transpose(), parent, rng);
            default: return proposal->sample(t, &parent, rng);
        }
    }
};

void check_logw_row(const Eigen::VectorXd& lw, int t) {
    for (Eigen::Index i = 0; i < lw.size(); ++i) {
        const double v = lw[i];
        if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
            throw std::runtime_error("invalid particle weight at time step " + std::to_string(t + 1) +
                                     " (proposal support violation)");
        }
    }
}

void assemble_loglik_terms(ParticleSystem& sys, const LinearGaussianModel& model, const Eigen::MatrixXd& y,
                           FilterVariant variant) {
    const double log_n = std::log(static_cast<double>(sys.N));
    if (is_fully_adapted_variant(variant)) {
        sys.loglik_terms[0] = model.log_predictive_initial(y.row(0).transpose());
        for (int t = 1; t < sys.T; ++t) {
            sys.loglik_terms[t] = logsumexp(sys.logw[static_cast<std::size_t>(t - 1)]) - log_n;
        }
    } else {
        for (int t = 0; t < sys.T; ++t) {
            sys.loglik_terms[t] = logsumexp(sys.logw[static_cast<std::size_t>(t)]) - log_n;
        }
    }
}

// Unconditional and conditional runs share this driver; `retained` is null
// for the unconditional case.
ParticleSystem run_standard(const StandardOps& ops, int N, RngStream& rng, const RetainedPath* retained,
                            IndexMode mode) {
    const LinearGaussianModel& model = *ops.model;
    const Eigen::MatrixXd& y = *ops.y;
    const int T = static_cast<int>(y.rows());
    if (N < 1) {
        throw std::invalid_argument("particle filter: N must be >= 1");
    }
    ParticleSystem sys;
    sys.allocate(T, N, model.d());

    for (int t = 0; t < T; ++t) {
        const int pivot = retained ? retained->b[static_cast<std::size_t>(t)] : -1;
        Eigen::VectorXd resample_prob;
        if (t > 0) {
            resample_prob = normalize(sys.logw[static_cast<std::size_t>(t - 1)], t).prob;
        }
        auto& cloud = sys.x[static_cast<std::size_t>(t)];
        for (int i = 0; i < N; ++i) {
            if (i == pivot) {
                cloud.col(i) = retained->x.row(t).transpose();
                if (t > 0) {
                    int anc = retained->b[static_cast<std::size_t>(t - 1)];
                    if (mode == IndexMode::ancestor_sampling) {
                        anc = ancestor_sample(ops.variant, model, y, t, sys.x[static_cast<std::size_t>(t - 1)],
                                              sys.logw[static_cast<std::size_t>(t - 1)], cloud.col(i), ops.proposal,
                                              rng);
                    }
                    sys.ancestors[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(i)] = anc;
                }
                continue;
            }
            if (t == 0) {
                cloud.col(i) = ops.sample_initial(rng);
            } else {
                const int a = categorical(resample_prob, rng);
                sys.ancestors[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(i)] = a;
                cloud.col(i) = ops.propagate(t, sys.x[static_cast<std::size_t>(t - 1)].col(a), rng);
            }
        }
        sys.logw[static_cast<std::size_t>(t)] =
            compute_logw_row(ops.variant, model, y, t, cloud, t > 0 ? &sys.ancestors[static_cast<std::size_t>(t - 1)] : nullptr,
                             t > 0 ? &sys.x[static_cast<std::size_t>(t - 1)] : nullptr, ops.proposal);
        check_logw_row(sys.logw[static_cast<std::size_t>(t)], t);
    }
    assemble_loglik_terms(sys, model, y, ops.variant);
    // Surface a fully degenerate final row even when no resampling follows it.
    normalize(sys.logw[static_cast<std::size_t>(T - 1)], T);
    return sys;
}

void check_retained(const RetainedPath& retained, int T, int N, int d) {
    if (static_cast<int>(retained.b.size()) != T || retained.x.rows() != T || retained.x.cols() != d) {
        throw std::invalid_argument("conditional filter: retained path shape mismatch");
    }
    for (int b : retained.b) {
        if (b < 0 || b >= N) {
            throw std::invalid_argument("conditional filter: retained index out of range");
        }
    }
}

} // namespace

Eigen::VectorXd compute_logw_row(FilterVariant variant, const LinearGaussianModel& model, const Eigen::MatrixXd& y,
                                 int t, const Eigen::MatrixXd& x_t, const std::vector<int>* a_prev,
                                 const Eigen::MatrixXd* x_prev, const Proposal* proposal) {
    const int N = static_cast<int>(x_t.cols());
    const int T = static_cast<int>(y.rows());
    Eigen::VectorXd lw(N);
    const Eigen::VectorXd yt = y.row(t).transpose();
    switch (variant) {
        case FilterVariant::bootstrap:
        case FilterVariant::mcmc_bootstrap:
            for (int i = 0; i < N; ++i) {
                lw[i] = model.log_observation(yt, x_t.col(i));
            }
            break;
        case FilterVariant::fully_adapted:
        case FilterVariant::mcmc_fully_adapted:
            if (t + 1 < T) {
                const Eigen::VectorXd ynext = y.row(t + 1).transpose();
                for (int i = 0; i < N; ++i) {
                    lw[i] = model.log_predictive(ynext, x_t.col(i));
                }
            } else {
                lw.setZero();
            }
            break;
        case FilterVariant::auxiliary:
        case FilterVariant::mcmc_auxiliary: {
            if (proposal == nullptr) {
                throw std::invalid_argument("auxiliary weights need a proposal family");
            }
            for (int i = 0; i < N; ++i) {
                const Eigen::VectorXd xi = x_t.col(i);
                double v;
                if (t == 0) {
                    v = proposal->log_f_over_q(0, nullptr, xi) + model.log_observation(yt, xi);
                } else {
                    const int a = (*a_prev)[static_cast<std::size_t>(i)];
                    const Eigen::VectorXd parent = x_prev->col(a);
                    v = proposal->log_f_over_q(t, &parent, xi) + model.log_observation(yt, xi) -
                        proposal->log_predictive(t - 1, parent);
                }
                if (t + 1 < T) {
                    v += proposal->log_predictive(t, xi);
                }
                lw[i] = v;
            }
            break;
        }
    }
    return lw;
}

double variant_log_predictive(FilterVariant variant, const LinearGaussianModel& model, const Eigen::MatrixXd& y,
                              int t, const Eigen::VectorXd& x, const Proposal* proposal) {
    switch (variant) {
        case FilterVariant::bootstrap:
        case FilterVariant::mcmc_bootstrap:
            return 0.0;
        case FilterVariant::fully_adapted:
        case FilterVariant::mcmc_fully_adapted:
            return model.log_predictive(y.row(t + 1).transpose(), x);
        default:
            return proposal ? proposal->log_predictive(t, x) : 0.0;
    }
}

ParticleSystem bootstrap_pf(const LinearGaussianModel& model, const Eigen::MatrixXd& y, int N, RngStream& rng) {
    StandardOps ops{FilterVariant::bootstrap, &model, &y, nullptr};
    return run_standard(ops, N, rng, nullptr, IndexMode::backward_sampling);
}

ParticleSystem faapf(const LinearGaussianModel& model, const Eigen::MatrixXd& y, int N, RngStream& rng) {
    StandardOps ops{FilterVariant::fully_adapted, &model, &y, nullptr};
    return run_standard(ops, N, rng, nullptr, IndexMode::backward_sampling);
}

ParticleSystem apf(const LinearGaussianModel& model, const Eigen::MatrixXd& y, int N, const Proposal& proposal,
                   RngStream& rng) {
    StandardOps ops{FilterVariant::auxiliary, &model, &y, &proposal};
    return run_standard(ops, N, rng, nullptr, IndexMode::backward_sampling);
}

ParticleSystem conditional_bootstrap_pf(const RetainedPath& retained, const LinearGaussianModel& model,
                                        const Eigen::MatrixXd& y, int N, IndexMode mode, RngStream& rng) {
    check_retained(retained, static_cast<int>(y.rows()), N, model.d());
    StandardOps ops{FilterVariant::bootstrap, &model, &y, nullptr};
    return run_standard(ops, N, rng, &retained, mode);
}

ParticleSystem conditional_faapf(const RetainedPath& retained, const LinearGaussianModel& model,
                                 const Eigen::MatrixXd& y, int N, IndexMode mode, RngStream& rng) {
    check_retained(retained, static_cast<int>(y.rows()), N, model.d());
    StandardOps ops{FilterVariant::fully_adapted, &model, &y, nullptr};
    return run_standard(ops, N, rng, &retained, mode);
}

ParticleSystem conditional_apf(const RetainedPath& retained, const LinearGaussianModel& model,
                               const Eigen::MatrixXd& y, int N, const Proposal& proposal, IndexMode mode,
                               RngStream& rng) {
    check_retained(retained, static_cast<int>(y.rows()), N, model.d());
    StandardOps ops{FilterVariant::auxiliary, &model, &y, &proposal};
    return run_standard(ops, N, rng, &retained, mode);
}

int sample_terminal_index(const ParticleSystem& system, RngStream& rng) {
    const Eigen::VectorXd prob = normalize(system.logw[static_cast<std::size_t>(system.T - 1)], system.T).prob;
    return categorical(prob, rng);
}

std::vector<int> backward_sample(const ParticleSystem& system, FilterVariant variant,
                                 const LinearGaussianModel& model, const Eigen::MatrixXd& y,
                                 const Proposal* proposal, RngStream& rng) {
    std::vector<int> b(static_cast<std::size_t>(system.T));
    b[static_cast<std::size_t>(system.T - 1)] = sample_terminal_index(system, rng);
    for (int t = system.T - 2; t >= 0; --t) {
        const Eigen::VectorXd next = system.x[static_cast<std::size_t>(t + 1)].col(b[static_cast<std::size_t>(t + 1)]);
        const auto& cloud = system.x[static_cast<std::size_t>(t)];
        Eigen::VectorXd lw(system.N);
        for (int i = 0; i < system.N; ++i) {
            lw[i] = system.logw[static_cast<std::size_t>(t)][i] + model.log_transition(next, cloud.col(i)) -
                    variant_log_predictive(variant, model, y, t, cloud.col(i), proposal);
        }
        b[static_cast<std::size_t>(t)] = categorical(normalize(lw, t + 1).prob, rng);
    }
    return b;
}

int ancestor_sample(FilterVariant variant, const LinearGaussianModel& model, const Eigen::MatrixXd& y, int t,
                    const Eigen::MatrixXd& x_prev, const Eigen::VectorXd& logw_prev,
                    const Eigen::VectorXd& x_pinned, const Proposal* proposal, RngStream& rng) {
    if (t < 1) {
        throw std::invalid_argument("ancestor_sample: t must be >= 1");
    }
    const int N = static_cast<int>(x_prev.cols());
    Eigen::VectorXd lw(N);
    for (int i = 0; i < N; ++i) {
        lw[i] = logw_prev[i] + model.log_transition(x_pinned, x_prev.col(i)) -
                variant_log_predictive(variant, model, y, t - 1, x_prev.col(i), proposal);
    }
    return categorical(normalize(lw, t).prob, rng);
}

} // namespace pmcmc
