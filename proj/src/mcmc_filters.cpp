#include "pmcmc/mcmc_filters.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace pmcmc {

double KernelSpec::effective_ar_epsilon(int d) const {
    return ar_epsilon > 0 ? ar_epsilon : std::sqrt(1.0 / d);
}

void KernelSpec::validate(int d) const {
    if (sweeps_per_slot < 1) {
        throw std::invalid_argument("KernelSpec: sweeps_per_slot must be >= 1");
    }
    const double eps = effective_ar_epsilon(d);
    if (proposal == MoveProposal::autoregressive && !(eps > 0.0 && eps <= 1.0)) {
        throw std::invalid_argument("KernelSpec: autoregressive epsilon must lie in (0, 1]");
    }
    if (proposal == MoveProposal::random_walk && !(effective_rw_scale(d) > 0.0)) {
        throw std::invalid_argument("KernelSpec: random-walk scale must be positive");
    }
}

void MoveStats::write_csv(std::ostream& os) const {
    os << "t,accepted,proposed\n";
    for (std::size_t t = 0; t < accepted.size(); ++t) {
        os << (t + 1) << ',' << accepted[t] << ',' << proposed[t] << '\n';
    }
}

InvariantTarget InvariantTarget::initial(Tag tag, const LinearGaussianModel& model, const Eigen::MatrixXd& y,
                                         const Proposal* proposal) {
    InvariantTarget target;
    target.tag_ = tag;
    target.t_ = 0;
    target.model_ = &model;
    target.y_ = &y;
    target.proposal_ = proposal;
    target.log_mix_ = Eigen::VectorXd::Zero(1);
    target.mix_prob_ = Eigen::VectorXd::Ones(1);
    if (tag == Tag::auxiliary && proposal == nullptr) {
        throw std::invalid_argument("InvariantTarget: auxiliary target needs a proposal");
    }
    return target;
}

InvariantTarget InvariantTarget::at_time(Tag tag, const LinearGaussianModel& model, const Eigen::MatrixXd& y, int t,
                                         const Eigen::MatrixXd& x_prev, const Eigen::VectorXd& logw_prev,
                                         const Proposal* proposal) {
    if (t < 1) {
        throw std::invalid_argument("InvariantTarget::at_time: t must be >= 1");
    }
    InvariantTarget target;
    target.tag_ = tag;
    target.t_ = t;
    target.model_ = &model;
    target.y_ = &y;
    target.x_prev_ = &x_prev;
    target.proposal_ = proposal;
    const NormalizedWeights nw = normalize(logw_prev, t);
    target.log_mix_ = logw_prev.array() - nw.log_sum_exp;
    target.mix_prob_ = nw.prob;
    if (tag == Tag::auxiliary && proposal == nullptr) {
        throw std::invalid_argument("InvariantTarget: auxiliary target needs a proposal");
    }
    return target;
}

double InvariantTarget::log_component(int a, const Eigen::VectorXd& x) const {
    const Eigen::VectorXd yt = y_->row(t_).transpose();
    if (t_ == 0) {
        switch (tag_) {
            case Tag::bootstrap: return model_->log_initial(x);
            case Tag::fully_adapted: return model_->log_initial_posterior(yt, x);
            case Tag::auxiliary: return proposal_->log_density(0, nullptr, x);
        }
    }
    const Eigen::VectorXd parent = x_prev_->col(a);
    switch (tag_) {
        case Tag::bootstrap: return model_->log_transition(x, parent);
        case Tag::fully_adapted: return model_->log_optimal(yt, parent, x);
        case Tag::auxiliary: return proposal_->log_density(t_, &parent, x);
    }
    return 0.0;
}

Eigen::VectorXd InvariantTarget::sample_component(int a, RngStream& rng) const {
    const Eigen::VectorXd yt = y_->row(t_).transpose();
    if (t_ == 0) {
        switch (tag_) {
            case Tag::bootstrap: return model_->sample_initial(rng);
            case Tag::fully_adapted: return model_->sample_initial_posterior(yt, rng);
            case Tag::auxiliary: return proposal_->sample(0, nullptr, rng);
        }
    }
    const Eigen::VectorXd parent = x_prev_->col(a);
    switch (tag_) {
        case Tag::bootstrap: return model_->sample_transition(parent, rng);
        case Tag::fully_adapted: return model_->sample_optimal(yt, parent, rng);
        case Tag::auxiliary: return proposal_->sample(t_, &parent, rng);
    }
    return Eigen::VectorXd();
}

Eigen::VectorXd InvariantTarget::ar_anchor_mean(int a) const {
    if (t_ == 0) {
        return Eigen::VectorXd::Zero(model_->d());
    }
    return model_->apply_transition(x_prev_->col(a));
}

double InvariantTarget::ar_anchor_var() const {
    if (t_ == 0) {
        return 1.0; // C0 = I
    }
    return model_->theta().sigma * model_->theta().sigma;
}

InvariantTarget::Tag target_tag(FilterVariant variant) {
    switch (variant) {
        case FilterVariant::bootstrap:
        case FilterVariant::mcmc_bootstrap:
            return InvariantTarget::Tag::bootstrap;
        case FilterVariant::fully_adapted:
        case FilterVariant::mcmc_fully_adapted:
            return InvariantTarget::Tag::fully_adapted;
        default:
            return InvariantTarget::Tag::auxiliary;
    }
}

InvariantTarget rho_bootstrap(const LinearGaussianModel& model, const Eigen::MatrixXd& y, int t,
                              const Eigen::MatrixXd& x_prev) {
    const Eigen::VectorXd lw =
        compute_logw_row(FilterVariant::bootstrap, model, y, t - 1, x_prev, nullptr, nullptr, nullptr);
    return InvariantTarget::at_time(InvariantTarget::Tag::bootstrap, model, y, t, x_prev, lw, nullptr);
}

InvariantTarget rho_fa(const LinearGaussianModel& model, const Eigen::MatrixXd& y, int t,
                       const Eigen::MatrixXd& x_prev) {
    // Mixture weights proportional to p(y_t | x_{t-1}^i): exactly the
    // fully-adapted weight row of cloud t-1.
    const Eigen::VectorXd lw =
        compute_logw_row(FilterVariant::fully_adapted, model, y, t - 1, x_prev, nullptr, nullptr, nullptr);
    return InvariantTarget::at_time(InvariantTarget::Tag::fully_adapted, model, y, t, x_prev, lw, nullptr);
}

InvariantTarget rho_apf(const LinearGaussianModel& model, const Eigen::MatrixXd& y, int t,
                        const Eigen::MatrixXd& x_prev, const Eigen::VectorXd& logv_prev, const Proposal& proposal) {
    return InvariantTarget::at_time(InvariantTarget::Tag::auxiliary, model, y, t, x_prev, logv_prev, &proposal);
}

namespace {

// Accept without consuming a uniform when the ratio is >= 1; this makes
// exact-independence kernels consume the same draws as the plain filters.
bool mh_accept(double log_alpha, RngStream& rng) {
    if (log_alpha >= 0.0) {
        return true;
    }
    return std::log(rng.uniform()) < log_alpha;
}

} // namespace

MoveResult exact_draw(const InvariantTarget& target, RngStream& rng) {
    MoveResult out;
    out.a = target.components() > 1 ? categorical(target.mix_prob(), rng) : 0;
    out.x = target.sample_component(out.a, rng);
    out.accepted = true;
    return out;
}

MoveResult mh_move(const InvariantTarget& target, const Eigen::VectorXd& x, int a, const KernelSpec& spec,
                   RngStream& rng) {
    const int d = static_cast<int>(x.size());
    const int a_star = target.components() > 1 ? categorical(target.mix_prob(), rng) : 0;

    // log_fwd/log_back are the full joint proposal densities over (a, x),
    // mixture weight included.
    Eigen::VectorXd x_star(d);
    double log_fwd = 0.0;
    double log_back = 0.0;
    switch (spec.proposal) {
        case MoveProposal::random_walk: {
            const double scale = spec.effective_rw_scale(d);
            const double sd = std::sqrt(scale);
            for (int j = 0; j < d; ++j) {
                x_star[j] = x[j] + sd * rng.normal();
            }
            log_fwd = target.log_mix()[a_star] + density::log_iso_normal(x_star, x, scale);
            log_back = target.log_mix()[a] + density::log_iso_normal(x, x_star, scale);
            break;
        }
        case MoveProposal::autoregressive: {
            const double eps = spec.effective_ar_epsilon(d);
            const double keep = std::sqrt(1.0 - eps * eps);
            const double var = target.ar_anchor_var() * eps * eps;
            const double sd = std::sqrt(var);
            const Eigen::VectorXd mu_star = target.ar_anchor_mean(a_star);
            Eigen::VectorXd mean_fwd = mu_star + keep * (x - mu_star);
            for (int j = 0; j < d; ++j) {
                x_star[j] = mean_fwd[j] + sd * rng.normal();
            }
            log_fwd = target.log_mix()[a_star] + density::log_iso_normal(x_star, mean_fwd, var);
            const Eigen::VectorXd mu_back = target.ar_anchor_mean(a);
            log_back =
                target.log_mix()[a] + density::log_iso_normal(x, mu_back + keep * (x_star - mu_back), var);
            break;
        }
        case MoveProposal::independence: {
            // Proposal equals the target itself; computing both sides through
            // the same call makes the ratio exactly one.
            x_star = target.sample_component(a_star, rng);
            log_fwd = target.log_density(a_star, x_star);
            log_back = target.log_density(a, x);
            break;
        }
    }

    const double log_alpha =
        (target.log_density(a_star, x_star) + log_back) - (target.log_density(a, x) + log_fwd);
    MoveResult out;
    if (mh_accept(log_alpha, rng)) {
        out.x = x_star;
        out.a = a_star;
        out.accepted = true;
    } else {
        out.x = x;
        out.a = a;
        out.accepted = false;
    }
    return out;
}

McmcStepCloud mcmc_time_step(const InvariantTarget& target, int N, const KernelSpec& spec, RngStream& rng) {
    McmcStepCloud cloud;
    cloud.x.resize(target.model().d(), N);
    cloud.a.assign(static_cast<std::size_t>(N), 0);

    MoveResult cur = exact_draw(target, rng);
    cloud.x.col(0) = cur.x;
    cloud.a[0] = cur.a;
    for (int i = 1; i < N; ++i) {
        for (int s = 0; s < spec.sweeps_per_slot; ++s) {
            MoveResult next = mh_move(target, cur.x, cur.a, spec, rng);
            ++cloud.proposed;
            if (next.accepted) {
                ++cloud.accepted;
            }
            cur = next;
        }
        cloud.x.col(i) = cur.x;
        cloud.a[static_cast<std::size_t>(i)] = cur.a;
    }
    return cloud;
}

McmcStepCloud conditional_mcmc_time_step(const InvariantTarget& target, int N, int pivot,
                                         const Eigen::VectorXd& pinned_x, int pinned_a, const KernelSpec& spec,
                                         RngStream& rng) {
    if (pivot < 0 || pivot >= N) {
        throw std::invalid_argument("conditional_mcmc_time_step: pivot out of range");
    }
    McmcStepCloud cloud;
    cloud.x.resize(target.model().d(), N);
    cloud.a.assign(static_cast<std::size_t>(N), 0);
    cloud.x.col(pivot) = pinned_x;
    cloud.a[static_cast<std::size_t>(pivot)] = pinned_a;

    auto chain_from_pivot = [&](int step) {
        MoveResult cur;
        cur.x = pinned_x;
        cur.a = pinned_a;
        for (int i = pivot + step; i >= 0 && i < N; i += step) {
            for (int s = 0; s < spec.sweeps_per_slot; ++s) {
                MoveResult next = mh_move(target, cur.x, cur.a, spec, rng);
                ++cloud.proposed;
                if (next.accepted) {
                    ++cloud.accepted;
                }
                cur = next;
            }
            cloud.x.col(i) = cur.x;
            cloud.a[static_cast<std::size_t>(i)] = cur.a;
        }
    };
    chain_from_pivot(-1); // reversal kernel equals the kernel itself
    chain_from_pivot(+1);
    return cloud;
}

namespace {

ParticleSystem run_mcmc_filter(FilterVariant variant, const LinearGaussianModel& model, const Eigen::MatrixXd& y,
                               int N, const Proposal* proposal, const KernelSpec& spec, RngStream& rng,
                               MoveStats* stats, const RetainedPath* retained, IndexMode mode) {
    const int T = static_cast<int>(y.rows());
    if (N < 1) {
        throw std::invalid_argument("mcmc filter: N must be >= 1");
    }
    spec.validate(model.d());
    const InvariantTarget::Tag tag = target_tag(variant);
    ParticleSystem sys;
    sys.allocate(T, N, model.d());
    if (stats != nullptr) {
        stats->resize(T);
    }

    for (int t = 0; t < T; ++t) {
        const InvariantTarget target =
            t == 0 ? InvariantTarget::initial(tag, model, y, proposal)
                   : InvariantTarget::at_time(tag, model, y, t, sys.x[static_cast<std::size_t>(t - 1)],
                                              sys.logw[static_cast<std::size_t>(t - 1)], proposal);
        McmcStepCloud cloud;
        if (retained == nullptr) {
            cloud = mcmc_time_step(target, N, spec, rng);
        } else {
            const int pivot = retained->b[static_cast<std::size_t>(t)];
            int pinned_a = 0;
            if (t > 0) {
                pinned_a = retained->b[static_cast<std::size_t>(t - 1)];
                if (mode == IndexMode::ancestor_sampling) {
                    pinned_a = ancestor_sample(variant, model, y, t, sys.x[static_cast<std::size_t>(t - 1)],
                                               sys.logw[static_cast<std::size_t>(t - 1)],
                                               retained->x.row(t).transpose(), proposal, rng);
                }
            }
            cloud = conditional_mcmc_time_step(target, N, pivot, retained->x.row(t).transpose(), pinned_a, spec,
                                               rng);
        }
        sys.x[static_cast<std::size_t>(t)] = std::move(cloud.x);
        if (t > 0) {
            sys.ancestors[static_cast<std::size_t>(t - 1)] = cloud.a;
        }
        if (stats != nullptr) {
            stats->accepted[static_cast<std::size_t>(t)] += cloud.accepted;
            stats->proposed[static_cast<std::size_t>(t)] += cloud.proposed;
        }
        sys.logw[static_cast<std::size_t>(t)] = compute_logw_row(
            variant, model, y, t, sys.x[static_cast<std::size_t>(t)],
            t > 0 ? &sys.ancestors[static_cast<std::size_t>(t - 1)] : nullptr,
            t > 0 ? &sys.x[static_cast<std::size_t>(t - 1)] : nullptr, proposal);
    }

    const double log_n = std::log(static_cast<double>(N));
    if (is_fully_adapted_variant(variant)) {
        sys.loglik_terms[0] = model.log_predictive_initial(y.row(0).transpose());
        for (int t = 1; t < T; ++t) {
            sys.loglik_terms[t] = logsumexp(sys.logw[static_cast<std::size_t>(t - 1)]) - log_n;
        }
    } else {
        for (int t = 0; t < T; ++t) {
            sys.loglik_terms[t] = logsumexp(sys.logw[static_cast<std::size_t>(t)]) - log_n;
        }
    }
    normalize(sys.logw[static_cast<std::size_t>(T - 1)], T);
    return sys;
}

} // namespace

ParticleSystem mcmc_pf(const LinearGaussianModel& model, const Eigen::MatrixXd& y, int N, const KernelSpec& spec,
                       RngStream& rng, MoveStats* stats) {
    return run_mcmc_filter(FilterVariant::mcmc_bootstrap, model, y, N, nullptr, spec, rng, stats, nullptr,
                           IndexMode::backward_sampling);
}

ParticleSystem mcmc_faapf(const LinearGaussianModel& model, const Eigen::MatrixXd& y, int N, const KernelSpec& spec,
                          RngStream& rng, MoveStats* stats) {
    return run_mcmc_filter(FilterVariant::mcmc_fully_adapted, model, y, N, nullptr, spec, rng, stats, nullptr,
                           IndexMode::backward_sampling);
}

ParticleSystem mcmc_apf(const LinearGaussianModel& model, const Eigen::MatrixXd& y, int N, const Proposal& proposal,
                        const KernelSpec& spec, RngStream& rng, MoveStats* stats) {
    return run_mcmc_filter(FilterVariant::mcmc_auxiliary, model, y, N, &proposal, spec, rng, stats, nullptr,
                           IndexMode::backward_sampling);
}

ParticleSystem conditional_mcmc_filter(FilterVariant variant, const RetainedPath& retained,
                                       const LinearGaussianModel& model, const Eigen::MatrixXd& y, int N,
                                       const Proposal* proposal, const KernelSpec& spec, IndexMode mode,
                                       RngStream& rng, MoveStats* stats) {
    if (!is_mcmc_variant(variant)) {
        throw std::invalid_argument("conditional_mcmc_filter: not an mcmc variant");
    }
    if (static_cast<int>(retained.b.size()) != y.rows() || retained.x.rows() != y.rows() ||
        retained.x.cols() != model.d()) {
        throw std::invalid_argument("conditional_mcmc_filter: retained path shape mismatch");
    }
    return run_mcmc_filter(variant, model, y, N, proposal, spec, rng, stats, &retained, mode);
}

} // namespace pmcmc
