#pragma once

#include <memory>

#include <Eigen/Dense>

#include "pmcmc/model.hpp"
#include "pmcmc/rng.hpp"

namespace pmcmc {

/// Proposal family q_{t} plus the predictive-likelihood approximation
/// p~(y_{t+1}|x_t) that together define an auxiliary particle filter. Times t
/// are 0-based; x_prev is null at t = 0.
///
/// Support of q_t must cover the support of f.g along any partial path.
class Proposal {
public:
    virtual ~Proposal() = default;

    virtual Eigen::VectorXd sample(int t, const Eigen::VectorXd* x_prev, RngStream& rng) const = 0;
    virtual double log_density(int t, const Eigen::VectorXd* x_prev, const Eigen::VectorXd& x) const = 0;

    /// log[f(x|x_prev)/q_t(x|x_prev)] (log[mu(x)/q_1(x)] at t = 0). The default
    /// computes the difference; proposals with analytic cancellations override.
    virtual double log_f_over_q(int t, const Eigen::VectorXd* x_prev, const Eigen::VectorXd& x) const;

    /// log p~(y_{t+1} | x_t); identically 0 means "no predictive lookahead".
    virtual double log_predictive(int t, const Eigen::VectorXd& x) const {
        (void)t;
        (void)x;
        return 0.0;
    }

    const LinearGaussianModel& model() const { return *model_; }

protected:
    Proposal(const LinearGaussianModel& model, const Eigen::MatrixXd& y) : model_(&model), y_(&y) {}
    const LinearGaussianModel* model_;
    const Eigen::MatrixXd* y_;
};

/// q_t = f (mu at t = 0), p~ = 1. With these, the auxiliary filter reduces to
/// the bootstrap filter exactly.
class BootstrapProposal : public Proposal {
public:
    BootstrapProposal(const LinearGaussianModel& model, const Eigen::MatrixXd& y) : Proposal(model, y) {}
    Eigen::VectorXd sample(int t, const Eigen::VectorXd* x_prev, RngStream& rng) const override;
    double log_density(int t, const Eigen::VectorXd* x_prev, const Eigen::VectorXd& x) const override;
    double log_f_over_q(int, const Eigen::VectorXd*, const Eigen::VectorXd&) const override { return 0.0; }
};

/// Locally optimal proposal q_t = p(x_t|x_{t-1}, y_t) with the exact
/// predictive p~(y_{t+1}|x_t) = p(y_{t+1}|x_t); the fully-adapted case.
class OptimalProposal : public Proposal {
public:
    OptimalProposal(const LinearGaussianModel& model, const Eigen::MatrixXd& y) : Proposal(model, y) {}
    Eigen::VectorXd sample(int t, const Eigen::VectorXd* x_prev, RngStream& rng) const override;
    double log_density(int t, const Eigen::VectorXd* x_prev, const Eigen::VectorXd& x) const override;
    double log_f_over_q(int t, const Eigen::VectorXd* x_prev, const Eigen::VectorXd& x) const override;
    double log_predictive(int t, const Eigen::VectorXd& x) const override;
};

/// q_t = f with the exact predictive lookahead; the classic auxiliary filter
/// used as the default "general APF" instance.
class LookaheadBootstrapProposal : public BootstrapProposal {
public:
    LookaheadBootstrapProposal(const LinearGaussianModel& model, const Eigen::MatrixXd& y)
        : BootstrapProposal(model, y) {}
    double log_predictive(int t, const Eigen::VectorXd& x) const override;
};

enum class ProposalKind {
    bootstrap,
    optimal,
    lookahead_bootstrap,
};

std::unique_ptr<Proposal> make_proposal(ProposalKind kind, const LinearGaussianModel& model,
                                        const Eigen::MatrixXd& y);

} // namespace pmcmc
