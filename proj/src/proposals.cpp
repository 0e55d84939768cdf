#include "pmcmc/proposals.hpp"

namespace pmcmc {

double Proposal::log_f_over_q(int t, const Eigen::VectorXd* x_prev, const Eigen::VectorXd& x) const {
    const double log_fx = t == 0 ? model_->log_initial(x) : model_->log_transition(x, *x_prev);
    return log_fx - log_density(t, x_prev, x);
}

Eigen::VectorXd BootstrapProposal::sample(int t, const Eigen::VectorXd* x_prev, RngStream& rng) const {
    return t == 0 ? model_->sample_initial(rng) : model_->sample_transition(*x_prev, rng);
}

double BootstrapProposal::log_density(int t, const Eigen::VectorXd* x_prev, const Eigen::VectorXd& x) const {
    return t == 0 ? model_->log_initial(x) : model_->log_transition(x, *x_prev);
}

Eigen::VectorXd OptimalProposal::sample(int t, const Eigen::VectorXd* x_prev, RngStream& rng) const {
    const Eigen::VectorXd yt = y_->row(t).transpose();
    return t == 0 ? model_->sample_initial_posterior(yt, rng) : model_->sample_optimal(yt, *x_prev, rng);
}

double OptimalProposal::log_density(int t, const Eigen::VectorXd* x_prev, const Eigen::VectorXd& x) const {
    const Eigen::VectorXd yt = y_->row(t).transpose();
    return t == 0 ? model_->log_initial_posterior(yt, x) : model_->log_optimal(yt, *x_prev, x);
}

double OptimalProposal::log_f_over_q(int t, const Eigen::VectorXd* x_prev, const Eigen::VectorXd& x) const {
    // f/q = p(y_t|x_{t-1}) / g(y_t|x_t); mu/q_1 = p(y_1)/g(y_1|x_1).
    const Eigen::VectorXd yt = y_->row(t).transpose();
    const double log_pred = t == 0 ? model_->log_predictive_initial(yt) : model_->log_predictive(yt, *x_prev);
    return log_pred - model_->log_observation(yt, x);
}

double OptimalProposal::log_predictive(int t, const Eigen::VectorXd& x) const {
    return model_->log_predictive(y_->row(t + 1).transpose(), x);
}

double LookaheadBootstrapProposal::log_predictive(int t, const Eigen::VectorXd& x) const {
    return model().log_predictive(y_->row(t + 1).transpose(), x);
}

std::unique_ptr<Proposal> make_proposal(ProposalKind kind, const LinearGaussianModel& model,
                                        const Eigen::MatrixXd& y) {
    switch (kind) {
        case ProposalKind::bootstrap: return std::make_unique<BootstrapProposal>(model, y);
        case ProposalKind::optimal: return std::make_unique<OptimalProposal>(model, y);
        case ProposalKind::lookahead_bootstrap: return std::make_unique<LookaheadBootstrapProposal>(model, y);
    }
    return nullptr;
}

} // namespace pmcmc
