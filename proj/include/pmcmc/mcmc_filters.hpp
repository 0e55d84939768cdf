#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "pmcmc/model.hpp"
#include "pmcmc/particle_filters.hpp"
#include "pmcmc/particle_system.hpp"
#include "pmcmc/proposals.hpp"

namespace pmcmc {

/// State proposal used inside the per-time-step MH kernels. All three induce
/// reversible kernels; the ancestor part is always an independence proposal
/// from the target's own mixture weights.
enum class MoveProposal {
    random_walk,     // N(x, scale * I), default scale 1/d
    autoregressive,  // mu + sqrt(1-eps^2)(x - mu), covariance eps^2 * Sigma_f
    independence,    // exact draw from the target component (acceptance 1)
};

struct KernelSpec {
    MoveProposal proposal = MoveProposal::autoregressive;
    int sweeps_per_slot = 1;
    double rw_scale = -1.0;    // variance; <0 means 1/d
    double ar_epsilon = -1.0;  // <0 means sqrt(1/d)

    double effective_rw_scale(int d) const { return rw_scale > 0 ? rw_scale : 1.0 / d; }
    double effective_ar_epsilon(int d) const;
    void validate(int d) const;
};

/// Per-time-step accept/propose counters for the MH kernels.
struct MoveStats {
    std::vector<long> accepted;
    std::vector<long> proposed;

    void resize(int T) {
        accepted.assign(static_cast<std::size_t>(T), 0);
        proposed.assign(static_cast<std::size_t>(T), 0);
    }
    /// CSV `t,accepted,proposed` (1-based t).
    void write_csv(std::ostream& os) const;
};

/// The per-time invariant target rho_t over (x_t, a_{t-1}): a normalized
/// mixture weight over the ancestor times a normalized component density in x.
/// At t = 0 there is a single component (mu, p(x_1|y_1) or q_1 by variant).
class InvariantTarget {
public:
    enum class Tag { bootstrap, fully_adapted, auxiliary };

    static InvariantTarget initial(Tag tag, const LinearGaussianModel& model, const Eigen::MatrixXd& y,
                                   const Proposal* proposal);
    /// t >= 1; logw_prev is the variant's weight row of cloud t-1 (g-weights,
    /// predictive weights or v-weights) whose normalization gives the mixture.
    static InvariantTarget at_time(Tag tag, const LinearGaussianModel& model, const Eigen::MatrixXd& y, int t,
                                   const Eigen::MatrixXd& x_prev, const Eigen::VectorXd& logw_prev,
                                   const Proposal* proposal);

    int components() const { return static_cast<int>(log_mix_.size()); }
    const Eigen::VectorXd& log_mix() const { return log_mix_; }
    const Eigen::VectorXd& mix_prob() const { return mix_prob_; }
    double log_component(int a, const Eigen::VectorXd& x) const;
    Eigen::VectorXd sample_component(int a, RngStream& rng) const;

    /// log rho(x, a) = log_mix[a] + log_component(a, x).
    double log_density(int a, const Eigen::VectorXd& x) const { return log_mix_[a] + log_component(a, x); }

    /// Anchor moments of f(.|x_{t-1}^a) for the autoregressive proposal
    /// (initial moments m0 = 0, C0 = I at t = 0).
    Eigen::VectorXd ar_anchor_mean(int a) const;
    double ar_anchor_var() const;

    int time() const { return t_; }
    const LinearGaussianModel& model() const { return *model_; }

private:
    Tag tag_{};
    int t_ = 0;
    const LinearGaussianModel* model_ = nullptr;
    const Eigen::MatrixXd* y_ = nullptr;
    const Eigen::MatrixXd* x_prev_ = nullptr; // null at t = 0
    const Proposal* proposal_ = nullptr;
    Eigen::VectorXd log_mix_;
    Eigen::VectorXd mix_prob_;
};

InvariantTarget::Tag target_tag(FilterVariant variant);

/// Spec'd target factories. rho_bootstrap mixes the normalized g-weights with
/// f components; rho_fa mixes predictive weights with optimal-proposal
/// components (both computed from the cloud); rho_apf mixes the given
/// v-weights with proposal components.
InvariantTarget rho_bootstrap(const LinearGaussianModel& model, const Eigen::MatrixXd& y, int t,
                              const Eigen::MatrixXd& x_prev);
InvariantTarget rho_fa(const LinearGaussianModel& model, const Eigen::MatrixXd& y, int t,
                       const Eigen::MatrixXd& x_prev);
InvariantTarget rho_apf(const LinearGaussianModel& model, const Eigen::MatrixXd& y, int t,
                        const Eigen::MatrixXd& x_prev, const Eigen::VectorXd& logv_prev, const Proposal& proposal);

struct MoveResult {
    Eigen::VectorXd x;
    int a = 0;
    bool accepted = false;
};

/// One reversible MH move targeting rho: propose a* from the mixture weights,
/// x* from the chosen state proposal, accept with the standard ratio.
MoveResult mh_move(const InvariantTarget& target, const Eigen::VectorXd& x, int a, const KernelSpec& spec,
                   RngStream& rng);

/// Exact draw (x, a) ~ rho.
MoveResult exact_draw(const InvariantTarget& target, RngStream& rng);

struct McmcStepCloud {
    Eigen::MatrixXd x;        // d x N
    std::vector<int> a;       // N
    long accepted = 0;
    long proposed = 0;
};

/// Unconditional fill of one time step: slot 1 is an exact draw from rho, each
/// following slot applies sweeps_per_slot MH moves to its predecessor.
McmcStepCloud mcmc_time_step(const InvariantTarget& target, int N, const KernelSpec& spec, RngStream& rng);

/// Conditional fill: the pivot slot is pinned to (x, a); slots below it are
/// generated by chaining the kernel downwards from the pivot, slots above by
/// chaining upwards (reversibility makes both directions use the same kernel).
McmcStepCloud conditional_mcmc_time_step(const InvariantTarget& target, int N, int pivot,
                                         const Eigen::VectorXd& pinned_x, int pinned_a, const KernelSpec& spec,
                                         RngStream& rng);

/// Full MCMC-move filters; estimates match the corresponding plain filter.
ParticleSystem mcmc_pf(const LinearGaussianModel& model, const Eigen::MatrixXd& y, int N, const KernelSpec& spec,
                       RngStream& rng, MoveStats* stats = nullptr);
ParticleSystem mcmc_faapf(const LinearGaussianModel& model, const Eigen::MatrixXd& y, int N, const KernelSpec& spec,
                          RngStream& rng, MoveStats* stats = nullptr);
ParticleSystem mcmc_apf(const LinearGaussianModel& model, const Eigen::MatrixXd& y, int N, const Proposal& proposal,
                        const KernelSpec& spec, RngStream& rng, MoveStats* stats = nullptr);

/// Conditional MCMC-move filters (the state-update kernels of the particle
/// Gibbs samplers built on them).
ParticleSystem conditional_mcmc_filter(FilterVariant variant, const RetainedPath& retained,
                                       const LinearGaussianModel& model, const Eigen::MatrixXd& y, int N,
                                       const Proposal* proposal, const KernelSpec& spec, IndexMode mode,
                                       RngStream& rng, MoveStats* stats = nullptr);

} // namespace pmcmc
