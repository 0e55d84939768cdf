#pragma once

#include <string>
#include <vector>

#include "pmcmc/checks.hpp"
#include "pmcmc/config.hpp"

namespace pmcmc {

// Batch experiment commands; each writes a manifest before any result file
// and returns a process exit code (0 ok, 1 validation failure, 2 config error
// handled by the caller).
int cmd_simulate(const ExperimentConfig& config);
int cmd_loglik_variance(const ExperimentConfig& config);
int cmd_pmmh(const ExperimentConfig& config);
int cmd_pg_states(const ExperimentConfig& config);
int cmd_pg_params(const ExperimentConfig& config);
int cmd_validate(const ExperimentConfig& config, double scale);

/// loglik - kalman_loglik over `reps` runs, each on a freshly simulated
/// dataset of the configured horizon.
std::vector<double> relative_loglik_samples(const Estimator& estimator, const Theta& theta, const ModelDims& dims,
                                            long reps, std::uint64_t seed, int workers);

/// State-update study at fixed theta: repeated conditional sweeps tracking
/// the first component of x_1, the per-time-step mean particle ESS and the
/// MH-kernel acceptance counters.
struct PgStateStudy {
    Eigen::VectorXd component_trace; // one entry per sweep
    Eigen::VectorXd mean_ess;        // per time step
    MoveStats moves;
};

PgStateStudy run_pg_state_study(const FilterSpec& spec, IndexMode mode, const LinearGaussianModel& model,
                                const Eigen::MatrixXd& y, long sweeps, std::uint64_t seed);

/// A full theta chain (PMMH for estimator algorithms, particle Gibbs for
/// conditional ones, or the idealized samplers).
struct ThetaTrace {
    std::vector<Theta> draws;
    std::vector<double> loglik;  // marginal estimate (PMMH) or complete-data log joint (PG)
    std::vector<int> accepted;   // 0/1 (MH chains) or theta-acceptance counts (Gibbs sweeps)
};

ThetaTrace run_theta_chain(const AlgorithmConfig& algo, const ExperimentConfig& config, const Eigen::MatrixXd& y,
                           std::uint64_t seed);

/// Conditional/EHMM path-update kernels packaged for the invariance checks.
checks::SweepFn make_conditional_sweep(const FilterSpec& spec, IndexMode mode, const LinearGaussianModel& model,
                                       const Eigen::MatrixXd& y);
checks::SweepFn make_ehmm_gibbs_sweep(int N, const PoolKernelSpec& kernel, const LinearGaussianModel& model,
                                      const Eigen::MatrixXd& y);

/// The validation suite behind `cmd_validate` (scale multiplies replication
/// counts; tolerances and bands are recomputed from the actual counts).
std::vector<checks::CheckResult> run_validation(const ExperimentConfig& config, double scale);

} // namespace pmcmc
