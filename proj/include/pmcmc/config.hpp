#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmcmc/ehmm.hpp"
#include "pmcmc/model.hpp"
#include "pmcmc/samplers.hpp"

namespace pmcmc {

/// Invalid or unparsable configuration; the CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One `[algorithm <tag>]` section of the experiment config.
struct AlgorithmConfig {
    std::string tag;            // unique section name, used in output file names
    std::string kind;           // pf|faapf|apf|mcmc-pf|mcmc-faapf|mcmc-apf|ehmm|idealized-mh|idealized-gibbs
    int N = -1;                 // <0: 1000 for O(N) kinds, 100 for the O(N^2) ehmm
    MoveProposal move = MoveProposal::autoregressive;
    int sweeps = 1;
    ProposalKind proposal = ProposalKind::lookahead_bootstrap;
    PoolKernelKind pool = PoolKernelKind::random_walk;
    IndexMode index = IndexMode::ancestor_sampling;
    long iterations = -1;       // <0: use the global setting

    int effective_n() const { return N > 0 ? N : (kind == "ehmm" ? 100 : 1000); }
    bool is_filter_kind() const;      // one of the six particle filters
    bool is_estimator_kind() const;   // filter kinds or ehmm
    bool is_conditional_kind() const; // filter kinds (usable inside particle Gibbs)
    FilterSpec filter_spec() const;
    Estimator estimator() const;
};

/// Flat key/value experiment configuration with `[algorithm ...]` sections;
/// `#` starts a comment. CLI flags override individual global keys.
struct ExperimentConfig {
    ModelDims dims{25, 10};
    Theta theta_true{0.5, 0.2, 1.0, 1.0};
    long replications = 200;
    std::uint64_t seed = 1;
    std::string out_dir = "results";
    int workers = 0;            // 0: hardware concurrency
    int runs = 2;               // independent chains averaged in ACF reports
    long iterations = 20000;
    double burn_in = 0.1;
    int theta_updates = 100;
    long thin = 1;
    int max_lag = 50;
    std::vector<int> dim_list;  // loglik-variance study; empty means {dims.d}
    std::vector<AlgorithmConfig> algorithms;
    std::string config_hash;    // hash of the raw config text plus overrides

    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_string(const std::string& text);

    void set_global(const std::string& key, const std::string& value);
    void validate_config() const;

    const AlgorithmConfig* find_algorithm(const std::string& tag) const;
    int effective_workers() const;
};

/// Run manifest: written to `<out>/manifest.json` before any result file so
/// partial runs are detectable; finalized with per-run wall-clock afterwards.
struct RunManifest {
    std::string config_hash;
    std::string code_version;
    std::uint64_t master_seed = 0;
    std::vector<std::uint64_t> run_seeds;
    std::vector<double> wall_clock_seconds;
    bool complete = false;

    void write(const std::string& dir) const;
};

/// FNV-1a hash of the raw config text, hex-encoded.
std::string hash_text(const std::string& text);

const char* code_version();

} // namespace pmcmc
