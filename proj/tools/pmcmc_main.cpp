#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pmcmc/experiments.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out;
    long seed = -1;
    long replications = -1;
    int workers = -1;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "experiment config file (key = value, [algorithm ...] sections)");
    cmd->add_option("--seed", flags.seed, "master seed override");
    cmd->add_option("--out", flags.out, "output directory override");
    cmd->add_option("--replications", flags.replications, "replication count override");
    cmd->add_option("--workers", flags.workers, "worker thread count override");
}

pmcmc::ExperimentConfig load(const CommonFlags& flags) {
    std::string text;
    pmcmc::ExperimentConfig config;
    if (!flags.config_path.empty()) {
        std::ifstream in(flags.config_path);
        if (!in) {
            throw pmcmc::ConfigError("cannot open config '" + flags.config_path + "'");
        }
        std::stringstream buf;
        buf << in.rdbuf();
        text = buf.str();
        config = pmcmc::ExperimentConfig::from_string(text);
    }
    std::string override_repr;
    if (flags.seed >= 0) {
        config.set_global("seed", std::to_string(flags.seed));
        override_repr += "|seed=" + std::to_string(flags.seed);
    }
    if (!flags.out.empty()) {
        config.set_global("out", flags.out);
        override_repr += "|out=" + flags.out;
    }
    if (flags.replications > 0) {
        config.set_global("replications", std::to_string(flags.replications));
        override_repr += "|replications=" + std::to_string(flags.replications);
    }
    if (flags.workers > 0) {
        config.set_global("workers", std::to_string(flags.workers));
        override_repr += "|workers=" + std::to_string(flags.workers);
    }
    config.config_hash = pmcmc::hash_text(text + override_repr);
    config.validate_config();
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"particle MCMC and embedded-HMM experiment suite"};
    app.require_subcommand(1);

    CommonFlags flags;
    double validate_scale = 1.0;

    auto* simulate = app.add_subcommand("simulate", "simulate a dataset and write it as CSV");
    add_common(simulate, flags);
    auto* loglik = app.add_subcommand("loglik-variance", "relative log-likelihood estimates per algorithm and dimension");
    add_common(loglik, flags);
    auto* pmmh = app.add_subcommand("pmmh", "PMMH-type chains with ACF/KDE reports");
    add_common(pmmh, flags);
    auto* pg_states = app.add_subcommand("pg-states", "conditional state-update study at fixed theta");
    add_common(pg_states, flags);
    auto* pg_params = app.add_subcommand("pg-params", "particle Gibbs parameter chains");
    add_common(pg_params, flags);
    auto* validate = app.add_subcommand("validate", "run the oracle and invariance suites");
    add_common(validate, flags);
    validate->add_option("--scale", validate_scale, "replication-count multiplier (default 1.0)");

    CLI11_PARSE(app, argc, argv);

    try {
        const pmcmc::ExperimentConfig config = load(flags);
        if (simulate->parsed()) {
            return pmcmc::cmd_simulate(config);
        }
        if (loglik->parsed()) {
            return pmcmc::cmd_loglik_variance(config);
        }
        if (pmmh->parsed()) {
            return pmcmc::cmd_pmmh(config);
        }
        if (pg_states->parsed()) {
            return pmcmc::cmd_pg_states(config);
        }
        if (pg_params->parsed()) {
            return pmcmc::cmd_pg_params(config);
        }
        if (validate->parsed()) {
            return pmcmc::cmd_validate(config, validate_scale);
        }
    } catch (const pmcmc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
