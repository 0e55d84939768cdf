#include "pmcmc/experiments.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <json.hpp>

#include "pmcmc/diagnostics.hpp"
#include "pmcmc/parallel.hpp"

namespace pmcmc {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace fs = std::filesystem;

double wall_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
    }
    std::ofstream probe(dir + "/.write_probe");
    if (!probe) {
        throw std::runtime_error("output directory '" + dir + "' is not writable");
    }
    probe.close();
    fs::remove(dir + "/.write_probe", ec);
}

RunManifest start_manifest(const ExperimentConfig& config, const std::vector<std::uint64_t>& run_seeds) {
    ensure_out_dir(config.out_dir);
    RunManifest manifest;
    manifest.config_hash = config.config_hash;
    manifest.code_version = code_version();
    manifest.master_seed = config.seed;
    manifest.run_seeds = run_seeds;
    manifest.complete = false;
    manifest.write(config.out_dir);
    return manifest;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    out.precision(12);
    return out;
}

// Data shared by the chain commands: one dataset per experiment.
DataSet experiment_data(const ExperimentConfig& config) {
    const LinearGaussianModel model(config.theta_true, config.dims);
    return model.simulate(RngStream(config.seed, 9001).split(0).seed());
}

Eigen::VectorXd theta_component(const std::vector<Theta>& draws, int k) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(draws.size()));
    for (std::size_t i = 0; i < draws.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = draws[i][k];
    }
    return v;
}

void write_theta_trace_csv(const std::string& path, const ThetaTrace& trace, long thin) {
    auto out = open_out(path);
    out << "iter,a0,a1,sigma,tau,loglik,accepted\n";
    for (std::size_t i = 0; i < trace.draws.size(); i += static_cast<std::size_t>(thin)) {
        const Theta& th = trace.draws[i];
        out << (i + 1) << ',' << th.a0 << ',' << th.a1 << ',' << th.sigma << ',' << th.tau << ','
            << trace.loglik[i] << ',' << trace.accepted[i] << '\n';
    }
}

} // namespace

std::vector<double> relative_loglik_samples(const Estimator& estimator, const Theta& theta, const ModelDims& dims,
                                            long reps, std::uint64_t seed, int workers) {
    std::vector<double> out(static_cast<std::size_t>(reps));
    RngStream master(seed, 101);
    parallel_for(reps, workers, [&](long r) {
        RngStream rng = master.split(static_cast<std::uint64_t>(r));
        const LinearGaussianModel model(theta, dims);
        const DataSet data = model.simulate(rng.split(1).seed());
        const double exact = kalman(model, data.y).loglik;
        RngStream run_rng = rng.split(2);
        out[static_cast<std::size_t>(r)] = estimator.loglik(model, data.y, run_rng) - exact;
    });
    return out;
}

PgStateStudy run_pg_state_study(const FilterSpec& spec, IndexMode mode, const LinearGaussianModel& model,
                                const Eigen::MatrixXd& y, long sweeps, std::uint64_t seed) {
    const int T = static_cast<int>(y.rows());
    PgStateStudy study;
    study.component_trace.resize(sweeps);
    study.mean_ess = VectorXd::Zero(T);
    study.moves.resize(T);

    RngStream rng(seed, 211);
    const KalmanResult kf = kalman(model, y);
    MatrixXd path = sample_posterior_path(model, kf, rng);
    for (long it = 0; it < sweeps; ++it) {
        RetainedPath retained;
        retained.x = path;
        retained.b.resize(static_cast<std::size_t>(T));
        for (int t = 0; t < T; ++t) {
            const int k = static_cast<int>(rng.uniform() * spec.N);
            retained.b[static_cast<std::size_t>(t)] = k >= spec.N ? spec.N - 1 : k;
        }
        MoveStats step_moves;
        const ParticleSystem sys = run_conditional_filter(spec, retained, model, y, mode, rng, &step_moves);
        std::vector<int> b;
        if (mode == IndexMode::backward_sampling) {
            const auto proposal = make_proposal(spec.proposal, model, y);
            b = backward_sample(sys, spec.variant, model, y, proposal.get(), rng);
        } else {
            b = sys.lineage(sample_terminal_index(sys, rng));
        }
        path = sys.extract_path(b);

        study.component_trace[it] = path(0, 0);
        for (int t = 0; t < T; ++t) {
            study.mean_ess[t] += diagnostics::ess(normalize(sys.logw[static_cast<std::size_t>(t)], t + 1).prob);
        }
        if (!step_moves.accepted.empty()) {
            for (int t = 0; t < T; ++t) {
                study.moves.accepted[static_cast<std::size_t>(t)] += step_moves.accepted[static_cast<std::size_t>(t)];
                study.moves.proposed[static_cast<std::size_t>(t)] += step_moves.proposed[static_cast<std::size_t>(t)];
            }
        }
    }
    study.mean_ess /= static_cast<double>(sweeps);
    return study;
}

ThetaTrace run_theta_chain(const AlgorithmConfig& algo, const ExperimentConfig& config, const Eigen::MatrixXd& y,
                           std::uint64_t seed) {
    const long iterations = algo.iterations > 0 ? algo.iterations : config.iterations;
    SamplerConfig sampler;
    sampler.iterations = iterations;
    sampler.burn_in_fraction = config.burn_in;
    sampler.theta_updates_per_sweep = config.theta_updates;
    sampler.validate();

    ThetaTrace trace;
    trace.draws.reserve(static_cast<std::size_t>(iterations));
    trace.loglik.reserve(static_cast<std::size_t>(iterations));
    trace.accepted.reserve(static_cast<std::size_t>(iterations));

    RngStream rng(seed, 307);
    const ModelDims dims = config.dims;
    const Theta init = config.theta_true;

    if (algo.kind == "idealized-gibbs" || algo.is_conditional_kind()) {
        ChainState state;
        state.theta = init;
        state.path = LinearGaussianModel(init, dims).simulate(rng.split(3).seed()).x_true;
        const bool idealized = algo.kind == "idealized-gibbs";
        FilterSpec spec;
        if (!idealized) {
            spec = algo.filter_spec();
            if (spec.N < 2) {
                throw ConfigError("algorithm '" + algo.tag + "': particle Gibbs needs N >= 2");
            }
        }
        for (long it = 0; it < iterations; ++it) {
            int accepts = 0;
            if (idealized) {
                idealized_gibbs_sweep(state, dims, y, sampler, rng, &accepts);
            } else {
                pg_sweep(state, spec, algo.index, dims, y, sampler, rng, nullptr, &accepts);
            }
            trace.draws.push_back(state.theta);
            trace.loglik.push_back(log_prior(state.theta) +
                                   LinearGaussianModel(state.theta, dims).log_joint(state.path, y));
            trace.accepted.push_back(accepts);
        }
        return trace;
    }

    // Marginal MH chains: PMMH over a filter/EHMM estimator or the idealized
    // sampler with the exact Kalman likelihood.
    Estimator estimator;
    if (algo.kind == "idealized-mh") {
        estimator = Estimator::make_exact();
    } else if (algo.is_estimator_kind()) {
        estimator = algo.estimator();
    } else {
        throw ConfigError("algorithm '" + algo.tag + "': kind '" + algo.kind + "' cannot run a theta chain");
    }
    ChainState state = pmmh_init(init, estimator, dims, y, rng);
    for (long it = 0; it < iterations; ++it) {
        const bool acc = pmmh_step(state, estimator, dims, y, sampler, rng);
        trace.draws.push_back(state.theta);
        trace.loglik.push_back(state.cached_loglik);
        trace.accepted.push_back(acc ? 1 : 0);
    }
    return trace;
}

checks::SweepFn make_conditional_sweep(const FilterSpec& spec, IndexMode mode, const LinearGaussianModel& model,
                                       const Eigen::MatrixXd& y) {
    return [spec, mode, &model, &y](const MatrixXd& path, RngStream& rng) {
        const int T = static_cast<int>(y.rows());
        RetainedPath retained;
        retained.x = path;
        retained.b.resize(static_cast<std::size_t>(T));
        for (int t = 0; t < T; ++t) {
            const int k = static_cast<int>(rng.uniform() * spec.N);
            retained.b[static_cast<std::size_t>(t)] = k >= spec.N ? spec.N - 1 : k;
        }
        const ParticleSystem sys = run_conditional_filter(spec, retained, model, y, mode, rng);
        std::vector<int> b;
        if (mode == IndexMode::backward_sampling) {
            const auto proposal = make_proposal(spec.proposal, model, y);
            b = backward_sample(sys, spec.variant, model, y, proposal.get(), rng);
        } else {
            b = sys.lineage(sample_terminal_index(sys, rng));
        }
        return sys.extract_path(b);
    };
}

checks::SweepFn make_ehmm_gibbs_sweep(int N, const PoolKernelSpec& kernel, const LinearGaussianModel& model,
                                      const Eigen::MatrixXd& y) {
    return [N, kernel, &model, &y](const MatrixXd& path, RngStream& rng) {
        return ehmm_gibbs_step(path, model, y, N, kernel, rng);
    };
}

int cmd_simulate(const ExperimentConfig& config) {
    RunManifest manifest = start_manifest(config, {config.seed});
    const double t0 = wall_seconds();
    const LinearGaussianModel model(config.theta_true, config.dims);
    const DataSet data = model.simulate(config.seed);
    {
        auto out = open_out(config.out_dir + "/data.csv");
        data.write_csv(out);
    }
    {
        nlohmann::json j;
        j["seed"] = data.seed;
        j["d"] = config.dims.d;
        j["T"] = config.dims.T;
        j["theta"] = {config.theta_true.a0, config.theta_true.a1, config.theta_true.sigma, config.theta_true.tau};
        auto out = open_out(config.out_dir + "/data_manifest.json");
        out << j.dump(2) << '\n';
    }
    manifest.wall_clock_seconds = {wall_seconds() - t0};
    manifest.complete = true;
    manifest.write(config.out_dir);
    return 0;
}

int cmd_loglik_variance(const ExperimentConfig& config) {
    if (config.algorithms.empty()) {
        throw ConfigError("loglik-variance: no [algorithm ...] sections configured");
    }
    for (const auto& algo : config.algorithms) {
        if (!algo.is_estimator_kind()) {
            throw ConfigError("loglik-variance: algorithm '" + algo.tag + "' is not a likelihood estimator");
        }
    }
    std::vector<int> dims_to_run = config.dim_list.empty() ? std::vector<int>{config.dims.d} : config.dim_list;

    RunManifest manifest = start_manifest(config, {config.seed});
    const double t0 = wall_seconds();
    auto rows = open_out(config.out_dir + "/loglik_variance.csv");
    rows << "algorithm,d,rep,rel_loglik\n";
    nlohmann::json summary = nlohmann::json::array();
    for (const int d : dims_to_run) {
        ModelDims dims{d, config.dims.T};
        for (std::size_t ai = 0; ai < config.algorithms.size(); ++ai) {
            const auto& algo = config.algorithms[ai];
            const std::uint64_t seed =
                RngStream(config.seed, 353).split(static_cast<std::uint64_t>(d)).split(ai).seed();
            const std::vector<double> rel = relative_loglik_samples(algo.estimator(), config.theta_true, dims,
                                                                    config.replications, seed,
                                                                    config.effective_workers());
            double sum = 0.0, sum2 = 0.0;
            for (std::size_t r = 0; r < rel.size(); ++r) {
                rows << algo.tag << ',' << d << ',' << (r + 1) << ',' << rel[r] << '\n';
                sum += rel[r];
                sum2 += rel[r] * rel[r];
            }
            const double mean = sum / static_cast<double>(rel.size());
            const double var = (sum2 - static_cast<double>(rel.size()) * mean * mean) /
                               (static_cast<double>(rel.size()) - 1.0);
            summary.push_back({{"algorithm", algo.tag}, {"d", d}, {"mean", mean}, {"variance", var}});
        }
    }
    auto out = open_out(config.out_dir + "/loglik_variance_summary.json");
    out << summary.dump(2) << '\n';
    manifest.wall_clock_seconds = {wall_seconds() - t0};
    manifest.complete = true;
    manifest.write(config.out_dir);
    return 0;
}

namespace {

// Shared by cmd_pmmh and cmd_pg_params: run chains, dump traces, write the
// averaged a0 autocorrelation and the pooled a0 density estimate.
int run_theta_study(const ExperimentConfig& config, bool conditional_only) {
    if (config.algorithms.empty()) {
        throw ConfigError("no [algorithm ...] sections configured");
    }
    std::vector<std::uint64_t> run_seeds;
    for (int run = 0; run < config.runs; ++run) {
        run_seeds.push_back(RngStream(config.seed, 401).split(static_cast<std::uint64_t>(run)).seed());
    }
    RunManifest manifest = start_manifest(config, run_seeds);
    std::vector<double> clocks;

    const DataSet data = experiment_data(config);
    {
        auto out = open_out(config.out_dir + "/data.csv");
        data.write_csv(out);
    }

    for (const auto& algo : config.algorithms) {
        if (conditional_only && !(algo.is_conditional_kind() || algo.kind == "idealized-gibbs")) {
            throw ConfigError("pg-params: algorithm '" + algo.tag + "' has no conditional form");
        }
        const double t0 = wall_seconds();
        std::vector<Eigen::VectorXd> post_burn_in_a0;
        Eigen::VectorXd pooled;
        Eigen::VectorXd acf_avg;
        for (int run = 0; run < config.runs; ++run) {
            const ThetaTrace trace =
                run_theta_chain(algo, config, data.y, run_seeds[static_cast<std::size_t>(run)] + 13 * run);
            write_theta_trace_csv(config.out_dir + "/" + algo.tag + "_run" + std::to_string(run + 1) +
                                      "_trace.csv",
                                  trace, config.thin);
            const long burn = static_cast<long>(config.burn_in * static_cast<double>(trace.draws.size()));
            Eigen::VectorXd a0 = theta_component(trace.draws, 0).segment(
                burn, static_cast<Eigen::Index>(trace.draws.size()) - burn);
            const int max_lag = std::min<int>(config.max_lag, static_cast<int>(a0.size()) - 1);
            const Eigen::VectorXd r = diagnostics::acf(a0, max_lag);
            if (acf_avg.size() == 0) {
                acf_avg = r;
            } else {
                acf_avg += r;
            }
            post_burn_in_a0.push_back(std::move(a0));
        }
        acf_avg /= static_cast<double>(config.runs);
        {
            auto out = open_out(config.out_dir + "/" + algo.tag + "_acf_a0.csv");
            diagnostics::write_acf_csv(out, acf_avg);
        }
        Eigen::Index total = 0;
        for (const auto& v : post_burn_in_a0) {
            total += v.size();
        }
        pooled.resize(total);
        Eigen::Index at = 0;
        for (const auto& v : post_burn_in_a0) {
            pooled.segment(at, v.size()) = v;
            at += v.size();
        }
        Eigen::VectorXd grid(201);
        for (int g = 0; g < 201; ++g) {
            grid[g] = -1.0 + g * 0.01;
        }
        const Eigen::VectorXd density = diagnostics::kde(pooled, grid);
        {
            auto out = open_out(config.out_dir + "/" + algo.tag + "_kde_a0.csv");
            diagnostics::write_kde_csv(out, grid, density);
        }
        clocks.push_back(wall_seconds() - t0);
    }
    manifest.wall_clock_seconds = clocks;
    manifest.complete = true;
    manifest.write(config.out_dir);
    return 0;
}

} // namespace

int cmd_pmmh(const ExperimentConfig& config) {
    for (const auto& algo : config.algorithms) {
        if (!(algo.is_estimator_kind() || algo.kind == "idealized-mh")) {
            throw ConfigError("pmmh: algorithm '" + algo.tag + "' cannot provide a likelihood estimate");
        }
    }
    return run_theta_study(config, false);
}

int cmd_pg_params(const ExperimentConfig& config) {
    return run_theta_study(config, true);
}

int cmd_pg_states(const ExperimentConfig& config) {
    if (config.algorithms.empty()) {
        throw ConfigError("pg-states: no [algorithm ...] sections configured");
    }
    for (const auto& algo : config.algorithms) {
        if (!algo.is_conditional_kind()) {
            throw ConfigError("pg-states: algorithm '" + algo.tag + "' has no conditional form");
        }
        if (algo.effective_n() < 2) {
            throw ConfigError("pg-states: algorithm '" + algo.tag + "' needs N >= 2");
        }
    }
    std::vector<std::uint64_t> run_seeds;
    for (int run = 0; run < config.runs; ++run) {
        run_seeds.push_back(RngStream(config.seed, 499).split(static_cast<std::uint64_t>(run)).seed());
    }
    RunManifest manifest = start_manifest(config, run_seeds);
    std::vector<double> clocks;

    const DataSet data = experiment_data(config);
    const LinearGaussianModel model(config.theta_true, config.dims);
    const int T = config.dims.T;

    for (const auto& algo : config.algorithms) {
        const double t0 = wall_seconds();
        const long sweeps = algo.iterations > 0 ? algo.iterations : config.iterations;
        Eigen::VectorXd ess_avg = Eigen::VectorXd::Zero(T);
        Eigen::VectorXd acf_avg;
        MoveStats moves;
        moves.resize(T);
        for (int run = 0; run < config.runs; ++run) {
            const PgStateStudy study =
                run_pg_state_study(algo.filter_spec(), algo.index, model, data.y, sweeps,
                                   run_seeds[static_cast<std::size_t>(run)] + 17 * run);
            {
                auto out = open_out(config.out_dir + "/" + algo.tag + "_run" + std::to_string(run + 1) +
                                    "_state_trace.csv");
                out << "iter,t,dim,x\n";
                for (long it = 0; it < sweeps; it += config.thin) {
                    out << (it + 1) << ",1,1," << study.component_trace[it] << '\n';
                }
            }
            ess_avg += study.mean_ess;
            const long burn = static_cast<long>(config.burn_in * sweeps);
            const Eigen::VectorXd post = study.component_trace.segment(burn, sweeps - burn);
            const int max_lag = std::min<int>(config.max_lag, static_cast<int>(post.size()) - 1);
            const Eigen::VectorXd r = diagnostics::acf(post, max_lag);
            if (acf_avg.size() == 0) {
                acf_avg = r;
            } else {
                acf_avg += r;
            }
            for (int t = 0; t < T; ++t) {
                moves.accepted[static_cast<std::size_t>(t)] += study.moves.accepted[static_cast<std::size_t>(t)];
                moves.proposed[static_cast<std::size_t>(t)] += study.moves.proposed[static_cast<std::size_t>(t)];
            }
        }
        ess_avg /= static_cast<double>(config.runs);
        acf_avg /= static_cast<double>(config.runs);
        {
            auto out = open_out(config.out_dir + "/" + algo.tag + "_ess.csv");
            diagnostics::write_ess_csv(out, ess_avg);
        }
        {
            auto out = open_out(config.out_dir + "/" + algo.tag + "_state_acf.csv");
            diagnostics::write_acf_csv(out, acf_avg);
        }
        {
            auto out = open_out(config.out_dir + "/" + algo.tag + "_acceptance.csv");
            moves.write_csv(out);
        }
        clocks.push_back(wall_seconds() - t0);
    }
    manifest.wall_clock_seconds = clocks;
    manifest.complete = true;
    manifest.write(config.out_dir);
    return 0;
}

std::vector<checks::CheckResult> run_validation(const ExperimentConfig& config, double scale) {
    using namespace checks;
    std::vector<CheckResult> results;
    const std::uint64_t seed = config.seed;
    const int workers = config.effective_workers();
    const auto reps = [scale](long base) { return std::max<long>(200, static_cast<long>(base * scale)); };

    // Model-level oracles.
    results.push_back(check_kalman_dense_oracle());
    results.push_back(check_optimal_proposal_factorization(seed));
    results.push_back(check_stationary_residual());
    results.push_back(check_prior_normalization());
    results.push_back(check_posterior_path_sampler(seed, reps(10000), workers));

    // Unbiasedness at the d=1, T=5 desk scale. The ratio distributions are
    // heavy-tailed (most of all for the EHMM estimator), so the 3-SE band is
    // only trustworthy with the full replication count; scale does not shrink
    // this suite.
    {
        const Theta theta{0.5, 0.2, 1.0, 1.0};
        const ModelDims dims{1, 5};
        const LinearGaussianModel model(theta, dims);
        const DataSet data = model.simulate(seed + 5);
        const double exact = kalman(model, data.y).loglik;
        const long r = std::max<long>(10000, reps(10000));
        for (const int n : {10, 100}) {
            const auto add = [&](const std::string& name, const Estimator& est) {
                results.push_back(checks::check_unbiasedness(name + "-N" + std::to_string(n), est, theta, dims,
                                                             data.y, exact, r, seed + n, workers));
            };
            FilterSpec spec;
            spec.N = n;
            spec.variant = FilterVariant::bootstrap;
            add("unbiased-pf", Estimator::make_filter(spec));
            spec.variant = FilterVariant::fully_adapted;
            add("unbiased-faapf", Estimator::make_filter(spec));
            spec.variant = FilterVariant::auxiliary;
            add("unbiased-apf", Estimator::make_filter(spec));
            spec.kernel.proposal = MoveProposal::autoregressive;
            spec.variant = FilterVariant::mcmc_bootstrap;
            add("unbiased-mcmc-pf", Estimator::make_filter(spec));
            spec.variant = FilterVariant::mcmc_fully_adapted;
            add("unbiased-mcmc-faapf", Estimator::make_filter(spec));
            spec.variant = FilterVariant::mcmc_auxiliary;
            add("unbiased-mcmc-apf", Estimator::make_filter(spec));
            PoolKernelSpec pool;
            add("unbiased-ehmm", Estimator::make_ehmm(n, pool));
        }
    }

    // Enumeration suite.
    results.push_back(check_hmm_enumeration(seed));
    results.push_back(check_ehmm_path_enumeration(seed, reps(1000000)));
    for (const auto v : {FilterVariant::bootstrap, FilterVariant::fully_adapted, FilterVariant::auxiliary}) {
        results.push_back(check_backward_sampling_enumeration(v, seed, reps(1000000)));
        results.push_back(check_ancestor_sampling_enumeration(v, seed, reps(1000000)));
        results.push_back(check_generic_index_weights(v, seed));
    }

    // Reductions and identities.
    results.push_back(check_bootstrap_apf_bitwise(seed));
    for (const auto v :
         {FilterVariant::mcmc_bootstrap, FilterVariant::mcmc_fully_adapted, FilterVariant::mcmc_auxiliary}) {
        results.push_back(check_mcmc_independence_reduction(v, seed));
    }
    results.push_back(check_fa_apf_loglik(seed));
    results.push_back(check_rho_reductions(seed));
    results.push_back(check_reversal_identity(seed));
    results.push_back(check_pmmh_ratio_identity(seed));

    // Invariance of every conditional sweep (d=1, T=3, theta fixed).
    {
        const Theta theta{0.5, 0.2, 1.0, 1.0};
        const ModelDims dims{1, 3};
        const LinearGaussianModel model(theta, dims);
        const DataSet data = model.simulate(seed + 31);
        const long r = reps(10000);
        const std::array<FilterVariant, 6> variants = {
            FilterVariant::bootstrap,      FilterVariant::fully_adapted,      FilterVariant::auxiliary,
            FilterVariant::mcmc_bootstrap, FilterVariant::mcmc_fully_adapted, FilterVariant::mcmc_auxiliary};
        for (const auto variant : variants) {
            for (const auto mode : {IndexMode::backward_sampling, IndexMode::ancestor_sampling}) {
                FilterSpec spec;
                spec.variant = variant;
                spec.N = 10;
                spec.kernel.proposal = MoveProposal::autoregressive;
                const std::string name = std::string("invariance-") + variant_name(variant) +
                                         (mode == IndexMode::backward_sampling ? "-bs" : "-as");
                results.push_back(check_sweep_invariance(name, make_conditional_sweep(spec, mode, model, data.y),
                                                         model, data.y, r, seed + 67, workers));
            }
        }
        for (const auto kind : {PoolKernelKind::independence, PoolKernelKind::random_walk}) {
            PoolKernelSpec pool;
            pool.kind = kind;
            const std::string name = std::string("invariance-ehmm-gibbs-") +
                                     (kind == PoolKernelKind::independence ? "independence" : "rw");
            results.push_back(check_sweep_invariance(name, make_ehmm_gibbs_sweep(10, pool, model, data.y), model,
                                                     data.y, r, seed + 71, workers));
        }
        // Two-route consistency of the conditional law for every variant.
        const ModelDims dims2{1, 2};
        const LinearGaussianModel model2(theta, dims2);
        const DataSet data2 = model2.simulate(seed + 33);
        for (const auto variant : variants) {
            FilterSpec spec;
            spec.variant = variant;
            spec.N = 2;
            spec.kernel.proposal = MoveProposal::autoregressive;
            results.push_back(check_conditional_consistency(spec, model2, data2.y, reps(400000), seed + 73,
                                                            workers));
        }
    }
    return results;
}

int cmd_validate(const ExperimentConfig& config, double scale) {
    const std::vector<checks::CheckResult> results = run_validation(config, scale);
    bool all_pass = true;
    double total = 0.0;
    for (const auto& r : results) {
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << " (" << std::fixed << std::setprecision(2)
                  << r.seconds << "s) " << r.detail << '\n';
        all_pass = all_pass && r.pass;
        total += r.seconds;
    }
    std::cout << (all_pass ? "validation passed" : "validation FAILED") << " (" << results.size() << " checks, "
              << std::fixed << std::setprecision(1) << total << "s)\n";
    return all_pass ? 0 : 1;
}

} // namespace pmcmc
