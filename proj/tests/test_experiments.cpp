#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pmcmc/experiments.hpp"
#include "support/stat_test.hpp"

using namespace pmcmc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

} // namespace

TEST_CASE("config parsing: globals, sections and comments") {
    const std::string text = R"(
# model
d = 3
T = 7
a0 = 0.4
sigma = 1.5
seed = 99
dims = 2,5,10

[algorithm pf]
N = 500

[algorithm my-mcmc]
kind = mcmc-faapf
N = 64
move = rw
sweeps = 2
index = bs
)";
    const ExperimentConfig config = ExperimentConfig::from_string(text);
    CHECK(config.dims.d == 3);
    CHECK(config.dims.T == 7);
    CHECK(config.theta_true.a0 == 0.4);
    CHECK(config.theta_true.sigma == 1.5);
    CHECK(config.seed == 99);
    CHECK(config.dim_list == std::vector<int>{2, 5, 10});
    REQUIRE(config.algorithms.size() == 2);
    CHECK(config.algorithms[0].kind == "pf");
    CHECK(config.algorithms[0].N == 500);
    CHECK(config.algorithms[1].kind == "mcmc-faapf");
    CHECK(config.algorithms[1].move == MoveProposal::random_walk);
    CHECK(config.algorithms[1].sweeps == 2);
    CHECK(config.algorithms[1].index == IndexMode::backward_sampling);
    config.validate_config();

    const FilterSpec spec = config.algorithms[1].filter_spec();
    CHECK(spec.variant == FilterVariant::mcmc_fully_adapted);
    CHECK(spec.N == 64);
}

TEST_CASE("config errors carry context") {
    CHECK_THROWS_AS(ExperimentConfig::from_string("bogus_key = 3"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_string("d = not-a-number"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_string("[algorithm]"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_string("[algorithm a]\n[algorithm a]"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_string("[algorithm a]\nmove = sideways"), ConfigError);

    ExperimentConfig config = ExperimentConfig::from_string("[algorithm weird]");
    CHECK_THROWS_AS(config.validate_config(), ConfigError);
}

TEST_CASE("default particle counts follow the cost class") {
    AlgorithmConfig pf;
    pf.kind = "pf";
    CHECK(pf.effective_n() == 1000);
    AlgorithmConfig ehmm;
    ehmm.kind = "ehmm";
    CHECK(ehmm.effective_n() == 100);
}

TEST_CASE("simulate command writes manifest before data and is reproducible") {
    TempDir dir("pmcmc_test_sim");
    ExperimentConfig config = ExperimentConfig::from_string("d = 2\nT = 10\nseed = 5");
    config.out_dir = dir.str();
    CHECK(cmd_simulate(config) == 0);

    const auto manifest = nlohmann::json::parse(slurp(dir.str() + "/manifest.json"));
    CHECK(manifest["complete"] == true);
    CHECK(manifest["master_seed"] == 5);

    const std::string first = slurp(dir.str() + "/data.csv");
    // Row count: header + T*d rows.
    CHECK(std::count(first.begin(), first.end(), '\n') == 1 + 20);

    CHECK(cmd_simulate(config) == 0);
    CHECK(slurp(dir.str() + "/data.csv") == first); // byte-identical rerun
}

TEST_CASE("loglik variance command: row counts and output schema") {
    TempDir dir("pmcmc_test_llv");
    ExperimentConfig config = ExperimentConfig::from_string(R"(
d = 2
T = 5
replications = 8
seed = 3
workers = 2
dims = 1,2

[algorithm pf]
N = 20

[algorithm ehmm]
N = 10
)");
    config.out_dir = dir.str();
    CHECK(cmd_loglik_variance(config) == 0);
    const std::string rows = slurp(dir.str() + "/loglik_variance.csv");
    // header + dims x algorithms x replications
    CHECK(std::count(rows.begin(), rows.end(), '\n') == 1 + 2 * 2 * 8);
    const auto summary = nlohmann::json::parse(slurp(dir.str() + "/loglik_variance_summary.json"));
    CHECK(summary.size() == 4);
}

TEST_CASE("relative loglik samples are deterministic across worker counts") {
    const Estimator est = Estimator::make_filter([] {
        FilterSpec spec;
        spec.variant = FilterVariant::bootstrap;
        spec.N = 10;
        return spec;
    }());
    const ModelDims dims{1, 4};
    const auto a = relative_loglik_samples(est, Theta{0.5, 0.2, 1.0, 1.0}, dims, 16, 7, 1);
    const auto b = relative_loglik_samples(est, Theta{0.5, 0.2, 1.0, 1.0}, dims, 16, 7, 2);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] == b[i]);
    }
}

TEST_CASE("pg state study produces finite diagnostics at the documented shapes") {
    const ModelDims dims{2, 6};
    const LinearGaussianModel model(Theta{0.5, 0.2, 1.0, 1.0}, dims);
    const DataSet data = model.simulate(11);
    FilterSpec spec;
    spec.variant = FilterVariant::mcmc_fully_adapted;
    spec.N = 8;
    spec.kernel.proposal = MoveProposal::autoregressive;
    const PgStateStudy study = run_pg_state_study(spec, IndexMode::ancestor_sampling, model, data.y, 50, 13);
    CHECK(study.component_trace.size() == 50);
    CHECK(study.mean_ess.size() == 6);
    for (int t = 0; t < 6; ++t) {
        CHECK(study.mean_ess[t] >= 1.0);
        CHECK(study.mean_ess[t] <= 8.0);
        CHECK(study.moves.accepted[static_cast<std::size_t>(t)] <=
              study.moves.proposed[static_cast<std::size_t>(t)]);
    }
}

TEST_CASE("pmmh command writes traces, acf and kde files") {
    TempDir dir("pmcmc_test_pmmh");
    ExperimentConfig config = ExperimentConfig::from_string(R"(
d = 1
T = 4
seed = 17
runs = 2
iterations = 400
thin = 4
max_lag = 10

[algorithm faapf]
N = 20
)");
    config.out_dir = dir.str();
    CHECK(cmd_pmmh(config) == 0);
    CHECK(fs::exists(dir.path / "faapf_run1_trace.csv"));
    CHECK(fs::exists(dir.path / "faapf_run2_trace.csv"));
    CHECK(fs::exists(dir.path / "faapf_acf_a0.csv"));
    CHECK(fs::exists(dir.path / "faapf_kde_a0.csv"));
    const std::string trace = slurp(dir.str() + "/faapf_run1_trace.csv");
    CHECK(trace.substr(0, trace.find('\n')) == "iter,a0,a1,sigma,tau,loglik,accepted");
    CHECK(std::count(trace.begin(), trace.end(), '\n') == 1 + 100); // thinned

    const auto manifest = nlohmann::json::parse(slurp(dir.str() + "/manifest.json"));
    CHECK(manifest["complete"] == true);
    CHECK(manifest["run_seeds"].size() == 2);
}

TEST_CASE("pg commands reject non-conditional algorithms") {
    ExperimentConfig config = ExperimentConfig::from_string("[algorithm ehmm]\nN = 10");
    config.out_dir = (fs::temp_directory_path() / "pmcmc_test_reject").string();
    CHECK_THROWS_AS(cmd_pg_states(config), ConfigError);
    CHECK_THROWS_AS(cmd_pg_params(config), ConfigError);
}

TEST_CASE("pg-states command writes ess, acf and acceptance files") {
    TempDir dir("pmcmc_test_pgs");
    ExperimentConfig config = ExperimentConfig::from_string(R"(
d = 2
T = 5
seed = 19
runs = 1
iterations = 200
burn_in = 0.1

[algorithm mcmc-pf]
N = 10
move = rw
)");
    config.out_dir = dir.str();
    CHECK(cmd_pg_states(config) == 0);
    const std::string ess = slurp(dir.str() + "/mcmc-pf_ess.csv");
    CHECK(std::count(ess.begin(), ess.end(), '\n') == 1 + 5);
    const std::string acc = slurp(dir.str() + "/mcmc-pf_acceptance.csv");
    CHECK(acc.substr(0, acc.find('\n')) == "t,accepted,proposed");
    CHECK(fs::exists(dir.path / "mcmc-pf_state_acf.csv"));
    CHECK(fs::exists(dir.path / "mcmc-pf_run1_state_trace.csv"));
}

TEST_CASE("pg-params command runs a particle Gibbs chain end to end") {
    TempDir dir("pmcmc_test_pgp");
    ExperimentConfig config = ExperimentConfig::from_string(R"(
d = 1
T = 4
seed = 23
runs = 1
iterations = 300
theta_updates = 5

[algorithm pf]
N = 8
index = bs
)");
    config.out_dir = dir.str();
    CHECK(cmd_pg_params(config) == 0);
    const std::string trace = slurp(dir.str() + "/pf_run1_trace.csv");
    CHECK(std::count(trace.begin(), trace.end(), '\n') == 1 + 300);
}

TEST_CASE("theta chains are reproducible for every algorithm kind") {
    ExperimentConfig config = ExperimentConfig::from_string(R"(
d = 1
T = 3
iterations = 60
theta_updates = 3

[algorithm pf]
N = 6
[algorithm mcmc-faapf]
N = 6
[algorithm ehmm]
N = 6
[algorithm idealized-mh]
[algorithm idealized-gibbs]
)");
    const LinearGaussianModel model(config.theta_true, config.dims);
    const DataSet data = model.simulate(29);
    for (const auto& algo : config.algorithms) {
        const ThetaTrace a = run_theta_chain(algo, config, data.y, 31);
        const ThetaTrace b = run_theta_chain(algo, config, data.y, 31);
        REQUIRE(a.draws.size() == 60);
        for (std::size_t i = 0; i < a.draws.size(); ++i) {
            CHECK(a.draws[i].a0 == b.draws[i].a0);
            CHECK(a.loglik[i] == b.loglik[i]);
        }
    }
}

TEST_CASE("config hash changes with content") {
    CHECK(hash_text("a") != hash_text("b"));
    CHECK(hash_text("a") == hash_text("a"));
}
