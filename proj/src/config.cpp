#include "pmcmc/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pmcmc/parallel.hpp"

namespace pmcmc {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

long parse_long(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(value, &pos);
        if (pos != value.size()) {
            throw std::invalid_argument("");
        }
        return v;
    } catch (...) {
        throw ConfigError("config: key '" + key + "' expects an integer, got '" + value + "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) {
            throw std::invalid_argument("");
        }
        return v;
    } catch (...) {
        throw ConfigError("config: key '" + key + "' expects a number, got '" + value + "'");
    }
}

const std::set<std::string> kFilterKinds = {"pf", "faapf", "apf", "mcmc-pf", "mcmc-faapf", "mcmc-apf"};

} // namespace

bool AlgorithmConfig::is_filter_kind() const {
    return kFilterKinds.count(kind) > 0;
}

bool AlgorithmConfig::is_estimator_kind() const {
    return is_filter_kind() || kind == "ehmm";
}

bool AlgorithmConfig::is_conditional_kind() const {
    return is_filter_kind();
}

FilterSpec AlgorithmConfig::filter_spec() const {
    FilterSpec spec;
    if (kind == "pf") {
        spec.variant = FilterVariant::bootstrap;
    } else if (kind == "faapf") {
        spec.variant = FilterVariant::fully_adapted;
    } else if (kind == "apf") {
        spec.variant = FilterVariant::auxiliary;
    } else if (kind == "mcmc-pf") {
        spec.variant = FilterVariant::mcmc_bootstrap;
    } else if (kind == "mcmc-faapf") {
        spec.variant = FilterVariant::mcmc_fully_adapted;
    } else if (kind == "mcmc-apf") {
        spec.variant = FilterVariant::mcmc_auxiliary;
    } else {
        throw ConfigError("algorithm '" + tag + "': kind '" + kind + "' is not a particle filter");
    }
    spec.N = effective_n();
    spec.proposal = proposal;
    spec.kernel.proposal = move;
    spec.kernel.sweeps_per_slot = sweeps;
    return spec;
}

Estimator AlgorithmConfig::estimator() const {
    if (kind == "ehmm") {
        PoolKernelSpec pk;
        pk.kind = pool;
        return Estimator::make_ehmm(effective_n(), pk);
    }
    return Estimator::make_filter(filter_spec());
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open '" + path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

ExperimentConfig ExperimentConfig::from_string(const std::string& text) {
    ExperimentConfig config;
    config.config_hash = hash_text(text);
    AlgorithmConfig* current = nullptr;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section header");
            }
            std::istringstream header(line.substr(1, line.size() - 2));
            std::string word, tag;
            header >> word >> tag;
            if (word != "algorithm" || tag.empty()) {
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": expected '[algorithm <tag>]', got '" + line + "'");
            }
            if (config.find_algorithm(tag) != nullptr) {
                throw ConfigError("config: duplicate algorithm tag '" + tag + "'");
            }
            AlgorithmConfig algo;
            algo.tag = tag;
            algo.kind = tag; // default: the tag names a known kind directly
            config.algorithms.push_back(algo);
            current = &config.algorithms.back();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (current == nullptr) {
            config.set_global(key, value);
            continue;
        }
        AlgorithmConfig& algo = *current;
        if (key == "kind") {
            algo.kind = value;
        } else if (key == "N") {
            algo.N = static_cast<int>(parse_long(key, value));
        } else if (key == "move") {
            if (value == "rw") {
                algo.move = MoveProposal::random_walk;
            } else if (value == "ar") {
                algo.move = MoveProposal::autoregressive;
            } else if (value == "independence") {
                algo.move = MoveProposal::independence;
            } else {
                throw ConfigError("config: move must be rw|ar|independence, got '" + value + "'");
            }
        } else if (key == "sweeps") {
            algo.sweeps = static_cast<int>(parse_long(key, value));
        } else if (key == "proposal") {
            if (value == "bootstrap") {
                algo.proposal = ProposalKind::bootstrap;
            } else if (value == "optimal") {
                algo.proposal = ProposalKind::optimal;
            } else if (value == "lookahead") {
                algo.proposal = ProposalKind::lookahead_bootstrap;
            } else {
                throw ConfigError("config: proposal must be bootstrap|optimal|lookahead, got '" + value + "'");
            }
        } else if (key == "pool") {
            if (value == "rw") {
                algo.pool = PoolKernelKind::random_walk;
            } else if (value == "independence") {
                algo.pool = PoolKernelKind::independence;
            } else {
                throw ConfigError("config: pool must be rw|independence, got '" + value + "'");
            }
        } else if (key == "index") {
            if (value == "as") {
                algo.index = IndexMode::ancestor_sampling;
            } else if (value == "bs") {
                algo.index = IndexMode::backward_sampling;
            } else {
                throw ConfigError("config: index must be as|bs, got '" + value + "'");
            }
        } else if (key == "iterations") {
            algo.iterations = parse_long(key, value);
        } else {
            throw ConfigError("config: unknown algorithm key '" + key + "'");
        }
    }
    return config;
}

void ExperimentConfig::set_global(const std::string& key, const std::string& value) {
    if (key == "d") {
        dims.d = static_cast<int>(parse_long(key, value));
    } else if (key == "T") {
        dims.T = static_cast<int>(parse_long(key, value));
    } else if (key == "a0") {
        theta_true.a0 = parse_double(key, value);
    } else if (key == "a1") {
        theta_true.a1 = parse_double(key, value);
    } else if (key == "sigma") {
        theta_true.sigma = parse_double(key, value);
    } else if (key == "tau") {
        theta_true.tau = parse_double(key, value);
    } else if (key == "replications") {
        replications = parse_long(key, value);
    } else if (key == "seed") {
        seed = static_cast<std::uint64_t>(parse_long(key, value));
    } else if (key == "out") {
        out_dir = value;
    } else if (key == "workers") {
        workers = static_cast<int>(parse_long(key, value));
    } else if (key == "runs") {
        runs = static_cast<int>(parse_long(key, value));
    } else if (key == "iterations") {
        iterations = parse_long(key, value);
    } else if (key == "burn_in") {
        burn_in = parse_double(key, value);
    } else if (key == "theta_updates") {
        theta_updates = static_cast<int>(parse_long(key, value));
    } else if (key == "thin") {
        thin = parse_long(key, value);
    } else if (key == "max_lag") {
        max_lag = static_cast<int>(parse_long(key, value));
    } else if (key == "dims") {
        dim_list.clear();
        std::istringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            dim_list.push_back(static_cast<int>(parse_long(key, trim(item))));
        }
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

void ExperimentConfig::validate_config() const {
    if (dims.d < 1 || dims.T < 1) {
        throw ConfigError("config: d and T must be positive");
    }
    if (replications < 1 || iterations < 1 || runs < 1 || thin < 1) {
        throw ConfigError("config: replications, iterations, runs and thin must be positive");
    }
    if (!(burn_in >= 0.0 && burn_in < 1.0)) {
        throw ConfigError("config: burn_in must lie in [0, 1)");
    }
    const std::set<std::string> known = {"pf",        "faapf",     "apf",
                                         "mcmc-pf",   "mcmc-faapf", "mcmc-apf",
                                         "ehmm",      "idealized-mh", "idealized-gibbs"};
    for (const auto& algo : algorithms) {
        if (known.count(algo.kind) == 0) {
            throw ConfigError("config: unknown algorithm kind '" + algo.kind + "' (tag '" + algo.tag + "')");
        }
        if (algo.sweeps < 1) {
            throw ConfigError("config: algorithm '" + algo.tag + "': sweeps must be >= 1");
        }
        if (algo.effective_n() < 1) {
            throw ConfigError("config: algorithm '" + algo.tag + "': N must be >= 1");
        }
    }
}

const AlgorithmConfig* ExperimentConfig::find_algorithm(const std::string& tag) const {
    for (const auto& algo : algorithms) {
        if (algo.tag == tag) {
            return &algo;
        }
    }
    return nullptr;
}

int ExperimentConfig::effective_workers() const {
    return workers > 0 ? workers : default_workers();
}

std::string hash_text(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

const char* code_version() {
    return "pmcmc 0.1.0";
}

void RunManifest::write(const std::string& dir) const {
    nlohmann::json j;
    j["config_hash"] = config_hash;
    j["code_version"] = code_version;
    j["master_seed"] = master_seed;
    j["run_seeds"] = run_seeds;
    j["wall_clock_seconds"] = wall_clock_seconds;
    j["complete"] = complete;
    std::ofstream out(dir + "/manifest.json");
    if (!out) {
        throw std::runtime_error("manifest: cannot write to '" + dir + "'");
    }
    out << j.dump(2) << '\n';
}

} // namespace pmcmc
