#include "pmcmc/particle_system.hpp"

#include <ostream>
#include <stdexcept>

namespace pmcmc {

const char* variant_name(FilterVariant v) {
    switch (v) {
        case FilterVariant::bootstrap: return "pf";
        case FilterVariant::fully_adapted: return "faapf";
        case FilterVariant::auxiliary: return "apf";
        case FilterVariant::mcmc_bootstrap: return "mcmc-pf";
        case FilterVariant::mcmc_fully_adapted: return "mcmc-faapf";
        case FilterVariant::mcmc_auxiliary: return "mcmc-apf";
    }
    return "?";
}

void ParticleSystem::allocate(int T_, int N_, int d_) {
    T = T_;
    N = N_;
    d = d_;
    x.assign(static_cast<std::size_t>(T), Eigen::MatrixXd(d, N));
    ancestors.assign(static_cast<std::size_t>(T > 0 ? T - 1 : 0), std::vector<int>(static_cast<std::size_t>(N), 0));
    logw.assign(static_cast<std::size_t>(T), Eigen::VectorXd::Zero(N));
    loglik_terms = Eigen::VectorXd::Zero(T);
}

std::vector<int> ParticleSystem::lineage(int b_last) const {
    if (b_last < 0 || b_last >= N) {
        throw std::invalid_argument("lineage: index out of range");
    }
    std::vector<int> b(static_cast<std::size_t>(T));
    b[static_cast<std::size_t>(T - 1)] = b_last;
    for (int t = T - 2; t >= 0; --t) {
        b[static_cast<std::size_t>(t)] =
            ancestors[static_cast<std::size_t>(t)][static_cast<std::size_t>(b[static_cast<std::size_t>(t + 1)])];
    }
    return b;
}

Eigen::MatrixXd ParticleSystem::extract_path(const std::vector<int>& b) const {
    if (static_cast<int>(b.size()) != T) {
        throw std::invalid_argument("extract_path: index path length mismatch");
    }
    Eigen::MatrixXd path(T, d);
    for (int t = 0; t < T; ++t) {
        path.row(t) = x[static_cast<std::size_t>(t)].col(b[static_cast<std::size_t>(t)]).transpose();
    }
    return path;
}

void ParticleSystem::write_trace_csv(std::ostream& os) const {
    os << "t,i,ancestor,logw";
    for (int j = 1; j <= d; ++j) {
        os << ",x_" << j;
    }
    os << '\n';
    os.precision(17);
    for (int t = 0; t < T; ++t) {
        for (int i = 0; i < N; ++i) {
            const int anc = t > 0 ? ancestors[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(i)] + 1 : 0;
            os << (t + 1) << ',' << (i + 1) << ',' << anc << ',' << logw[static_cast<std::size_t>(t)][i];
            for (int j = 0; j < d; ++j) {
                os << ',' << x[static_cast<std::size_t>(t)](j, i);
            }
            os << '\n';
        }
    }
}

} // namespace pmcmc
