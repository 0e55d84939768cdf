#include "pmcmc/weights.hpp"

#include <cmath>
#include <limits>

namespace pmcmc {

double logsumexp(const Eigen::VectorXd& lw) {
    const double m = lw.maxCoeff();
    if (!std::isfinite(m)) {
        return m; // all -inf (or a NaN/inf poisoning the row)
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < lw.size(); ++i) {
        acc += std::exp(lw[i] - m);
    }
    return m + std::log(acc);
}

NormalizedWeights normalize(const Eigen::VectorXd& lw, int time) {
    const double lse = logsumexp(lw);
    if (!std::isfinite(lse)) {
        throw DegenerateWeightsError(time);
    }
    NormalizedWeights out;
    out.log_sum_exp = lse;
    out.prob = (lw.array() - lse).exp();
    return out;
}

int categorical(const Eigen::VectorXd& prob, RngStream& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    int last_positive = -1;
    for (Eigen::Index i = 0; i < prob.size(); ++i) {
        if (prob[i] > 0.0) {
            last_positive = static_cast<int>(i);
        }
        cum += prob[i];
        if (cum > u) {
            return static_cast<int>(i);
        }
    }
    // Round-off left cum slightly below 1; fall back to the last positive slot.
    if (last_positive < 0) {
        throw std::invalid_argument("categorical: probability vector sums to zero");
    }
    return last_positive;
}

std::vector<int> multinomial_resample(const Eigen::VectorXd& prob, int n, RngStream& rng) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        idx[static_cast<std::size_t>(i)] = categorical(prob, rng);
    }
    return idx;
}

} // namespace pmcmc
