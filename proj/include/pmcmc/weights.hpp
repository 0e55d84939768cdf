#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pmcmc/rng.hpp"

namespace pmcmc {

/// Thrown when a whole weight vector is -inf, i.e. every particle has zero
/// probability. Signals model/data mismatch rather than silently renormalizing
/// noise. `time` is the 1-based step where it happened, or 0 if not tied to a
/// filter step.
class DegenerateWeightsError : public std::runtime_error {
public:
    explicit DegenerateWeightsError(int time = 0)
        : std::runtime_error(time > 0
                                 ? "degenerate weights at time step " + std::to_string(time)
                                 : std::string("degenerate weights")),
          time_(time) {}
    int time() const noexcept { return time_; }

private:
    int time_;
};

struct NormalizedWeights {
    Eigen::VectorXd prob;   // sums to 1
    double log_sum_exp;     // log of the sum of the unnormalised weights
};

/// log(sum_i exp(lw_i)); -inf for an all -inf input.
double logsumexp(const Eigen::VectorXd& lw);

/// Normalize log weights into probabilities. Throws DegenerateWeightsError if
/// no entry is finite.
NormalizedWeights normalize(const Eigen::VectorXd& lw, int time = 0);

/// Inverse-CDF categorical draw over {0..N-1}; indices scanned in ascending
/// order, which fixes tie-breaking.
int categorical(const Eigen::VectorXd& prob, RngStream& rng);

/// N iid categorical draws (multinomial resampling); exchangeable across slots.
std::vector<int> multinomial_resample(const Eigen::VectorXd& prob, int n, RngStream& rng);

} // namespace pmcmc
