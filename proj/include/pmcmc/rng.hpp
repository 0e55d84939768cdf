#pragma once

#include <cstdint>
#include <random>

namespace pmcmc {

/// Seeded, splittable random stream. The pair (seed, stream_id) together with
/// the call sequence fully determines the output, so replications and chains
/// can each own an independent stream and results are reproducible no matter
/// how work is scheduled across threads.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

    /// Derive an independent child stream. Splitting depends only on
    /// (seed, stream_id, child_id), never on how much the parent has drawn.
    RngStream split(std::uint64_t child_id) const;

    /// Uniform draw on [0, 1) with 53-bit resolution.
    double uniform();

    /// Standard normal draw (Box-Muller, cached spare).
    double normal();

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

private:
    std::uint64_t seed_ = 0;
    std::uint64_t stream_id_ = 0;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace pmcmc
