#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pmcmc/rng.hpp"
#include "pmcmc/weights.hpp"
#include "support/stat_test.hpp"

using namespace pmcmc;

TEST_CASE("identical seed and stream id give identical sequences") {
    RngStream a(42, 3);
    RngStream b(42, 3);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.uniform() == b.uniform());
        CHECK(a.normal() == b.normal());
    }
}

TEST_CASE("distinct stream ids decorrelate") {
    RngStream a(42, 0);
    RngStream b(42, 1);
    int same = 0;
    double corr = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double x = a.normal();
        const double y = b.normal();
        if (x == y) {
            ++same;
        }
        corr += x * y;
    }
    CHECK(same == 0);
    CHECK(std::abs(corr / 10000.0) < 0.05);
}

TEST_CASE("split depends only on ids, not on draws consumed") {
    RngStream a(7, 1);
    RngStream b(7, 1);
    b.uniform();
    b.normal();
    RngStream ca = a.split(5);
    RngStream cb = b.split(5);
    for (int i = 0; i < 50; ++i) {
        CHECK(ca.uniform() == cb.uniform());
    }
}

TEST_CASE("uniform lies in [0,1) and has the right moments") {
    RngStream rng(123, 0);
    double sum = 0.0, sum2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sum2 += u * u;
    }
    CHECK(std::abs(sum / n - 0.5) < 0.005);
    CHECK(std::abs(sum2 / n - 1.0 / 3.0) < 0.005);
}

TEST_CASE("normalize: equal weights") {
    Eigen::VectorXd lw = Eigen::VectorXd::Zero(4);
    const auto nw = normalize(lw);
    for (int i = 0; i < 4; ++i) {
        CHECK(nw.prob[i] == doctest::Approx(0.25).epsilon(1e-12));
    }
    CHECK(nw.log_sum_exp == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("normalize: ratio 3 to 1") {
    Eigen::VectorXd lw(2);
    lw << std::log(3.0), std::log(1.0);
    const auto nw = normalize(lw);
    CHECK(nw.prob[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(nw.prob[1] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("normalize: extreme spread does not overflow") {
    Eigen::VectorXd lw(2);
    lw << -1000.0, 0.0;
    const auto nw = normalize(lw);
    // Exact values: p = (e^-1000, 1) / (1 + e^-1000); e^-1000 underflows to 0.
    CHECK(nw.prob[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(nw.prob[0] >= 0.0);
    CHECK(nw.prob[0] < 1e-300);
    CHECK(std::isfinite(nw.log_sum_exp));
    CHECK(nw.prob.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalize: all minus-infinity is a hard error carrying the step") {
    Eigen::VectorXd lw(3);
    const double neg_inf = -std::numeric_limits<double>::infinity();
    lw << neg_inf, neg_inf, neg_inf;
    CHECK_THROWS_AS(normalize(lw, 4), DegenerateWeightsError);
    try {
        normalize(lw, 4);
    } catch (const DegenerateWeightsError& e) {
        CHECK(e.time() == 4);
    }
}

TEST_CASE("normalize then exponentiate-and-sum returns one") {
    RngStream rng(5, 0);
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::VectorXd lw(17);
        for (int i = 0; i < lw.size(); ++i) {
            lw[i] = 40.0 * rng.normal();
        }
        CHECK(normalize(lw).prob.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("categorical point masses") {
    RngStream rng(1, 0);
    Eigen::VectorXd p1(3);
    p1 << 1.0, 0.0, 0.0;
    Eigen::VectorXd p3(3);
    p3 << 0.0, 0.0, 1.0;
    for (int i = 0; i < 100; ++i) {
        CHECK(categorical(p1, rng) == 0);
        CHECK(categorical(p3, rng) == 2);
    }
}

TEST_CASE("categorical is a pure function of probabilities and state") {
    Eigen::VectorXd p(3);
    p << 0.2, 0.5, 0.3;
    RngStream a(9, 2);
    RngStream b(9, 2);
    for (int i = 0; i < 200; ++i) {
        CHECK(categorical(p, a) == categorical(p, b));
    }
}

TEST_CASE("categorical frequencies match a fair coin") {
    Eigen::VectorXd p(2);
    p << 0.5, 0.5;
    RngStream rng(17, 0);
    long ones = 0;
    const long n = 100000;
    for (long i = 0; i < n; ++i) {
        ones += categorical(p, rng);
    }
    const double freq = static_cast<double>(ones) / n;
    CHECK(freq > 0.49);
    CHECK(freq < 0.51);
}

TEST_CASE("multinomial resampling: point mass and moment bands") {
    RngStream rng(23, 0);
    Eigen::VectorXd point = Eigen::VectorXd::Zero(5);
    point[3] = 1.0;
    for (const int a : multinomial_resample(point, 50, rng)) {
        CHECK(a == 3);
    }

    const int n = 100000;
    Eigen::VectorXd uniform = Eigen::VectorXd::Constant(4, 0.25);
    std::vector<long> counts(4, 0);
    for (const int a : multinomial_resample(uniform, n, rng)) {
        ++counts[static_cast<std::size_t>(a)];
    }
    const double sd = std::sqrt(n * 0.25 * 0.75);
    for (const long c : counts) {
        CHECK(std::abs(c - n * 0.25) < 4.0 * sd);
    }
}

TEST_CASE("resampled slots have identical marginals (exchangeability)") {
    // Chi-square comparison of the first and last slots' ancestor
    // distributions over replications.
    Eigen::VectorXd p(3);
    p << 0.6, 0.3, 0.1;
    const int reps = 20000, n = 8;
    std::vector<long> first(3, 0), last(3, 0);
    RngStream rng(31, 0);
    for (int r = 0; r < reps; ++r) {
        const auto idx = multinomial_resample(p, n, rng);
        ++first[static_cast<std::size_t>(idx.front())];
        ++last[static_cast<std::size_t>(idx.back())];
    }
    double stat = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double expected = reps * p[k];
        stat += (first[static_cast<std::size_t>(k)] - expected) * (first[static_cast<std::size_t>(k)] - expected) /
                expected;
        stat += (last[static_cast<std::size_t>(k)] - expected) * (last[static_cast<std::size_t>(k)] - expected) /
                expected;
    }
    CHECK(stat_test::chi_square_p(stat, 6) > 0.001);
}
