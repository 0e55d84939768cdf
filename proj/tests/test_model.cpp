#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pmcmc/kalman.hpp"
#include "pmcmc/model.hpp"
#include "support/stat_test.hpp"

using namespace pmcmc;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
const Theta kTrue{0.5, 0.2, 1.0, 1.0};
}

TEST_CASE("transition matrix: scalar, banded and zero cases") {
    CHECK(build_transition_matrix(0.5, 0.2, 1)(0, 0) == 0.5);

    MatrixXd expected(3, 3);
    expected << 0.5, 0.2, 0.0, 0.2, 0.5, 0.2, 0.0, 0.2, 0.5;
    const MatrixXd a = build_transition_matrix(0.5, 0.2, 3);
    CHECK((a - expected).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);

    CHECK(build_transition_matrix(0.0, 0.0, 4).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("banded apply matches the dense matrix") {
    const LinearGaussianModel model(kTrue, {7, 2});
    const MatrixXd a = model.transition_matrix();
    RngStream rng(3, 0);
    for (int trial = 0; trial < 50; ++trial) {
        VectorXd x(7);
        for (int i = 0; i < 7; ++i) {
            x[i] = rng.normal();
        }
        CHECK((model.apply_transition(x) - a * x).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("simulate is deterministic in the seed") {
    const LinearGaussianModel model(kTrue, {3, 8});
    const DataSet a = model.simulate(99);
    const DataSet b = model.simulate(99);
    CHECK(a.y == b.y);
    CHECK(a.x_true == b.x_true);
    const DataSet c = model.simulate(100);
    CHECK(a.y != c.y);
}

TEST_CASE("degenerate noise: A = I, sigma and tau tiny reproduce x1") {
    const LinearGaussianModel model(Theta{1.0, 0.0, 1e-12, 1e-12}, {2, 6});
    const DataSet data = model.simulate(5);
    for (int t = 0; t < 6; ++t) {
        CHECK((data.y.row(t) - data.x_true.row(0)).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("empirical variance of x1 matches C0 = I") {
    const LinearGaussianModel model(kTrue, {2, 1});
    double sum = 0.0, sum2 = 0.0;
    const int n = 100000;
    for (int r = 0; r < n; ++r) {
        const DataSet data = model.simulate(static_cast<std::uint64_t>(r) + 1000);
        const double v = data.x_true(0, 0);
        sum += v;
        sum2 += v * v;
    }
    const double var = (sum2 - sum * sum / n) / (n - 1);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("log densities: standard normal values") {
    const LinearGaussianModel model(kTrue, {1, 2});
    VectorXd zero = VectorXd::Zero(1);
    CHECK(model.log_initial(zero) == doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-14));

    VectorXd x_prev(1), x(1);
    x_prev << 2.0;
    x << 1.0; // residual 1 - 0.5*2 = 0
    CHECK(model.log_transition(x, x_prev) == doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-14));
}

TEST_CASE("joint density equals the naive product over t") {
    const ModelDims dims{2, 4};
    const LinearGaussianModel model(kTrue, dims);
    RngStream rng(11, 0);
    MatrixXd x(dims.T, dims.d), y(dims.T, dims.d);
    for (int t = 0; t < dims.T; ++t) {
        for (int j = 0; j < dims.d; ++j) {
            x(t, j) = rng.normal();
            y(t, j) = rng.normal();
        }
    }
    double direct = model.log_initial(x.row(0).transpose());
    for (int t = 0; t < dims.T; ++t) {
        if (t > 0) {
            direct += model.log_transition(x.row(t).transpose(), x.row(t - 1).transpose());
        }
        direct += model.log_observation(y.row(t).transpose(), x.row(t).transpose());
    }
    CHECK(model.log_joint(x, y) == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("non-finite input raises") {
    const LinearGaussianModel model(kTrue, {2, 2});
    VectorXd bad(2);
    bad << 1.0, std::numeric_limits<double>::quiet_NaN();
    VectorXd ok = VectorXd::Zero(2);
    CHECK_THROWS_AS(model.log_initial(bad), std::invalid_argument);
    CHECK_THROWS_AS(model.log_transition(bad, ok), std::invalid_argument);
    CHECK_THROWS_AS(model.log_observation(bad, ok), std::invalid_argument);
}

TEST_CASE("optimal proposal: precision-weighted mean and variance") {
    const LinearGaussianModel model(Theta{0.0, 0.0, 1.0, 1.0}, {1, 2});
    VectorXd x_prev = VectorXd::Zero(1); // A x_prev = 0
    VectorXd y(1);
    y << 2.0;
    CHECK(model.optimal_variance() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(model.optimal_mean(y, x_prev)[0] == doctest::Approx(1.0).epsilon(1e-14));

    VectorXd y0 = VectorXd::Zero(1);
    CHECK(model.log_predictive(y0, x_prev) == doctest::Approx(-0.5 * std::log(4.0 * M_PI)).epsilon(1e-14));
}

TEST_CASE("optimal proposal factorization holds pointwise") {
    const LinearGaussianModel model(kTrue, {3, 2});
    RngStream rng(13, 0);
    for (int trial = 0; trial < 1000; ++trial) {
        VectorXd x_prev(3), x(3), y(3);
        for (int j = 0; j < 3; ++j) {
            x_prev[j] = 2.0 * rng.normal();
            x[j] = 2.0 * rng.normal();
            y[j] = 2.0 * rng.normal();
        }
        const double lhs = model.log_transition(x, x_prev) + model.log_observation(y, x);
        const double rhs = model.log_optimal(y, x_prev, x) + model.log_predictive(y, x_prev);
        CHECK(std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)) < 1e-10);
    }
}

TEST_CASE("kalman: T=1 closed form") {
    const LinearGaussianModel model(kTrue, {1, 1});
    MatrixXd y(1, 1);
    y(0, 0) = 0.0;
    const KalmanResult kf = kalman(model, y);
    CHECK(kf.loglik == doctest::Approx(-0.5 * std::log(4.0 * M_PI)).epsilon(1e-13));
}

TEST_CASE("kalman matches the dense joint-Gaussian evaluation") {
    // d=1, T=3 with explicit stacked covariance.
    const LinearGaussianModel model(kTrue, {1, 3});
    const DataSet data = model.simulate(21);
    const KalmanResult kf = kalman(model, data.y);

    const double a = 0.5, s2 = 1.0, t2 = 1.0;
    Eigen::Matrix3d px;
    double m1 = 1.0;
    double m2 = a * a * m1 + s2;
    double m3 = a * a * m2 + s2;
    px << m1, a * m1, a * a * m1, a * m1, m2, a * m2, a * a * m1, a * m2, m3;
    Eigen::Matrix3d cov = px + t2 * Eigen::Matrix3d::Identity();
    Eigen::Vector3d yv(data.y(0, 0), data.y(1, 0), data.y(2, 0));
    const double dense = -0.5 * (3.0 * std::log(2.0 * M_PI) + std::log(cov.determinant()) +
                                 yv.dot(cov.inverse() * yv));
    CHECK(kf.loglik == doctest::Approx(dense).epsilon(1e-10));
}

TEST_CASE("smoother equals filter at the final time") {
    const LinearGaussianModel model(kTrue, {2, 5});
    const DataSet data = model.simulate(31);
    const KalmanResult kf = kalman(model, data.y);
    CHECK((kf.smoothed.back().mean - kf.filtered.back().mean).cwiseAbs().maxCoeff() == 0.0);
    CHECK((kf.smoothed.back().cov - kf.filtered.back().cov).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("posterior path sampler matches smoother moments") {
    const LinearGaussianModel model(kTrue, {1, 4});
    const DataSet data = model.simulate(41);
    const KalmanResult kf = kalman(model, data.y);
    const int reps = 10000;
    MatrixXd draws(reps, 4);
    RngStream rng(43, 0);
    for (int r = 0; r < reps; ++r) {
        draws.row(r) = sample_posterior_path(model, kf, rng).col(0).transpose();
    }
    for (int t = 0; t < 4; ++t) {
        const double mean = draws.col(t).mean();
        const double var = (draws.col(t).array() - mean).square().sum() / (reps - 1);
        const double m_ref = kf.smoothed[static_cast<std::size_t>(t)].mean[0];
        const double v_ref = kf.smoothed[static_cast<std::size_t>(t)].cov(0, 0);
        CHECK(std::abs(mean - m_ref) < 4.0 * std::sqrt(v_ref / reps));
        CHECK(std::abs(var - v_ref) < 4.0 * v_ref * std::sqrt(2.0 / (reps - 1.0)));
    }
}

TEST_CASE("stationary moments: closed forms and residual") {
    const GaussianMoments m1 = stationary_moments(Theta{0.5, 0.2, 1.0, 1.0}, 1);
    CHECK(m1.cov(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-10));

    const GaussianMoments m0 = stationary_moments(Theta{0.0, 0.0, 2.0, 1.0}, 3);
    CHECK((m0.cov - 4.0 * MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);

    const GaussianMoments m3 = stationary_moments(kTrue, 3);
    const MatrixXd a = build_transition_matrix(0.5, 0.2, 3);
    const MatrixXd res = a * m3.cov * a.transpose() + MatrixXd::Identity(3, 3) - m3.cov;
    CHECK(res.cwiseAbs().maxCoeff() < 1e-10);

    CHECK_THROWS_WITH_AS(stationary_moments(Theta{0.9, 0.5, 1.0, 1.0}, 5), "no stationary distribution",
                         std::runtime_error);
}

TEST_CASE("prior: support, worked density value and normalization") {
    Theta outside = kTrue;
    outside.a0 = 1.5;
    CHECK(log_prior(outside) == -std::numeric_limits<double>::infinity());

    // Inverse-gamma(1, 1/2) density at 1/2 equals 2 e^-1.
    CHECK(std::exp(log_inverse_gamma(0.5, 1.0, 0.5)) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-12));

    // Quadrature along sigma: mass of the inverse-gamma coordinate.
    const int n = 40000;
    const double lo = std::log(1e-5), hi = std::log(5e4), dl = (hi - lo) / (n - 1);
    double mass = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        const double x = std::exp(lo + i * dl);
        mass += w * std::exp(log_inverse_gamma(x, 1.0, 0.5)) * x * dl;
    }
    CHECK(std::abs(mass - 1.0) < 1e-3);
}

TEST_CASE("prior sampler matches the prior CDF coordinate-wise") {
    RngStream rng(53, 0);
    std::vector<double> a0s, sigmas;
    for (int i = 0; i < 20000; ++i) {
        const Theta th = sample_prior(rng);
        CHECK(th.in_prior_support());
        a0s.push_back(th.a0);
        sigmas.push_back(th.sigma);
    }
    CHECK(stat_test::ks_test(a0s, [](double v) { return (v + 1.0) / 2.0; }) > 0.001);
    // Inverse-gamma(1, 1/2) CDF: exp(-scale/x).
    CHECK(stat_test::ks_test(sigmas, [](double v) { return std::exp(-0.5 / v); }) > 0.001);
}

TEST_CASE("dataset CSV round trip") {
    const LinearGaussianModel model(kTrue, {2, 3});
    const DataSet data = model.simulate(61);
    std::stringstream ss;
    data.write_csv(ss);
    const std::string first_line = ss.str().substr(0, ss.str().find('\n'));
    CHECK(first_line == "t,dim,y,x");
    const DataSet back = DataSet::read_csv(ss);
    CHECK((back.y - data.y).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((back.x_true - data.x_true).cwiseAbs().maxCoeff() < 1e-15);

    // Row count is T*d.
    std::stringstream ss2;
    data.write_csv(ss2);
    int rows = -1; // discount header
    std::string line;
    while (std::getline(ss2, line)) {
        if (!line.empty()) {
            ++rows;
        }
    }
    CHECK(rows == 6);
}
