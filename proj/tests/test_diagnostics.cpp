#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pmcmc/diagnostics.hpp"
#include "pmcmc/rng.hpp"

using namespace pmcmc;
using Eigen::VectorXd;

TEST_CASE("ess: uniform, point mass and the 8/3 example") {
    CHECK(diagnostics::ess(VectorXd::Constant(100, 0.01)) == doctest::Approx(100.0).epsilon(1e-12));

    VectorXd point = VectorXd::Zero(10);
    point[4] = 1.0;
    CHECK(diagnostics::ess(point) == doctest::Approx(1.0).epsilon(1e-12));

    VectorXd w(3);
    w << 0.5, 0.25, 0.25;
    CHECK(diagnostics::ess(w) == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("acf: lag zero is one and alternating series hits -1 + 1/M") {
    RngStream rng(3, 0);
    VectorXd noise(500);
    for (int i = 0; i < 500; ++i) {
        noise[i] = rng.normal();
    }
    CHECK(diagnostics::acf(noise, 10)[0] == doctest::Approx(1.0).epsilon(1e-14));

    const int m = 1000;
    VectorXd alt(m);
    for (int i = 0; i < m; ++i) {
        alt[i] = i % 2 == 0 ? 1.0 : -1.0;
    }
    const VectorXd r = diagnostics::acf(alt, 1);
    CHECK(r[1] == doctest::Approx(-1.0 + 1.0 / m).epsilon(1e-12));
}

TEST_CASE("acf: white noise decorrelates at the 1/sqrt(M) scale") {
    RngStream rng(5, 0);
    const int m = 100000;
    VectorXd noise(m);
    for (int i = 0; i < m; ++i) {
        noise[i] = rng.normal();
    }
    CHECK(std::abs(diagnostics::acf(noise, 1)[1]) < 0.02);
}

TEST_CASE("acf: constant series is an error") {
    CHECK_THROWS_AS(diagnostics::acf(VectorXd::Constant(50, 2.5), 3), std::invalid_argument);
    CHECK_THROWS_AS(diagnostics::acf(VectorXd::Constant(50, 0.0), 60), std::invalid_argument);
}

TEST_CASE("kde: forced bandwidth on a repeated value is the kernel itself") {
    VectorXd samples = VectorXd::Constant(20, 1.5);
    VectorXd grid(5);
    grid << 0.5, 1.0, 1.5, 2.0, 2.5;
    const double h = 0.3;
    const VectorXd density = diagnostics::kde(samples, grid, h);
    for (int g = 0; g < 5; ++g) {
        const double z = (grid[g] - 1.5) / h;
        const double expected = std::exp(-0.5 * z * z) / (h * std::sqrt(2.0 * M_PI));
        CHECK(density[g] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("kde of standard-normal samples approaches the true density") {
    RngStream rng(7, 0);
    const int m = 100000;
    VectorXd samples(m);
    for (int i = 0; i < m; ++i) {
        samples[i] = rng.normal();
    }
    VectorXd grid(161);
    for (int g = 0; g < 161; ++g) {
        grid[g] = -4.0 + g * 0.05;
    }
    const VectorXd density = diagnostics::kde(samples, grid);
    double worst = 0.0;
    double mass = 0.0;
    for (int g = 0; g < 161; ++g) {
        const double phi = std::exp(-0.5 * grid[g] * grid[g]) / std::sqrt(2.0 * M_PI);
        worst = std::max(worst, std::abs(density[g] - phi));
        mass += density[g] * 0.05 * ((g == 0 || g == 160) ? 0.5 : 1.0);
    }
    CHECK(worst < 0.01);
    CHECK(mass > 0.99);
    CHECK(mass < 1.01);
}

TEST_CASE("integrated autocorrelation time: white noise is about one, ar(1) is larger") {
    RngStream rng(9, 0);
    const int m = 50000;
    VectorXd noise(m), ar(m);
    double prev = 0.0;
    for (int i = 0; i < m; ++i) {
        noise[i] = rng.normal();
        prev = 0.9 * prev + rng.normal();
        ar[i] = prev;
    }
    CHECK(diagnostics::integrated_autocorr_time(noise) < 1.5);
    // Theoretical IACT of AR(1) with phi = 0.9 is (1+phi)/(1-phi) = 19.
    const double tau = diagnostics::integrated_autocorr_time(ar);
    CHECK(tau > 10.0);
    CHECK(tau < 30.0);
}

TEST_CASE("csv writers emit the documented headers") {
    std::stringstream acf_out, kde_out, ess_out;
    VectorXd r(3);
    r << 1.0, 0.5, 0.2;
    diagnostics::write_acf_csv(acf_out, r);
    CHECK(acf_out.str().substr(0, 8) == "lag,acf\n");

    VectorXd grid(2), density(2);
    grid << 0.0, 1.0;
    density << 0.4, 0.3;
    diagnostics::write_kde_csv(kde_out, grid, density);
    CHECK(kde_out.str().substr(0, 13) == "grid,density\n");

    VectorXd ess(2);
    ess << 10.0, 9.5;
    diagnostics::write_ess_csv(ess_out, ess);
    CHECK(ess_out.str().substr(0, 6) == "t,ess\n");
}
