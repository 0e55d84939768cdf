#include "pmcmc/model.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pmcmc {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_finite(const Eigen::VectorXd& v, const char* what) {
    if (!v.allFinite()) {
        throw std::invalid_argument(std::string("non-finite input to ") + what);
    }
}

Eigen::VectorXd gaussian_vector(int d, RngStream& rng) {
    Eigen::VectorXd z(d);
    for (int i = 0; i < d; ++i) {
        z[i] = rng.normal();
    }
    return z;
}

} // namespace

namespace density {

double log_iso_normal(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, double var) {
    const double d = static_cast<double>(x.size());
    return -0.5 * d * (kLog2Pi + std::log(var)) - (x - mean).squaredNorm() / (2.0 * var);
}

} // namespace density

void GaussianMoments::validate() const {
    if (cov.rows() != cov.cols() || mean.size() != cov.rows()) {
        throw std::invalid_argument("GaussianMoments: inconsistent shapes");
    }
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
        throw std::invalid_argument("GaussianMoments: covariance not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) {
        throw std::invalid_argument("GaussianMoments: covariance not positive semi-definite");
    }
}

Eigen::MatrixXd build_transition_matrix(double a0, double a1, int d) {
    if (d < 1) {
        throw std::invalid_argument("build_transition_matrix: d must be >= 1");
    }
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        a(i, i) = a0;
        if (i + 1 < d) {
            a(i, i + 1) = a1;
            a(i + 1, i) = a1;
        }
    }
    return a;
}

LinearGaussianModel::LinearGaussianModel(const Theta& theta, const ModelDims& dims)
    : theta_(theta), dims_(dims) {
    if (dims.d < 1 || dims.T < 1) {
        throw std::invalid_argument("ModelDims: d and T must be positive");
    }
    if (!(theta.sigma > 0.0) || !(theta.tau > 0.0)) {
        throw std::invalid_argument("Theta: sigma and tau must be positive");
    }
    const double s2 = theta.sigma * theta.sigma;
    const double t2 = theta.tau * theta.tau;
    opt_var_ = s2 * t2 / (s2 + t2);
    opt_var_init_ = t2 / (1.0 + t2); // C0 = I
}

Eigen::VectorXd LinearGaussianModel::apply_transition(const Eigen::VectorXd& x) const {
    const int d = dims_.d;
    Eigen::VectorXd out = theta_.a0 * x;
    if (d > 1 && theta_.a1 != 0.0) {
        out.head(d - 1) += theta_.a1 * x.tail(d - 1);
        out.tail(d - 1) += theta_.a1 * x.head(d - 1);
    }
    return out;
}

DataSet LinearGaussianModel::simulate(std::uint64_t seed) const {
    RngStream rng(seed);
    DataSet data;
    data.seed = seed;
    data.x_true.resize(dims_.T, dims_.d);
    data.y.resize(dims_.T, dims_.d);
    Eigen::VectorXd x = sample_initial(rng);
    for (int t = 0; t < dims_.T; ++t) {
        if (t > 0) {
            x = sample_transition(x, rng);
        }
        data.x_true.row(t) = x.transpose();
        data.y.row(t) = sample_observation(x, rng).transpose();
    }
    return data;
}

Eigen::VectorXd LinearGaussianModel::sample_initial(RngStream& rng) const {
    return gaussian_vector(dims_.d, rng); // m0 = 0, C0 = I
}

Eigen::VectorXd LinearGaussianModel::sample_transition(const Eigen::VectorXd& x_prev, RngStream& rng) const {
    return apply_transition(x_prev) + theta_.sigma * gaussian_vector(dims_.d, rng);
}

Eigen::VectorXd LinearGaussianModel::sample_observation(const Eigen::VectorXd& x, RngStream& rng) const {
    return x + theta_.tau * gaussian_vector(dims_.d, rng);
}

double LinearGaussianModel::log_initial(const Eigen::VectorXd& x1) const {
    require_finite(x1, "log_initial");
    const double d = static_cast<double>(dims_.d);
    return -0.5 * d * kLog2Pi - 0.5 * x1.squaredNorm();
}

double LinearGaussianModel::log_transition(const Eigen::VectorXd& x, const Eigen::VectorXd& x_prev) const {
    require_finite(x, "log_transition");
    require_finite(x_prev, "log_transition");
    return density::log_iso_normal(x, apply_transition(x_prev), theta_.sigma * theta_.sigma);
}

double LinearGaussianModel::log_observation(const Eigen::VectorXd& y, const Eigen::VectorXd& x) const {
    require_finite(y, "log_observation");
    require_finite(x, "log_observation");
    return density::log_iso_normal(y, x, theta_.tau * theta_.tau);
}

double LinearGaussianModel::log_joint(const Eigen::MatrixXd& x_path, const Eigen::MatrixXd& y) const {
    if (x_path.rows() != y.rows() || x_path.cols() != dims_.d || y.cols() != dims_.d) {
        throw std::invalid_argument("log_joint: path/observation shapes disagree");
    }
    double acc = log_initial(x_path.row(0).transpose());
    for (Eigen::Index t = 0; t < x_path.rows(); ++t) {
        if (t > 0) {
            acc += log_transition(x_path.row(t).transpose(), x_path.row(t - 1).transpose());
        }
        acc += log_observation(y.row(t).transpose(), x_path.row(t).transpose());
    }
    return acc;
}

Eigen::VectorXd LinearGaussianModel::optimal_mean(const Eigen::VectorXd& y, const Eigen::VectorXd& x_prev) const {
    const double s2 = theta_.sigma * theta_.sigma;
    const double t2 = theta_.tau * theta_.tau;
    return opt_var_ * (apply_transition(x_prev) / s2 + y / t2);
}

Eigen::VectorXd LinearGaussianModel::sample_optimal(const Eigen::VectorXd& y, const Eigen::VectorXd& x_prev,
                                                    RngStream& rng) const {
    return optimal_mean(y, x_prev) + std::sqrt(opt_var_) * gaussian_vector(dims_.d, rng);
}

double LinearGaussianModel::log_optimal(const Eigen::VectorXd& y, const Eigen::VectorXd& x_prev,
                                        const Eigen::VectorXd& x) const {
    require_finite(x, "log_optimal");
    return density::log_iso_normal(x, optimal_mean(y, x_prev), opt_var_);
}

double LinearGaussianModel::log_predictive(const Eigen::VectorXd& y, const Eigen::VectorXd& x_prev) const {
    require_finite(y, "log_predictive");
    require_finite(x_prev, "log_predictive");
    const double s2 = theta_.sigma * theta_.sigma;
    const double t2 = theta_.tau * theta_.tau;
    return density::log_iso_normal(y, apply_transition(x_prev), s2 + t2);
}

Eigen::VectorXd LinearGaussianModel::sample_initial_posterior(const Eigen::VectorXd& y1, RngStream& rng) const {
    const double t2 = theta_.tau * theta_.tau;
    const Eigen::VectorXd mean = (opt_var_init_ / t2) * y1;
    return mean + std::sqrt(opt_var_init_) * gaussian_vector(dims_.d, rng);
}

double LinearGaussianModel::log_initial_posterior(const Eigen::VectorXd& y1, const Eigen::VectorXd& x) const {
    require_finite(x, "log_initial_posterior");
    const double t2 = theta_.tau * theta_.tau;
    const Eigen::VectorXd mean = (opt_var_init_ / t2) * y1;
    return density::log_iso_normal(x, mean, opt_var_init_);
}

double LinearGaussianModel::log_predictive_initial(const Eigen::VectorXd& y1) const {
    require_finite(y1, "log_predictive_initial");
    const double t2 = theta_.tau * theta_.tau;
    return density::log_iso_normal(y1, Eigen::VectorXd::Zero(dims_.d), 1.0 + t2);
}

GaussianMoments stationary_moments(const Theta& theta, int d) {
    const Eigen::MatrixXd a = build_transition_matrix(theta.a0, theta.a1, d);
    // Spectral radius of the symmetric banded A.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().cwiseAbs().maxCoeff() >= 1.0) {
        throw std::runtime_error("no stationary distribution");
    }
    const double s2 = theta.sigma * theta.sigma;
    Eigen::MatrixXd sigma = s2 * Eigen::MatrixXd::Identity(d, d);
    for (int it = 0; it < 100000; ++it) {
        Eigen::MatrixXd next = a * sigma * a.transpose() + s2 * Eigen::MatrixXd::Identity(d, d);
        const double delta = (next - sigma).cwiseAbs().maxCoeff();
        sigma = next;
        if (delta < 1e-12) {
            break;
        }
    }
    GaussianMoments out;
    out.mean = Eigen::VectorXd::Zero(d);
    out.cov = 0.5 * (sigma + sigma.transpose());
    return out;
}

double log_inverse_gamma(double x, double shape, double scale) {
    if (!(x > 0.0)) {
        return kNegInf;
    }
    return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

double log_prior(const Theta& theta) {
    if (!theta.in_prior_support()) {
        return kNegInf;
    }
    const double log_half = std::log(0.5);
    return 2.0 * log_half + log_inverse_gamma(theta.sigma, 1.0, 0.5) + log_inverse_gamma(theta.tau, 1.0, 0.5);
}

Theta sample_prior(RngStream& rng) {
    Theta theta;
    theta.a0 = 2.0 * rng.uniform() - 1.0;
    theta.a1 = 2.0 * rng.uniform() - 1.0;
    // Inverse-gamma(1, scale): scale / Exponential(1).
    auto draw_ig = [&rng]() {
        double u = 0.0;
        do {
            u = rng.uniform();
        } while (u <= 0.0);
        return 0.5 / (-std::log(u));
    };
    theta.sigma = draw_ig();
    theta.tau = draw_ig();
    return theta;
}

void DataSet::write_csv(std::ostream& os) const {
    const bool with_x = has_states();
    os << (with_x ? "t,dim,y,x\n" : "t,dim,y\n");
    for (Eigen::Index t = 0; t < y.rows(); ++t) {
        for (Eigen::Index j = 0; j < y.cols(); ++j) {
            os << (t + 1) << ',' << (j + 1) << ',';
            os.precision(17);
            os << y(t, j);
            if (with_x) {
                os << ',' << x_true(t, j);
            }
            os << '\n';
        }
    }
}

DataSet DataSet::read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw std::runtime_error("DataSet::read_csv: empty input");
    }
    const bool with_x = line.find(",x") != std::string::npos;
    struct Row {
        int t, dim;
        double y, x;
    };
    std::vector<Row> rows;
    int max_t = 0, max_dim = 0;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream ss(line);
        Row r{};
        char c = 0;
        ss >> r.t >> c >> r.dim >> c >> r.y;
        if (with_x) {
            ss >> c >> r.x;
        }
        if (!ss) {
            throw std::runtime_error("DataSet::read_csv: malformed row: " + line);
        }
        max_t = std::max(max_t, r.t);
        max_dim = std::max(max_dim, r.dim);
        rows.push_back(r);
    }
    DataSet data;
    data.y.setZero(max_t, max_dim);
    if (with_x) {
        data.x_true.setZero(max_t, max_dim);
    }
    for (const Row& r : rows) {
        data.y(r.t - 1, r.dim - 1) = r.y;
        if (with_x) {
            data.x_true(r.t - 1, r.dim - 1) = r.x;
        }
    }
    return data;
}

} // namespace pmcmc
