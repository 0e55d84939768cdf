#include "pmcmc/kalman.hpp"

#include <cmath>
#include <stdexcept>

namespace pmcmc {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// log N(x; mean, cov) via a Cholesky factor; throws if cov is not PD.
double log_mvn(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
               const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error(std::string(what) + ": covariance not positive definite");
    }
    const Eigen::MatrixXd l = llt.matrixL();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
        log_det += 2.0 * std::log(l(i, i));
    }
    const Eigen::VectorXd z = l.triangularView<Eigen::Lower>().solve(x - mean);
    return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + log_det + z.squaredNorm());
}

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, RngStream& rng) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    Eigen::MatrixXd l;
    if (llt.info() == Eigen::Success) {
        l = llt.matrixL();
    } else {
        // Smoothing covariances can be singular-at-round-off; fall back to an
        // eigen factorization with clipped eigenvalues.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        l = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }
    Eigen::VectorXd z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        z[i] = rng.normal();
    }
    return mean + l * z;
}

} // namespace

KalmanResult kalman(const LinearGaussianModel& model, const Eigen::MatrixXd& y) {
    const int d = model.d();
    const int T = static_cast<int>(y.rows());
    if (y.cols() != d) {
        throw std::invalid_argument("kalman: observation dimension mismatch");
    }
    const Eigen::MatrixXd a = model.transition_matrix();
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
    const double s2 = model.theta().sigma * model.theta().sigma;
    const double t2 = model.theta().tau * model.theta().tau;

    KalmanResult out;
    out.predicted.resize(T);
    out.filtered.resize(T);
    out.smoothed.resize(T);

    Eigen::VectorXd m = Eigen::VectorXd::Zero(d); // m0
    Eigen::MatrixXd p = eye;                      // C0
    for (int t = 0; t < T; ++t) {
        if (t > 0) {
            m = a * out.filtered[t - 1].mean;
            p = a * out.filtered[t - 1].cov * a.transpose() + s2 * eye;
        }
        out.predicted[t] = {m, p};

        const Eigen::VectorXd yt = y.row(t).transpose();
        const Eigen::MatrixXd innov_cov = p + t2 * eye;
        out.loglik += log_mvn(yt, m, innov_cov, "kalman innovation");

        Eigen::LLT<Eigen::MatrixXd> llt(innov_cov);
        const Eigen::MatrixXd gain = llt.solve(p).transpose(); // P S^-1 (symmetric S)
        const Eigen::VectorXd mf = m + gain * (yt - m);
        Eigen::MatrixXd pf = (eye - gain) * p;
        pf = 0.5 * (pf + pf.transpose());
        out.filtered[t] = {mf, pf};
    }

    out.smoothed[T - 1] = out.filtered[T - 1];
    for (int t = T - 2; t >= 0; --t) {
        const Eigen::MatrixXd& pp = out.predicted[t + 1].cov;
        const Eigen::MatrixXd g =
            pp.ldlt().solve(a * out.filtered[t].cov).transpose(); // P_f A^T P_pred^-1
        const Eigen::VectorXd ms =
            out.filtered[t].mean + g * (out.smoothed[t + 1].mean - out.predicted[t + 1].mean);
        Eigen::MatrixXd ps =
            out.filtered[t].cov + g * (out.smoothed[t + 1].cov - pp) * g.transpose();
        ps = 0.5 * (ps + ps.transpose());
        out.smoothed[t] = {ms, ps};
    }
    return out;
}

Eigen::MatrixXd sample_posterior_path(const LinearGaussianModel& model, const KalmanResult& kf, RngStream& rng) {
    const int T = static_cast<int>(kf.filtered.size());
    const int d = model.d();
    const Eigen::MatrixXd a = model.transition_matrix();
    Eigen::MatrixXd path(T, d);

    Eigen::VectorXd x = sample_mvn(kf.filtered[T - 1].mean, kf.filtered[T - 1].cov, rng);
    path.row(T - 1) = x.transpose();
    for (int t = T - 2; t >= 0; --t) {
        const Eigen::MatrixXd& pp = kf.predicted[t + 1].cov;
        const Eigen::MatrixXd g = pp.ldlt().solve(a * kf.filtered[t].cov).transpose();
        const Eigen::VectorXd mean =
            kf.filtered[t].mean + g * (x - kf.predicted[t + 1].mean);
        Eigen::MatrixXd cov = kf.filtered[t].cov - g * pp * g.transpose();
        cov = 0.5 * (cov + cov.transpose());
        x = sample_mvn(mean, cov, rng);
        path.row(t) = x.transpose();
    }
    return path;
}

} // namespace pmcmc
