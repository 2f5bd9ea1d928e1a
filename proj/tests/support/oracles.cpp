#include "support/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace uq::test {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double log_normal_pdf(double y, double mean, double var) {
    const double d = y - mean;
    return -0.5 * std::log(2.0 * kPi * var) - d * d / (2.0 * var);
}

}  // namespace

GaussHermite gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        const double b = std::sqrt(static_cast<double>(i) / 2.0);
        jacobi(i, i - 1) = b;
        jacobi(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    GaussHermite gh;
    gh.nodes = eig.eigenvalues();
    gh.weights.resize(n);
    const double sqrt_pi = std::sqrt(kPi);
    for (int i = 0; i < n; ++i) {
        const double v0 = eig.eigenvectors()(0, i);
        gh.weights[i] = sqrt_pi * v0 * v0;
    }
    return gh;
}

double gh_expected_loglik(double y, double mu, double v, double noise_var,
                          const GaussHermite& gh) {
    const double scale = std::sqrt(2.0 * std::max(v, 0.0));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < gh.nodes.size(); ++i) {
        const double f = mu + scale * gh.nodes[i];
        acc += gh.weights[i] * log_normal_pdf(y, f, noise_var);
    }
    return acc / std::sqrt(kPi);
}

double dense_kl(const Vector& m_q, const Matrix& s_q, const Vector& m_p, const Matrix& s_p) {
    const Eigen::Index m = m_q.size();
    const Matrix p_inv = s_p.inverse();
    const Vector diff = m_p - m_q;
    const double trace = (p_inv * s_q).trace();
    const double quad = diff.dot(p_inv * diff);
    const double logdet_p = std::log(s_p.determinant());
    const double logdet_q = std::log(s_q.determinant());
    return 0.5 * (trace + quad - static_cast<double>(m) + logdet_p - logdet_q);
}

double rbf_oracle(const Vector& x1, const Vector& x2, double lengthscale, double outputscale) {
    double sq = 0.0;
    for (Eigen::Index d = 0; d < x1.size(); ++d) {
        const double diff = x1[d] - x2[d];
        sq += diff * diff;
    }
    return outputscale * std::exp(-sq / (2.0 * lengthscale * lengthscale));
}

double elbo_oracle(const SVGPState& state, const Matrix& batch_x, const Vector& batch_y,
                   const Vector& batch_w, std::size_t n_total) {
    const Eigen::Index m = state.inducing.rows();
    const Eigen::Index b = batch_x.rows();
    const double ell = state.kernel.lengthscale();
    const double s2 = state.kernel.outputscale();
    const double noise = state.noise();

    Matrix k_hat(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            k_hat(i, j) = rbf_oracle(state.inducing.row(i).transpose(),
                                     state.inducing.row(j).transpose(), ell, s2);
    k_hat.diagonal().array() += kInducingJitter;
    const Matrix k_inv = k_hat.inverse();

    const Matrix s = state.var_chol * state.var_chol.transpose();
    const GaussHermite gh = gauss_hermite(40);

    double lik = 0.0;
    for (Eigen::Index i = 0; i < b; ++i) {
        Vector kx(m);
        for (Eigen::Index j = 0; j < m; ++j)
            kx[j] = rbf_oracle(batch_x.row(i).transpose(), state.inducing.row(j).transpose(),
                               ell, s2);
        const Vector alpha = k_inv * kx;
        const double mu = state.mean.constant + alpha.dot(state.var_mean);
        const double v = s2 - alpha.dot(kx) + alpha.dot(s * alpha);
        lik += batch_w[i] * gh_expected_loglik(batch_y[i], mu, v, noise, gh);
    }
    lik *= static_cast<double>(n_total) / static_cast<double>(b);

    const Vector zero = Vector::Zero(m);
    return lik - dense_kl(state.var_mean, s, zero, k_hat);
}

double exact_gp_evidence(const Matrix& x, const Vector& y, const KernelHyper& kernel,
                         double constant, double noise_var) {
    const Eigen::Index n = x.rows();
    const double ell = kernel.lengthscale();
    const double s2 = kernel.outputscale();
    Matrix k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            k(i, j) = rbf_oracle(x.row(i).transpose(), x.row(j).transpose(), ell, s2);
    k.diagonal().array() += noise_var;

    const Eigen::LLT<Eigen::MatrixXd> llt{Eigen::MatrixXd(k)};
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("exact_gp_evidence: covariance not positive definite");
    const Vector resid = y.array() - constant;
    const Vector alpha = llt.solve(resid);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
    return -0.5 * resid.dot(alpha) - 0.5 * logdet -
           0.5 * static_cast<double>(n) * std::log(2.0 * kPi);
}

void optimal_variational(SVGPState& state, const Matrix& x, const Vector& y) {
    const Eigen::Index m = state.inducing.rows();
    const Eigen::Index n = x.rows();
    const double ell = state.kernel.lengthscale();
    const double s2 = state.kernel.outputscale();
    const double noise = state.noise();

    Matrix k_hat(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            k_hat(i, j) = rbf_oracle(state.inducing.row(i).transpose(),
                                     state.inducing.row(j).transpose(), ell, s2);
    k_hat.diagonal().array() += kInducingJitter;

    Matrix k_mn(m, n);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            k_mn(i, j) = rbf_oracle(state.inducing.row(i).transpose(), x.row(j).transpose(),
                                    ell, s2);

    const Matrix k_inv = k_hat.inverse();
    const Matrix a = k_inv * k_mn;
    const Vector resid = y.array() - state.mean.constant;
    const Matrix s_star = (k_inv + a * a.transpose() / noise).inverse();
    const Vector m_star = s_star * (a * resid) / noise;

    const Eigen::LLT<Eigen::MatrixXd> llt{Eigen::MatrixXd(s_star)};
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("optimal_variational: optimum covariance not positive definite");
    state.var_mean = m_star;
    state.var_chol = Matrix(llt.matrixL());
}

double trapz(const Vector& x, const Vector& y) {
    double acc = 0.0;
    for (Eigen::Index i = 1; i < x.size(); ++i)
        acc += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    return acc;
}

double max_rel_fd_error(const std::function<double(const Vector&)>& f, const Vector& x0,
                        const Vector& analytic, double h, double abs_skip) {
    double worst = 0.0;
    Vector x = x0;
    for (Eigen::Index j = 0; j < x0.size(); ++j) {
        x[j] = x0[j] + h;
        const double up = f(x);
        x[j] = x0[j] - h;
        const double down = f(x);
        x[j] = x0[j];
        const double fd = (up - down) / (2.0 * h);
        const double err = std::abs(fd - analytic[j]);
        if (err <= abs_skip) continue;
        const double denom = std::max(std::abs(fd), std::abs(analytic[j]));
        worst = std::max(worst, err / std::max(denom, abs_skip));
    }
    return worst;
}

}  // namespace uq::test
