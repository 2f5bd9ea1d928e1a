#include "uq/svgp.hpp"

#include <cmath>

namespace uq {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;
constexpr double kVarianceFloor = 1e-12;

void check_chol_factor(const Matrix& l, const char* who) {
    if (l.rows() != l.cols()) throw BadConfig(std::string(who) + ": factor must be square");
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
        if (l(i, i) == 0.0) throw SingularTriangular(std::string(who) + ": zero diagonal");
        if (l(i, i) < 0.0) throw BadConfig(std::string(who) + ": negative diagonal");
    }
}

double log_det_from_chol(const Matrix& l) {
    return 2.0 * l.diagonal().array().log().sum();
}

struct ElboWorkspace {
    // Factorization of K = K_MM + jitter*I and everything the gradient reuses.
    Matrix k_raw;      // M x M kernel matrix without jitter
    Matrix r2_mm;      // pairwise squared distances among inducing rows
    Matrix l_k;        // chol(K)
    Matrix k_mb;       // M x B cross kernel
    Matrix r2_mb;      // M x B squared distances
    Matrix a;          // K^-1 k_mb
    Matrix sa;         // S * a
    Matrix u;          // K^-1 S a
    Vector beta;       // K^-1 m
    Vector mu;         // latent means per batch row
    Vector v;          // latent variances per batch row
    double kl = 0.0;
};

ElboWorkspace elbo_forward(const SVGPState& state, const Matrix& batch_x) {
    ElboWorkspace ws;
    const double l2 = std::exp(2.0 * state.kernel.log_lengthscale);
    const double s = state.kernel.outputscale();

    ws.r2_mm = squared_distances(state.inducing, state.inducing);
    ws.k_raw = s * (-ws.r2_mm / (2.0 * l2)).array().exp();
    Matrix k = ws.k_raw;
    k.diagonal().array() += kInducingJitter;
    ws.l_k = cholesky(k, {0.0}).l;

    ws.r2_mb = squared_distances(state.inducing, batch_x);
    ws.k_mb = s * (-ws.r2_mb / (2.0 * l2)).array().exp();

    ws.beta = tri_solve(ws.l_k, tri_solve(ws.l_k, state.var_mean), true);
    ws.a = tri_solve(ws.l_k, tri_solve(ws.l_k, ws.k_mb), true);

    const Matrix s_mat = state.var_chol * state.var_chol.transpose();
    ws.sa = s_mat * ws.a;
    ws.u = tri_solve(ws.l_k, tri_solve(ws.l_k, ws.sa), true);

    ws.mu = (ws.k_mb.transpose() * ws.beta).array() + state.mean.constant;
    ws.v = Vector::Constant(batch_x.rows(), s) -
           ws.k_mb.cwiseProduct(ws.a).colwise().sum().transpose() +
           ws.a.cwiseProduct(ws.sa).colwise().sum().transpose();

    ws.kl = kl_gaussians(state.var_mean, state.var_chol,
                         Vector::Zero(state.var_mean.size()), ws.l_k);
    return ws;
}

void check_batch(const SVGPState& state, const Matrix& batch_x, const Vector& batch_y,
                 const Vector& batch_w, std::size_t n_total) {
    state.validate();
    if (batch_x.rows() < 1) throw BadConfig("elbo: batch must be nonempty");
    if (batch_x.rows() != batch_y.size() || batch_x.rows() != batch_w.size()) {
        throw BadConfig("elbo: batch field sizes disagree");
    }
    if (batch_x.cols() != state.inducing.cols()) {
        throw BadConfig("elbo: feature dimension mismatch");
    }
    if ((batch_w.array() < 0.0).any()) throw BadConfig("elbo: negative sample weight");
    if (n_total < static_cast<std::size_t>(batch_x.rows())) {
        throw BadConfig("elbo: n_total smaller than the batch");
    }
}

}  // namespace

double SVGPState::noise() const { return std::exp(log_noise); }

void SVGPState::validate() const {
    if (inducing.rows() < 1) throw BadConfig("SVGPState: need at least one inducing point");
    if (var_mean.size() != inducing.rows() || var_chol.rows() != inducing.rows() ||
        var_chol.cols() != inducing.rows()) {
        throw BadConfig("SVGPState: variational shapes disagree with inducing count");
    }
    if (!inducing.allFinite() || !var_mean.allFinite() || !var_chol.allFinite() ||
        !std::isfinite(kernel.log_lengthscale) || !std::isfinite(kernel.log_outputscale) ||
        !std::isfinite(mean.constant) || !std::isfinite(log_noise)) {
        throw BadConfig("SVGPState: non-finite parameter");
    }
    if (!(var_chol.diagonal().array() > 0.0).all()) {
        throw BadConfig("SVGPState: var_chol diagonal must be strictly positive");
    }
}

double kl_gaussians(const Vector& m_q, const Matrix& l_q, const Vector& m_p,
                    const Matrix& l_p) {
    if (m_q.size() != m_p.size() || l_q.rows() != m_q.size() || l_p.rows() != m_p.size()) {
        throw BadConfig("kl_gaussians: inconsistent shapes");
    }
    check_chol_factor(l_q, "kl_gaussians");
    check_chol_factor(l_p, "kl_gaussians");

    const Matrix w = tri_solve(l_p, l_q);            // tr(S_p^-1 S_q) = ||W||_F^2
    const Vector z = tri_solve(l_p, (m_p - m_q).eval());
    const double trace = w.squaredNorm();
    const double quad = z.squaredNorm();
    const double kl = 0.5 * (trace + quad - static_cast<double>(m_q.size()) +
                             log_det_from_chol(l_p) - log_det_from_chol(l_q));
    return std::max(kl, 0.0);
}

std::pair<Vector, Vector> svgp_predict_batch(const SVGPState& state, const Matrix& xs) {
    state.validate();
    if (xs.cols() != state.inducing.cols()) {
        throw BadConfig("svgp_predict: feature dimension mismatch");
    }
    const ElboWorkspace ws = elbo_forward(state, xs);
    Vector vars = ws.v.cwiseMax(kVarianceFloor);
    return {ws.mu, std::move(vars)};
}

GaussianPrediction svgp_predict(const SVGPState& state, const Vector& x) {
    Matrix xs(1, x.size());
    xs.row(0) = x;
    auto [means, vars] = svgp_predict_batch(state, xs);
    return {means[0], vars[0]};
}

double elbo(const SVGPState& state, const Matrix& batch_x, const Vector& batch_y,
            const Vector& batch_w, std::size_t n_total) {
    check_batch(state, batch_x, batch_y, batch_w, n_total);
    const ElboWorkspace ws = elbo_forward(state, batch_x);
    const double nu = state.noise();
    const double scale = static_cast<double>(n_total) / static_cast<double>(batch_x.rows());

    double lik = 0.0;
    for (Eigen::Index i = 0; i < batch_x.rows(); ++i) {
        const double diff = batch_y[i] - ws.mu[i];
        lik += batch_w[i] * (-0.5 * (kLogTwoPi + std::log(nu)) -
                             (diff * diff + ws.v[i]) / (2.0 * nu));
    }
    return scale * lik - ws.kl;
}

SVGPGrad elbo_grad(const SVGPState& state, const Matrix& batch_x, const Vector& batch_y,
                   const Vector& batch_w, std::size_t n_total) {
    check_batch(state, batch_x, batch_y, batch_w, n_total);
    const ElboWorkspace ws = elbo_forward(state, batch_x);

    const auto m = state.inducing.rows();
    const auto b = batch_x.rows();
    const double nu = state.noise();
    const double l2 = std::exp(2.0 * state.kernel.log_lengthscale);
    const double s = state.kernel.outputscale();
    const double scale = static_cast<double>(n_total) / static_cast<double>(b);

    // Per-row weights of d(-ELBO)/d mu_i and d(-ELBO)/d v_i.
    Vector c_mu(b), c_v(b);
    for (Eigen::Index i = 0; i < b; ++i) {
        c_mu[i] = -scale * batch_w[i] * (batch_y[i] - ws.mu[i]) / nu;
        c_v[i] = scale * batch_w[i] / (2.0 * nu);
    }

    SVGPGrad g;
    g.constant = c_mu.sum();
    g.var_mean = ws.a * c_mu + ws.beta;

    // d(-ELBO)/d log_noise, from the expected log-likelihood only.
    double d_log_noise = 0.0;
    for (Eigen::Index i = 0; i < b; ++i) {
        const double diff = batch_y[i] - ws.mu[i];
        d_log_noise -= scale * batch_w[i] *
                       (-0.5 + (diff * diff + ws.v[i]) / (2.0 * nu));
    }
    g.log_noise = d_log_noise;

    // Var-chol gradient: likelihood part 2 (A diag(c_v) A^T) L, KL part K^-1 L - diag(1/L_ii).
    const Matrix g_a = ws.a * c_v.asDiagonal() * ws.a.transpose();
    const Matrix k_inv = tri_solve(ws.l_k, tri_solve(ws.l_k, Matrix(Matrix::Identity(m, m))), true);
    Matrix d_chol = 2.0 * g_a * state.var_chol + k_inv * state.var_chol;
    d_chol.diagonal() -= state.var_chol.diagonal().cwiseInverse();
    g.var_chol = d_chol.triangularView<Eigen::Lower>();

    // Adjoint of the cross-kernel matrix k_mb (columns k_i).
    const Matrix g_kmb = ws.beta * c_mu.transpose() +
                         2.0 * (ws.u - ws.a) * c_v.asDiagonal();

    // Adjoint of K, combining likelihood and KL contributions.
    const Matrix t_kl = tri_solve(ws.l_k, tri_solve(ws.l_k, state.var_chol), true);
    const Matrix p = t_kl * t_kl.transpose();  // K^-1 S K^-1
    Matrix g_k = -(ws.a * c_mu) * ws.beta.transpose() + g_a -
                 ws.a * c_v.asDiagonal() * ws.u.transpose() -
                 ws.u * c_v.asDiagonal() * ws.a.transpose() +
                 0.5 * (k_inv - p - ws.beta * ws.beta.transpose());

    // Chain through the kernel: d k / d log(sigma_k^2) = k, d k / d log(l) = k r^2 / l^2,
    // d k(z_a, x) / d z_a = k (x - z_a) / l^2.
    g.log_outputscale = g_k.cwiseProduct(ws.k_raw).sum() +
                        g_kmb.cwiseProduct(ws.k_mb).sum() + s * c_v.sum();
    g.log_lengthscale = (g_k.cwiseProduct(ws.k_raw).cwiseProduct(ws.r2_mm).sum() +
                         g_kmb.cwiseProduct(ws.k_mb).cwiseProduct(ws.r2_mb).sum()) /
                        l2;

    const Matrix w_k = (g_k + g_k.transpose()).cwiseProduct(ws.k_raw);
    const Matrix c = g_kmb.cwiseProduct(ws.k_mb);
    g.inducing = (w_k * state.inducing - w_k.rowwise().sum().asDiagonal() * state.inducing +
                  c * batch_x - c.rowwise().sum().asDiagonal() * state.inducing) /
                 l2;

    return g;
}

SVGPState init_svgp(const Matrix& train_x, const Vector& train_y, std::size_t m_inducing,
                    RngStream& rng) {
    const auto n = static_cast<std::size_t>(train_x.rows());
    if (train_x.rows() != train_y.size()) throw BadConfig("init_svgp: x/y row counts disagree");
    if (m_inducing < 1 || m_inducing > n) {
        throw BadConfig("init_svgp: m_inducing must be in [1, n]");
    }

    const auto rows = rng.sample_without_replacement(n, m_inducing);
    SVGPState state;
    state.inducing.resize(static_cast<Eigen::Index>(m_inducing), train_x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        state.inducing.row(static_cast<Eigen::Index>(i)) =
            train_x.row(static_cast<Eigen::Index>(rows[i]));
    }
    state.var_mean = Vector::Zero(static_cast<Eigen::Index>(m_inducing));
    state.var_chol = Matrix::Identity(static_cast<Eigen::Index>(m_inducing),
                                      static_cast<Eigen::Index>(m_inducing));
    state.kernel = KernelHyper{};
    state.mean.constant = train_y.mean();
    state.log_noise = 0.0;
    return state;
}

}  // namespace uq
