#include "uq/mdn.hpp"

#include <cmath>
#include <numbers>

namespace uq {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2*pi)

void check_batch(const MDNParams& params, const Matrix& batch_x, const Vector& batch_y,
                 const Vector& batch_w) {
    if (batch_x.rows() < 1) throw BadConfig("mdn: batch must be nonempty");
    if (batch_x.rows() != batch_y.size() || batch_x.rows() != batch_w.size()) {
        throw BadConfig("mdn: batch field sizes disagree");
    }
    if (static_cast<std::size_t>(batch_x.cols()) != params.input_dim()) {
        throw BadConfig("mdn: feature dimension mismatch");
    }
}

Vector softmax(const Vector& logits) {
    const double m = logits.maxCoeff();
    Vector e = (logits.array() - m).exp();
    return e / e.sum();
}

/// log N(y; mu_k, sigma_k^2) per component.
Vector component_log_densities(const MixtureParams& mix, double y) {
    Vector out(mix.mu.size());
    for (Eigen::Index k = 0; k < out.size(); ++k) {
        const double z = (y - mix.mu[k]) / mix.sigma[k];
        out[k] = -0.5 * kLogTwoPi - std::log(mix.sigma[k]) - 0.5 * z * z;
    }
    return out;
}

double log_sum_exp(const Vector& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

MixtureParams mdn_forward(const MDNParams& params, const Vector& x) {
    if (static_cast<std::size_t>(x.size()) != params.input_dim()) {
        throw BadConfig("mdn_forward: input dimension mismatch");
    }
    const Vector h = (params.w1 * x + params.b1).array().tanh();
    MixtureParams mix;
    mix.pi = softmax(params.w_pi * h + params.b_pi);
    mix.mu = params.w_mu * h + params.b_mu;
    mix.sigma = (params.w_sigma * h + params.b_sigma).array().exp().max(kSigmaFloor);
    return mix;
}

double mdn_loss(const MixtureParams& mix, double y) {
    Vector terms = component_log_densities(mix, y);
    for (Eigen::Index k = 0; k < terms.size(); ++k) {
        terms[k] += std::log(std::max(mix.pi[k], 1e-300));
    }
    return -log_sum_exp(terms);
}

double mdn_batch_loss(const MDNParams& params, const Matrix& batch_x, const Vector& batch_y,
                      const Vector& batch_w) {
    check_batch(params, batch_x, batch_y, batch_w);
    const double weight_sum = batch_w.sum();
    if (weight_sum <= 0.0) return 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < batch_x.rows(); ++i) {
        if (batch_w[i] == 0.0) continue;
        acc += batch_w[i] * mdn_loss(mdn_forward(params, batch_x.row(i)), batch_y[i]);
    }
    return acc / weight_sum;
}

MDNGrad mdn_loss_grad(const MDNParams& params, const Matrix& batch_x, const Vector& batch_y,
                      const Vector& batch_w) {
    check_batch(params, batch_x, batch_y, batch_w);
    MDNGrad g;
    g.w1 = Matrix::Zero(params.w1.rows(), params.w1.cols());
    g.b1 = Vector::Zero(params.b1.size());
    g.w_pi = Matrix::Zero(params.w_pi.rows(), params.w_pi.cols());
    g.b_pi = Vector::Zero(params.b_pi.size());
    g.w_mu = Matrix::Zero(params.w_mu.rows(), params.w_mu.cols());
    g.b_mu = Vector::Zero(params.b_mu.size());
    g.w_sigma = Matrix::Zero(params.w_sigma.rows(), params.w_sigma.cols());
    g.b_sigma = Vector::Zero(params.b_sigma.size());

    const double weight_sum = batch_w.sum();
    if (weight_sum <= 0.0) return g;

    for (Eigen::Index i = 0; i < batch_x.rows(); ++i) {
        const double w = batch_w[i];
        if (w == 0.0) continue;
        const Vector x = batch_x.row(i);
        const double y = batch_y[i];

        const Vector pre = params.w1 * x + params.b1;
        const Vector h = pre.array().tanh();
        const Vector logits = params.w_pi * h + params.b_pi;
        MixtureParams mix;
        mix.pi = softmax(logits);
        mix.mu = params.w_mu * h + params.b_mu;
        const Vector raw_sigma = (params.w_sigma * h + params.b_sigma).array().exp();
        mix.sigma = raw_sigma.array().max(kSigmaFloor);

        // Responsibilities r_k = pi_k N_k / sum_j pi_j N_j via log-sum-exp.
        Vector log_joint = component_log_densities(mix, y);
        for (Eigen::Index k = 0; k < log_joint.size(); ++k) {
            log_joint[k] += std::log(std::max(mix.pi[k], 1e-300));
        }
        const double lse = log_sum_exp(log_joint);
        const Vector resp = (log_joint.array() - lse).exp();

        // d NLL / d logits_k = pi_k - r_k
        const Vector d_logits = mix.pi - resp;
        // d NLL / d mu_k = -r_k (y - mu_k) / sigma_k^2
        Vector d_mu(resp.size());
        // d NLL / d (pre-sigma)_k = -r_k ((y - mu_k)^2 / sigma_k^2 - 1), zero at the floor
        Vector d_sig(resp.size());
        for (Eigen::Index k = 0; k < resp.size(); ++k) {
            const double s2 = mix.sigma[k] * mix.sigma[k];
            const double diff = y - mix.mu[k];
            d_mu[k] = -resp[k] * diff / s2;
            d_sig[k] = (raw_sigma[k] > kSigmaFloor)
                           ? -resp[k] * (diff * diff / s2 - 1.0)
                           : 0.0;
        }

        const Vector d_h = params.w_pi.transpose() * d_logits +
                           params.w_mu.transpose() * d_mu +
                           params.w_sigma.transpose() * d_sig;
        const Vector d_pre = d_h.array() * (1.0 - h.array().square());

        g.w_pi.noalias() += w * d_logits * h.transpose();
        g.b_pi += w * d_logits;
        g.w_mu.noalias() += w * d_mu * h.transpose();
        g.b_mu += w * d_mu;
        g.w_sigma.noalias() += w * d_sig * h.transpose();
        g.b_sigma += w * d_sig;
        g.w1.noalias() += w * d_pre * x.transpose();
        g.b1 += w * d_pre;
    }

    const double inv = 1.0 / weight_sum;
    g.w1 *= inv;
    g.b1 *= inv;
    g.w_pi *= inv;
    g.b_pi *= inv;
    g.w_mu *= inv;
    g.b_mu *= inv;
    g.w_sigma *= inv;
    g.b_sigma *= inv;
    return g;
}

double predict_max_weight_mean(const MixtureParams& mix) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < mix.pi.size(); ++k) {
        if (mix.pi[k] > mix.pi[best]) best = k;  // strict: ties keep the lowest index
    }
    return mix.mu[best];
}

namespace {

Eigen::Index sample_component(const MixtureParams& mix, RngStream& rng) {
    const double u = rng.uniform01();
    double cum = 0.0;
    for (Eigen::Index k = 0; k < mix.pi.size(); ++k) {
        cum += mix.pi[k];
        if (u < cum) return k;
    }
    return mix.pi.size() - 1;
}

}  // namespace

double predict_max_weight_sample(const MixtureParams& mix, RngStream& rng) {
    const Eigen::Index k = sample_component(mix, rng);
    return mix.mu[k] + mix.sigma[k] * rng.normal();
}

double predict_average_sample(const MixtureParams& mix, RngStream& rng,
                              std::size_t n_samples) {
    if (n_samples < 1) throw BadConfig("predict_average_sample: n_samples must be at least 1");
    double acc = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) acc += predict_max_weight_sample(mix, rng);
    return acc / static_cast<double>(n_samples);
}

double mdn_predict(const MixtureParams& mix, PredictionStrategy strategy, RngStream& rng,
                   std::size_t n_samples) {
    switch (strategy) {
        case PredictionStrategy::max_weight_mean:
            return predict_max_weight_mean(mix);
        case PredictionStrategy::max_weight_sample:
            return predict_max_weight_sample(mix, rng);
        case PredictionStrategy::average_sample:
            return predict_average_sample(mix, rng, n_samples);
    }
    throw BadConfig("mdn_predict: unknown strategy");
}

Vector mdn_sample(const MixtureParams& mix, RngStream& rng, std::size_t n) {
    if (n < 1) throw BadConfig("mdn_sample: n must be at least 1");
    Vector out(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out[i] = predict_max_weight_sample(mix, rng);
    }
    return out;
}

MDNParams init_mdn(std::size_t input_dim, std::size_t hidden_units, std::size_t n_gaussians,
                   RngStream& rng) {
    if (input_dim < 1 || hidden_units < 1 || n_gaussians < 1) {
        throw BadConfig("init_mdn: all counts must be at least 1");
    }
    const auto uniform_matrix = [&rng](std::size_t rows, std::size_t cols, std::size_t fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                m(i, j) = bound * (2.0 * rng.uniform01() - 1.0);
            }
        }
        return m;
    };

    MDNParams p;
    p.hidden_units = hidden_units;
    p.n_gaussians = n_gaussians;
    p.w1 = uniform_matrix(hidden_units, input_dim, input_dim);
    p.b1 = Vector::Zero(static_cast<Eigen::Index>(hidden_units));
    p.w_pi = uniform_matrix(n_gaussians, hidden_units, hidden_units);
    p.b_pi = Vector::Zero(static_cast<Eigen::Index>(n_gaussians));
    p.w_mu = uniform_matrix(n_gaussians, hidden_units, hidden_units);
    p.b_mu = Vector::Zero(static_cast<Eigen::Index>(n_gaussians));
    p.w_sigma = uniform_matrix(n_gaussians, hidden_units, hidden_units);
    p.b_sigma = Vector::Zero(static_cast<Eigen::Index>(n_gaussians));
    return p;
}

}  // namespace uq
