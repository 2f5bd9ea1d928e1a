#pragma once

#include "uq/kernels.hpp"
#include "uq/numerics.hpp"

namespace uq {

/// Full trainable parameter set of the sparse variational GP.
///
/// The variational distribution is q(u) = N(c*1 + var_mean, S) with
/// S = var_chol * var_chol^T, against the prior p(u) = N(c*1, K_MM + jitter*I)
/// over function values at the inducing locations. var_mean is the offset
/// from the prior mean, so the KL between q and p never involves c.
struct SVGPState {
    Matrix inducing;   // M x D learned locations Z
    Vector var_mean;   // M
    Matrix var_chol;   // M x M lower triangular, strictly positive diagonal
    KernelHyper kernel;
    MeanHyper mean;
    double log_noise = 0.0;  // log(sigma_n^2)

    std::size_t num_inducing() const { return static_cast<std::size_t>(inducing.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(inducing.cols()); }
    double noise() const;

    void validate() const;
};

/// Gradient of -ELBO, mirroring SVGPState. var_chol holds the lower triangle
/// (diagonal included as the plain positive value); its strict upper part is
/// structurally zero.
struct SVGPGrad {
    Matrix inducing;
    Vector var_mean;
    Matrix var_chol;
    double log_lengthscale = 0.0;
    double log_outputscale = 0.0;
    double constant = 0.0;
    double log_noise = 0.0;
};

struct GaussianPrediction {
    double mean = 0.0;
    double variance = 0.0;
};

/// Jitter added to K_MM before factorization.
constexpr double kInducingJitter = 1e-6;

/// Closed-form KL(N(m_q, L_q L_q^T) || N(m_p, L_p L_p^T)).
double kl_gaussians(const Vector& m_q, const Matrix& l_q, const Vector& m_p,
                    const Matrix& l_p);

/// Latent predictive distribution q(f(x)):
///   mean = c + k_x^T K^-1 m,  var = k(x,x) - k_x^T K^-1 k_x + k_x^T K^-1 S K^-1 k_x
/// with K = K_MM + jitter*I. Add noise() for the observation-level prediction.
GaussianPrediction svgp_predict(const SVGPState& state, const Vector& x);

/// Batched latent prediction sharing one factorization of K.
std::pair<Vector, Vector> svgp_predict_batch(const SVGPState& state, const Matrix& xs);

/// Stochastic evidence lower bound over a mini-batch:
///   (n_total / B) * sum_i w_i E_{q(f_i)}[log N(y_i | f_i, sigma_n^2)] - KL(q(u) || p(u))
double elbo(const SVGPState& state, const Matrix& batch_x, const Vector& batch_y,
            const Vector& batch_w, std::size_t n_total);

/// Gradient of -elbo with respect to every field of SVGPState.
SVGPGrad elbo_grad(const SVGPState& state, const Matrix& batch_x, const Vector& batch_y,
                   const Vector& batch_w, std::size_t n_total);

/// Inducing locations sampled from the training inputs without replacement;
/// var_mean zero, var_chol identity, log hyperparameters zero, constant set
/// to the training target mean.
SVGPState init_svgp(const Matrix& train_x, const Vector& train_y, std::size_t m_inducing,
                    RngStream& rng);

}  // namespace uq
