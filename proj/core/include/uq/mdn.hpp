#pragma once

#include "uq/numerics.hpp"

namespace uq {

/// One-hidden-layer tanh network with three linear heads producing the
/// parameters of a conditional Gaussian mixture: logits for the weights,
/// means, and log standard deviations.
struct MDNParams {
    Matrix w1;       // H x D
    Vector b1;       // H
    Matrix w_pi;     // K x H
    Vector b_pi;     // K
    Matrix w_mu;     // K x H
    Vector b_mu;     // K
    Matrix w_sigma;  // K x H
    Vector b_sigma;  // K
    std::size_t hidden_units = 0;
    std::size_t n_gaussians = 0;

    std::size_t input_dim() const { return static_cast<std::size_t>(w1.cols()); }
};

/// Gradient container mirroring MDNParams.
struct MDNGrad {
    Matrix w1;
    Vector b1;
    Matrix w_pi;
    Vector b_pi;
    Matrix w_mu;
    Vector b_mu;
    Matrix w_sigma;
    Vector b_sigma;
};

/// Per-instance mixture: weights on the simplex, means, and positive stds.
struct MixtureParams {
    Vector pi;
    Vector mu;
    Vector sigma;
};

constexpr double kSigmaFloor = 1e-6;

/// h = tanh(w1 x + b1); pi = softmax(w_pi h + b_pi); mu = w_mu h + b_mu;
/// sigma = max(exp(w_sigma h + b_sigma), 1e-6).
MixtureParams mdn_forward(const MDNParams& params, const Vector& x);

/// Negative log-likelihood of y under the mixture, via log-sum-exp.
double mdn_loss(const MixtureParams& mix, double y);

/// Weighted batch loss (sum_i w_i NLL_i) / (sum_i w_i).
double mdn_batch_loss(const MDNParams& params, const Matrix& batch_x, const Vector& batch_y,
                      const Vector& batch_w);

/// Gradient of mdn_batch_loss with respect to every parameter.
MDNGrad mdn_loss_grad(const MDNParams& params, const Matrix& batch_x, const Vector& batch_y,
                      const Vector& batch_w);

enum class PredictionStrategy { max_weight_mean, max_weight_sample, average_sample };

/// Mean of the highest-weight component; ties break to the lowest index.
double predict_max_weight_mean(const MixtureParams& mix);

/// Draw a component k ~ Categorical(pi), then sample N(mu_k, sigma_k^2).
double predict_max_weight_sample(const MixtureParams& mix, RngStream& rng);

/// Average of n_samples independent predict_max_weight_sample draws.
double predict_average_sample(const MixtureParams& mix, RngStream& rng,
                              std::size_t n_samples = 100);

/// Dispatch on strategy; n_samples only matters for average_sample.
double mdn_predict(const MixtureParams& mix, PredictionStrategy strategy, RngStream& rng,
                   std::size_t n_samples = 100);

/// n independent mixture draws.
Vector mdn_sample(const MixtureParams& mix, RngStream& rng, std::size_t n);

/// Weights ~ Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
MDNParams init_mdn(std::size_t input_dim, std::size_t hidden_units, std::size_t n_gaussians,
                   RngStream& rng);

}  // namespace uq
