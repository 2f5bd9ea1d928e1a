#pragma once

#include "uq/numerics.hpp"

namespace uq {

/// Scaled RBF hyperparameters, stored in log space so unconstrained gradient
/// steps keep lengthscale and outputscale positive.
struct KernelHyper {
    double log_lengthscale = 0.0;  // log(l)
    double log_outputscale = 0.0;  // log(sigma_k^2)

    double lengthscale() const;
    double outputscale() const;
};

struct MeanHyper {
    double constant = 0.0;
};

struct RbfGrad {
    double d_log_lengthscale;
    double d_log_outputscale;
};

/// k(x1, x2) = sigma_k^2 * exp(-||x1 - x2||^2 / (2 l^2))
double rbf(const Vector& x1, const Vector& x2, const KernelHyper& hyper);

/// Gradient of rbf with respect to the log hyperparameters.
RbfGrad rbf_grad(const Vector& x1, const Vector& x2, const KernelHyper& hyper);

/// Cross-kernel matrix: entry (i, j) = rbf(row i of xa, row j of xb).
Matrix kernel_matrix(const Matrix& xa, const Matrix& xb, const KernelHyper& hyper);

/// Constant mean function; ignores x by construction.
double constant_mean(const Vector& x, const MeanHyper& hyper);

/// Pairwise squared Euclidean distances between rows, clamped at zero.
Matrix squared_distances(const Matrix& xa, const Matrix& xb);

}  // namespace uq
