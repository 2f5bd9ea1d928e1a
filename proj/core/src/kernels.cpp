#include "uq/kernels.hpp"

#include <cmath>

namespace uq {

double KernelHyper::lengthscale() const { return std::exp(log_lengthscale); }
double KernelHyper::outputscale() const { return std::exp(log_outputscale); }

double rbf(const Vector& x1, const Vector& x2, const KernelHyper& hyper) {
    if (x1.size() != x2.size() || x1.size() < 1) {
        throw BadConfig("rbf: inputs must share a dimension D >= 1");
    }
    const double l2 = std::exp(2.0 * hyper.log_lengthscale);
    const double r2 = (x1 - x2).squaredNorm();
    return hyper.outputscale() * std::exp(-r2 / (2.0 * l2));
}

RbfGrad rbf_grad(const Vector& x1, const Vector& x2, const KernelHyper& hyper) {
    const double k = rbf(x1, x2, hyper);
    const double l2 = std::exp(2.0 * hyper.log_lengthscale);
    const double r2 = (x1 - x2).squaredNorm();
    // d k / d log(l) = k * r^2 / l^2, d k / d log(sigma_k^2) = k
    return {k * r2 / l2, k};
}

Matrix squared_distances(const Matrix& xa, const Matrix& xb) {
    const Vector na = xa.rowwise().squaredNorm();
    const Vector nb = xb.rowwise().squaredNorm();
    Matrix d = (-2.0 * xa * xb.transpose());
    d.colwise() += na;
    d.rowwise() += nb.transpose();
    return d.cwiseMax(0.0);
}

Matrix kernel_matrix(const Matrix& xa, const Matrix& xb, const KernelHyper& hyper) {
    if (xa.cols() != xb.cols()) throw BadConfig("kernel_matrix: inconsistent feature dimension");
    const double l2 = std::exp(2.0 * hyper.log_lengthscale);
    const double s = hyper.outputscale();
    return s * (-squared_distances(xa, xb) / (2.0 * l2)).array().exp();
}

double constant_mean(const Vector& /*x*/, const MeanHyper& hyper) {
    return hyper.constant;
}

}  // namespace uq
