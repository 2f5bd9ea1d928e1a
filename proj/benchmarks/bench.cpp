#include <benchmark/benchmark.h>

#include "uq/kernels.hpp"
#include "uq/mdn.hpp"
#include "uq/numerics.hpp"
#include "uq/predplot.hpp"
#include "uq/svgp.hpp"

namespace {

using uq::Matrix;
using uq::Vector;

Matrix random_inputs(std::uint64_t seed, Eigen::Index n, Eigen::Index d) {
    uq::RngStream rng(seed);
    Matrix x(n, d);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    return x;
}

void bm_cholesky(benchmark::State& state) {
    const Eigen::Index n = state.range(0);
    const Matrix x = random_inputs(1, n, 4);
    Matrix gram = uq::kernel_matrix(x, x, uq::KernelHyper{});
    gram.diagonal().array() += 1e-6;
    for (auto _ : state) {
        benchmark::DoNotOptimize(uq::cholesky(gram));
    }
}
BENCHMARK(bm_cholesky)->Arg(50)->Arg(100)->Arg(200);

void bm_kernel_matrix(benchmark::State& state) {
    const Eigen::Index n = state.range(0);
    const Matrix x = random_inputs(2, n, 8);
    const uq::KernelHyper hyper{};
    for (auto _ : state) {
        benchmark::DoNotOptimize(uq::kernel_matrix(x, x, hyper));
    }
}
BENCHMARK(bm_kernel_matrix)->Arg(100)->Arg(400);

void bm_elbo_grad(benchmark::State& state) {
    const Eigen::Index m = state.range(0);
    const Eigen::Index b = 64;
    uq::RngStream rng(3);
    const Matrix batch_x = random_inputs(4, b, 2);
    Vector batch_y(b);
    for (Eigen::Index i = 0; i < b; ++i) batch_y[i] = rng.normal();
    const Vector batch_w = Vector::Ones(b);
    const Matrix train_x = random_inputs(5, m, 2);
    Vector train_y(m);
    for (Eigen::Index i = 0; i < m; ++i) train_y[i] = rng.normal();
    const uq::SVGPState svgp =
        uq::init_svgp(train_x, train_y, static_cast<std::size_t>(m), rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(uq::elbo_grad(svgp, batch_x, batch_y, batch_w, 1000));
    }
}
BENCHMARK(bm_elbo_grad)->Arg(10)->Arg(20)->Arg(50);

void bm_mdn_loss_grad(benchmark::State& state) {
    const Eigen::Index b = state.range(0);
    uq::RngStream rng(6);
    const uq::MDNParams params = uq::init_mdn(4, 16, 3, rng);
    const Matrix batch_x = random_inputs(7, b, 4);
    Vector batch_y(b);
    for (Eigen::Index i = 0; i < b; ++i) batch_y[i] = rng.normal();
    const Vector batch_w = Vector::Ones(b);
    for (auto _ : state) {
        benchmark::DoNotOptimize(uq::mdn_loss_grad(params, batch_x, batch_y, batch_w));
    }
}
BENCHMARK(bm_mdn_loss_grad)->Arg(64)->Arg(256);

void bm_gaussian_kde(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    uq::RngStream rng(8);
    const Vector samples = uq::standard_normal(rng, n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(uq::gaussian_kde(samples));
    }
}
BENCHMARK(bm_gaussian_kde)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
