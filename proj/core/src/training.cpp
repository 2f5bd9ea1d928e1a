#include "uq/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

#include "uq/errors.hpp"
#include "uq/model_io.hpp"

namespace uq {
namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

// Sub-stream tags so split, init and shuffling stay independent of each other.
constexpr std::uint64_t kSplitTag = 1;
constexpr std::uint64_t kInitTag = 2;
constexpr std::uint64_t kShuffleTag = 3;

struct Batch {
    Matrix x;
    Vector y;
    Vector w;
};

/// Gathers the epoch's batches from a fixed index order. The order alone
/// determines every batch, so worker count never changes the result.
std::vector<Batch> materialize_batches(const Dataset& train, const std::vector<std::size_t>& order,
                                       std::size_t batch_size, std::size_t num_workers) {
    const std::size_t n = order.size();
    const std::size_t n_batches = (n + batch_size - 1) / batch_size;
    std::vector<Batch> batches(n_batches);
    auto fill = [&](std::size_t b) {
        const std::size_t lo = b * batch_size;
        const std::size_t hi = std::min(lo + batch_size, n);
        const auto rows = static_cast<Eigen::Index>(hi - lo);
        Batch& out = batches[b];
        out.x.resize(rows, train.features.cols());
        out.y.resize(rows);
        out.w.resize(rows);
        for (std::size_t i = lo; i < hi; ++i) {
            const auto dst = static_cast<Eigen::Index>(i - lo);
            const auto src = static_cast<Eigen::Index>(order[i]);
            out.x.row(dst) = train.features.row(src);
            out.y[dst] = train.targets[src];
            out.w[dst] = train.weights[src];
        }
    };
    if (num_workers == 0 || n_batches <= 1) {
        for (std::size_t b = 0; b < n_batches; ++b) fill(b);
        return batches;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const std::size_t count = std::min(num_workers, n_batches);
    workers.reserve(count);
    for (std::size_t t = 0; t < count; ++t)
        workers.emplace_back([&] {
            for (std::size_t b = next.fetch_add(1); b < n_batches; b = next.fetch_add(1)) fill(b);
        });
    for (auto& w : workers) w.join();
    return batches;
}

Eigen::Index tri_count(Eigen::Index m) { return m * (m + 1) / 2; }

/// Flat layout: Z row-major, var_mean, lower triangle of var_chol with the
/// diagonal in log space, then the four scalars.
Vector svgp_flatten(const SVGPState& s) {
    const Eigen::Index m = s.inducing.rows();
    const Eigen::Index d = s.inducing.cols();
    Vector p(m * d + m + tri_count(m) + 4);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < d; ++j) p[k++] = s.inducing(i, j);
    for (Eigen::Index i = 0; i < m; ++i) p[k++] = s.var_mean[i];
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j <= i; ++j)
            p[k++] = i == j ? std::log(s.var_chol(i, i)) : s.var_chol(i, j);
    p[k++] = s.kernel.log_lengthscale;
    p[k++] = s.kernel.log_outputscale;
    p[k++] = s.mean.constant;
    p[k++] = s.log_noise;
    return p;
}

void svgp_unflatten(const Vector& p, SVGPState& s) {
    const Eigen::Index m = s.inducing.rows();
    const Eigen::Index d = s.inducing.cols();
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < d; ++j) s.inducing(i, j) = p[k++];
    for (Eigen::Index i = 0; i < m; ++i) s.var_mean[i] = p[k++];
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j <= i; ++j)
            s.var_chol(i, j) = i == j ? std::exp(p[k++]) : p[k++];
    s.kernel.log_lengthscale = p[k++];
    s.kernel.log_outputscale = p[k++];
    s.mean.constant = p[k++];
    s.log_noise = p[k++];
}

Vector svgp_grad_flatten(const SVGPGrad& g, const SVGPState& s) {
    const Eigen::Index m = s.inducing.rows();
    const Eigen::Index d = s.inducing.cols();
    Vector p(m * d + m + tri_count(m) + 4);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < d; ++j) p[k++] = g.inducing(i, j);
    for (Eigen::Index i = 0; i < m; ++i) p[k++] = g.var_mean[i];
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j <= i; ++j)
            p[k++] = i == j ? g.var_chol(i, i) * s.var_chol(i, i) : g.var_chol(i, j);
    p[k++] = g.log_lengthscale;
    p[k++] = g.log_outputscale;
    p[k++] = g.constant;
    p[k++] = g.log_noise;
    return p;
}

Vector mdn_flatten(const MDNParams& p) {
    const auto total = p.w1.size() + p.b1.size() + p.w_pi.size() + p.b_pi.size() +
                       p.w_mu.size() + p.b_mu.size() + p.w_sigma.size() + p.b_sigma.size();
    Vector out(total);
    Eigen::Index k = 0;
    auto put_m = [&](const Matrix& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) out[k++] = m(i, j);
    };
    auto put_v = [&](const Vector& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) out[k++] = v[i];
    };
    put_m(p.w1);
    put_v(p.b1);
    put_m(p.w_pi);
    put_v(p.b_pi);
    put_m(p.w_mu);
    put_v(p.b_mu);
    put_m(p.w_sigma);
    put_v(p.b_sigma);
    return out;
}

void mdn_unflatten(const Vector& flat, MDNParams& p) {
    Eigen::Index k = 0;
    auto take_m = [&](Matrix& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = flat[k++];
    };
    auto take_v = [&](Vector& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = flat[k++];
    };
    take_m(p.w1);
    take_v(p.b1);
    take_m(p.w_pi);
    take_v(p.b_pi);
    take_m(p.w_mu);
    take_v(p.b_mu);
    take_m(p.w_sigma);
    take_v(p.b_sigma);
}

Vector mdn_grad_flatten(const MDNGrad& g) {
    MDNParams view;
    view.w1 = g.w1;
    view.b1 = g.b1;
    view.w_pi = g.w_pi;
    view.b_pi = g.b_pi;
    view.w_mu = g.w_mu;
    view.b_mu = g.b_mu;
    view.w_sigma = g.w_sigma;
    view.b_sigma = g.b_sigma;
    return mdn_flatten(view);
}

}  // namespace

void TrainConfig::validate() const {
    if (num_epochs < 1) throw BadConfig("num_epochs must be >= 1");
    if (batch_size < 1) throw BadConfig("batch_size must be >= 1");
    if (!(lr > 0.0) || !std::isfinite(lr)) throw BadConfig("lr must be positive and finite");
    if (patience < 1) throw BadConfig("patience must be >= 1");
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw BadConfig("val_fraction must lie in (0, 1)");
}

void adam_step(Vector& params, const Vector& grad, AdamState& state, double lr) {
    if (params.size() != grad.size() || params.size() != state.m.size())
        throw LengthMismatch("adam_step: parameter, gradient and state sizes differ");
    ++state.step;
    state.m = kBeta1 * state.m + (1.0 - kBeta1) * grad;
    state.v = kBeta2 * state.v + (1.0 - kBeta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));
    params.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + kAdamEps);
}

EarlyStopper::EarlyStopper(std::size_t patience, Compare is_improvement)
    : patience_(patience), is_improvement_(std::move(is_improvement)) {
    if (patience_ < 1) throw BadConfig("patience must be >= 1");
    if (!is_improvement_)
        is_improvement_ = [](double candidate, double best) { return candidate < best; };
}

bool EarlyStopper::step(double metric, std::string snapshot) {
    if (!best_metric_.has_value() || is_improvement_(metric, *best_metric_)) {
        best_metric_ = metric;
        best_snapshot_ = std::move(snapshot);
        epochs_since_improve_ = 0;
        return false;
    }
    ++epochs_since_improve_;
    return epochs_since_improve_ >= patience_;
}

std::pair<Dataset, Dataset> split_train_val(const Dataset& data, double val_fraction,
                                            std::uint64_t seed) {
    return train_test_split(data, val_fraction, seed);
}

double mse(const Vector& predictions, const Vector& targets) {
    if (predictions.size() != targets.size())
        throw LengthMismatch("mse: prediction and target sizes differ");
    if (predictions.size() == 0) throw LengthMismatch("mse: empty input");
    return (predictions - targets).squaredNorm() / static_cast<double>(predictions.size());
}

double r2(const Vector& predictions, const Vector& targets) {
    if (predictions.size() != targets.size())
        throw LengthMismatch("r2: prediction and target sizes differ");
    if (predictions.size() == 0) throw LengthMismatch("r2: empty input");
    const double mean = targets.mean();
    const double ss_tot = (targets.array() - mean).square().sum();
    if (ss_tot == 0.0) return 0.0;
    const double ss_res = (predictions - targets).squaredNorm();
    return 1.0 - ss_res / ss_tot;
}

std::pair<SVGPState, TrainHistory> train_svgp(const Dataset& data, std::size_t num_inducing,
                                              const TrainConfig& config, std::ostream& log) {
    config.validate();
    data.validate();
    auto [train, val] =
        split_train_val(data, config.val_fraction, derive_seed(config.seed, kSplitTag));
    RngStream init_rng(derive_seed(config.seed, kInitTag));
    SVGPState state = init_svgp(train.features, train.targets, num_inducing, init_rng);
    Vector params = svgp_flatten(state);
    AdamState adam(params.size());
    RngStream shuffle_rng(derive_seed(config.seed, kShuffleTag));
    EarlyStopper stopper(config.patience);
    TrainHistory history;
    const std::size_t n_train = train.size();
    const double inv_n = 1.0 / static_cast<double>(n_train);

    for (std::size_t epoch = 1; epoch <= config.num_epochs; ++epoch) {
        const auto order = shuffle_rng.permutation(n_train);
        const auto batches = materialize_batches(train, order, config.batch_size,
                                                 config.num_workers);
        double loss_sum = 0.0;
        for (const Batch& b : batches) {
            svgp_unflatten(params, state);
            loss_sum += -elbo(state, b.x, b.y, b.w, n_train) * inv_n;
            const SVGPGrad grad = elbo_grad(state, b.x, b.y, b.w, n_train);
            const Vector flat = svgp_grad_flatten(grad, state) * inv_n;
            adam_step(params, flat, adam, config.lr);
        }
        const double train_loss = loss_sum / static_cast<double>(batches.size());
        svgp_unflatten(params, state);
        const auto [val_mean, val_var] = svgp_predict_batch(state, val.features);
        const double val_mse = mse(val_mean, val.targets);
        const double val_r2 = r2(val_mean, val.targets);
        char line[160];
        std::snprintf(line, sizeof line,
                      "Epoch %zu/%zu, Weighted Loss: %.3f, Val MSE: %.6f, Val R2: %.3f\n", epoch,
                      config.num_epochs, train_loss, val_mse, val_r2);
        log << line << std::flush;
        history.records.push_back({epoch, train_loss, {{"mse", val_mse}, {"r2", val_r2}}});
        history.stopped_epoch = epoch;
        const bool stop = stopper.step(val_mse, svgp_to_json(state));
        if (stopper.epochs_since_improve() == 0) history.best_epoch = epoch;
        if (stop) {
            history.stop_reason = StopReason::early_stopped;
            break;
        }
    }
    history.best_metric = stopper.best_metric();
    state = svgp_from_json(stopper.best_snapshot());
    return {std::move(state), std::move(history)};
}

std::pair<MDNParams, TrainHistory> train_mdn(const Dataset& data, std::size_t hidden_units,
                                             std::size_t n_gaussians, const TrainConfig& config,
                                             std::ostream& log) {
    config.validate();
    data.validate();
    auto [train, val] =
        split_train_val(data, config.val_fraction, derive_seed(config.seed, kSplitTag));
    RngStream init_rng(derive_seed(config.seed, kInitTag));
    MDNParams model = init_mdn(data.dim(), hidden_units, n_gaussians, init_rng);
    Vector params = mdn_flatten(model);
    AdamState adam(params.size());
    RngStream shuffle_rng(derive_seed(config.seed, kShuffleTag));
    EarlyStopper stopper(config.patience);
    TrainHistory history;

    for (std::size_t epoch = 1; epoch <= config.num_epochs; ++epoch) {
        const auto order = shuffle_rng.permutation(train.size());
        const auto batches = materialize_batches(train, order, config.batch_size,
                                                 config.num_workers);
        double loss_sum = 0.0;
        for (const Batch& b : batches) {
            mdn_unflatten(params, model);
            loss_sum += mdn_batch_loss(model, b.x, b.y, b.w);
            const MDNGrad grad = mdn_loss_grad(model, b.x, b.y, b.w);
            adam_step(params, mdn_grad_flatten(grad), adam, config.lr);
        }
        const double train_loss = loss_sum / static_cast<double>(batches.size());
        mdn_unflatten(params, model);
        const double val_loss = mdn_batch_loss(model, val.features, val.targets, val.weights);
        char line[160];
        std::snprintf(line, sizeof line, "Epoch %zu/%zu, Training Loss: %.3f, Validation Loss: %.3f\n",
                      epoch, config.num_epochs, train_loss, val_loss);
        log << line << std::flush;
        history.records.push_back({epoch, train_loss, {{"nll", val_loss}}});
        history.stopped_epoch = epoch;
        const bool stop = stopper.step(val_loss, mdn_to_json(model));
        if (stopper.epochs_since_improve() == 0) history.best_epoch = epoch;
        if (stop) {
            history.stop_reason = StopReason::early_stopped;
            char msg[64];
            std::snprintf(msg, sizeof msg, "Early stopping after %zu epochs\n", epoch);
            log << msg << std::flush;
            break;
        }
    }
    history.best_metric = stopper.best_metric();
    model = mdn_from_json(stopper.best_snapshot());
    return {std::move(model), std::move(history)};
}

std::pair<Vector, Vector> predict_with_uncertainty_svgp(const SVGPState& state, const Matrix& xs) {
    auto [mean, var] = svgp_predict_batch(state, xs);
    var.array() += state.noise();
    return {std::move(mean), std::move(var)};
}

MDNPrediction predict_with_uncertainty_mdn(const MDNParams& params, const Matrix& xs,
                                           RngStream& rng, std::size_t n_samples) {
    if (static_cast<std::size_t>(xs.cols()) != params.input_dim())
        throw LengthMismatch("predict_with_uncertainty_mdn: feature width mismatch");
    const Eigen::Index n = xs.rows();
    const auto k = static_cast<Eigen::Index>(params.n_gaussians);
    MDNPrediction out;
    out.pi.resize(n, k);
    out.mu.resize(n, k);
    out.sigma.resize(n, k);
    out.samples.resize(n, static_cast<Eigen::Index>(n_samples));
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vector x = xs.row(i).transpose();
        const MixtureParams mix = mdn_forward(params, x);
        out.pi.row(i) = mix.pi.transpose();
        out.mu.row(i) = mix.mu.transpose();
        out.sigma.row(i) = mix.sigma.transpose();
        if (n_samples > 0) out.samples.row(i) = mdn_sample(mix, rng, n_samples).transpose();
    }
    return out;
}

}  // namespace uq
