#pragma once

#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "uq/datagen.hpp"
#include "uq/mdn.hpp"
#include "uq/svgp.hpp"

namespace uq {

struct TrainConfig {
    std::size_t num_epochs = 100;
    std::size_t batch_size = 64;
    double lr = 0.001;
    std::size_t patience = 10;
    double val_fraction = 0.2;
    std::uint64_t seed = 0;
    std::size_t num_workers = 0;  // 0 = materialize batches on the calling thread

    void validate() const;
};

/// First-moment / second-moment accumulators for Adam over a flat parameter
/// vector. step counts completed updates.
struct AdamState {
    Vector m;
    Vector v;
    std::size_t step = 0;

    explicit AdamState(Eigen::Index n) : m(Vector::Zero(n)), v(Vector::Zero(n)) {}
};

/// One Adam update in place. beta1 0.9, beta2 0.999, eps 1e-8, with bias
/// correction.
void adam_step(Vector& params, const Vector& grad, AdamState& state, double lr);

/// Tracks the best validation metric seen so far and a serialized snapshot of
/// the parameters that produced it. step() returns true when the metric has
/// failed to improve for `patience` consecutive calls.
class EarlyStopper {
   public:
    using Compare = std::function<bool(double candidate, double best)>;

    explicit EarlyStopper(std::size_t patience, Compare is_improvement = {});

    bool step(double metric, std::string snapshot);

    bool has_best() const { return best_metric_.has_value(); }
    double best_metric() const { return best_metric_.value(); }
    const std::string& best_snapshot() const { return best_snapshot_; }
    std::size_t epochs_since_improve() const { return epochs_since_improve_; }

   private:
    std::size_t patience_;
    Compare is_improvement_;
    std::optional<double> best_metric_;
    std::string best_snapshot_;
    std::size_t epochs_since_improve_ = 0;
};

enum class StopReason { completed, early_stopped };

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    std::vector<std::pair<std::string, double>> val_metrics;
};

struct TrainHistory {
    std::vector<EpochRecord> records;
    StopReason stop_reason = StopReason::completed;
    std::size_t stopped_epoch = 0;  // last epoch that ran
    double best_metric = 0.0;
    std::size_t best_epoch = 0;
};

std::pair<Dataset, Dataset> split_train_val(const Dataset& data, double val_fraction,
                                            std::uint64_t seed);

double mse(const Vector& predictions, const Vector& targets);
/// Coefficient of determination; 0 when the targets have zero variance.
double r2(const Vector& predictions, const Vector& targets);

std::pair<SVGPState, TrainHistory> train_svgp(const Dataset& data, std::size_t num_inducing,
                                              const TrainConfig& config,
                                              std::ostream& log = std::cout);

std::pair<MDNParams, TrainHistory> train_mdn(const Dataset& data, std::size_t hidden_units,
                                             std::size_t n_gaussians, const TrainConfig& config,
                                             std::ostream& log = std::cout);

/// Predictive mean and observation-level variance of y | x (latent variance
/// plus noise), one entry per row of xs.
std::pair<Vector, Vector> predict_with_uncertainty_svgp(const SVGPState& state, const Matrix& xs);

struct MDNPrediction {
    Matrix pi;      // rows x K
    Matrix mu;      // rows x K
    Matrix sigma;   // rows x K
    Matrix samples; // rows x n_samples
};

MDNPrediction predict_with_uncertainty_mdn(const MDNParams& params, const Matrix& xs,
                                           RngStream& rng, std::size_t n_samples);

}  // namespace uq
