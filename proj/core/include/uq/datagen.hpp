#pragma once

#include <string>
#include <vector>

#include "uq/numerics.hpp"

namespace uq {

/// One mode of a synthetic multi-modal target distribution.
struct ModeSpec {
    double mean = 0.0;
    double std = 1.0;
    double weight = 1.0;
};

/// Feature matrix, target vector and per-sample weights; the unit of all
/// training I/O. Weights default to 1.
struct Dataset {
    Matrix features;
    Vector targets;
    Vector weights;
    std::vector<std::string> feature_names;

    std::size_t size() const { return static_cast<std::size_t>(targets.size()); }
    std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }

    /// Rows selected by index, in the given order.
    Dataset subset(const std::vector<std::size_t>& rows) const;

    /// Throws BadConfig when field sizes disagree or a weight is negative.
    void validate() const;
};

Dataset make_dataset(Matrix features, Vector targets);

/// Draw n samples from a mixture of Gaussians. Per-mode counts are
/// floor(weight * n) with the remainder assigned to the last mode; the
/// concatenated samples are shuffled by the stream.
/// Throws BadConfig when the weights do not sum to 1 (tolerance 1e-9).
Vector generate_multi_modal_data(std::size_t n, const std::vector<ModeSpec>& modes,
                                 RngStream& rng);

/// Strict numeric CSV reader: comma-separated, mandatory header, '.' decimal
/// separator, no quoting. Features are all non-target columns in header
/// order; weights are set to 1.
Dataset load_csv(const std::string& path, const std::string& target_column);

/// Feature-only variant: every column is a feature and targets are zero.
Dataset load_csv(const std::string& path);

/// Inverse of load_csv for the same dialect; numbers are written in their
/// shortest round-trip form so a reload is entry-identical.
void save_csv(const Dataset& dataset, const std::string& target_column,
              const std::string& path);

/// Seeded permutation split. Test size = round(N * test_fraction), clamped to
/// [1, N-1] so both parts are nonempty.
std::pair<Dataset, Dataset> train_test_split(const Dataset& dataset, double test_fraction,
                                             std::uint64_t seed);

/// Per-column affine transform fitted on a training split (z-score). Off by
/// default everywhere; callers opt in explicitly.
struct Standardizer {
    Vector mean;
    Vector std;

    Matrix apply(const Matrix& features) const;
};

Standardizer fit_standardizer(const Dataset& train);

}  // namespace uq
