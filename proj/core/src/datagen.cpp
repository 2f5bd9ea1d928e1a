#include "uq/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace uq {

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return cells;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || cell.empty()) {
        throw ParseError(row, column,
                         "load_csv: cell \"" + cell + "\" at row " + std::to_string(row) +
                             ", column \"" + column + "\" is not a number");
    }
    return value;
}

}  // namespace

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    out.targets.resize(static_cast<Eigen::Index>(rows.size()));
    out.weights.resize(static_cast<Eigen::Index>(rows.size()));
    out.feature_names = feature_names;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= size()) throw IndexOutOfRange("Dataset::subset: row out of range");
        const auto r = static_cast<Eigen::Index>(rows[i]);
        out.features.row(static_cast<Eigen::Index>(i)) = features.row(r);
        out.targets[static_cast<Eigen::Index>(i)] = targets[r];
        out.weights[static_cast<Eigen::Index>(i)] = weights[r];
    }
    return out;
}

void Dataset::validate() const {
    if (features.rows() != targets.size() || features.rows() != weights.size()) {
        throw BadConfig("Dataset: inconsistent row counts");
    }
    if ((weights.array() < 0.0).any()) throw BadConfig("Dataset: negative sample weight");
    if (!feature_names.empty() &&
        feature_names.size() != static_cast<std::size_t>(features.cols())) {
        throw BadConfig("Dataset: feature name count mismatch");
    }
}

Dataset make_dataset(Matrix features, Vector targets) {
    Dataset d;
    d.features = std::move(features);
    d.targets = std::move(targets);
    d.weights = Vector::Ones(d.targets.size());
    d.feature_names.reserve(static_cast<std::size_t>(d.features.cols()));
    for (Eigen::Index j = 0; j < d.features.cols(); ++j) {
        d.feature_names.push_back("x" + std::to_string(j));
    }
    d.validate();
    return d;
}

Vector generate_multi_modal_data(std::size_t n, const std::vector<ModeSpec>& modes,
                                 RngStream& rng) {
    if (n < 1) throw BadConfig("generate_multi_modal_data: n must be at least 1");
    if (modes.empty()) throw BadConfig("generate_multi_modal_data: no modes given");
    double weight_sum = 0.0;
    for (const auto& mode : modes) {
        if (!(mode.std > 0.0)) throw BadConfig("generate_multi_modal_data: std must be positive");
        if (mode.weight < 0.0 || mode.weight > 1.0) {
            throw BadConfig("generate_multi_modal_data: weight outside [0, 1]");
        }
        weight_sum += mode.weight;
    }
    if (std::abs(weight_sum - 1.0) > 1e-9) {
        throw BadConfig("generate_multi_modal_data: mode weights must sum to 1");
    }

    std::vector<std::size_t> counts(modes.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        counts[i] = static_cast<std::size_t>(std::floor(modes[i].weight * static_cast<double>(n)));
        assigned += counts[i];
    }
    counts.back() += n - assigned;  // remainder to the last mode

    Vector samples(static_cast<Eigen::Index>(n));
    Eigen::Index pos = 0;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        for (std::size_t j = 0; j < counts[i]; ++j) {
            samples[pos++] = modes[i].mean + modes[i].std * rng.normal();
        }
    }

    const auto perm = rng.permutation(n);
    Vector shuffled(samples.size());
    for (std::size_t i = 0; i < n; ++i) {
        shuffled[static_cast<Eigen::Index>(i)] = samples[static_cast<Eigen::Index>(perm[i])];
    }
    return shuffled;
}

namespace {

Dataset load_csv_impl(const std::string& path, const std::string* target_column) {
    std::ifstream in(path);
    if (!in) throw FileNotFound("load_csv: cannot open \"" + path + "\"");

    std::string line;
    if (!std::getline(in, line)) throw ParseError(0, "", "load_csv: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_line(line);

    std::ptrdiff_t target_idx = -1;
    if (target_column != nullptr) {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (header[j] == *target_column) {
                target_idx = static_cast<std::ptrdiff_t>(j);
                break;
            }
        }
        if (target_idx < 0) {
            throw MissingColumn("load_csv: target column \"" + *target_column +
                                "\" not in header");
        }
    }

    std::vector<std::vector<double>> feature_rows;
    std::vector<double> target_vals;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == std::ifstream::traits_type::eof()) break;
        ++row;
        const auto cells = split_line(line);
        if (cells.size() != header.size()) {
            const std::size_t col = std::min(cells.size(), header.size() - 1);
            throw ParseError(row, header[col],
                             "load_csv: row " + std::to_string(row) + " has " +
                                 std::to_string(cells.size()) + " cells, expected " +
                                 std::to_string(header.size()));
        }
        std::vector<double> feats;
        feats.reserve(header.size());
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const double v = parse_cell(cells[j], row, header[j]);
            if (static_cast<std::ptrdiff_t>(j) == target_idx) {
                target_vals.push_back(v);
            } else {
                feats.push_back(v);
            }
        }
        feature_rows.push_back(std::move(feats));
    }
    if (feature_rows.empty()) throw ParseError(0, "", "load_csv: no data rows");

    Dataset d;
    const auto n = static_cast<Eigen::Index>(feature_rows.size());
    const auto dim =
        static_cast<Eigen::Index>(target_idx >= 0 ? header.size() - 1 : header.size());
    d.features.resize(n, dim);
    d.targets.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            d.features(i, j) = feature_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
        d.targets[i] = target_idx >= 0 ? target_vals[static_cast<std::size_t>(i)] : 0.0;
    }
    d.weights = Vector::Ones(n);
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (static_cast<std::ptrdiff_t>(j) != target_idx) d.feature_names.push_back(header[j]);
    }
    return d;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& target_column) {
    return load_csv_impl(path, &target_column);
}

Dataset load_csv(const std::string& path) {
    return load_csv_impl(path, nullptr);
}

void save_csv(const Dataset& dataset, const std::string& target_column,
              const std::string& path) {
    dataset.validate();
    if (dataset.feature_names.size() != dataset.dim()) {
        throw BadConfig("save_csv: dataset has no usable feature names");
    }
    std::ofstream out(path);
    if (!out) throw IoError("save_csv: cannot open \"" + path + "\" for writing");

    for (const auto& name : dataset.feature_names) out << name << ',';
    out << target_column << '\n';
    for (Eigen::Index i = 0; i < dataset.features.rows(); ++i) {
        for (Eigen::Index j = 0; j < dataset.features.cols(); ++j) {
            out << format_double(dataset.features(i, j)) << ',';
        }
        out << format_double(dataset.targets[i]) << '\n';
    }
    if (!out) throw IoError("save_csv: write failed on \"" + path + "\"");
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& dataset, double test_fraction,
                                             std::uint64_t seed) {
    dataset.validate();
    const std::size_t n = dataset.size();
    if (n < 2) throw BadConfig("train_test_split: need at least 2 rows");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw BadConfig("train_test_split: fraction must be in (0, 1)");
    }
    std::size_t test_size = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(n)));
    test_size = std::clamp<std::size_t>(test_size, 1, n - 1);

    RngStream rng(seed);
    const auto perm = rng.permutation(n);
    std::vector<std::size_t> test_rows(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(test_size));
    std::vector<std::size_t> train_rows(perm.begin() + static_cast<std::ptrdiff_t>(test_size), perm.end());
    return {dataset.subset(train_rows), dataset.subset(test_rows)};
}

Matrix Standardizer::apply(const Matrix& features) const {
    if (features.cols() != mean.size()) throw BadConfig("Standardizer: dimension mismatch");
    Matrix out = features;
    out.rowwise() -= mean.transpose();
    out.array().rowwise() /= std.transpose().array();
    return out;
}

Standardizer fit_standardizer(const Dataset& train) {
    train.validate();
    if (train.size() < 2) throw BadConfig("fit_standardizer: need at least 2 rows");
    Standardizer s;
    s.mean = train.features.colwise().mean();
    Matrix centered = train.features;
    centered.rowwise() -= s.mean.transpose();
    s.std = (centered.array().square().colwise().sum() /
             static_cast<double>(train.size() - 1)).sqrt();
    // Constant columns pass through unscaled.
    for (Eigen::Index j = 0; j < s.std.size(); ++j) {
        if (s.std[j] < 1e-12) s.std[j] = 1.0;
    }
    return s;
}

}  // namespace uq
