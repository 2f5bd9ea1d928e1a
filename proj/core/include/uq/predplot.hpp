#pragma once

#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "uq/mdn.hpp"
#include "uq/svgp.hpp"

namespace uq {

enum class BandwidthRule { scott, fixed };

struct KDEConfig {
    BandwidthRule bandwidth_rule = BandwidthRule::scott;
    double fixed_bandwidth = 0.0;  // used only when bandwidth_rule is fixed
    std::size_t grid_points = 200;
};

/// Density sampled on a strictly increasing uniform grid.
struct DensityCurve {
    Vector x;
    Vector density;
};

enum class VLineLabel { predicted, actual };

std::string to_string(VLineLabel label);

struct VLine {
    double x = 0.0;
    VLineLabel label = VLineLabel::predicted;
};

struct PlotSpec {
    DensityCurve density_curve;
    std::vector<VLine> vlines;
    std::string title;
    std::size_t width = 640;
    std::size_t height = 480;

    /// Throws BadConfig on an empty or non-increasing curve, negative
    /// density, or a degenerate canvas.
    void validate() const;
};

/// Panels laid out row-major: panel i sits at (i / ncols, i % ncols).
struct GridPlotSpec {
    std::vector<PlotSpec> panels;
    std::size_t ncols = 1;

    std::size_t nrows() const {
        return panels.empty() ? 0 : (panels.size() + ncols - 1) / ncols;
    }
};

/// Gaussian-kernel KDE. Scott bandwidth h = sample_std * n^(-1/5); when the
/// samples are all equal the bandwidth falls back to 1e-3 * max(1, |mean|).
/// The grid spans [min - 3h, max + 3h].
DensityCurve gaussian_kde(const Vector& samples, const KDEConfig& config = {});

/// Draws n_samples from the observation-level predictive Gaussian at x, runs
/// gaussian_kde, and marks the predictive mean (and the actual value when
/// given) as vertical lines.
PlotSpec compare_distributions_svgpr(const SVGPState& state, const Vector& x,
                                     std::optional<double> y_actual, RngStream& rng,
                                     std::size_t n_samples = 1000);

/// Per-component weights, means and variances of one conditional mixture.
struct MixtureReport {
    Vector weights;
    Vector means;
    Vector variances;
};

void print_report(const MixtureReport& report, std::ostream& out);

/// KDE over mixture draws at x, a vertical line at the strategy's scalar
/// prediction plus the optional actual. The component report is printed to
/// report_out as a side effect.
std::pair<PlotSpec, MixtureReport> compare_distributions_mdn(
    const MDNParams& params, const Vector& x, std::optional<double> y_actual, RngStream& rng,
    std::size_t n_samples = 1000,
    PredictionStrategy strategy = PredictionStrategy::max_weight_mean,
    std::ostream& report_out = std::cout);

using PanelFn = std::function<PlotSpec(const Vector& x, double y_actual)>;

/// One panel per index, each produced by compare(xs.row(i), ys[i]).
GridPlotSpec plot_results_grid(const PanelFn& compare, const Matrix& xs, const Vector& ys,
                               const std::vector<std::size_t>& indices, std::size_t ncols);

/// Standalone SVG 1.1 document. Purely a function of its argument, so equal
/// inputs yield byte-identical documents on every platform.
std::string to_svg(const PlotSpec& spec);
std::string to_svg(const GridPlotSpec& grid);

void render_svg(const PlotSpec& spec, const std::string& path);
void render_svg(const GridPlotSpec& grid, const std::string& path);

}  // namespace uq
