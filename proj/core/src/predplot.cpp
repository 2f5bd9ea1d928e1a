#include "uq/predplot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "uq/errors.hpp"

namespace uq {
namespace {

constexpr double kSqrtTwoPi = 2.5066282746310002;

// Panel margins: left 50, right 15, top 30, bottom 35.
constexpr double kLeft = 50.0;
constexpr double kRight = 15.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 35.0;

std::string num(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string escape_xml(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

const char* vline_color(VLineLabel label) {
    return label == VLineLabel::predicted ? "#d62728" : "#2ca02c";
}

void emit_panel(std::string& out, const PlotSpec& spec) {
    const double w = static_cast<double>(spec.width);
    const double h = static_cast<double>(spec.height);
    const double px_lo = kLeft;
    const double px_hi = w - kRight;
    const double py_top = kTop;
    const double py_bot = h - kBottom;

    double x_lo = spec.density_curve.x[0];
    double x_hi = spec.density_curve.x[spec.density_curve.x.size() - 1];
    for (const VLine& v : spec.vlines) {
        x_lo = std::min(x_lo, v.x);
        x_hi = std::max(x_hi, v.x);
    }
    double y_hi = spec.density_curve.density.maxCoeff() * 1.05;
    if (y_hi <= 0.0) y_hi = 1.0;

    const auto to_px = [&](double x) {
        return px_lo + (x - x_lo) / (x_hi - x_lo) * (px_hi - px_lo);
    };
    const auto to_py = [&](double y) { return py_bot - y / y_hi * (py_bot - py_top); };

    out += "<text x=\"" + num(w / 2.0) + "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" +
           escape_xml(spec.title) + "</text>\n";
    out += "<line x1=\"" + num(px_lo) + "\" y1=\"" + num(py_bot) + "\" x2=\"" + num(px_hi) +
           "\" y2=\"" + num(py_bot) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out += "<line x1=\"" + num(px_lo) + "\" y1=\"" + num(py_top) + "\" x2=\"" + num(px_lo) +
           "\" y2=\"" + num(py_bot) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + num(px_lo) + "\" y=\"" + num(py_bot + 16.0) +
           "\" text-anchor=\"middle\" font-size=\"10\">" + num(x_lo) + "</text>\n";
    out += "<text x=\"" + num(px_hi) + "\" y=\"" + num(py_bot + 16.0) +
           "\" text-anchor=\"middle\" font-size=\"10\">" + num(x_hi) + "</text>\n";
    out += "<text x=\"" + num(px_lo - 4.0) + "\" y=\"" + num(py_bot + 3.0) +
           "\" text-anchor=\"end\" font-size=\"10\">0</text>\n";
    out += "<text x=\"" + num(px_lo - 4.0) + "\" y=\"" + num(py_top + 3.0) +
           "\" text-anchor=\"end\" font-size=\"10\">" + num(y_hi) + "</text>\n";

    out += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (Eigen::Index i = 0; i < spec.density_curve.x.size(); ++i) {
        if (i > 0) out += ' ';
        out += num(to_px(spec.density_curve.x[i])) + "," +
               num(to_py(spec.density_curve.density[i]));
    }
    out += "\"/>\n";

    for (std::size_t i = 0; i < spec.vlines.size(); ++i) {
        const VLine& v = spec.vlines[i];
        const std::string x = num(to_px(v.x));
        out += "<line x1=\"" + x + "\" y1=\"" + num(py_top) + "\" x2=\"" + x + "\" y2=\"" +
               num(py_bot) + "\" stroke=\"" + vline_color(v.label) +
               "\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n";
        out += "<text x=\"" + num(to_px(v.x) + 3.0) + "\" y=\"" +
               num(py_top + 12.0 * static_cast<double>(i + 1)) + "\" font-size=\"10\" fill=\"" +
               vline_color(v.label) + "\">" + to_string(v.label) + "</text>\n";
    }
}

std::string document(double width, double height, const std::string& body) {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(width) +
           "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) +
           "\">\n";
    out += body;
    out += "</svg>\n";
    return out;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << text;
    if (!out) throw IoError("failed writing " + path);
}

}  // namespace

std::string to_string(VLineLabel label) {
    return label == VLineLabel::predicted ? "predicted" : "actual";
}

void PlotSpec::validate() const {
    if (width < 100 || height < 100) throw BadConfig("PlotSpec: canvas too small");
    const auto& c = density_curve;
    if (c.x.size() != c.density.size()) throw BadConfig("PlotSpec: curve sizes differ");
    if (c.x.size() < 2) throw BadConfig("PlotSpec: density curve needs at least 2 points");
    if (!c.x.allFinite() || !c.density.allFinite())
        throw BadConfig("PlotSpec: curve values must be finite");
    for (Eigen::Index i = 1; i < c.x.size(); ++i)
        if (!(c.x[i] > c.x[i - 1])) throw BadConfig("PlotSpec: curve x must be strictly increasing");
    if ((c.density.array() < 0.0).any()) throw BadConfig("PlotSpec: density must be nonnegative");
    for (const VLine& v : vlines)
        if (!std::isfinite(v.x)) throw BadConfig("PlotSpec: vline position must be finite");
}

DensityCurve gaussian_kde(const Vector& samples, const KDEConfig& config) {
    const Eigen::Index n = samples.size();
    if (n < 2) throw BadConfig("gaussian_kde: need at least 2 samples");
    if (config.grid_points < 2) throw BadConfig("gaussian_kde: grid_points must be >= 2");
    if (!samples.allFinite()) throw BadConfig("gaussian_kde: samples must be finite");

    const double mean = samples.mean();
    const double sd =
        std::sqrt((samples.array() - mean).square().sum() / static_cast<double>(n - 1));
    double h = 0.0;
    if (config.bandwidth_rule == BandwidthRule::fixed) {
        if (!(config.fixed_bandwidth > 0.0))
            throw BadConfig("gaussian_kde: fixed bandwidth must be positive");
        h = config.fixed_bandwidth;
    } else if (sd > 0.0) {
        h = sd * std::pow(static_cast<double>(n), -0.2);
    } else {
        h = 1e-3 * std::max(1.0, std::abs(mean));
    }

    const double lo = samples.minCoeff() - 3.0 * h;
    const double hi = samples.maxCoeff() + 3.0 * h;
    const auto g = static_cast<Eigen::Index>(config.grid_points);
    const double step = (hi - lo) / static_cast<double>(g - 1);
    const double scale = 1.0 / (static_cast<double>(n) * h * kSqrtTwoPi);

    DensityCurve curve;
    curve.x.resize(g);
    curve.density.resize(g);
    for (Eigen::Index j = 0; j < g; ++j) {
        const double x = lo + step * static_cast<double>(j);
        curve.x[j] = x;
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double z = (x - samples[i]) / h;
            acc += std::exp(-0.5 * z * z);
        }
        curve.density[j] = scale * acc;
    }
    return curve;
}

PlotSpec compare_distributions_svgpr(const SVGPState& state, const Vector& x,
                                     std::optional<double> y_actual, RngStream& rng,
                                     std::size_t n_samples) {
    if (n_samples < 2) throw BadConfig("compare_distributions_svgpr: need at least 2 samples");
    const GaussianPrediction pred = svgp_predict(state, x);
    const double sd = std::sqrt(pred.variance + state.noise());
    Vector samples(static_cast<Eigen::Index>(n_samples));
    for (Eigen::Index i = 0; i < samples.size(); ++i) samples[i] = pred.mean + sd * rng.normal();

    PlotSpec spec;
    spec.density_curve = gaussian_kde(samples);
    spec.vlines.push_back({pred.mean, VLineLabel::predicted});
    if (y_actual.has_value()) spec.vlines.push_back({*y_actual, VLineLabel::actual});
    spec.title = "Predictive distribution (SVGP)";
    return spec;
}

void print_report(const MixtureReport& report, std::ostream& out) {
    for (Eigen::Index k = 0; k < report.weights.size(); ++k) {
        out << "Component " << (k + 1) << ": weight=" << num(report.weights[k])
            << ", mean=" << num(report.means[k]) << ", variance=" << num(report.variances[k])
            << "\n";
    }
    out.flush();
}

std::pair<PlotSpec, MixtureReport> compare_distributions_mdn(
    const MDNParams& params, const Vector& x, std::optional<double> y_actual, RngStream& rng,
    std::size_t n_samples, PredictionStrategy strategy, std::ostream& report_out) {
    if (n_samples < 2) throw BadConfig("compare_distributions_mdn: need at least 2 samples");
    const MixtureParams mix = mdn_forward(params, x);
    MixtureReport report{mix.pi, mix.mu, mix.sigma.array().square()};
    print_report(report, report_out);

    const Vector samples = mdn_sample(mix, rng, n_samples);
    const double prediction = mdn_predict(mix, strategy, rng);

    PlotSpec spec;
    spec.density_curve = gaussian_kde(samples);
    spec.vlines.push_back({prediction, VLineLabel::predicted});
    if (y_actual.has_value()) spec.vlines.push_back({*y_actual, VLineLabel::actual});
    spec.title = "Predictive distribution (MDN)";
    return {std::move(spec), std::move(report)};
}

GridPlotSpec plot_results_grid(const PanelFn& compare, const Matrix& xs, const Vector& ys,
                               const std::vector<std::size_t>& indices, std::size_t ncols) {
    if (!compare) throw BadConfig("plot_results_grid: empty panel function");
    if (ncols < 1) throw BadConfig("plot_results_grid: ncols must be >= 1");
    if (indices.empty()) throw BadConfig("plot_results_grid: no indices given");
    if (xs.rows() != ys.size()) throw LengthMismatch("plot_results_grid: xs/ys row mismatch");

    GridPlotSpec grid;
    grid.ncols = ncols;
    grid.panels.reserve(indices.size());
    for (std::size_t idx : indices) {
        if (idx >= static_cast<std::size_t>(xs.rows()))
            throw IndexOutOfRange("plot_results_grid: index " + std::to_string(idx) +
                                  " out of range for " + std::to_string(xs.rows()) + " rows");
        const Vector x = xs.row(static_cast<Eigen::Index>(idx)).transpose();
        grid.panels.push_back(compare(x, ys[static_cast<Eigen::Index>(idx)]));
    }
    return grid;
}

std::string to_svg(const PlotSpec& spec) {
    spec.validate();
    std::string body;
    emit_panel(body, spec);
    return document(static_cast<double>(spec.width), static_cast<double>(spec.height), body);
}

std::string to_svg(const GridPlotSpec& grid) {
    if (grid.panels.empty()) throw BadConfig("to_svg: grid has no panels");
    if (grid.ncols < 1) throw BadConfig("to_svg: ncols must be >= 1");
    const std::size_t cell_w = grid.panels.front().width;
    const std::size_t cell_h = grid.panels.front().height;
    for (const PlotSpec& p : grid.panels) {
        p.validate();
        if (p.width != cell_w || p.height != cell_h)
            throw BadConfig("to_svg: grid panels must share one size");
    }
    std::string body;
    for (std::size_t i = 0; i < grid.panels.size(); ++i) {
        const std::size_t row = i / grid.ncols;
        const std::size_t col = i % grid.ncols;
        body += "<g transform=\"translate(" + num(static_cast<double>(col * cell_w)) + " " +
                num(static_cast<double>(row * cell_h)) + ")\">\n";
        emit_panel(body, grid.panels[i]);
        body += "</g>\n";
    }
    const double total_w = static_cast<double>(grid.ncols * cell_w);
    const double total_h = static_cast<double>(grid.nrows() * cell_h);
    return document(total_w, total_h, body);
}

void render_svg(const PlotSpec& spec, const std::string& path) {
    write_file(path, to_svg(spec));
}

void render_svg(const GridPlotSpec& grid, const std::string& path) {
    write_file(path, to_svg(grid));
}

}  // namespace uq
