#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "uq/datagen.hpp"
#include "uq/errors.hpp"
#include "uq/mdn.hpp"
#include "uq/model_io.hpp"
#include "uq/predplot.hpp"
#include "uq/svgp.hpp"
#include "uq/training.hpp"

namespace {

std::string num(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string cell;
    std::istringstream in(text);
    while (std::getline(in, cell, sep)) parts.push_back(cell);
    if (!text.empty() && text.back() == sep) parts.emplace_back();
    return parts;
}

double parse_double(const std::string& text, const std::string& what) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end)
        throw uq::BadConfig(what + ": not a number: \"" + text + "\"");
    return v;
}

uq::ModeSpec parse_mode(const std::string& text) {
    const auto parts = split(text, ',');
    if (parts.size() != 3)
        throw uq::BadConfig("--mode expects MEAN,STD,WEIGHT, got \"" + text + "\"");
    uq::ModeSpec mode;
    mode.mean = parse_double(parts[0], "--mode mean");
    mode.std = parse_double(parts[1], "--mode std");
    mode.weight = parse_double(parts[2], "--mode weight");
    return mode;
}

std::vector<std::size_t> parse_indices(const std::string& text) {
    std::vector<std::size_t> out;
    for (const auto& part : split(text, ',')) {
        std::size_t v = 0;
        const char* begin = part.data();
        const char* end = begin + part.size();
        const auto res = std::from_chars(begin, end, v);
        if (res.ec != std::errc{} || res.ptr != end || part.empty())
            throw uq::BadConfig("--indices expects a comma-separated list of row numbers, got \"" +
                                text + "\"");
        out.push_back(v);
    }
    if (out.empty()) throw uq::BadConfig("--indices must name at least one row");
    return out;
}

uq::PredictionStrategy to_strategy(const std::string& name) {
    if (name == "max-weight-mean") return uq::PredictionStrategy::max_weight_mean;
    if (name == "max-weight-sample") return uq::PredictionStrategy::max_weight_sample;
    if (name == "average-sample") return uq::PredictionStrategy::average_sample;
    throw uq::BadConfig("unknown --strategy \"" + name + "\"");
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw uq::IoError("cannot open for writing: " + path);
    out << text;
    if (!out) throw uq::IoError("failed writing " + path);
}

struct GenerateArgs {
    std::size_t n = 0;
    std::vector<std::string> modes;
    std::uint64_t seed = 0;
    std::string out;
};

struct TrainArgs {
    std::string model;
    std::string data;
    std::string target;
    std::string out;
    std::size_t num_inducing_points = 0;
    std::size_t dense1_units = 0;
    std::size_t n_gaussians = 0;
    std::size_t num_epochs = 100;
    std::size_t batch_size = 64;
    double lr = 0.001;
    std::size_t patience = 10;
    std::uint64_t seed = 0;
    std::size_t num_workers = 0;
};

struct PredictArgs {
    std::string model_file;
    std::string data;
    std::string target;
    std::string out;
    std::string strategy = "max-weight-mean";
    std::size_t n_samples = 100;
    std::uint64_t seed = 0;
};

struct PlotArgs {
    std::string model_file;
    std::string data;
    std::string target;
    std::string indices;
    std::size_t ncols = 1;
    std::string out;
    std::string strategy = "max-weight-mean";
    std::size_t n_samples = 1000;
    std::uint64_t seed = 0;
};

int run_generate(const GenerateArgs& args) {
    if (args.modes.empty()) throw uq::BadConfig("at least one --mode MEAN,STD,WEIGHT is required");
    std::vector<uq::ModeSpec> modes;
    modes.reserve(args.modes.size());
    for (const auto& text : args.modes) modes.push_back(parse_mode(text));
    uq::RngStream rng(args.seed);
    const uq::Vector targets = uq::generate_multi_modal_data(args.n, modes, rng);
    // Constant 1, not 0: a zero input would zero every tanh activation at the
    // zero-bias init and freeze the mixture heads into permanent symmetry.
    const uq::Dataset data = uq::make_dataset(uq::Matrix::Ones(targets.size(), 1), targets);
    uq::save_csv(data, "y", args.out);
    return 0;
}

int run_train(const TrainArgs& args, const CLI::App& sub) {
    const bool svgp = args.model == "svgp";
    if (svgp) {
        if (sub.count("--dense1-units") > 0)
            throw uq::BadConfig("flag not applicable to --model svgp: --dense1-units");
        if (sub.count("--n-gaussians") > 0)
            throw uq::BadConfig("flag not applicable to --model svgp: --n-gaussians");
        if (sub.count("--num-inducing-points") == 0)
            throw uq::BadConfig("--num-inducing-points is required for --model svgp");
    } else {
        if (sub.count("--num-inducing-points") > 0)
            throw uq::BadConfig("flag not applicable to --model mdn: --num-inducing-points");
        if (sub.count("--dense1-units") == 0)
            throw uq::BadConfig("--dense1-units is required for --model mdn");
        if (sub.count("--n-gaussians") == 0)
            throw uq::BadConfig("--n-gaussians is required for --model mdn");
    }

    const uq::Dataset data = uq::load_csv(args.data, args.target);
    uq::TrainConfig config;
    config.num_epochs = args.num_epochs;
    config.batch_size = args.batch_size;
    config.lr = args.lr;
    config.patience = args.patience;
    config.seed = args.seed;
    config.num_workers = args.num_workers;

    uq::ModelMetadata meta;
    meta.seed = args.seed;
    // num_workers is deliberately absent: it is an execution detail that never
    // affects the trained parameters, so files stay identical across worker counts.
    meta.config = {{"num_epochs", static_cast<double>(config.num_epochs)},
                   {"batch_size", static_cast<double>(config.batch_size)},
                   {"lr", config.lr},
                   {"patience", static_cast<double>(config.patience)},
                   {"val_fraction", config.val_fraction}};

    if (svgp) {
        meta.config["num_inducing_points"] = static_cast<double>(args.num_inducing_points);
        const auto [state, history] = uq::train_svgp(data, args.num_inducing_points, config);
        meta.final_metrics = {
            {"best_val_mse", history.best_metric},
            {"best_epoch", static_cast<double>(history.best_epoch)},
            {"stopped_epoch", static_cast<double>(history.stopped_epoch)},
            {"early_stopped", history.stop_reason == uq::StopReason::early_stopped ? 1.0 : 0.0}};
        uq::save_model(args.out, state, meta);
    } else {
        meta.config["dense1_units"] = static_cast<double>(args.dense1_units);
        meta.config["n_gaussians"] = static_cast<double>(args.n_gaussians);
        const auto [params, history] =
            uq::train_mdn(data, args.dense1_units, args.n_gaussians, config);
        meta.final_metrics = {
            {"best_val_nll", history.best_metric},
            {"best_epoch", static_cast<double>(history.best_epoch)},
            {"stopped_epoch", static_cast<double>(history.stopped_epoch)},
            {"early_stopped", history.stop_reason == uq::StopReason::early_stopped ? 1.0 : 0.0}};
        uq::save_model(args.out, params, meta);
    }
    return 0;
}

int run_predict(const PredictArgs& args, const CLI::App& sub) {
    const uq::ModelFile model = uq::load_model(args.model_file);
    const uq::Dataset data =
        args.target.empty() ? uq::load_csv(args.data) : uq::load_csv(args.data, args.target);

    std::ostringstream table;
    if (model.kind == uq::ModelKind::svgp) {
        if (sub.count("--strategy") > 0)
            throw uq::BadConfig("flag not applicable to an svgp model file: --strategy");
        if (sub.count("--n-samples") > 0)
            throw uq::BadConfig("flag not applicable to an svgp model file: --n-samples");
        const auto [mean, variance] = uq::svgp_predict_batch(*model.svgp, data.features);
        const double noise = model.svgp->noise();
        table << "row,mean,variance\n";
        for (Eigen::Index i = 0; i < mean.size(); ++i)
            table << i << ',' << num(mean[i]) << ',' << num(variance[i] + noise) << '\n';
    } else {
        const uq::MDNParams& params = *model.mdn;
        const uq::PredictionStrategy strategy = to_strategy(args.strategy);
        uq::RngStream rng(args.seed);
        table << "row,prediction";
        for (std::size_t k = 1; k <= params.n_gaussians; ++k)
            table << ",pi_" << k << ",mu_" << k << ",sigma_" << k;
        table << '\n';
        for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
            const uq::Vector x = data.features.row(i).transpose();
            const uq::MixtureParams mix = uq::mdn_forward(params, x);
            const double prediction = uq::mdn_predict(mix, strategy, rng, args.n_samples);
            table << i << ',' << num(prediction);
            for (Eigen::Index k = 0; k < mix.pi.size(); ++k)
                table << ',' << num(mix.pi[k]) << ',' << num(mix.mu[k]) << ',' << num(mix.sigma[k]);
            table << '\n';
        }
    }

    std::cout << table.str() << std::flush;
    if (!args.out.empty()) write_text_file(args.out, table.str());
    return 0;
}

int run_plot(const PlotArgs& args, const CLI::App& sub) {
    const uq::ModelFile model = uq::load_model(args.model_file);
    const uq::Dataset data = uq::load_csv(args.data, args.target);
    const auto indices = parse_indices(args.indices);

    uq::RngStream rng(args.seed);
    uq::PanelFn panel;
    if (model.kind == uq::ModelKind::svgp) {
        if (sub.count("--strategy") > 0)
            throw uq::BadConfig("flag not applicable to an svgp model file: --strategy");
        panel = [&](const uq::Vector& x, double y_actual) {
            return uq::compare_distributions_svgpr(*model.svgp, x, y_actual, rng, args.n_samples);
        };
    } else {
        const uq::PredictionStrategy strategy = to_strategy(args.strategy);
        panel = [&, strategy](const uq::Vector& x, double y_actual) {
            return uq::compare_distributions_mdn(*model.mdn, x, y_actual, rng, args.n_samples,
                                                 strategy)
                .first;
        };
    }

    const uq::GridPlotSpec grid =
        uq::plot_results_grid(panel, data.features, data.targets, indices, args.ncols);
    if (grid.panels.size() == 1) {
        uq::render_svg(grid.panels.front(), args.out);
    } else {
        uq::render_svg(grid, args.out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Uncertainty-aware regression toolkit: sparse variational GP and "
                 "mixture density network training, prediction, and plotting.",
                 "uq"};
    app.require_subcommand(1);

    GenerateArgs gen;
    CLI::App* gen_cmd = app.add_subcommand("generate", "Sample a multi-modal dataset to CSV");
    gen_cmd->add_option("--n", gen.n, "Number of rows")->required()->check(CLI::PositiveNumber);
    gen_cmd->add_option("--mode", gen.modes, "Mixture mode as MEAN,STD,WEIGHT (repeatable)")
        ->required();
    gen_cmd->add_option("--seed", gen.seed, "RNG seed");
    gen_cmd->add_option("--out", gen.out, "Output CSV path")->required();

    TrainArgs train;
    CLI::App* train_cmd = app.add_subcommand("train", "Train a model on a CSV dataset");
    train_cmd->add_option("--model", train.model, "Model kind")
        ->required()
        ->check(CLI::IsMember({"svgp", "mdn"}));
    train_cmd->add_option("--data", train.data, "Input CSV path")->required();
    train_cmd->add_option("--target", train.target, "Target column name")->required();
    train_cmd->add_option("--out", train.out, "Output model path")->required();
    train_cmd->add_option("--num-inducing-points", train.num_inducing_points,
                          "Inducing point count (svgp only)");
    train_cmd->add_option("--dense1-units", train.dense1_units, "Hidden layer width (mdn only)");
    train_cmd->add_option("--n-gaussians", train.n_gaussians, "Mixture components (mdn only)");
    train_cmd->add_option("--num-epochs", train.num_epochs, "Epoch budget")->capture_default_str();
    train_cmd->add_option("--batch-size", train.batch_size, "Mini-batch size")->capture_default_str();
    train_cmd->add_option("--lr", train.lr, "Adam learning rate")->capture_default_str();
    train_cmd->add_option("--patience", train.patience, "Early stopping patience")->capture_default_str();
    train_cmd->add_option("--seed", train.seed, "RNG seed")->capture_default_str();
    train_cmd->add_option("--num-workers", train.num_workers, "Batch materialization threads")
        ->capture_default_str();

    PredictArgs predict;
    CLI::App* predict_cmd =
        app.add_subcommand("predict", "Predict with uncertainty for every CSV row");
    predict_cmd->add_option("--model-file", predict.model_file, "Trained model path")->required();
    predict_cmd->add_option("--data", predict.data, "Input CSV path")->required();
    predict_cmd->add_option("--target", predict.target,
                            "Target column to exclude from the features");
    predict_cmd->add_option("--out", predict.out, "Also write the table to this CSV");
    predict_cmd
        ->add_option("--strategy", predict.strategy, "MDN scalar prediction strategy")
        ->check(CLI::IsMember({"max-weight-mean", "max-weight-sample", "average-sample"}));
    predict_cmd->add_option("--n-samples", predict.n_samples, "Sample count for average-sample")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    predict_cmd->add_option("--seed", predict.seed, "RNG seed for sampling strategies")
        ->capture_default_str();

    PlotArgs plot;
    CLI::App* plot_cmd = app.add_subcommand("plot", "Render predictive distribution SVGs");
    plot_cmd->add_option("--model-file", plot.model_file, "Trained model path")->required();
    plot_cmd->add_option("--data", plot.data, "Input CSV path")->required();
    plot_cmd->add_option("--target", plot.target, "Target column name")->required();
    plot_cmd->add_option("--indices", plot.indices, "Comma-separated row indices")->required();
    plot_cmd->add_option("--ncols", plot.ncols, "Grid columns")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    plot_cmd->add_option("--out", plot.out, "Output SVG path")->required();
    plot_cmd->add_option("--strategy", plot.strategy, "MDN scalar prediction strategy")
        ->check(CLI::IsMember({"max-weight-mean", "max-weight-sample", "average-sample"}));
    plot_cmd->add_option("--n-samples", plot.n_samples, "Draws behind each KDE")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    plot_cmd->add_option("--seed", plot.seed, "RNG seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(gen_cmd)) return run_generate(gen);
        if (app.got_subcommand(train_cmd)) return run_train(train, *train_cmd);
        if (app.got_subcommand(predict_cmd)) return run_predict(predict, *predict_cmd);
        if (app.got_subcommand(plot_cmd)) return run_plot(plot, *plot_cmd);
    } catch (const uq::BadConfig& e) {
        std::cerr << "uq: error: " << e.what() << "\n"
                  << "Use 'uq <command> --help' for usage.\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "uq: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
