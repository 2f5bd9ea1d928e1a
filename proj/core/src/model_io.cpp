#include "uq/model_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "uq/errors.hpp"

namespace uq {
namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    json data = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols))
        throw ModelFormatError("matrix payload has inconsistent shape");
    Matrix m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = data.at(k++).get<double>();
    return m;
}

json vector_to_json(const Vector& v) {
    json data = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) data.push_back(v[i]);
    return data;
}

Vector vector_from_json(const json& j) {
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j.at(i).get<double>();
    return v;
}

json svgp_payload(const SVGPState& state) {
    return json{{"inducing", matrix_to_json(state.inducing)},
                {"var_mean", vector_to_json(state.var_mean)},
                {"var_chol", matrix_to_json(state.var_chol)},
                {"log_lengthscale", state.kernel.log_lengthscale},
                {"log_outputscale", state.kernel.log_outputscale},
                {"constant", state.mean.constant},
                {"log_noise", state.log_noise}};
}

SVGPState svgp_from_payload(const json& j) {
    SVGPState state;
    state.inducing = matrix_from_json(j.at("inducing"));
    state.var_mean = vector_from_json(j.at("var_mean"));
    state.var_chol = matrix_from_json(j.at("var_chol"));
    state.kernel.log_lengthscale = j.at("log_lengthscale").get<double>();
    state.kernel.log_outputscale = j.at("log_outputscale").get<double>();
    state.mean.constant = j.at("constant").get<double>();
    state.log_noise = j.at("log_noise").get<double>();
    return state;
}

json mdn_payload(const MDNParams& p) {
    return json{{"hidden_units", p.hidden_units},
                {"n_gaussians", p.n_gaussians},
                {"w1", matrix_to_json(p.w1)},
                {"b1", vector_to_json(p.b1)},
                {"w_pi", matrix_to_json(p.w_pi)},
                {"b_pi", vector_to_json(p.b_pi)},
                {"w_mu", matrix_to_json(p.w_mu)},
                {"b_mu", vector_to_json(p.b_mu)},
                {"w_sigma", matrix_to_json(p.w_sigma)},
                {"b_sigma", vector_to_json(p.b_sigma)}};
}

MDNParams mdn_from_payload(const json& j) {
    MDNParams p;
    p.hidden_units = j.at("hidden_units").get<std::size_t>();
    p.n_gaussians = j.at("n_gaussians").get<std::size_t>();
    p.w1 = matrix_from_json(j.at("w1"));
    p.b1 = vector_from_json(j.at("b1"));
    p.w_pi = matrix_from_json(j.at("w_pi"));
    p.b_pi = vector_from_json(j.at("b_pi"));
    p.w_mu = matrix_from_json(j.at("w_mu"));
    p.b_mu = vector_from_json(j.at("b_mu"));
    p.w_sigma = matrix_from_json(j.at("w_sigma"));
    p.b_sigma = vector_from_json(j.at("b_sigma"));
    return p;
}

json metadata_to_json(const ModelMetadata& meta) {
    return json{{"seed", meta.seed},
                {"config", json(meta.config)},
                {"final_metrics", json(meta.final_metrics)}};
}

ModelMetadata metadata_from_json(const json& j) {
    ModelMetadata meta;
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.config = j.at("config").get<std::map<std::string, double>>();
    meta.final_metrics = j.at("final_metrics").get<std::map<std::string, double>>();
    return meta;
}

void write_document(const std::string& path, const json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + path);
}

json read_document(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileNotFound("no such file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return json::parse(buf.str());
    } catch (const json::exception& e) {
        throw ModelFormatError("corrupted model file " + path + ": " + e.what());
    }
}

json model_document(ModelKind kind, const json& payload, const ModelMetadata& meta) {
    return json{{"format_version", kModelFormatVersion},
                {"model_kind", to_string(kind)},
                {"parameters", payload},
                {"metadata", metadata_to_json(meta)}};
}

}  // namespace

std::string to_string(ModelKind kind) {
    return kind == ModelKind::svgp ? "svgp" : "mdn";
}

std::string svgp_to_json(const SVGPState& state) {
    return svgp_payload(state).dump();
}

SVGPState svgp_from_json(const std::string& text) {
    try {
        return svgp_from_payload(json::parse(text));
    } catch (const json::exception& e) {
        throw ModelFormatError(std::string("bad svgp payload: ") + e.what());
    }
}

std::string mdn_to_json(const MDNParams& params) {
    return mdn_payload(params).dump();
}

MDNParams mdn_from_json(const std::string& text) {
    try {
        return mdn_from_payload(json::parse(text));
    } catch (const json::exception& e) {
        throw ModelFormatError(std::string("bad mdn payload: ") + e.what());
    }
}

void save_model(const std::string& path, const SVGPState& state, const ModelMetadata& meta) {
    write_document(path, model_document(ModelKind::svgp, svgp_payload(state), meta));
}

void save_model(const std::string& path, const MDNParams& params, const ModelMetadata& meta) {
    write_document(path, model_document(ModelKind::mdn, mdn_payload(params), meta));
}

ModelFile load_model(const std::string& path) {
    const json doc = read_document(path);
    ModelFile file;
    try {
        file.format_version = doc.at("format_version").get<int>();
        if (file.format_version != kModelFormatVersion)
            throw ModelFormatError("unsupported format_version " +
                                   std::to_string(file.format_version) + " in " + path);
        const auto kind = doc.at("model_kind").get<std::string>();
        const auto& payload = doc.at("parameters");
        if (kind == "svgp") {
            file.kind = ModelKind::svgp;
            file.svgp = svgp_from_payload(payload);
            file.svgp->validate();
        } else if (kind == "mdn") {
            file.kind = ModelKind::mdn;
            file.mdn = mdn_from_payload(payload);
        } else {
            throw ModelFormatError("unknown model_kind '" + kind + "' in " + path);
        }
        file.metadata = metadata_from_json(doc.at("metadata"));
    } catch (const json::exception& e) {
        throw ModelFormatError("corrupted model file " + path + ": " + e.what());
    } catch (const BadConfig& e) {
        throw ModelFormatError("inconsistent parameters in " + path + ": " + e.what());
    }
    return file;
}

}  // namespace uq
