#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "uq/mdn.hpp"
#include "uq/svgp.hpp"

namespace uq {

constexpr int kModelFormatVersion = 1;

/// A model file that cannot be parsed, has the wrong version, or is
/// internally inconsistent.
struct ModelFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ModelKind { svgp, mdn };

std::string to_string(ModelKind kind);

struct ModelMetadata {
    std::uint64_t seed = 0;
    std::map<std::string, double> config;
    std::map<std::string, double> final_metrics;
};

/// Versioned JSON document holding the named parameter arrays of one model
/// plus training metadata. Doubles are written in shortest round-trip form,
/// so save followed by load reproduces every parameter bit-exactly.
struct ModelFile {
    int format_version = kModelFormatVersion;
    ModelKind kind = ModelKind::svgp;
    std::optional<SVGPState> svgp;
    std::optional<MDNParams> mdn;
    ModelMetadata metadata;
};

/// Parameter payload only; this is also the early-stopping snapshot format.
std::string svgp_to_json(const SVGPState& state);
SVGPState svgp_from_json(const std::string& text);
std::string mdn_to_json(const MDNParams& params);
MDNParams mdn_from_json(const std::string& text);

void save_model(const std::string& path, const SVGPState& state, const ModelMetadata& meta);
void save_model(const std::string& path, const MDNParams& params, const ModelMetadata& meta);
ModelFile load_model(const std::string& path);

}  // namespace uq
