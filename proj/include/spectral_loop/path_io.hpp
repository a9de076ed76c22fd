#pragma once

#include "spectral_loop/continuation.hpp"
#include "spectral_loop/operator_model.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace sloop {

using json = nlohmann::json;

// A path file holds either sampled matrices or a generator.
struct PathDocument {
    std::optional<GeneratorSpec> generator;
    std::vector<Mat> samples;
    int grid = 0;
    bool loop = false;
    double tail_bound = 0.0;
};

// Parse errors carry kind Parse.
PathDocument document_from_json(const json& j);
json document_to_json(const PathDocument& doc);

GeneratorSpec generator_from_json(const json& j);
json generator_to_json(const GeneratorSpec& g);

PathDocument read_document(const std::string& file);
void write_json(const std::string& file, const json& j);

// grid_override > 0 replaces the document's grid for generators.
OperatorPath build_path(const PathDocument& doc, int grid_override = 0);

PathDocument document_from_path(const OperatorPath& path);

// x, track, re, im, abs, certified
void write_braid_csv(std::ostream& os, const EigenBraid& braid);
// x, residual
void write_residuals_csv(std::ostream& os, const std::vector<double>& residuals);

// σ as a list of cycles, fixed points included.
std::vector<std::vector<int>> cycles(const std::vector<int>& perm);

} // namespace sloop
