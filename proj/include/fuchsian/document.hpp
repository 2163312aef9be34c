#pragma once

#include "fuchsian/core.hpp"
#include "fuchsian/darboux.hpp"
#include "fuchsian/reduction.hpp"

#include <json.hpp>

#include <string>

namespace fuchsian {

using json = nlohmann::json;

constexpr int kSchemaVersion = 1;

struct SystemDocument {
    FuchsianSystem system;
    std::vector<std::string> labels;  // one per pole, optional
    json annotations = json::object();
};

json complex_to_json(cplx z);
cplx complex_from_json(const json& j);
json matrix_to_json(const Mat& a);
Mat matrix_from_json(const json& j);
json system_to_json(const FuchsianSystem& s);

json document_to_json(const SystemDocument& d);
// Throws ValidationError on malformed input.
SystemDocument document_from_json(const json& j);
SystemDocument parse_document(const std::string& text);
std::string print_document(const SystemDocument& d);
SystemDocument load_document(const std::string& path);
void save_text(const std::string& path, const std::string& text);

json gauge_to_json(const ElementaryGauge& g);
ElementaryGauge gauge_from_json(const json& j);
// the chain artifact carries its source and target systems for replay
json chain_to_json(const GaugeChain& c, const FuchsianSystem& source, const FuchsianSystem& target);
GaugeChain chain_from_json(const json& j);

json chart_to_json(const DarbouxChart& c);
DarbouxChart chart_from_json(const json& j);

// "3", "-1.5+2i", "2i", "[re, im]"
cplx parse_complex(const std::string& s);

}  // namespace fuchsian
