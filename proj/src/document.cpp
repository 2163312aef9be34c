#include "fuchsian/document.hpp"

#include <fstream>
#include <regex>
#include <sstream>

namespace fuchsian {

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ValidationError("complex number must be a [re, im] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

json matrix_to_json(const Mat& a) {
    json rows = json::array();
    for (int i = 0; i < a.rows(); ++i) {
        json r = json::array();
        for (int k = 0; k < a.cols(); ++k) r.push_back(complex_to_json(a(i, k)));
        rows.push_back(r);
    }
    return rows;
}

Mat matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) throw ValidationError("matrix must be a nested array");
    const auto rows = j.size(), cols = j[0].size();
    Mat a(rows, cols);
    for (size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols) throw ValidationError("ragged matrix rows");
        for (size_t k = 0; k < cols; ++k) a(i, k) = complex_from_json(j[i][k]);
    }
    return a;
}

json system_to_json(const FuchsianSystem& s) {
    json poles = json::array(), res = json::array();
    for (auto u : s.poles) poles.push_back(complex_to_json(u));
    for (const auto& a : s.residues) res.push_back(matrix_to_json(a));
    return {{"m", s.m}, {"poles", poles}, {"residues", res}};
}

json document_to_json(const SystemDocument& d) {
    json j = system_to_json(d.system);
    j["schema_version"] = kSchemaVersion;
    if (!d.labels.empty()) j["labels"] = d.labels;
    if (!d.annotations.empty()) j["annotations"] = d.annotations;
    return j;
}

SystemDocument document_from_json(const json& j) {
    try {
        if (!j.is_object()) throw ValidationError("document must be a JSON object");
        if (j.value("schema_version", 0) != kSchemaVersion)
            throw ValidationError("unsupported schema_version");
        SystemDocument d;
        std::vector<cplx> poles;
        std::vector<Mat> res;
        for (const auto& p : j.at("poles")) poles.push_back(complex_from_json(p));
        for (const auto& r : j.at("residues")) res.push_back(matrix_from_json(r));
        d.system = build_system(poles, res);
        if (j.contains("m") && j["m"].get<int>() != d.system.m) throw ValidationError("m does not match the residues");
        if (j.contains("labels")) {
            d.labels = j["labels"].get<std::vector<std::string>>();
            if (d.labels.size() != poles.size()) throw ValidationError("one label per pole");
        }
        if (j.contains("annotations")) d.annotations = j["annotations"];
        return d;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed document: ") + e.what());
    }
}

SystemDocument parse_document(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("JSON parse error: ") + e.what());
    }
    return document_from_json(j);
}

std::string print_document(const SystemDocument& d) { return document_to_json(d).dump(1) + "\n"; }

SystemDocument load_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_document(ss.str());
}

void save_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << text;
}

namespace {

const char* kind_name(ElementaryGauge::Kind k) {
    using K = ElementaryGauge::Kind;
    switch (k) {
        case K::Constant: return "constant";
        case K::UpShift: return "up_shift";
        case K::DownShift: return "down_shift";
        case K::Conformal: return "conformal";
        case K::ConformalInverse: return "conformal_inverse";
        case K::Projection: return "projection";
    }
    return "?";
}

ElementaryGauge::Kind kind_from(const std::string& s) {
    using K = ElementaryGauge::Kind;
    for (K k : {K::Constant, K::UpShift, K::DownShift, K::Conformal, K::ConformalInverse, K::Projection})
        if (s == kind_name(k)) return k;
    throw ValidationError("unknown gauge kind " + s);
}

}  // namespace

json gauge_to_json(const ElementaryGauge& g) {
    json j = {{"kind", kind_name(g.kind)}};
    if (g.payload.size() > 0) j["payload"] = matrix_to_json(g.payload);
    if (g.kind == ElementaryGauge::Kind::Conformal || g.kind == ElementaryGauge::Kind::ConformalInverse) {
        j["center"] = complex_to_json(g.center);
        j["index"] = g.index;
        j["keep_center"] = g.keep_center;
    }
    if (g.kind == ElementaryGauge::Kind::Projection) j["block"] = g.block;
    if (g.norm != 0.0) j["norm"] = g.norm;
    if (g.is_shift()) j["det_residual"] = gauge_det_residual(g);
    if (!g.note.empty()) j["note"] = g.note;
    return j;
}

ElementaryGauge gauge_from_json(const json& j) {
    ElementaryGauge g;
    g.kind = kind_from(j.at("kind").get<std::string>());
    if (j.contains("payload")) g.payload = matrix_from_json(j["payload"]);
    if (j.contains("center")) g.center = complex_from_json(j["center"]);
    g.index = j.value("index", -1);
    g.keep_center = j.value("keep_center", false);
    g.block = j.value("block", 0);
    g.norm = j.value("norm", 0.0);
    g.note = j.value("note", "");
    return g;
}

json chain_to_json(const GaugeChain& c, const FuchsianSystem& source, const FuchsianSystem& target) {
    json steps = json::array();
    for (const auto& g : c.steps) steps.push_back(gauge_to_json(g));
    json shift = json::array();
    for (int i = 0; i < c.declared_shift.size(); ++i) shift.push_back(complex_to_json(c.declared_shift(i)));
    return {{"schema_version", kSchemaVersion},
            {"steps", steps},
            {"source_fingerprint", c.source_fingerprint},
            {"target_fingerprint", c.target_fingerprint},
            {"declared_perm", c.declared_perm},
            {"declared_shift", shift},
            {"source", system_to_json(source)},
            {"target", system_to_json(target)}};
}

GaugeChain chain_from_json(const json& j) {
    try {
        GaugeChain c;
        for (const auto& s : j.at("steps")) c.steps.push_back(gauge_from_json(s));
        c.source_fingerprint = j.value("source_fingerprint", "");
        c.target_fingerprint = j.value("target_fingerprint", "");
        if (j.contains("declared_perm")) c.declared_perm = j["declared_perm"].get<std::vector<int>>();
        if (j.contains("declared_shift")) {
            c.declared_shift = Vec(j["declared_shift"].size());
            for (size_t i = 0; i < j["declared_shift"].size(); ++i)
                c.declared_shift(i) = complex_from_json(j["declared_shift"][i]);
        }
        return c;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed chain: ") + e.what());
    }
}

json chart_to_json(const DarbouxChart& c) {
    auto arr = [](const std::vector<cplx>& v) {
        json a = json::array();
        for (auto z : v) a.push_back(complex_to_json(z));
        return a;
    };
    json ex = json::array();
    for (const auto& e : c.exponents) ex.push_back(arr(e));
    return {{"m", c.m}, {"g", c.g}, {"q", arr(c.q)}, {"p", arr(c.p)}, {"u", arr(c.u)},
            {"exponents", ex}, {"lambda_inf", arr(c.lambda_inf)}, {"hamiltonians", arr(c.hamiltonians)},
            {"infinity_swapped", c.infinity_swapped}};
}

DarbouxChart chart_from_json(const json& j) {
    try {
        auto arr = [](const json& a) {
            std::vector<cplx> v;
            for (const auto& z : a) v.push_back(complex_from_json(z));
            return v;
        };
        DarbouxChart c;
        c.m = j.at("m").get<int>();
        c.g = j.at("g").get<int>();
        c.q = arr(j.at("q"));
        c.p = arr(j.at("p"));
        c.u = arr(j.at("u"));
        for (const auto& e : j.value("exponents", json::array())) c.exponents.push_back(arr(e));
        c.lambda_inf = arr(j.value("lambda_inf", json::array()));
        c.hamiltonians = arr(j.value("hamiltonians", json::array()));
        c.infinity_swapped = j.value("infinity_swapped", false);
        return c;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed chart: ") + e.what());
    }
}

cplx parse_complex(const std::string& text) {
    std::string s;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
    if (!s.empty() && s.front() == '[') {
        try {
            return complex_from_json(json::parse(s));
        } catch (const json::exception&) {
            throw ValidationError("bad complex literal " + text);
        }
    }
    static const std::regex full(
        R"(^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?(?:([+-](?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)[ij])?$)");
    static const std::regex imag_only(R"(^([+-]?(?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)[ij]$)");
    std::smatch m;
    auto coef = [](const std::string& c) {
        if (c.empty() || c == "+") return 1.0;
        if (c == "-") return -1.0;
        return std::stod(c);
    };
    if (std::regex_match(s, m, imag_only)) return {0.0, coef(m[1].str())};
    if (!s.empty() && std::regex_match(s, m, full) && (m[1].matched || m[2].matched))
        return {m[1].matched ? std::stod(m[1].str()) : 0.0, m[2].matched ? coef(m[2].str()) : 0.0};
    throw ValidationError("bad complex literal " + text);
}

}  // namespace fuchsian
