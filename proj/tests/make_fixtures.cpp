// Writes the closed-form fixtures. Usage: make_fixtures [DIR]
#include "closed_forms.hpp"
#include "fuchsian/document.hpp"
#include "fuchsian/reduction.hpp"

#include <filesystem>
#include <functional>
#include <iostream>

using namespace fuchsian;
namespace cf = closed_forms;

namespace {

constexpr double kX = 4.0, kH = 1e-5, kFar = 9.0;

json samples(const std::function<FuchsianSystem(double)>& f) {
    json s = json::array();
    for (double x : {kX - kH, kX + kH, kFar}) s.push_back({{"x", x}, {"system", system_to_json(f(x))}});
    return s;
}

SystemDocument family(const std::string& name, const std::function<FuchsianSystem(double)>& f) {
    SystemDocument d;
    d.system = f(kX);
    d.labels = {"0", "x", "1"};
    d.annotations = {{"family", name},
                     {"x", kX},
                     {"branch", {{"sqrt", "principal"}, {"log", "principal"}}},
                     {"samples", samples(f)}};
    return d;
}

}  // namespace

int main(int argc, char** argv) {
    const std::filesystem::path dir = argc > 1 ? argv[1] : FUCHSIAN_FIXTURE_DIR_DEFAULT;
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const SystemDocument& d) {
        save_text((dir / name).string(), print_document(d));
        std::cout << "wrote " << (dir / name).string() << "\n";
    };

    auto b = family("B", cf::b_system);
    {
        const double s = std::sqrt(kX), L = std::log((s + 1) / (s - 1));
        b.annotations["down_shift_slot"] = {{"slot", {1, 0, 1}}, {"value", s / (kX - 1) + L / 2}};
    }
    write("b.json", b);
    write("a_printed.json", family("A-printed", cf::a_printed));
    write("a_corrected.json", family("A", cf::a_corrected));

    auto e = family("Ex2.11", cf::ex211);
    json printed = json::array();
    for (double x : {kX, kFar}) printed.push_back({{"x", x}, {"matrix", matrix_to_json(cf::ex211_psi1_printed(x))}});
    e.annotations["psi1_printed"] = printed;
    e.annotations["r_inf"] = matrix_to_json(cf::ex211_r_inf());
    e.annotations["reference"] = {{"x", kFar}, {"slot", {1, 0, 1}}, {"value", cf::ex211_slot12(kFar)}};
    write("ex211.json", e);

    ToleranceConfig tol;
    SystemDocument att;
    att.system = attach_identity_singularity(cf::b_system(kX), cplx(0.5, -1.5), {1, -1}, tol).system;
    att.labels = {"0", "x", "1", "attached"};
    att.annotations = {{"family", "B+identity"}, {"x", kX}, {"attached_pole", 4}};
    write("b_attached.json", att);
}
