#include "fuchsian/cli.hpp"
#include "fuchsian/darboux.hpp"
#include "fuchsian/document.hpp"
#include "fuchsian/flow.hpp"
#include "fuchsian/monodromy.hpp"
#include "fuchsian/reduction.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fuchsian {

namespace {

struct Common {
    double tol = 0;  // 0: environment or built-in default
    std::string out;
    std::string chain;
    bool as_json = false;
};

ToleranceConfig tolerance(const Common& c) {
    ToleranceConfig t;
    double rel = c.tol;
    if (rel <= 0)
        if (const char* env = std::getenv("FUCHSIAN_TOL")) {
            try {
                rel = std::stod(env);
            } catch (const std::exception&) {
                throw ValidationError("FUCHSIAN_TOL is not a number");
            }
        }
    if (rel > 0) {
        t.ode_rel_tol = rel;
        t.ode_abs_tol = rel * 1e-2;
    }
    t.validate();
    return t;
}

std::string fmt(cplx z) {
    std::ostringstream os;
    os << std::setprecision(10) << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
    return os.str();
}

std::string fmt(const Mat& a) {
    std::ostringstream os;
    for (int i = 0; i < a.rows(); ++i) {
        os << "    [";
        for (int k = 0; k < a.cols(); ++k) os << (k ? ", " : "") << fmt(a(i, k));
        os << "]\n";
    }
    return os.str();
}

void emit_document(const SystemDocument& d, const Common& c, std::ostream& out) {
    if (c.out.empty() || c.out == "-")
        out << print_document(d);
    else
        save_text(c.out, print_document(d));
}

std::string chain_path(const Common& c) {
    if (!c.chain.empty()) return c.chain;
    if (c.out.empty() || c.out == "-") return "";
    return c.out + ".chain.json";
}

void emit_chain(const GaugeChain& g, const FuchsianSystem& src, const FuchsianSystem& dst, const Common& c,
                std::ostream& out) {
    const std::string path = chain_path(c);
    const std::string text = chain_to_json(g, src, dst).dump(1) + "\n";
    if (path.empty())
        out << text;
    else
        save_text(path, text);
}

bool coordinate_flag(const Mat& sub) {
    const int l = static_cast<int>(sub.cols());
    return max_abs(sub.bottomRows(sub.rows() - l)) < 1e-6;
}

int cmd_monodromy(const std::string& file, const Common& c, double radius, std::optional<double> angle,
                  std::ostream& out) {
    const auto doc = load_document(file);
    const auto tol = tolerance(c);
    LoopBasis basis;
    basis.basepoint_radius = radius;
    if (angle) basis.cut_direction = std::polar(1.0, *angle);
    MonodromyData d = monodromy_matrices(doc.system, basis, tol);
    std::optional<double> n4;
    try {
        n4 = connection_matrices(doc.system, basis, tol).n4_residual;
    } catch (const std::exception&) {
    }
    const auto scalars = scalar_monodromy_indices(d, 1e-6);
    std::vector<std::pair<int, bool>> reducible;
    for (int l = 1; l < doc.system.m; ++l)
        if (auto s = invariant_subspace(d, l, 1e-6)) reducible.push_back({l, coordinate_flag(*s)});

    if (c.as_json) {
        json j;
        json ms = json::array(), tr = json::array(), dets = json::array();
        for (const auto& mk : d.monodromies) {
            ms.push_back(matrix_to_json(mk));
            tr.push_back(complex_to_json(mk.trace()));
            dets.push_back(complex_to_json(mk.determinant()));
        }
        j["monodromies"] = ms;
        j["m_inf"] = matrix_to_json(d.m_inf);
        j["traces"] = tr;
        j["determinants"] = dets;
        j["ordering"] = d.ordering;
        j["closure_residual"] = d.closure_residual;
        j["inf_check"] = d.inf_check;
        if (n4) j["n4_residual"] = *n4;
        json sc = json::array();
        for (const auto& s : scalars)
            sc.push_back({{"pole", s.index + 1}, {"mu", complex_to_json(s.mu)}, {"consistent", s.consistent}});
        j["scalar"] = sc;
        json rd = json::array();
        for (auto [l, tri] : reducible) rd.push_back({{"l", l}, {"upper_triangular", tri}});
        j["reducible"] = rd;
        out << j.dump(1) << "\n";
        return 0;
    }
    for (int k = 0; k < doc.system.n(); ++k)
        out << "M_" << k + 1 << " (pole " << fmt(doc.system.poles[k]) << "), tr = " << fmt(d.monodromies[k].trace())
            << "\n" << fmt(d.monodromies[k]);
    out << "M_inf, tr = " << fmt(d.m_inf.trace()) << "\n" << fmt(d.m_inf);
    out << "loop order:";
    for (int k : d.ordering) out << " " << k + 1;
    out << "\nclosure residual: " << d.closure_residual << "\n";
    out << "M_inf vs local data: " << d.inf_check << "\n";
    if (n4) out << "connection consistency: " << *n4 << "\n";
    for (const auto& s : scalars)
        out << "scalar monodromy at pole " << s.index + 1 << ": mu=" << fmt(s.mu)
            << (s.consistent ? "" : " (inconsistent with exponents)") << "\n";
    for (auto [l, tri] : reducible) out << "reducible: l=" << l << (tri ? " (upper-triangular)" : "") << "\n";
    if (reducible.empty()) out << "no invariant subspace found\n";
    return 0;
}

int cmd_flow(const std::string& file, const Common& c, int move, const std::string& to, int steps,
             const std::string& trajectory, std::ostream& out) {
    auto doc = load_document(file);
    const auto tol = tolerance(c);
    const int k = move - 1;
    if (k < 0 || k >= doc.system.n()) throw ValidationError("--move must name a pole 1..n");
    if (steps < 1) throw ValidationError("--steps must be positive");
    const cplx target = parse_complex(to);
    const cplx start = doc.system.poles[k];
    LeveltOptions lopt;
    lopt.resonance_eps = tol.resonance_eps;
    auto state = initial_state(doc.system, lopt);
    json traj = json::array();
    traj.push_back({{"u", complex_to_json(start)}, {"system", system_to_json(state.system)}});
    for (int s = 1; s <= steps; ++s) {
        const cplx next = start + (target - start) * (double(s) / steps);
        state = integrate_schlesinger(state, k, next, PathSpec{}, tol);
        traj.push_back({{"u", complex_to_json(next)}, {"system", system_to_json(state.system)}});
    }
    if (!trajectory.empty()) save_text(trajectory, traj.dump(1) + "\n");
    doc.system = state.system;
    doc.annotations["flow"] = {{"pole", move}, {"from", complex_to_json(start)}, {"to", complex_to_json(target)}};
    emit_document(doc, c, out);
    return 0;
}

int cmd_reduce(const std::string& file, const Common& c, const std::string& subspace, std::ostream& out,
               std::ostream& err) {
    auto doc = load_document(file);
    const auto tol = tolerance(c);
    std::optional<Mat> sub;
    if (subspace != "auto") {
        try {
            sub = matrix_from_json(json::parse(subspace));
        } catch (const json::exception&) {
            throw ValidationError("--subspace must be 'auto' or a JSON matrix");
        }
    }
    const auto src = doc.system;
    const Reduction r = reduce_reducible(doc.system, sub, tol);
    doc.system = r.system;
    json shift = json::array();
    for (int i = 0; i < r.chain.declared_shift.size(); ++i) shift.push_back(r.chain.declared_shift(i).real());
    doc.annotations["reduction"] = {{"l", r.split.l}, {"N", r.N}, {"declared_shift", shift},
                                    {"declared_perm", r.chain.declared_perm}, {"prezero_norm", r.prezero_norm}};
    err << "reduced: l=" << r.split.l << " N=" << r.N << " shift=" << shift.dump()
        << " lower-left before projection " << r.prezero_norm << "\n";
    emit_document(doc, c, out);
    emit_chain(r.chain, src, r.system, c, out);
    return 0;
}

int cmd_erase(const std::string& file, const Common& c, int pole, std::ostream& out, std::ostream& err) {
    auto doc = load_document(file);
    const auto tol = tolerance(c);
    const auto src = doc.system;
    const auto r = erase_identity_singularity(doc.system, pole - 1, tol);
    doc.system = r.system;
    if (!doc.labels.empty()) doc.labels.erase(doc.labels.begin() + (pole - 1));
    err << "erased pole " << pole << ", leftover residue " << r.leftover << "\n";
    emit_document(doc, c, out);
    emit_chain(r.chain, src, r.system, c, out);
    return 0;
}

int cmd_attach(const std::string& file, const Common& c, const std::string& at, const std::vector<int>& exps,
               std::ostream& out) {
    auto doc = load_document(file);
    const auto tol = tolerance(c);
    const auto src = doc.system;
    const auto r = attach_identity_singularity(doc.system, parse_complex(at), exps, tol);
    doc.system = r.system;
    if (!doc.labels.empty()) doc.labels.push_back("attached");
    emit_document(doc, c, out);
    emit_chain(r.chain, src, r.system, c, out);
    return 0;
}

int cmd_darboux(const std::string& file, const Common& c, int component, std::ostream& out) {
    const auto doc = load_document(file);
    const auto eq = to_scalar(doc.system, component - 1);
    const auto q = apparent_singularities(eq);
    const auto p = momenta(eq, q);
    const auto h = darboux_hamiltonians(eq);
    const auto cert = no_log_certificate(eq);
    const int g = darboux_genus(2, doc.system.n());
    json j;
    j["g"] = g;
    j["apparent_count"] = q.size();
    json jq = json::array(), jp = json::array(), jh = json::array(), jc = json::array();
    for (auto z : q) jq.push_back(complex_to_json(z));
    for (auto z : p) jp.push_back(complex_to_json(z));
    for (auto z : h) jh.push_back(complex_to_json(z));
    for (const auto& x : cert)
        jc.push_back({{"q", complex_to_json(x.q)}, {"exponent_residual", x.exponent_residual}, {"residual", x.residual}});
    j["q"] = jq;
    j["p"] = jp;
    j["hamiltonians"] = jh;
    j["no_log"] = jc;
    if (component == 1 && static_cast<int>(q.size()) == g) {
        try {
            const auto chart = darboux_chart(doc.system);
            const auto hs = hamiltonians_from_chart(chart);
            double dev = 0;
            for (size_t k = 0; k < hs.size(); ++k) dev = std::max(dev, std::abs(hs[k] - h[k]));
            j["hamiltonian_solve_residual"] = dev;
        } catch (const ValidationError& e) {
            j["chart_note"] = e.what();
        }
    }
    if (static_cast<int>(q.size()) != g) j["diagnostic"] = "apparent-singularity count differs from g (non-generic)";
    (void)c;
    out << j.dump(1) << "\n";
    return 0;
}

int cmd_symmetry(const std::string& file, const Common& c, const std::string& op, int k, std::ostream& out,
                 std::ostream& err) {
    auto doc = load_document(file);
    const int n = doc.system.n();
    if (op == "Sk") {
        if (k < 2 || k > n) throw ValidationError("--k must be in 2..n");
        // reflection z -> u_1 + u_k - z keeps every residue
        const cplx s = doc.system.poles[0] + doc.system.poles[k - 1];
        for (auto& u : doc.system.poles) u = s - u;
        doc.system = build_system(doc.system.poles, doc.system.residues);
        if (doc.system.m == 2) {
            try {
                err << "chart: " << chart_to_json(darboux_chart(doc.system)).dump() << "\n";
            } catch (const ValidationError&) {
            }
        }
        emit_document(doc, c, out);
        return 0;
    }
    if (op == "Sinf") {
        if (doc.system.m != 2) throw ValidationError("S_inf is available for 2×2 systems only");
        const auto chart = apply_Sinf(darboux_chart(doc.system));
        doc.system = reconstruct_m2(chart);
        doc.labels.clear();
        doc.annotations["symmetry"] = {{"op", "Sinf"}, {"swap", "pole 1 <-> infinity"}, {"chart", chart_to_json(chart)}};
        emit_document(doc, c, out);
        return 0;
    }
    throw ValidationError("--op must be Sk or Sinf");
}

int cmd_replay(const std::string& file, std::ostream& out) {
    std::ifstream in(file);
    if (!in) throw ValidationError("cannot read " + file);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("chain parse error: ") + e.what());
    }
    auto wrap = [](json s) {
        s["schema_version"] = kSchemaVersion;
        return document_from_json(s).system;
    };
    const auto chain = chain_from_json(j);
    const auto src = wrap(j.at("source"));
    const auto dst = wrap(j.at("target"));
    const auto got = apply_chain(src, chain);
    double dev = 0;
    if (got.n() != dst.n() || got.m != dst.m) throw NumericError("replay produced a different shape");
    for (int k = 0; k < got.n(); ++k) {
        dev = std::max(dev, std::abs(got.poles[k] - dst.poles[k]));
        dev = std::max(dev, max_abs(got.residues[k] - dst.residues[k]));
    }
    double worst_det = 0;
    for (const auto& g : chain.steps) worst_det = std::max(worst_det, gauge_det_residual(g));
    out << "replay deviation " << dev << ", steps " << chain.steps.size() << ", max |det H - 1| " << worst_det << "\n";
    if (dev > 1e-8) throw NumericError("replay does not reproduce the saved target");
    return 0;
}

int cmd_verify(const std::string& dir, bool list, std::ostream& out) {
    const auto checks = paper_checks();
    if (list) {
        for (const auto& c : checks) out << c.name << "  " << c.description << "\n";
        return 0;
    }
    int failed = 0, errata = 0;
    for (const auto& c : checks) {
        CheckOutcome r;
        try {
            r = c.run(dir);
        } catch (const std::exception& e) {
            r = {CheckOutcome::Status::Fail, std::string("error: ") + e.what()};
        }
        const char* tag = r.status == CheckOutcome::Status::Pass   ? "PASS"
                          : r.status == CheckOutcome::Status::Fail ? "FAIL"
                                                                   : "KNOWN-ERRATUM";
        if (r.status == CheckOutcome::Status::Fail) ++failed;
        if (r.status == CheckOutcome::Status::KnownErratum) ++errata;
        out << "[" << tag << "] " << c.name << ": " << r.detail << "\n";
    }
    out << checks.size() - failed - errata << " passed, " << failed << " failed, " << errata
        << " known errata\n";
    return failed == 0 ? 0 : 2;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fuchsian systems: monodromy, Schlesinger flow, gauge reductions, Darboux charts"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* sub, bool outputs) {
        sub->add_option("--tol", common.tol, "ODE relative tolerance (default: $FUCHSIAN_TOL or 1e-12)");
        if (outputs) {
            sub->add_option("-o,--out", common.out, "output document (default stdout)");
            sub->add_option("--chain", common.chain, "gauge chain artifact (default <out>.chain.json)");
        }
    };

    std::string file;
    auto* mono = app.add_subcommand("monodromy", "monodromy matrices and diagnostics");
    mono->add_option("file", file)->required();
    add_common(mono, false);
    double radius = 0;
    std::optional<double> angle;
    mono->add_option("--radius", radius, "basepoint radius");
    mono->add_option("--cut-angle", angle, "direction of the branch cuts in radians");
    bool table = false;
    mono->add_flag("--json", common.as_json);
    mono->add_flag("--table", table);

    auto* flow = app.add_subcommand("flow", "move one pole along the Schlesinger flow");
    flow->add_option("file", file)->required();
    add_common(flow, true);
    int move = 0, steps = 1;
    std::string to, trajectory;
    flow->add_option("--move", move, "pole index (1-based)")->required();
    flow->add_option("--to", to, "target position")->required();
    flow->add_option("--steps", steps, "number of straight legs");
    flow->add_option("--trajectory", trajectory, "write the intermediate systems here");

    auto* red = app.add_subcommand("reduce", "gauge a reducible system to block-triangular form");
    red->add_option("file", file)->required();
    add_common(red, true);
    std::string subspace = "auto";
    red->add_option("--subspace", subspace, "'auto' or a JSON basis matrix");

    auto* er = app.add_subcommand("erase", "remove a pole with identity monodromy");
    er->add_option("file", file)->required();
    add_common(er, true);
    int pole = 0;
    er->add_option("--pole", pole, "pole index (1-based)")->required();

    auto* at = app.add_subcommand("attach", "add a pole with identity monodromy");
    at->add_option("file", file)->required();
    add_common(at, true);
    std::string where;
    std::vector<int> exps;
    at->add_option("--at", where, "new pole position")->required();
    at->add_option("--exponents", exps, "integer exponents summing to zero")->required()->delimiter(',');

    auto* dar = app.add_subcommand("darboux", "scalar reduction, apparent singularities, (q, p), Hamiltonians");
    dar->add_option("file", file)->required();
    add_common(dar, false);
    int component = 1;
    dar->add_option("--component", component, "component kept in the scalar equation (1 or 2)");

    auto* sym = app.add_subcommand("symmetry", "apply S_k or S_inf");
    sym->add_option("file", file)->required();
    add_common(sym, true);
    std::string op;
    int k = 2;
    sym->add_option("--op", op, "Sk or Sinf")->required();
    sym->add_option("--k", k, "partner pole for Sk (2..n)");

    auto* rep = app.add_subcommand("replay", "apply a saved gauge chain to its source and compare");
    rep->add_option("chain", file)->required();

    auto* ver = app.add_subcommand("verify-paper", "run the embedded regression checks");
    bool list = false;
    std::string fixtures = default_fixture_dir();
    ver->add_flag("--list", list, "list the checks without running them");
    ver->add_option("--fixtures", fixtures, "fixture directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::string_view sub = argc > 1 ? argv[1] : "";
        (void)sub;
        err << e.what() << "\n";
        return 1;
    }

    try {
        if (mono->parsed()) {
            if (table) common.as_json = false;
            return cmd_monodromy(file, common, radius, angle, out);
        }
        if (flow->parsed()) return cmd_flow(file, common, move, to, steps, trajectory, out);
        if (red->parsed()) return cmd_reduce(file, common, subspace, out, err);
        if (er->parsed()) return cmd_erase(file, common, pole, out, err);
        if (at->parsed()) return cmd_attach(file, common, where, exps, out);
        if (dar->parsed()) return cmd_darboux(file, common, component, out);
        if (sym->parsed()) return cmd_symmetry(file, common, op, k, out, err);
        if (rep->parsed()) return cmd_replay(file, out);
        if (ver->parsed()) return cmd_verify(fixtures, list, out);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace fuchsian
