// bct: command-line front end for the b^m-contact computation library.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

#include "bcontact/catalog.hpp"
#include "bcontact/report.hpp"

using nlohmann::json;
using namespace bct;

namespace {

struct Cli {
    std::string chart_file;
    std::string target_chart_file;
    std::string form;
    std::string form_file;
    std::string vector_literal;
    std::string map_images;  // semicolon-separated target-coordinate images
    std::string point_json;
    std::string ham;
    std::string eps_list = "0.2,0.1,0.05";
    std::string kind = "even";
    std::string t_name = "t";
    std::string axis;
    std::string out_path;
    std::string csv_path;
    double eps = 0.1;
    double kappa = 0.5;
    int k = 1;
    int grid = 200;
    double tol = 1e-8;
    unsigned seed = 42;
    double z_margin = 1e-3;
    bool no_timestamp = false;
    int m = 1;
    int components = 1;
};

GridCfg grid_cfg(const Cli& o) {
    GridCfg cfg;
    cfg.n_off = o.grid;
    cfg.n_on = std::max(1, o.grid / 2);
    cfg.tol = o.tol;
    cfg.seed = o.seed;
    cfg.z_margin = o.z_margin;
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open file '" + path + "'");
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

Chart load_chart(const std::string& path) {
    if (path.empty()) throw Error("--chart FILE is required");
    return chart_from_json(slurp(path));
}

BForm load_form(const Cli& o, const Chart& c) {
    if (!o.form.empty()) return parse_form(o.form, c);
    if (!o.form_file.empty()) return parse_form(slurp(o.form_file), c);
    throw Error("--form EXPR or --form-file FILE is required");
}

json cfg_json(const Cli& o) {
    GridCfg cfg = grid_cfg(o);
    return json{{"grid_off", cfg.n_off}, {"grid_on", cfg.n_on},     {"tol", cfg.tol},
                {"seed", cfg.seed},      {"z_margin", cfg.z_margin}};
}

json point_json_of(const Point& p) {
    json j = json::object();
    for (const auto& [k, v] : p) j[k] = v;
    return j;
}

Point parse_point(const std::string& s) {
    Point p;
    auto j = json::parse(s);
    for (auto it = j.begin(); it != j.end(); ++it) p[it.key()] = it.value().get<double>();
    return p;
}

int emit(const Cli& o, json& rep, int exit_code) {
    if (!o.no_timestamp) rep["timestamp"] = static_cast<long long>(std::time(nullptr));
    std::string text = rep.dump(2) + "\n";
    if (!o.out_path.empty()) {
        std::ofstream f(o.out_path);
        f << text;
    } else {
        std::cout << text;
    }
    return exit_code;
}

json contact_report_json(const ContactReport& r) {
    json j;
    j["verdict"] = to_string(r.verdict);
    j["coefficient"] = to_string(r.coefficient);
    j["min_off_z"] = r.min_off;
    j["argmin_off_z"] = point_json_of(r.argmin_off);
    if (r.has_on) {
        j["min_on_z"] = r.min_on;
        j["argmin_on_z"] = point_json_of(r.argmin_on);
    }
    return j;
}

ProfileKind parse_kind(const std::string& kind, bool desing) {
    if (desing) {
        if (kind == "even") return ProfileKind::DesingEven;
        if (kind == "odd") return ProfileKind::DesingOdd;
    } else {
        if (kind == "even") return ProfileKind::SingEven;
        if (kind == "odd") return ProfileKind::SingOdd;
        if (kind == "onesided") return ProfileKind::SingOneSided;
    }
    throw Error("unknown profile kind '" + kind + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"computations with b^m-contact structures"};
    app.require_subcommand(1);
    Cli o;

    auto add_common = [&](CLI::App* sub, bool needs_form) {
        sub->add_option("--chart", o.chart_file, "chart JSON file");
        if (needs_form) {
            sub->add_option("--form", o.form, "form literal");
            sub->add_option("--form-file", o.form_file, "form literal file");
        }
        sub->add_option("--grid", o.grid, "off-Z grid size");
        sub->add_option("--tol", o.tol, "tolerance");
        sub->add_option("--seed", o.seed, "sampler seed");
        sub->add_option("--z-margin", o.z_margin, "off-Z margin fraction");
        sub->add_option("--out", o.out_path, "write the JSON report here");
        sub->add_flag("--no-timestamp", o.no_timestamp, "omit the timestamp field");
    };

    auto* c_check = app.add_subcommand("check", "contact-condition verification");
    add_common(c_check, true);
    auto* c_reeb = app.add_subcommand("reeb", "solve for the Reeb field");
    add_common(c_reeb, true);
    auto* c_ham = app.add_subcommand("hamiltonian", "solve for a contact Hamiltonian field");
    add_common(c_ham, true);
    c_ham->add_option("--ham", o.ham, "Hamiltonian scalar expression")->required();
    auto* c_classify = app.add_subcommand("classify", "classify a critical-set point");
    add_common(c_classify, true);
    c_classify->add_option("--point", o.point_json, "point as JSON object")->required();
    auto* c_theta = app.add_subcommand("theta", "dimension-3 critical-set form");
    add_common(c_theta, true);
    auto* c_jac = app.add_subcommand("jacobi", "Jacobi pair of a contact form");
    add_common(c_jac, true);
    auto* c_trans = app.add_subcommand("transversality", "b-Jacobi transversality");
    add_common(c_trans, true);
    auto* c_poisson = app.add_subcommand("poissonize", "homogeneous Poisson structure");
    add_common(c_poisson, true);
    auto* c_symp = app.add_subcommand("symplectize", "symplectization");
    add_common(c_symp, true);
    auto* c_contract = app.add_subcommand("contract", "Liouville contraction onto a hypersurface");
    add_common(c_contract, true);
    c_contract->add_option("--target-chart", o.target_chart_file, "ambient chart JSON")
        ->required();
    c_contract->add_option("--vector", o.vector_literal, "Liouville field literal")->required();
    c_contract->add_option("--map", o.map_images,
                           "semicolon-separated images of the target coordinates")
        ->required();
    auto* c_desing = app.add_subcommand("desing", "desingularize a b^m form");
    add_common(c_desing, true);
    c_desing->add_option("--kind", o.kind, "even|odd");
    c_desing->add_option("--k", o.k, "profile index");
    c_desing->add_option("--eps", o.eps, "deformation scale");
    auto* c_sing = app.add_subcommand("sing", "singularize a vertically invariant form");
    add_common(c_sing, true);
    c_sing->add_option("--kind", o.kind, "even|odd|onesided");
    c_sing->add_option("--k", o.k, "profile index");
    c_sing->add_option("--eps", o.eps, "deformation scale");
    c_sing->add_option("--t", o.t_name, "transverse coordinate");
    auto* c_conv = app.add_subcommand("converge", "desingularization convergence sweep");
    add_common(c_conv, true);
    c_conv->add_option("--eps-list", o.eps_list, "comma-separated strictly decreasing scales");
    c_conv->add_option("--kappa", o.kappa, "fixed-region radius");
    c_conv->add_option("--csv", o.csv_path, "write the convergence table as CSV");
    auto* c_fold = app.add_subcommand("folded", "folded-contact verification");
    add_common(c_fold, true);
    c_fold->add_option("--axis", o.axis, "fold search axis");
    auto* c_obstruct = app.add_subcommand("obstruction", "orientation obstruction verdict");
    add_common(c_obstruct, false);
    c_obstruct->add_option("--m", o.m, "singularity order")->required();
    c_obstruct->add_option("--components", o.components, "critical component count")->required();

    auto* c_cat = app.add_subcommand("catalog", "catalog of named examples");
    auto* cat_list = c_cat->add_subcommand("list", "list entries");
    auto* cat_verify = c_cat->add_subcommand("verify", "run an entry's expected-property suite");
    bool verify_all = false;
    std::string verify_name;
    cat_verify->add_flag("--all", verify_all, "verify every entry");
    cat_verify->add_option("name", verify_name, "entry name");
    auto* cat_show = c_cat->add_subcommand("show", "export an entry's chart and form");
    std::string show_name;
    cat_show->add_option("name", show_name, "entry name")->required();
    for (CLI::App* sub : {cat_list, cat_verify, cat_show}) {
        sub->add_option("--out", o.out_path, "write the JSON report here");
        sub->add_flag("--no-timestamp", o.no_timestamp, "omit the timestamp field");
        sub->add_option("--grid", o.grid, "off-Z grid size");
        sub->add_option("--seed", o.seed, "sampler seed");
        sub->add_option("--tol", o.tol, "tolerance");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    GridCfg cfg = grid_cfg(o);
    json rep;
    rep["config"] = cfg_json(o);

    try {
        if (*c_check) {
            rep["command"] = "check";
            Chart c = load_chart(o.chart_file);
            BForm a = load_form(o, c);
            rep["inputs"] = {{"chart", json::parse(chart_to_json(c))}, {"form", to_literal(a)}};
            auto r = is_contact(a, cfg);
            rep["verdict"] = to_string(r.verdict);
            rep["metrics"] = contact_report_json(r);
            return emit(o, rep, r.verdict == ContactVerdict::Contact ? 0 : 1);
        }
        if (*c_reeb) {
            rep["command"] = "reeb";
            Chart c = load_chart(o.chart_file);
            BForm a = load_form(o, c);
            rep["inputs"] = {{"chart", json::parse(chart_to_json(c))}, {"form", to_literal(a)}};
            BMulti r = reeb(a, cfg);
            rep["verdict"] = "solved";
            rep["artifacts"] = {{"reeb", to_literal(r)}};
            return emit(o, rep, 0);
        }
        if (*c_ham) {
            rep["command"] = "hamiltonian";
            Chart c = load_chart(o.chart_file);
            BForm a = load_form(o, c);
            Expr H = parse_scalar(o.ham, c);
            rep["inputs"] = {{"chart", json::parse(chart_to_json(c))},
                             {"form", to_literal(a)},
                             {"hamiltonian", to_string(H)}};
            BMulti x = hamiltonian_field(a, H, cfg);
            rep["verdict"] = "solved";
            rep["artifacts"] = {{"hamiltonian_field", to_literal(x)}};
            return emit(o, rep, 0);
        }
        if (*c_classify) {
            rep["command"] = "classify";
            Chart c = load_chart(o.chart_file);
            BForm a = load_form(o, c);
            Point p = parse_point(o.point_json);
            rep["inputs"] = {{"chart", json::parse(chart_to_json(c))},
                             {"form", to_literal(a)},
                             {"point", point_json_of(p)}};
            auto pc = classify_point(a, p, cfg);
            rep["verdict"] = to_string(pc.kind);
            rep["metrics"] = {{"reeb_norm", pc.reeb_norm}, {"u_value", pc.u_value}};
            return emit(o, rep, 0);
        }
        if (*c_theta) {
            rep["command"] = "theta";
            Chart c = load_chart(o.chart_file);
            BForm a = load_form(o, c);
            rep["inputs"] = {{"chart", json::parse(chart_to_json(c))}, {"form", to_literal(a)}};
            auto t = theta_form(a, cfg);
            bool ok = t.nondegenerate && t.hamiltonian_ok;
            rep["verdict"] = ok ? "symplectic with hamiltonian reeb restriction" : "degenerate";
            rep["metrics"] = {{"min_area", t.min_area},
                              {"sign", t.sign},
                              {"residual", t.residual}};
            rep["artifacts"] = {{"theta_on_z", to_literal(t.theta_on_z)}};
            return emit(o, rep, ok ? 0 : 1);
        }
        if (*c_jac) {
            rep["command"] = "jacobi";
            Chart c = load_chart(o.chart_file);
            BForm a = load_form(o, c);
            rep["inputs"] = {{"chart", json::parse(chart_to_json(c))}, {"form", to_literal(a)}};
            auto J = jacobi_from_contact(a, cfg);
            rep["verdict"] = J.record.verified ? "verified" : "identities failed";
            rep["metrics"] = {{"res_compat", J.record.res_compat},
                              {"res_invariance", J.record.res_invariance},
                              {"res_antisym", J.record.res_antisym}};
            rep["artifacts"] = {{"lambda", to_literal(J.Lambda)}, {"reeb", to_literal(J.R)}};
            return emit(o, rep, J.record.verified ? 0 : 1);
        }
        if (*c_trans) {
            rep["command"] = "transversality";
            Chart c = load_chart(o.chart_file);
            BForm a = load_form(o, c);
            rep["inputs"] = {{"chart", json::parse(chart_to_json(c))}, {"form", to_literal(a)}};
            auto J = jacobi_from_contact(a, cfg);
            auto t = bjacobi_transversality(J, cfg);
            rep["verdict"] = t.verdict;
            rep["metrics"] = {{"max_on_z", t.max_on_z},
                              {"min_grad_on_z", t.min_grad_on_z},
                              {"min_off_z", t.min_off_z}};
            return emit(o, rep, t.transversal || !t.has_critical_set ? 0 : 1);
        }
        if (*c_poisson) {
            rep["command"] = "poissonize";
            Chart c = load_chart(o.chart_file);
            BForm a = load_form(o, c);
            rep["inputs"] = {{"chart", json::parse(chart_to_json(c))}, {"form", to_literal(a)}};
            auto J = jacobi_from_contact(a, cfg);
            auto P = poissonize(J, cfg);
            bool ok = P.res_poisson < 1e-7 && P.res_homogeneous < 1e-7;
            rep["verdict"] = ok ? "homogeneous poisson" : "identities failed";
            rep["metrics"] = {{"res_poisson", P.res_poisson},
                              {"res_homogeneous", P.res_homogeneous},
                              {"res_top_power", P.res_top_power}};
            rep["artifacts"] = {{"pi", to_literal(P.Pi)},
                                {"chart", json::parse(chart_to_json(P.ext_chart))}};
            return emit(o, rep, ok ? 0 : 1);
        }
        if (*c_symp) {
            rep["command"] = "symplectize";
            Chart c = load_chart(o.chart_file);
            BForm a = load_form(o, c);
            rep["inputs"] = {{"chart", json::parse(chart_to_json(c))}, {"form", to_literal(a)}};
            auto S = symplectize(a, cfg);
            bool ok = S.closed && S.res_top_power < 1e-8 && S.res_liouville < 1e-8 &&
                      S.recovers_alpha;
            rep["verdict"] = ok ? "b-symplectic" : "checks failed";
            rep["metrics"] = {{"closed", S.closed},
                              {"res_top_power", S.res_top_power},
                              {"res_liouville", S.res_liouville},
                              {"recovers_alpha", S.recovers_alpha}};
            rep["artifacts"] = {{"omega", to_literal(S.omega)},
                                {"chart", json::parse(chart_to_json(S.ext_chart))}};
            return emit(o, rep, ok ? 0 : 1);
        }
        if (*c_contract) {
            rep["command"] = "contract";
            Chart h = load_chart(o.chart_file);
            Chart w = chart_from_json(slurp(o.target_chart_file));
            BForm omega = o.form.empty() ? parse_form(slurp(o.form_file), w)
                                         : parse_form(o.form, w);
            BMulti X = parse_vector(o.vector_literal, w);
            std::vector<Expr> images;
            std::string s = o.map_images;
            size_t pos = 0;
            while (pos != std::string::npos) {
                size_t next = s.find(';', pos);
                std::string part =
                    next == std::string::npos ? s.substr(pos) : s.substr(pos, next - pos);
                images.push_back(parse_scalar(part, h));
                pos = next == std::string::npos ? next : next + 1;
            }
            ChartMap phi{h, w, images};
            rep["inputs"] = {{"chart", json::parse(chart_to_json(h))},
                             {"target_chart", json::parse(chart_to_json(w))},
                             {"omega", to_literal(omega)},
                             {"vector", to_literal(X)}};
            auto res = liouville_contract(omega, X, phi, cfg);
            rep["verdict"] = to_string(res.report.verdict);
            rep["metrics"] = {{"liouville_residual", res.liouville_residual},
                              {"min_transversality", res.min_transversality}};
            rep["artifacts"] = {{"alpha", to_literal(res.alpha)}};
            return emit(o, rep, res.report.verdict == ContactVerdict::Contact ? 0 : 1);
        }
        if (*c_desing) {
            rep["command"] = "desing";
            Chart c = load_chart(o.chart_file);
            BForm a = load_form(o, c);
            auto P = ProfileFn::build(parse_kind(o.kind, true), o.k, o.eps);
            rep["inputs"] = {{"chart", json::parse(chart_to_json(c))},
                             {"form", to_literal(a)},
                             {"kind", o.kind},
                             {"k", o.k},
                             {"eps", o.eps}};
            auto D = desingularize(a, P, cfg);
            bool ok = (P->kind() == ProfileKind::DesingEven &&
                       D.report.contact_verdict == ContactVerdict::Contact) ||
                      (P->kind() == ProfileKind::DesingOdd && D.report.folded_ok);
            rep["verdict"] = ok ? (P->kind() == ProfileKind::DesingEven ? "contact" : "folded")
                                : "failed";
            rep["metrics"] = {{"agreement_max", D.report.agreement_max},
                              {"identity_rel_max", D.report.identity_rel_max}};
            rep["artifacts"] = {{"form", to_literal(D.form)},
                                {"chart", json::parse(chart_to_json(D.chart))}};
            return emit(o, rep, ok ? 0 : 1);
        }
        if (*c_sing) {
            rep["command"] = "sing";
            Chart c = load_chart(o.chart_file);
            BForm a = load_form(o, c);
            auto P = ProfileFn::build(parse_kind(o.kind, false), o.k, o.eps);
            rep["inputs"] = {{"chart", json::parse(chart_to_json(c))},
                             {"form", to_literal(a)},
                             {"kind", o.kind},
                             {"k", o.k},
                             {"eps", o.eps}};
            auto S = singularize(a, P, o.t_name, cfg);
            bool ok = true;
            json forms = json::array();
            for (size_t i = 0; i < S.forms.size(); ++i) {
                ok &= S.contact[i].verdict == ContactVerdict::Contact;
                forms.push_back({{"chart", json::parse(chart_to_json(S.forms[i].first))},
                                 {"form", to_literal(S.forms[i].second)},
                                 {"verdict", to_string(S.contact[i].verdict)}});
            }
            rep["verdict"] = ok ? "b^m-contact" : "failed";
            rep["metrics"] = {{"convexity", to_string(S.convexity.cls)},
                              {"agreement_max", S.agreement_max},
                              {"critical_positions", S.critical_positions}};
            rep["artifacts"] = {{"forms", forms}};
            return emit(o, rep, ok ? 0 : 1);
        }
        if (*c_conv) {
            rep["command"] = "converge";
            Chart c = load_chart(o.chart_file);
            BForm a = load_form(o, c);
            std::vector<double> eps;
            std::string s = o.eps_list;
            size_t pos = 0;
            while (pos != std::string::npos) {
                size_t next = s.find(',', pos);
                eps.push_back(std::stod(next == std::string::npos ? s.substr(pos)
                                                                  : s.substr(pos, next - pos)));
                pos = next == std::string::npos ? next : next + 1;
            }
            rep["inputs"] = {{"chart", json::parse(chart_to_json(c))},
                             {"form", to_literal(a)},
                             {"eps_list", eps},
                             {"kappa", o.kappa}};
            auto r = convergence_report(a, eps, o.kappa, cfg);
            json rows = json::array();
            for (const auto& row : r.rows)
                rows.push_back({{"eps", row.eps}, {"sup_per_order", row.sup_per_order}});
            rep["verdict"] = r.monotone ? "monotone" : "not monotone";
            rep["metrics"] = {{"rows", rows}, {"fitted_slopes", r.fitted_slopes}};
            if (!o.csv_path.empty()) {
                std::ofstream f(o.csv_path);
                f << convergence_csv(r);
                rep["artifacts"] = {{"csv", o.csv_path}};
            }
            return emit(o, rep, r.monotone ? 0 : 1);
        }
        if (*c_fold) {
            rep["command"] = "folded";
            Chart c = load_chart(o.chart_file);
            BForm a = load_form(o, c);
            rep["inputs"] = {{"chart", json::parse(chart_to_json(c))}, {"form", to_literal(a)}};
            auto r = folded_check(a, o.axis, cfg);
            rep["verdict"] = r.verdict;
            json folds = json::array();
            for (const auto& f : r.folds)
                folds.push_back({{"position", f.position}, {"min_grad", f.min_grad}});
            rep["metrics"] = {{"folds", folds}, {"min_abs_away", r.min_abs_away}};
            return emit(o, rep, r.verdict != "degenerate" ? 0 : 1);
        }
        if (*c_obstruct) {
            rep["command"] = "obstruction";
            auto r = orientation_obstruction_check(o.m, o.components, cfg);
            rep["inputs"] = {{"m", o.m}, {"components", o.components}};
            rep["verdict"] =
                r.verdict == ObstructionVerdict::Obstructed ? "obstructed" : "admissible";
            rep["metrics"] = {{"side_sign_product", r.side_sign_product}};
            return emit(o, rep, 0);
        }
        if (*c_cat) {
            if (*cat_list) {
                rep["command"] = "catalog list";
                json names = json::array();
                for (const auto& n : catalog_names()) {
                    const auto& e = catalog_get(n);
                    names.push_back({{"name", n}, {"note", e.note}});
                }
                rep["entries"] = names;
                return emit(o, rep, 0);
            }
            if (*cat_show) {
                rep["command"] = "catalog show";
                const auto& e = catalog_get(show_name);
                rep["entry"] = {{"name", e.name},
                                {"note", e.note},
                                {"chart", json::parse(chart_to_json(e.chart))},
                                {"form", e.form_literal}};
                return emit(o, rep, 0);
            }
            rep["command"] = "catalog verify";
            std::vector<VerifyReport> reports;
            if (verify_all) {
                reports = catalog_verify_all(cfg);
            } else {
                if (verify_name.empty()) throw Error("catalog verify needs --all or a name");
                reports.push_back(catalog_verify(verify_name, cfg));
            }
            bool all = true;
            json entries = json::array();
            for (const auto& r : reports) {
                all &= r.all_pass;
                json checks = json::array();
                for (const auto& c : r.checks)
                    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
                entries.push_back({{"entry", r.entry}, {"pass", r.all_pass}, {"checks", checks}});
            }
            rep["verdict"] = all ? "pass" : "fail";
            rep["entries"] = entries;
            return emit(o, rep, all ? 0 : 1);
        }
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const ChartError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const SolveError& e) {
        std::cerr << "verdict failure: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
