#include "mg/coloring.hpp"
#include "mg/cost.hpp"
#include "mg/forest.hpp"
#include "mg/hopf.hpp"
#include "mg/markov.hpp"
#include "mg/merge.hpp"
#include "mg/verify.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace mg;

namespace {

struct Common {
    std::string mode = "d";
    bool im = true;
    bool identity_sm = false;
    bool sibling_cut = false;
    bool atomic_sm = false;
    bool collapse = false;
    std::string regime = "count";
    double t = 1.0;
    std::string format = "text";
    std::string out;
    std::vector<std::string> leaves;

    MergeConfig merge_config() const {
        MergeConfig c;
        c.mode = parse_mode(mode);
        c.allow_IM = im;
        c.allow_identity_SM = identity_sm;
        c.allow_sibling_cut = sibling_cut;
        c.atomic_SM_only = atomic_sm;
        return c;
    }
};

void add_common(CLI::App* app, Common& c, const std::vector<std::string>& formats) {
    app->add_option("--mode", c.mode, "coproduct: c (contraction) or d (deletion)")->check(CLI::IsMember({"c", "d"}));
    app->add_flag("--im,!--no-im", c.im, "allow Internal Merge");
    app->add_flag("--identity-sm", c.identity_sm, "allow the identity SM term");
    app->add_flag("--sibling-cut", c.sibling_cut, "allow cutting two sibling edges below a non-root vertex");
    app->add_flag("--atomic-sm", c.atomic_sm, "single-leaf SM extractions only, no SM2");
    app->add_option("--regime", c.regime, "weighting: count, ms, my, cl, total")
        ->check(CLI::IsMember({"count", "ms", "my", "cl", "total"}));
    app->add_option("-t", c.t, "weight parameter t > 0")->check(CLI::PositiveNumber);
    app->add_option("--format", c.format, "output format")->check(CLI::IsMember(formats));
    app->add_option("--out", c.out, "write output to this path");
    app->add_option("--leaves", c.leaves, "leaf labels, comma separated")->delimiter(',');
}

void emit(const Common& c, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream f(c.out);
    if (!f) throw std::runtime_error("cannot write " + c.out);
    f << text;
}

Workspace read_workspace_arg(const std::string& arg) {
    std::ifstream f(arg);
    if (f) {
        nlohmann::json j;
        f >> j;
        return workspace_from_json(j);
    }
    return parse_workspace(arg);
}

std::vector<std::string> need_leaves(const Common& c) {
    if (c.leaves.empty()) throw CLI::ValidationError("--leaves", "a leaf list is required, e.g. --leaves a,b,c");
    return c.leaves;
}

nlohmann::json step_json(const MergeStep& s) {
    auto cost = step_cost(s);
    const auto& rr = cost.rr(s.mode);
    return {{"tag", tag_name(s.tag)},
            {"merged", to_text(s.merged)},
            {"output", to_text(s.output)},
            {"ms", to_string(cost.ms)},
            {"db0", rr.db0},
            {"dalpha", rr.dalpha},
            {"dsigma", rr.dsigma},
            {"cl", cost.cl}};
}

int run_enumerate(const Common& c, bool trees_only) {
    auto leaves = need_leaves(c);
    std::vector<Workspace> all;
    if (trees_only) {
        for (auto& t : enumerate_trees(leaves)) all.push_back(Workspace{t});
    } else {
        all = enumerate_forests(leaves, true);
    }
    if (c.format == "json") {
        auto j = nlohmann::json::array();
        for (auto& w : all) j.push_back(to_json(w));
        emit(c, j.dump(2));
    } else {
        std::ostringstream os;
        for (auto& w : all) os << to_text(w) << "\n";
        emit(c, os.str());
    }
    return 0;
}

int run_successors(const Common& c, const std::string& ws_arg) {
    auto ws = read_workspace_arg(ws_arg);
    auto steps = all_merge_successors(ws, c.merge_config());
    if (c.format == "json") {
        auto j = nlohmann::json::array();
        for (auto& s : steps) j.push_back(step_json(s));
        emit(c, j.dump(2));
    } else {
        std::ostringstream os;
        for (auto& s : steps)
            os << std::left << std::setw(6) << tag_name(s.tag) << " " << to_text(s.output) << "   ms=" << to_string(step_cost(s).ms)
               << "\n";
        emit(c, os.str());
    }
    return 0;
}

TransitionGraph graph_for(const Common& c) {
    GraphConfig g;
    g.merge = c.merge_config();
    g.merge.mode = Mode::Deletion;
    g.collapse = c.collapse;
    return build_graph(need_leaves(c), g);
}

int run_graph(const Common& c) {
    auto g = graph_for(c);
    Regime r = parse_regime(c.regime);
    if (c.format == "dot") {
        emit(c, graph_dot(g));
    } else if (c.format == "csv") {
        emit(c, matrix_csv(g, weighted_matrix(g, r, c.t)));
    } else if (c.format == "json") {
        nlohmann::json j;
        for (auto& v : g.vertices) j["vertices"].push_back(to_text(v));
        j["matrix"] = count_matrix(g);
        auto scc = strong_connectivity(g);
        j["strongly_connected"] = scc.strongly_connected;
        j["scc_count"] = scc.scc_count;
        emit(c, j.dump(2));
    } else {
        std::ostringstream os;
        auto K = count_matrix(g);
        for (int i = 0; i < g.size(); ++i) {
            for (int k = 0; k < g.size(); ++k) os << (k ? " " : "") << K[i][k];
            os << "   " << to_text(g.vertices[i]) << "\n";
        }
        auto scc = strong_connectivity(g);
        os << "vertices " << g.size() << ", strongly connected components " << scc.scc_count << "\n";
        emit(c, os.str());
    }
    return 0;
}

int run_markov(const Common& c) {
    auto g = graph_for(c);
    Regime r = parse_regime(c.regime);
    auto scc = strong_connectivity(g);
    if (!scc.strongly_connected)
        throw MarkovError("transition graph has " + std::to_string(scc.scc_count) +
                          " strongly connected components; no Perron-Frobenius data");
    auto pf = perron_frobenius(weighted_matrix(g, r, c.t));
    if (c.format == "csv") {
        emit(c, matrix_csv(g, pf.khat));
        return 0;
    }
    auto j = pf_json(pf);
    for (auto& v : g.vertices) j["vertices"].push_back(to_text(v));
    j["regime"] = regime_name(r);
    j["t"] = c.t;
    emit(c, j.dump(2));
    return 0;
}

int run_costs(const Common& c, const std::string& script) {
    auto report = derivation_cost(replay_file(script));
    emit(c, c.format == "csv" ? to_csv(report) : to_json(report).dump(2));
    return 0;
}

std::string totals_line(const CostReport& r) {
    std::ostringstream os;
    os << std::left << std::setw(22) << (r.name.empty() ? "(unnamed)" : r.name) << " MS " << std::setw(8) << to_string(r.ms_total)
       << " (" << std::fixed << std::setprecision(3) << to_double(r.ms_total) << ")  MY(d) " << r.rr_d_total.dsigma
       << "  MY(c) " << r.rr_c_total.dsigma << "  CL " << r.cl_total << "  EM " << r.em_count << "  steps " << r.steps.size();
    if (!r.copies.empty())
        os << "  FC " << r.copies.size() << " (MY " << r.my_fc_merge_reading << " or " << r.my_fc_net_reading << ")";
    return os.str();
}

int run_derive(const Common& c, const std::string& script, const std::string& compare) {
    auto d = replay_file(script);
    auto report = derivation_cost(d);
    if (!compare.empty()) {
        auto other = derivation_cost(replay_file(compare));
        if (c.format == "json") {
            emit(c, nlohmann::json{{"left", to_json(report)}, {"right", to_json(other)}}.dump(2));
        } else {
            std::ostringstream os;
            os << totals_line(report) << "\n" << totals_line(other) << "\n";
            os << "MS difference (left - right): " << to_string(report.ms_total - other.ms_total) << "\n";
            os << "CL difference (left - right): " << report.cl_total - other.cl_total << "\n";
            emit(c, os.str());
        }
        return 0;
    }
    if (c.format == "json") {
        auto j = to_json(report);
        j["initial"] = to_text(d.initial);
        j["final"] = to_text(d.final_ws);
        emit(c, j.dump(2));
    } else if (c.format == "csv") {
        emit(c, to_csv(report));
    } else {
        std::ostringstream os;
        os << "initial  " << to_text(d.initial) << "\n";
        for (auto& s : report.steps)
            os << std::left << std::setw(6) << s.tag << " " << s.output << "   ms=" << to_string(s.cost.ms)
               << " cl=" << s.cost.cl << "\n";
        for (auto& cp : report.copies)
            os << "FC     " << cp.stage.key << " v " << cp.stage.vertices_before << "->" << cp.stage.vertices_after
               << "   ms=" << to_string(cp.ms) << " cl=" << cp.cl << "\n";
        os << "final    " << to_text(d.final_ws) << "\n" << totals_line(report) << "\n";
        emit(c, os.str());
    }
    return 0;
}

RuleSet rules_arg(const std::string& name) {
    if (name.size() > 5 && name.substr(name.size() - 5) == ".json") return load_ruleset(name);
    return builtin_ruleset(name);
}

struct ColorArgs {
    std::string rules = "theta";
    std::string tree;
    std::string bare;
    std::vector<std::string> leaf_colors;
    std::string scenario;
    bool dump = false;
    std::size_t max_results = 20;
};

int run_color_check(const Common& c, const ColorArgs& a) {
    if (!a.scenario.empty()) {
        auto sc = load_color_scenario(a.scenario);
        auto r = run_scenario(sc);
        if (c.format == "json") {
            emit(c, nlohmann::json{{"name", sc.name},
                                   {"passed", r.passed},
                                   {"accepted", r.accepted},
                                   {"colorings", r.colorings},
                                   {"detail", r.detail}}
                        .dump(2));
        } else {
            emit(c, std::string(r.passed ? "PASS " : "FAIL ") + sc.name + ": " + (r.accepted ? "accepted" : "rejected") +
                        ", " + std::to_string(r.colorings) + " colorings; " + r.detail);
        }
        return r.passed ? 0 : 1;
    }
    RuleSet rs = rules_arg(a.rules);
    if (a.dump) {
        emit(c, to_json(rs).dump(2));
        return 0;
    }
    if (!a.tree.empty()) {
        auto res = accepts(rs, parse_colored(a.tree));
        std::string where;
        if (res.failing_vertex) {
            where = " at path ";
            for (auto i : *res.failing_vertex) where += std::to_string(i);
        }
        if (c.format == "json")
            emit(c, nlohmann::json{{"accepted", res.accepted}, {"reason", res.reason}}.dump(2));
        else
            emit(c, res.accepted ? "accepted" : "rejected: " + res.reason + where);
        return res.accepted ? 0 : 1;
    }
    if (a.bare.empty()) throw CLI::ValidationError("color-check", "give --tree, --bare, --scenario or --dump");
    SearchOptions opt;
    opt.max_results = a.max_results;
    for (auto& lc : a.leaf_colors) {
        auto eq = lc.find('=');
        if (eq == std::string::npos) throw CLI::ValidationError("--leaf", "expected label=color, got " + lc);
        auto e = expand_color_macro(rs, lc.substr(eq + 1));
        auto& v = opt.leaves[lc.substr(0, eq)];
        v.insert(v.end(), e.begin(), e.end());
    }
    auto found = color_search(rs, parse_tree(a.bare), opt);
    if (c.format == "json") {
        auto j = nlohmann::json::array();
        for (auto& t : found) j.push_back(to_text(t));
        emit(c, j.dump(2));
    } else {
        std::ostringstream os;
        for (auto& t : found) os << to_text(t) << "\n";
        os << found.size() << " accepted coloring(s)" << (found.size() == opt.max_results ? " (capped)" : "") << "\n";
        emit(c, os.str());
    }
    return found.empty() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Merge workspaces, coproducts, costs, colorings and the Merge Markov chain"};
    app.require_subcommand(1);
    Common c;

    auto* en = app.add_subcommand("enumerate", "list forests over a leaf set");
    add_common(en, c, {"text", "json"});
    bool trees_only = false;
    en->add_flag("--trees-only", trees_only, "only single trees");

    auto* su = app.add_subcommand("successors", "all Merge steps out of a workspace");
    add_common(su, c, {"text", "json"});
    std::string ws_arg;
    su->add_option("workspace", ws_arg, "workspace text, e.g. \"[a b] ⊔ c\", or a JSON file")->required();

    auto* gr = app.add_subcommand("graph", "state-space graph of a leaf set");
    add_common(gr, c, {"text", "json", "csv", "dot"});
    gr->add_flag("--collapse", c.collapse, "0/1 adjacency instead of step multiplicity");

    auto* mk = app.add_subcommand("markov", "Perron-Frobenius data of the transition matrix");
    add_common(mk, c, {"json", "csv", "text"});
    mk->add_flag("--collapse", c.collapse, "0/1 adjacency instead of step multiplicity");

    auto* co = app.add_subcommand("costs", "cost report of a derivation script");
    add_common(co, c, {"json", "csv", "text"});
    std::string script;
    co->add_option("script", script, "derivation script")->required()->check(CLI::ExistingFile);

    auto* de = app.add_subcommand("derive", "replay a derivation script");
    add_common(de, c, {"text", "json", "csv"});
    std::string compare;
    de->add_option("script", script, "derivation script")->required()->check(CLI::ExistingFile);
    de->add_option("--compare", compare, "second script for side-by-side totals")->check(CLI::ExistingFile);

    auto* cc = app.add_subcommand("color-check", "check or search colorings");
    add_common(cc, c, {"text", "json"});
    ColorArgs ca;
    cc->add_option("--rules", ca.rules, "built-in rule set name or rule file");
    cc->add_option("--tree", ca.tree, "colored tree to check");
    cc->add_option("--bare", ca.bare, "bare tree to color");
    cc->add_option("--leaf", ca.leaf_colors, "leaf constraint label=color (repeatable; @phrase, @head:X)");
    cc->add_option("--scenario", ca.scenario, "scenario file")->check(CLI::ExistingFile);
    cc->add_option("--max", ca.max_results, "maximum colorings to list");
    cc->add_flag("--dump", ca.dump, "print the rule set as JSON");

    auto* ve = app.add_subcommand("verify", "run the reproduction suite");
    std::vector<std::string> only;
    std::string root = MG_SOURCE_DIR;
    ve->add_option("--only", only, "criterion groups to run (e.g. markov, coloring, 3)")->delimiter(',');
    ve->add_option("--root", root, "repository root holding scenarios/");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*en) return run_enumerate(c, trees_only);
        if (*su) return run_successors(c, ws_arg);
        if (*gr) return run_graph(c);
        if (*mk) return run_markov(c);
        if (*co) return run_costs(c, script);
        if (*de) return run_derive(c, script, compare);
        if (*cc) return run_color_check(c, ca);
        if (*ve) {
            VerifyOptions vo;
            vo.root = root;
            vo.only = only;
            auto results = run_verify(vo, std::cout);
            return all_passed(results) ? 0 : 1;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
