#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mg/coloring.hpp"

#include <filesystem>
#include <functional>

using namespace mg;

namespace {

const std::string kScen = std::string(MG_SOURCE_DIR) + "/scenarios/";

const std::vector<Color> kThetaLex = {"thEI+", "thE-", "thI-", "th0p", "thE+"};
const std::vector<Color> kPhaseLex = {"h.V.z", "sd.V", "h.v*.zs", "sd.v*", "m.V"};

bool starts(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

// every coloring of a trace-free bare tree, by brute force over all vertex colors
std::size_t brute_force_count(const RuleSet& rs, const Tree& bare, const std::vector<Color>& lexicon) {
    std::vector<Color> inner;
    for (auto& c : rs.colors)
        if (!is_unit_color(c)) inner.push_back(c);
    std::size_t count = 0;
    std::function<std::vector<CTree>(const Tree&)> all = [&](const Tree& t) {
        std::vector<CTree> out;
        if (t->is_leaf()) {
            for (auto& c : lexicon) out.push_back(c_leaf(t->label, c));
            return out;
        }
        auto ls = all(t->left), rs_ = all(t->right);
        for (auto& l : ls)
            for (auto& r : rs_)
                for (auto& c : inner) {
                    auto n = c_node(c, l, r);
                    // prune on the local generator check only
                    if (accepts(rs, n, false).accepted) out.push_back(n);
                }
        return out;
    };
    for (auto& t : all(bare))
        if (accepts(rs, t).accepted) ++count;
    return count;
}

}  // namespace

TEST_CASE("membership examples") {
    auto theta = builtin_ruleset("theta");
    auto bad = accepts(theta, parse_colored("[thE- a:thE- b:thI-]"));
    CHECK_FALSE(bad.accepted);
    REQUIRE(bad.failing_vertex.has_value());
    CHECK(bad.failing_vertex->empty());

    CHECK(accepts(theta, parse_colored("[thSat s:thE- [thE+ v:thEI+ o:thI-]]")).accepted);
    CHECK(accepts(theta, parse_colored("[thSat [th0 s:thE- 1.th0] [thSat <s>:thE- [thE+ v:thEI+ o:thI-]]]")).accepted);
    CHECK_THROWS_AS(accepts(theta, parse_colored("[thSat s:nope [thE+ v:thEI+ o:thI-]]")), ColoringError);
}

TEST_CASE("theta criterion") {
    auto extra = builtin_ruleset("theta-extra");
    auto transitive = parse_colored("[thSat s:thE- [thE+ v:thEI+ o:thI-]]");
    CHECK(theta_criterion(extra, transitive));
    // the absorbing generator is only legal when traces hold the roles
    auto em = parse_colored("[th0 a:thE- b:thI-]");
    CHECK(accepts(extra, em, false).accepted);
    CHECK_FALSE(theta_criterion(extra, em));
    CHECK_FALSE(accepts(extra, em).accepted);
    CHECK(theta_criterion(extra, parse_colored("a:th0")));
}

TEST_CASE("color search agrees with brute force on small trees") {
    for (auto name : {"theta", "theta-extra", "phase"}) {
        auto rs = builtin_ruleset(name);
        const auto& lex = starts(name, "theta") ? kThetaLex : kPhaseLex;
        for (int n = 1; n <= 3; ++n) {
            std::vector<std::string> leaves;
            for (int i = 0; i < n; ++i) leaves.push_back(std::string(1, static_cast<char>('a' + i)));
            auto trees = n == 1 ? std::vector<Tree>{leaf("a")} : enumerate_trees(leaves);
            for (auto& t : trees) {
                SearchOptions opt;
                for (auto& l : leaves) opt.leaves[l] = lex;
                CHECK_MESSAGE(color_search(rs, t, opt).size() == brute_force_count(rs, t, lex), name, " ", t->key);
            }
        }
    }
}

TEST_CASE("scenario corpus") {
    // regression counts of accepted colorings
    const std::map<std::string, std::size_t> counts = {
        {"bulgarian_double_wh", 9},  {"bulgarian_double_wh_composite", 3}, {"triple_wh", 30},
        {"triple_wh_composite", 0},  {"korean_pac", 6},                     {"korean_pac_theta", 2}, {"korean_pac_no_sibling_cut", 0},
        {"head_to_head", 2},         {"phase_crossing_adjunct", 0},         {"phase_crossing_adjunct_control", 12},
        {"phase_crossing_object", 0}, {"phase_crossing_object_control", 1}, {"theta_mismatch_sm", 0},
        {"theta_mismatch_control", 1}, {"clitic_k2", 21}, {"clitic_k3", 45}, {"clitic_k4", 93}};
    int seen = 0;
    for (auto& e : std::filesystem::directory_iterator(kScen + "coloring")) {
        auto sc = load_color_scenario(e.path().string());
        auto r = run_scenario(sc);
        CHECK_MESSAGE(r.passed, sc.name, ": ", r.detail);
        auto it = counts.find(sc.name);
        if (it != counts.end()) {
            CHECK_MESSAGE(r.colorings == it->second, sc.name);
            ++seen;
        }
    }
    CHECK(seen == 17);
}

TEST_CASE("hat colors stay under a cluster vertex") {
    for (auto name : {"bulgarian_double_wh", "triple_wh", "clitic_k3"}) {
        auto sc = load_color_scenario(kScen + "coloring/" + name + ".json");
        SearchOptions opt;
        opt.leaves = sc.leaves;
        auto all = color_search(sc.rules, *sc.bare, opt);
        REQUIRE(!all.empty());
        for (auto& t : all) {
            CHECK_FALSE(starts(t->color, "shat."));
            // a run of hat vertices ends at an sd vertex
            std::function<bool(const CTree&, bool)> ok = [&](const CTree& n, bool under_sd) {
                if (starts(n->color, "shat.") && !under_sd) return false;
                bool next = starts(n->color, "sd.") || (under_sd && starts(n->color, "shat."));
                for (auto& c : {n->left, n->right})
                    if (c && !ok(c, next)) return false;
                return true;
            };
            CHECK_MESSAGE(ok(t, false), to_text(t));
        }
    }
}

TEST_CASE("two wh phrases need the split generators") {
    auto sc = load_color_scenario(kScen + "coloring/bulgarian_double_wh.json");
    RuleSet cut = sc.rules;
    cut.generators.clear();
    for (auto& g : sc.rules.generators)
        if (g.tag != "SM-split" && g.tag != "SM-cluster") cut.generators.push_back(g);
    SearchOptions opt;
    opt.leaves = sc.leaves;
    CHECK(color_search(sc.rules, *sc.bare, opt).size() == 9);
    CHECK(color_search(cut, *sc.bare, opt).empty());
}

TEST_CASE("colored Merge") {
    auto phase = builtin_ruleset("phase");
    ColoredWorkspace ws({c_leaf("V", "h.V.z"), c_leaf("o", "sd.V"), c_leaf("w", "m.V")});
    MergeConfig cfg;
    auto steps = colored_merge_successors(ws, phase, cfg);
    CHECK(!steps.empty());
    for (auto& s : steps) {
        CHECK(accepts(phase, s.merged, false).accepted);
        if (s.step.tag == Tag::EM) {
            CHECK_FALSE(starts(s.merged->left->color, "shat."));
            CHECK_FALSE(starts(s.merged->right->color, "shat."));
        }
    }

    // a clitic moving onto its host pairs with a theta-coloring generator
    auto clitic = builtin_ruleset("theta-clitic");
    ColoredWorkspace cw({c_leaf("s", "thE-"), c_node("thE+", c_leaf("v", "thEI+"), c_leaf("cl", "thI-"))});
    bool split = false;
    for (auto& s : colored_merge_successors(cw, clitic, cfg))
        if (s.generator_tag == "clitic-split") {
            split = true;
            CHECK(s.step.tag == Tag::SM1);
            CHECK(s.merged->color == "thE-");
        }
    CHECK(split);
}

TEST_CASE("filter and generation agree") {
    for (auto name : {"theta", "theta-clitic", "phase"}) {
        auto rs = builtin_ruleset(name);
        auto rep = filter_equivalence(rs, starts(name, "theta") ? kThetaLex : kPhaseLex, 4, 1);
        CHECK(rep.nonempty > 0);
        CHECK_MESSAGE(rep.mismatches == 0, name, " ", rep.first_mismatch);
    }
}

TEST_CASE("rule set files") {
    for (auto& name : builtin_ruleset_names()) {
        auto rs = builtin_ruleset(name);
        auto back = ruleset_from_json(to_json(rs));
        CHECK(to_json(back) == to_json(rs));
        auto file = load_ruleset(kScen + "rules/" + name + ".json");
        CHECK(to_json(file) == to_json(rs));
    }
    CHECK_THROWS(builtin_ruleset("nope"));
}

TEST_CASE("colored tree text and JSON") {
    auto t = parse_colored("[thSat [th0 s:thE- 1.th0] [thSat <s>:thE- [thE+ v:thEI+ o:thI-]]]");
    CHECK(parse_colored(to_text(t))->key == t->key);
    CHECK(colored_from_json(to_json(t))->key == t->key);
    CHECK(t->bare->key == "[[<s> [o v]] s]");
}
