#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mg/cost.hpp"

#include <fstream>
#include <random>

using namespace mg;

namespace {

const std::string kDir = std::string(MG_SOURCE_DIR) + "/scenarios/derivations/";
const std::string kU = " \xE2\x8A\x94 ";

std::vector<std::string> letters(int n) {
    std::vector<std::string> v;
    for (int i = 0; i < n; ++i) v.push_back(std::string(1, static_cast<char>('a' + i)));
    return v;
}

MergeConfig cfg(Mode m, bool sibling = false, bool identity = false) {
    MergeConfig c;
    c.mode = m;
    c.allow_sibling_cut = sibling;
    c.allow_identity_SM = identity;
    return c;
}

const MergeStep* find(const std::vector<MergeStep>& s, Tag tag, const std::string& out) {
    for (auto& x : s)
        if (x.tag == tag && x.output.key() == out) return &x;
    return nullptr;
}

int index_of(const Workspace& ws, const std::string& key) {
    for (std::size_t i = 0; i < ws.size(); ++i)
        if (ws[i]->key == key) return static_cast<int>(i);
    return -1;
}

MergeArg whole(const Workspace& ws, int i) { return {ArgKind::Whole, i, {}, ws[i], ws[i]->leaves}; }

// the EM that merges the SM1 result with the remainder of its host
MergeStep composite_em(const MergeStep& sm1) {
    const MergeArg& tv = sm1.first.kind == ArgKind::Term ? sm1.first : sm1.second;
    auto rem = quotient(Workspace{sm1.input[tv.component]}, {{0, tv.path, tv.tree}}, sm1.mode);
    const auto& out = sm1.output;
    return make_step(out, whole(out, index_of(out, sm1.merged->key)), whole(out, index_of(out, rem[0]->key)),
                     sm1.mode);
}

// 𝔟 − 𝔠(A) − 𝔠(B) from argument provenance alone
Q ms_oracle(const MergeStep& s) {
    if (s.tag == Tag::IM) return 0;
    auto c = [](const MergeArg& a) { return a.kind == ArgKind::Whole ? Q(1) : Q(a.tree->leaves, a.host_leaves); };
    bool one_host = s.first.kind == ArgKind::Term && s.second.kind == ArgKind::Term &&
                    s.first.component == s.second.component;
    int b = one_host ? 1 : 2;
    return b - c(s.first) - c(s.second);
}

Derivation load(const std::string& name) { return replay_file(kDir + name + ".json"); }

}  // namespace

TEST_CASE("minimal search examples") {
    auto em = all_merge_successors(parse_workspace("a" + kU + "b"), cfg(Mode::Deletion));
    CHECK(ms_cost(em[0]) == Q(0));

    auto a = derivation_cost(load("path_cost_a"));
    REQUIRE(a.steps.size() == 1);
    CHECK(a.steps[0].tag == "SM3");
    CHECK(a.steps[0].cost.ms == Q(1, 3));

    auto s = all_merge_successors(parse_workspace("[a b]" + kU + "c"), cfg(Mode::Deletion));
    auto sm1 = find(s, Tag::SM1, "[b c]" + kU + "a");
    REQUIRE(sm1);
    CHECK(ms_cost(*sm1) == Q(1, 2));
}

TEST_CASE("minimal search matches the provenance formula") {
    for (int n = 2; n <= 4; ++n)
        for (auto& ws : enumerate_forests(letters(n), true))
            for (auto& s : all_merge_successors(ws, cfg(Mode::Deletion, true)))
                CHECK(ms_cost(s) == ms_oracle(s));
}

TEST_CASE("zero minimal search cost exactly for EM and IM") {
    for (auto m : {Mode::Deletion, Mode::Contraction})
        for (int n = 3; n <= 4; ++n)
            for (auto& ws : enumerate_forests(letters(n), true))
                for (auto& s : all_merge_successors(ws, cfg(m, true))) {
                    bool free = s.tag == Tag::EM || s.tag == Tag::IM;
                    CHECK((ms_cost(s) == Q(0)) == free);
                    if (free) CHECK(cl_cost(s) == 0);
                }
}

TEST_CASE("identity SM has zero minimal search cost") {
    auto s = all_merge_successors(parse_workspace("[a b]"), cfg(Mode::Deletion, false, true));
    auto id = find(s, Tag::ID_SM, "[a b]");
    REQUIRE(id);
    CHECK(ms_cost(*id) == Q(0));
}

TEST_CASE("resource restriction examples") {
    auto em = all_merge_successors(parse_workspace("a" + kU + "b"), cfg(Mode::Deletion))[0];
    CHECK(rr_delta(em, Mode::Deletion) == RRDelta{-1, 2, 1, 0});
    CHECK(rr_delta(em, Mode::Contraction) == RRDelta{-1, 2, 1, 0});

    auto s = all_merge_successors(parse_workspace("[a b]" + kU + "[c d]"), cfg(Mode::Deletion));
    auto sm2 = find(s, Tag::SM2, "[a c]" + kU + "b" + kU + "d");
    REQUIRE(sm2);
    CHECK(rr_delta(*sm2, Mode::Deletion) == RRDelta{1, -2, -1, 0});

    auto t = all_merge_successors(parse_workspace("[[a b] c]"), cfg(Mode::Deletion));
    for (auto& x : t)
        if (x.tag == Tag::IM) CHECK(rr_delta(x, Mode::Deletion) == RRDelta{0, 0, 0, 0});

    for (auto& x : t) {
        auto d = rr_delta(x, x.mode);
        CHECK(d.dsigma == d.dalpha + d.db0);
    }
}

TEST_CASE("tabulated deltas hold on all small states") {
    for (auto m : {Mode::Deletion, Mode::Contraction})
        for (int n = 2; n <= 4; ++n)
            for (auto& ws : enumerate_forests(letters(n), true))
                for (auto& s : all_merge_successors(ws, cfg(m)))
                    if (auto row = rr_table(s.tag, m)) CHECK(rr_between(ws, s.output) == *row);
}

TEST_CASE("sibling cut under contraction departs from the SM3 row") {
    auto s = all_merge_successors(parse_workspace("[[a b] c]"), cfg(Mode::Contraction, true));
    auto sm3 = find(s, Tag::SM3, "[[<a> <b>] c]" + kU + "[a b]");
    REQUIRE(sm3);
    // the dead parent of two traces leaves α as well
    CHECK(rr_between(sm3->input, sm3->output) == RRDelta{1, -1, 0, 0});
}

TEST_CASE("EM after SM1 composite law") {
    int seen = 0;
    for (auto m : {Mode::Deletion, Mode::Contraction}) {
        RRDelta want = m == Mode::Contraction ? RRDelta{-1, 3, 2, 0} : RRDelta{-1, 2, 1, 0};
        for (int n = 2; n <= 5; ++n)
            for (auto& ws : enumerate_forests(letters(n), true))
                for (auto& s : all_merge_successors(ws, cfg(m))) {
                    if (s.tag != Tag::SM1) continue;
                    auto em = composite_em(s);
                    CHECK(em.tag == Tag::EM);
                    CHECK(rr_between(ws, em.output) == want);
                    ++seen;
                }
    }
    CHECK(seen > 1000);
}

TEST_CASE("complexity loss examples") {
    auto s = all_merge_successors(parse_workspace("[a b]" + kU + "c"), cfg(Mode::Deletion));
    CHECK(cl_cost(*find(s, Tag::SM1, "[b c]" + kU + "a")) == 1);
    auto t = all_merge_successors(parse_workspace("[[a b] c]"), cfg(Mode::Deletion));
    CHECK(cl_cost(*find(t, Tag::SM3, "[a c]" + kU + "b")) == 2);
    for (auto& x : t)
        if (x.tag == Tag::IM) CHECK(cl_cost(x) == 0);

    auto one = derivation_cost(load("lookup_sm1"));
    auto two = derivation_cost(load("lookup_sm2"));
    CHECK(one.cl_total < two.cl_total);
    CHECK(one.cl_total == 1);
    CHECK(two.cl_total == 2);
}

TEST_CASE("hierarchy examples") {
    auto run = [](const std::string& ws, const std::string& sm_out) {
        auto s = all_merge_successors(parse_workspace(ws), cfg(Mode::Deletion));
        auto sm1 = find(s, Tag::SM1, sm_out);
        REQUIRE(sm1);
        return classify_hierarchy(*sm1, composite_em(*sm1));
    };
    auto h2h = run("q" + kU + "[[a b] c]", "[a q]" + kU + "[b c]");
    CHECK(h2h.cls == HierarchyClass::HEAD_TO_HEAD);
    CHECK((h2h.cl_violation == 1 && h2h.deg_gap == 1));

    auto h2p = run("[[p q] r]" + kU + "[[a b] c]", "[[[p q] r] a]" + kU + "[b c]");
    CHECK(h2p.cls == HierarchyClass::HEAD_TO_PHRASE);
    CHECK((h2p.cl_violation == 1 && h2p.deg_gap == 3));

    auto p2h = run("q" + kU + "[[a b] c]", "[[a b] q]" + kU + "c");
    CHECK(p2h.cls == HierarchyClass::PHRASE_TO_HEAD);
    CHECK((p2h.cl_violation == 2 && p2h.deg_gap == 1));

    auto p2p = run("[p r]" + kU + "[[a b] c]", "[[a b] [p r]]" + kU + "c");
    CHECK(p2p.cls == HierarchyClass::PHRASE_TO_PHRASE);

    auto s = all_merge_successors(parse_workspace("q" + kU + "[[a b] c]"), cfg(Mode::Deletion));
    auto em = find(s, Tag::EM, "[[[a b] c] q]");
    REQUIRE(em);
    CHECK_THROWS_AS(classify_hierarchy(*em, *em), MergeError);
}

TEST_CASE("head to head is pointwise minimal for a fixed host") {
    std::mt19937 rng(17);
    const std::vector<std::string> partners = {"q", "[q r]", "[[q r] s]"};
    for (int it = 0; it < 40; ++it) {
        auto hosts = enumerate_trees(letters(3 + static_cast<int>(rng() % 4)));
        auto host = hosts[rng() % hosts.size()];
        int best_v = 1 << 20, best_g = 1 << 20, h2h_v = -1, h2h_g = -1;
        for (auto& p : partners) {
            Workspace ws{host, parse_tree(p)};
            for (auto& s : all_merge_successors(ws, cfg(Mode::Deletion))) {
                if (s.tag != Tag::SM1) continue;
                const MergeArg& tv = s.first.kind == ArgKind::Term ? s.first : s.second;
                if (tv.component != index_of(ws, host->key)) continue;
                auto h = classify_hierarchy(s, composite_em(s));
                best_v = std::min(best_v, h.cl_violation);
                best_g = std::min(best_g, h.deg_gap);
                if (h.cls == HierarchyClass::HEAD_TO_HEAD) h2h_v = h.cl_violation, h2h_g = h.deg_gap;
            }
        }
        CHECK(h2h_v == best_v);
        CHECK(h2h_g == best_g);
    }
}

TEST_CASE("quotient cost") {
    CHECK(quotient_cost(17, 14) == Q(15, 18));
    CHECK(quotient_cost(14, 13) == Q(14, 15));
    CHECK(quotient_cost(9, 9) == Q(1));
    CHECK_THROWS(quotient_cost(5, 6));
    // on trees, (v′+1)/(v+1) is the leaf ratio
    for (int l = 2; l <= 8; ++l)
        for (int k = 1; k < l; ++k) CHECK(quotient_cost(2 * l - 1, 2 * k - 1) == Q(k, l));
}

TEST_CASE("path comparison: equal resource totals, distinct search costs") {
    auto a = derivation_cost(load("path_cost_a"));
    auto b = derivation_cost(load("path_cost_b"));
    CHECK(a.ms_total == Q(1, 3));
    // 1 − 2/6, then 1 − 2/4, then a free EM
    CHECK(b.ms_total == Q(2, 3) + Q(1, 2));
    CHECK(a.rr_d_total == RRDelta{1, -2, -1, 0});
    CHECK(b.rr_d_total == a.rr_d_total);
}

TEST_CASE("all-EM derivations are free") {
    auto d = load("amalgam_fc");
    auto r = derivation_cost(d);
    Q merge_ms = 0;
    for (auto& s : r.steps) merge_ms += s.cost.ms;
    CHECK(merge_ms == Q(0));
    CHECK(r.em_count == static_cast<int>(r.steps.size()));
    REQUIRE(r.copies.size() == 2);
    CHECK(r.copies[0].ms == Q(15, 18));
    CHECK(r.copies[1].ms == Q(14, 15));
}

TEST_CASE("report serialization") {
    auto r = derivation_cost(load("sm_derivation"));
    auto j = to_json(r);
    CHECK(j.contains("steps"));
    CHECK(j["steps"].size() == r.steps.size());
    auto csv = to_csv(r);
    CHECK(std::count(csv.begin(), csv.end(), '\n') >= static_cast<long>(r.steps.size()));
}
