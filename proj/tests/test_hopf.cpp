#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mg/hopf.hpp"

using namespace mg;

namespace {

const std::string kU = "\xE2\x8A\x94";

std::vector<std::string> letters(int n) {
    std::vector<std::string> v;
    for (int i = 0; i < n; ++i) v.push_back(std::string(1, static_cast<char>('a' + i)));
    return v;
}

int leaf_count(const Workspace& ws) {
    int n = 0;
    for (auto& c : ws.components()) n += c->leaves;
    return n;
}

// (id ⊗ B) on a CK tensor
CKTensor id_tensor_B(const CKTensor& t) {
    CKTensor r;
    for (auto& [k, e] : t.terms()) r.add(e.left, CKForest{{graft_B(e.right)}}, e.coef);
    return r;
}

}  // namespace

TEST_CASE("coproduct of a leaf is primitive") {
    auto d = coproduct(Workspace{leaf("a")}, Mode::Deletion);
    CHECK(d.size() == 2);
    CHECK(d.coef("1", "a") == Q(1));
    CHECK(d.coef("a", "1") == Q(1));
}

TEST_CASE("deletion coproduct of a cherry") {
    auto d = coproduct(Workspace{parse_tree("[a b]")}, Mode::Deletion);
    CHECK(d.size() == 5);
    CHECK(d.coef("1", "[a b]") == Q(1));
    CHECK(d.coef("a", "b") == Q(1));
    CHECK(d.coef("b", "a") == Q(1));
    CHECK(d.coef("a " + kU + " b", "1") == Q(1));
    CHECK(d.coef("[a b]", "1") == Q(1));
}

TEST_CASE("contraction coproduct keeps traces") {
    auto d = coproduct(Workspace{parse_tree("[[a b] c]")}, Mode::Contraction);
    CHECK(d.coef("[a b]", "[<[a b]> c]") == Q(1));
    CHECK(d.coef("a", "[[<a> b] c]") == Q(1));
}

TEST_CASE("deletion coproduct is graded") {
    for (int n = 1; n <= 5; ++n)
        for (auto& ws : enumerate_forests(letters(n), false))
            for (auto d = coproduct(ws, Mode::Deletion); auto& [k, e] : d.terms())
                CHECK(leaf_count(e.left) + leaf_count(e.right) == leaf_count(ws));
}

TEST_CASE("coproduct is multiplicative over components") {
    for (auto mode : {Mode::Deletion, Mode::Contraction}) {
        for (int n = 2; n <= 5; ++n) {
            for (auto& ws : enumerate_forests(letters(n), true)) {
                if (ws.size() < 2) continue;
                WsTensor prod;
                prod.add(Workspace{}, Workspace{}, 1);
                for (auto& c : ws.components()) prod = prod * coproduct(Workspace{c}, mode);
                CHECK(prod == coproduct(ws, mode));
            }
        }
    }
}

TEST_CASE("CK coproduct examples") {
    auto dot = CKForest{{ck_vertex("x")}};
    auto d1 = ck_coproduct(dot);
    CHECK(d1.size() == 2);
    CHECK(d1.coef("1", dot.key()) == Q(1));
    CHECK(d1.coef(dot.key(), "1") == Q(1));

    auto ladder = CKForest{{ck_vertex("x", {ck_vertex("y")})}};
    auto d2 = ck_coproduct(ladder);
    CHECK(d2.size() == 3);
    CHECK(d2.coef(CKForest{{ck_vertex("y")}}.key(), dot.key()) == Q(1));

    auto corolla = CKForest{{ck_vertex("x", {ck_vertex("p"), ck_vertex("q"), ck_vertex("r")})}};
    auto d3 = ck_coproduct(corolla);
    // 2^3 subsets of the root edges, plus the full cut
    CHECK(d3.size() == 9);
    int with_root = 0;
    for (auto& [k, e] : d3.terms()) {
        CHECK(e.coef == Q(1));
        if (e.right.key() != "1") ++with_root;
    }
    CHECK(with_root == 8);
    CHECK(d3.coef(corolla.key(), "1") == Q(1));
}

TEST_CASE("grafting") {
    auto b1 = graft_B(CKForest{});
    CHECK(b1->vertices == 1);
    CHECK(b1->children.empty());
    auto t = graft_B(CKForest{{ck_vertex("p"), ck_vertex("q")}}, std::string("x"));
    CHECK(t->label == "x");
    CHECK(t->children.size() == 2);
    CHECK(graft_B(CKForest{{ck_vertex("p"), ck_vertex("q"), ck_vertex("r")}})->children.size() == 3);

    auto lhs = ck_coproduct(CKForest{{b1}});
    CHECK(lhs.size() == 2);
    CHECK(lhs.coef(CKForest{{b1}}.key(), "1") == Q(1));
    CHECK(lhs.coef("1", CKForest{{b1}}.key()) == Q(1));
}

TEST_CASE("CK counit") {
    for (auto& f : enumerate_ck_forests(4, {"x", "y"})) {
        CKComb r;
        for (auto d = ck_coproduct(f); auto& [k, e] : d.terms())
            if (e.left.key() == "1") r.add(e.right, e.coef);
        CHECK(r == identity_map(f));
    }
}

TEST_CASE("grafting cocycle") {
    auto rep = verify_cocycle(4);
    CHECK(rep.passed);
    CHECK(rep.checked > 50);

    // explicit check of one forest against the hand-built right side
    CKForest f{{ck_vertex("x", {ck_vertex("y")}), ck_vertex("y")}};
    CKForest bf{{graft_B(f)}};
    CKTensor rhs;
    rhs.add(bf, CKForest{}, 1);
    rhs.add(id_tensor_B(ck_coproduct(f)));
    CHECK(ck_coproduct(bf) == rhs);
}

TEST_CASE("perturbed grafting breaks the cocycle") {
    // graft the whole forest under a new child of the first root instead of at a new root
    GraftFn bad = [](const CKForest& f) {
        if (f.trees().empty()) return ck_vertex("");
        auto first = f.trees()[0];
        std::vector<CKTree> kids = first->children;
        std::vector<CKTree> rest(f.trees().begin() + 1, f.trees().end());
        kids.push_back(ck_vertex("", rest));
        return ck_vertex(first->label, kids);
    };
    auto rep = verify_cocycle(3, {"x", "y"}, bad);
    CHECK_FALSE(rep.passed);
    CHECK_FALSE(rep.counterexample.empty());
}

TEST_CASE("insertion operator") {
    auto d = insertion_delta(parse_tree("[b c]"), "z");
    CHECK(d.size() == 2);
    CHECK_THROWS(insertion_delta(leaf("b"), "z"));

    // derivation law
    auto t1 = parse_tree("[b c]");
    auto t2 = parse_tree("[[d e] f]");
    WsComb rhs;
    for (auto d = insertion_delta(t1, "z"); auto& [k, e] : d.terms()) rhs.add(e.value + Workspace{t2}, e.coef);
    for (auto d = insertion_delta(t2, "z"); auto& [k, e] : d.terms()) rhs.add(Workspace{t1} + e.value, e.coef);
    CHECK(insertion_delta(Workspace{t1, t2}, "z") == rhs);

    auto ref = refute_insertion_cocycle(parse_tree("[[a b] c]"), "z");
    CHECK_FALSE(ref.identity_holds);
    REQUIRE(ref.witness.has_value());
    CHECK(ref.witness->first.find('z') != std::string::npos);
    CHECK(ref.witness->second != "1");
    CHECK(ref.rhs.coef(ref.witness->first, ref.witness->second) == Q(0));
}

TEST_CASE("tensor JSON") {
    auto d = coproduct(Workspace{parse_tree("[a b]")}, Mode::Deletion);
    auto j = to_json(d);
    CHECK(j.size() == 5);
    CHECK(j[0].contains("coef"));
    CHECK(j[0]["coef"] == "1");
}
