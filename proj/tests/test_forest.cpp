#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mg/forest.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <set>

using namespace mg;

namespace {

// brute-force isomorphism of planar trees, trying both child pairings
bool iso(const RawTree& x, const RawTree& y) {
    if (x.children.size() != y.children.size()) return false;
    if (x.children.empty()) return x.label == y.label && x.trace == y.trace;
    return (iso(x.children[0], y.children[0]) && iso(x.children[1], y.children[1])) ||
           (iso(x.children[0], y.children[1]) && iso(x.children[1], y.children[0]));
}

RawTree random_raw(std::mt19937& rng, int n, const std::string& alphabet) {
    if (n == 1) return RawTree{std::string(1, alphabet[rng() % alphabet.size()]), false, {}};
    int k = 1 + static_cast<int>(rng() % (n - 1));
    return RawTree{"", false, {random_raw(rng, k, alphabet), random_raw(rng, n - k, alphabet)}};
}

RawTree shuffle_raw(std::mt19937& rng, RawTree t) {
    for (auto& c : t.children) c = shuffle_raw(rng, c);
    if (!t.children.empty() && rng() % 2) std::swap(t.children[0], t.children[1]);
    return t;
}

long double_factorial(int k) {
    long r = 1;
    for (; k > 1; k -= 2) r *= k;
    return r;
}

// set partitions of n distinct items, counting (2k−3)!! trees per block of size k
long forest_count(int n, bool require_edge) {
    std::vector<int> block(n, 0);
    long total = 0;
    std::function<void(int, int)> rec = [&](int i, int nb) {
        if (i == n) {
            std::vector<int> sizes(nb, 0);
            for (int b : block) ++sizes[b];
            long c = 1;
            bool edge = false;
            for (int s : sizes) {
                if (s >= 2) {
                    c *= double_factorial(2 * s - 3);
                    edge = true;
                }
            }
            if (edge || !require_edge) total += c;
            return;
        }
        for (int b = 0; b <= nb; ++b) {
            block[i] = b;
            rec(i + 1, std::max(nb, b + 1));
        }
    };
    rec(0, 0);
    return total;
}

std::vector<std::string> letters(int n) {
    std::vector<std::string> v;
    for (int i = 0; i < n; ++i) v.push_back(std::string(1, static_cast<char>('a' + i)));
    return v;
}

bool no_unary(const Tree& t) {
    if (t->is_leaf()) return true;
    return t->left && t->right && no_unary(t->left) && no_unary(t->right);
}

}  // namespace

TEST_CASE("keys are order invariant") {
    CHECK(merge(leaf("a"), leaf("b"))->key == merge(leaf("b"), leaf("a"))->key);
    auto t1 = merge(merge(leaf("a"), leaf("b")), leaf("c"));
    auto t2 = merge(leaf("c"), merge(leaf("b"), leaf("a")));
    auto t3 = merge(merge(leaf("a"), leaf("c")), leaf("b"));
    CHECK(t1->key == t2->key);
    CHECK(t1->key != t3->key);
    CHECK(t1->key == "[[a b] c]");
}

TEST_CASE("key equality matches isomorphism on random trees") {
    std::mt19937 rng(7);
    int equal = 0, distinct = 0;
    for (int it = 0; it < 3000; ++it) {
        int n = 1 + static_cast<int>(rng() % 12);
        auto x = random_raw(rng, n, it % 2 ? "ab" : "abcd");
        auto y = (it % 3 == 0) ? shuffle_raw(rng, x) : random_raw(rng, n, it % 2 ? "ab" : "abcd");
        bool same = canonicalize(x)->key == canonicalize(y)->key;
        CHECK(same == iso(x, y));
        (same ? equal : distinct)++;
    }
    CHECK(equal > 500);
    CHECK(distinct > 500);
}

TEST_CASE("canonicalize is idempotent through text") {
    std::mt19937 rng(11);
    for (int it = 0; it < 200; ++it) {
        auto t = canonicalize(random_raw(rng, 1 + static_cast<int>(rng() % 10), "abc"));
        auto u = parse_tree(to_text(t));
        CHECK(u->key == t->key);
        CHECK(tree_from_json(to_json(t))->key == t->key);
    }
}

TEST_CASE("accessible terms") {
    CHECK(accessible_terms(Workspace{leaf("a")}).empty());
    Workspace cherry{parse_tree("[a b]")};
    CHECK(accessible_terms(cherry).size() == 2);
    CHECK(cherry.alpha() == 2);
    Workspace t3{parse_tree("[[a b] c]")};
    auto refs = accessible_terms(t3);
    std::multiset<std::string> keys;
    for (auto& r : refs) keys.insert(r.subtree->key);
    CHECK(keys == std::multiset<std::string>{"[a b]", "a", "b", "c"});
    CHECK(t3.alpha() == 4);

    // trace-only subtrees are not accessible
    Workspace tr{parse_tree("[[<a> <b>] c]")};
    for (auto& r : accessible_terms(tr)) CHECK(r.subtree->leaves > 0);
    CHECK(accessible_terms(tr).size() == static_cast<std::size_t>(tr.alpha()));
}

TEST_CASE("forest counts") {
    CHECK(enumerate_forests({"x", "y", "z"}, true).size() == 6);
    CHECK(enumerate_forests({"a", "b"}, true).size() == 1);
    CHECK(enumerate_forests(letters(4), true).size() == 36);
    for (int n = 2; n <= 6; ++n) {
        CHECK(enumerate_trees(letters(n)).size() == static_cast<std::size_t>(double_factorial(2 * n - 3)));
        CHECK(enumerate_forests(letters(n), true).size() == static_cast<std::size_t>(forest_count(n, true)));
    }
    CHECK_THROWS(enumerate_forests({}, true));
}

TEST_CASE("repeated leaves are deduplicated") {
    // {a,a,b}: [[a a] b], [[a b] a]; [a a] ⊔ b, [a b] ⊔ a
    CHECK(enumerate_trees({"a", "a", "b"}).size() == 2);
    CHECK(enumerate_forests({"a", "a", "b"}, true).size() == 4);
}

TEST_CASE("sigma and vertex laws on enumerated forests") {
    for (int n = 2; n <= 5; ++n) {
        for (auto& ws : enumerate_forests(letters(n), true)) {
            CHECK(ws.sigma() == ws.alpha() + ws.b0());
            for (auto& t : ws.components()) CHECK(t->vertices == 2 * t->leaves - 1);
        }
    }
}

TEST_CASE("quotient examples") {
    Workspace t3{parse_tree("[[a b] c]")};
    auto a = occurrences(t3, "a");
    REQUIRE(a.size() == 1);
    CHECK(to_text(quotient(t3, a, Mode::Deletion)) == "[b c]");

    auto qc = quotient(t3, a, Mode::Contraction);
    CHECK(qc.key() == "[[<a> b] c]");
    CHECK(qc[0]->leaves == 2);
    CHECK(qc.alpha() == 3);

    Workspace cherry{parse_tree("[a b]")};
    auto both = accessible_terms(cherry);
    auto q = quotient(cherry, both, Mode::Deletion);
    CHECK(q.empty());
    CHECK(q.key() == "1");

    auto nested = accessible_terms(t3);
    CHECK_THROWS(quotient(t3, nested, Mode::Deletion));
}

TEST_CASE("deletion quotients stay full binary") {
    std::mt19937 rng(3);
    for (int it = 0; it < 300; ++it) {
        auto t = canonicalize(random_raw(rng, 2 + static_cast<int>(rng() % 8), "abcdef"));
        Workspace ws{t};
        auto refs = accessible_terms(ws);
        // greedy disjoint random cut
        std::vector<AccessibleTermRef> cut;
        for (auto& r : refs) {
            if (rng() % 3) continue;
            bool ok = true;
            for (auto& c : cut) {
                auto& p = c.path.size() < r.path.size() ? c.path : r.path;
                auto& q = c.path.size() < r.path.size() ? r.path : c.path;
                if (std::equal(p.begin(), p.end(), q.begin())) ok = false;
            }
            if (ok) cut.push_back(r);
        }
        auto out = quotient(ws, cut, Mode::Deletion);
        int removed = 0;
        for (auto& c : cut) removed += c.subtree->leaves;
        int left = 0;
        for (auto& c : out.components()) {
            CHECK(no_unary(c));
            left += c->leaves;
        }
        CHECK(left + removed == t->leaves);
    }
}

TEST_CASE("workspace multiset semantics") {
    auto ws = parse_workspace("[a b] \xE2\x8A\x94 c \xE2\x8A\x94 [a b]");
    CHECK(ws.size() == 3);
    CHECK(ws.b0() == 3);
    CHECK(ws.alpha() == 4);
    CHECK(ws.key() == "[a b] \xE2\x8A\x94 [a b] \xE2\x8A\x94 c");
    CHECK(workspace_from_json(to_json(ws)).key() == ws.key());
    CHECK(Workspace{}.key() == "1");
}
