#include "mg/hopf.hpp"

#include <algorithm>
#include <stdexcept>

namespace mg {

namespace {

bool is_prefix(const Path& a, const Path& b) {
    return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

// subsets of `items` with no member below another member of the same component
template <class Ref, class Below, class Fn>
void for_each_antichain(const std::vector<Ref>& items, Below below, Fn fn) {
    std::vector<const Ref*> chosen;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == items.size()) {
            fn(chosen);
            return;
        }
        rec(i + 1);
        for (auto* c : chosen)
            if (below(*c, items[i]) || below(items[i], *c)) return;
        chosen.push_back(&items[i]);
        rec(i + 1);
        chosen.pop_back();
    };
    rec(0);
}

const std::string kSqcup = "\xE2\x8A\x94";

}  // namespace

WsTensor coproduct(const Workspace& ws, Mode mode) {
    WsTensor out;
    const std::size_t n = ws.size();
    if (n > 20) throw std::invalid_argument("workspace too large for coproduct enumeration");
    for (std::uint32_t whole = 0; whole < (1u << n); ++whole) {
        std::vector<Tree> taken, rest;
        for (std::size_t i = 0; i < n; ++i) ((whole >> i) & 1u ? taken : rest).push_back(ws[i]);
        Workspace rest_ws(rest);
        auto terms = accessible_terms(rest_ws);
        auto below = [](const AccessibleTermRef& a, const AccessibleTermRef& b) {
            return a.component == b.component && is_prefix(a.path, b.path);
        };
        for_each_antichain(terms, below, [&](const std::vector<const AccessibleTermRef*>& cut) {
            std::vector<Tree> left = taken;
            std::vector<AccessibleTermRef> refs;
            for (auto* r : cut) {
                left.push_back(r->subtree);
                refs.push_back(*r);
            }
            out.add(Workspace(left), quotient(rest_ws, refs, mode), 1);
        });
    }
    return out;
}

CKTree ck_vertex(const std::string& label, std::vector<CKTree> children) {
    for (auto& c : children)
        if (!c) throw std::invalid_argument("null CK child");
    std::sort(children.begin(), children.end(), [](const CKTree& a, const CKTree& b) { return a->key < b->key; });
    auto n = std::make_shared<CKNode>();
    n->label = label;
    n->key = "(" + (label.empty() ? std::string("*") : label);
    for (auto& c : children) {
        n->key += " " + c->key;
        n->vertices += c->vertices;
    }
    n->key += ")";
    n->children = std::move(children);
    return n;
}

CKForest::CKForest(std::vector<CKTree> trees) : trees_(std::move(trees)) {
    std::sort(trees_.begin(), trees_.end(), [](const CKTree& a, const CKTree& b) { return a->key < b->key; });
    if (trees_.empty()) return;
    key_.clear();
    for (std::size_t i = 0; i < trees_.size(); ++i) {
        if (i) key_ += " " + kSqcup + " ";
        key_ += trees_[i]->key;
    }
}

int CKForest::vertices() const {
    int v = 0;
    for (auto& t : trees_) v += t->vertices;
    return v;
}

CKForest CKForest::operator+(const CKForest& o) const {
    auto all = trees_;
    all.insert(all.end(), o.trees_.begin(), o.trees_.end());
    return CKForest(std::move(all));
}

namespace {

nlohmann::json ck_json(const CKTree& t) {
    nlohmann::json j{{"label", t->label}};
    auto ch = nlohmann::json::array();
    for (auto& c : t->children) ch.push_back(ck_json(c));
    j["children"] = ch;
    return j;
}

struct CKRef {
    int tree;
    Path path;
    CKTree sub;
};

void collect(const CKTree& t, int idx, Path& p, std::vector<CKRef>& out) {
    if (!p.empty()) out.push_back({idx, p, t});
    for (std::size_t i = 0; i < t->children.size(); ++i) {
        p.push_back(static_cast<std::uint8_t>(i));
        collect(t->children[i], idx, p, out);
        p.pop_back();
    }
}

CKTree prune(const CKTree& t, Path& at, const std::vector<Path>& cuts) {
    std::vector<CKTree> kept;
    for (std::size_t i = 0; i < t->children.size(); ++i) {
        at.push_back(static_cast<std::uint8_t>(i));
        if (std::find(cuts.begin(), cuts.end(), at) == cuts.end()) {
            bool touched = std::any_of(cuts.begin(), cuts.end(), [&](const Path& c) { return is_prefix(at, c); });
            kept.push_back(touched ? prune(t->children[i], at, cuts) : t->children[i]);
        }
        at.pop_back();
    }
    return ck_vertex(t->label, std::move(kept));
}

}  // namespace

nlohmann::json to_json(const CKForest& f) {
    auto arr = nlohmann::json::array();
    for (auto& t : f.trees()) arr.push_back(ck_json(t));
    return arr;
}

CKTensor ck_coproduct(const CKForest& f) {
    CKTensor out;
    const auto& ts = f.trees();
    const std::size_t n = ts.size();
    if (n > 20) throw std::invalid_argument("forest too large for coproduct enumeration");
    for (std::uint32_t whole = 0; whole < (1u << n); ++whole) {
        std::vector<CKTree> taken;
        std::vector<int> rest;
        std::vector<CKRef> refs;
        for (std::size_t i = 0; i < n; ++i) {
            if ((whole >> i) & 1u) {
                taken.push_back(ts[i]);
            } else {
                rest.push_back(static_cast<int>(i));
                Path p;
                collect(ts[i], static_cast<int>(i), p, refs);
            }
        }
        auto below = [](const CKRef& a, const CKRef& b) { return a.tree == b.tree && is_prefix(a.path, b.path); };
        for_each_antichain(refs, below, [&](const std::vector<const CKRef*>& cut) {
            std::vector<CKTree> pruned = taken, trunk;
            for (auto* r : cut) pruned.push_back(r->sub);
            for (int i : rest) {
                std::vector<Path> cuts;
                for (auto* r : cut)
                    if (r->tree == i) cuts.push_back(r->path);
                Path at;
                trunk.push_back(cuts.empty() ? ts[i] : prune(ts[i], at, cuts));
            }
            out.add(CKForest(pruned), CKForest(trunk), 1);
        });
    }
    return out;
}

CKTree graft_B(const CKForest& f, const std::optional<std::string>& root_label) {
    return ck_vertex(root_label.value_or(""), f.trees());
}

std::vector<CKForest> enumerate_ck_forests(int max_vertices, const std::vector<std::string>& alphabet) {
    if (max_vertices < 0) throw std::invalid_argument("negative vertex bound");
    std::vector<std::vector<CKTree>> trees(max_vertices + 1);
    std::vector<std::map<std::string, CKForest>> forests(max_vertices + 1);
    forests[0].emplace("1", CKForest());
    for (int n = 1; n <= max_vertices; ++n) {
        std::map<std::string, CKTree> tn;
        for (auto& [k, f] : forests[n - 1])
            for (auto& a : alphabet) {
                auto t = ck_vertex(a, f.trees());
                tn.emplace(t->key, t);
            }
        for (auto& kv : tn) trees[n].push_back(kv.second);
        for (int k = 1; k <= n; ++k)
            for (auto& t : trees[k])
                for (auto& [key, g] : forests[n - k]) {
                    auto h = g + CKForest({t});
                    forests[n].emplace(h.key(), h);
                }
    }
    std::vector<CKForest> out;
    for (auto& level : forests)
        for (auto& kv : level) out.push_back(kv.second);
    return out;
}

CocycleReport verify_cocycle(int max_vertices, const std::vector<std::string>& alphabet, const GraftFn& graft) {
    if (max_vertices < 1) throw std::invalid_argument("vertex bound must be positive");
    CocycleReport rep;
    for (auto& f : enumerate_ck_forests(max_vertices, alphabet)) {
        CKForest bf({graft(f)});
        CKTensor lhs = ck_coproduct(bf);
        CKTensor rhs;
        rhs.add(bf, CKForest(), 1);
        rhs.add(ck_coproduct(f).apply(identity_map<CKForest>, [&](const CKForest& x) {
            return identity_map(CKForest({graft(x)}));
        }));
        ++rep.checked;
        if (!(lhs == rhs)) {
            rep.passed = false;
            rep.counterexample = f.key();
            return rep;
        }
    }
    return rep;
}

CocycleReport verify_cocycle(int max_vertices) {
    const std::vector<std::string> alphabet{"x", "y"};
    CocycleReport total;
    std::vector<std::optional<std::string>> roots{std::nullopt, std::string("x"), std::string("y")};
    for (auto& r : roots) {
        auto rep = verify_cocycle(max_vertices, alphabet, [&](const CKForest& f) { return graft_B(f, r); });
        total.checked += rep.checked;
        if (!rep.passed) {
            rep.checked = total.checked;
            return rep;
        }
    }
    return total;
}

namespace {

Tree replace_at(const Tree& t, const Path& p, std::size_t depth, const Tree& repl) {
    if (depth == p.size()) return repl;
    Tree l = t->left, r = t->right;
    if (p[depth] == 0)
        l = replace_at(l, p, depth + 1, repl);
    else
        r = replace_at(r, p, depth + 1, repl);
    return merge(l, r);
}

bool has_leaf(const Tree& t, const std::string& label) {
    if (t->is_leaf()) return !t->trace && t->label == label;
    return has_leaf(t->left, label) || has_leaf(t->right, label);
}

}  // namespace

WsComb insertion_delta(const Tree& target, const std::string& alpha) {
    if (target->is_leaf()) throw std::invalid_argument("insertion needs a target with an edge");
    WsComb out;
    for (auto& [p, sub] : preorder(target)) {
        if (p.empty()) continue;
        out.add(Workspace{replace_at(target, p, 0, merge(sub, leaf(alpha)))}, 1);
    }
    return out;
}

WsComb insertion_delta(const Workspace& ws, const std::string& alpha) {
    WsComb out;
    for (std::size_t i = 0; i < ws.size(); ++i) {
        if (ws[i]->is_leaf()) continue;
        std::vector<Tree> others;
        for (std::size_t j = 0; j < ws.size(); ++j)
            if (j != i) others.push_back(ws[j]);
        auto di = insertion_delta(ws[i], alpha);
        for (auto& [k, e] : di.terms())
            out.add(Workspace(others) + e.value, e.coef);
    }
    return out;
}

InsertionRefutation refute_insertion_cocycle(const Tree& t, const std::string& alpha) {
    InsertionRefutation r;
    auto dt = insertion_delta(t, alpha);
    for (auto& [k, e] : dt.terms()) {
        r.lhs.add(coproduct(e.value, Mode::Contraction), e.coef);
        r.rhs.add(e.value, Workspace(), e.coef);
    }
    r.rhs.add(coproduct(Workspace{t}, Mode::Contraction)
                  .apply(identity_map<Workspace>, [&](const Workspace& w) { return insertion_delta(w, alpha); }));
    r.identity_holds = r.lhs == r.rhs;
    for (auto& [k, e] : r.lhs.terms()) {
        if (e.right.empty() || r.rhs.coef(k.first, k.second) != Q(0)) continue;
        bool alpha_left = std::any_of(e.left.components().begin(), e.left.components().end(),
                                      [&](const Tree& c) { return has_leaf(c, alpha); });
        if (alpha_left) {
            r.witness = k;
            break;
        }
    }
    return r;
}

}  // namespace mg
