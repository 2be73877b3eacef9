#include "mg/merge.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

namespace mg {

const char* tag_name(Tag t) {
    switch (t) {
        case Tag::EM: return "EM";
        case Tag::IM: return "IM";
        case Tag::SM1: return "SM1";
        case Tag::SM2: return "SM2";
        case Tag::SM3: return "SM3";
        case Tag::ID_SM: return "ID-SM";
    }
    return "?";
}

Tag parse_tag(const std::string& s) {
    if (s == "EM") return Tag::EM;
    if (s == "IM") return Tag::IM;
    if (s == "SM1") return Tag::SM1;
    if (s == "SM2") return Tag::SM2;
    if (s == "SM3") return Tag::SM3;
    if (s == "ID-SM" || s == "ID") return Tag::ID_SM;
    throw MergeError("BAD_SCRIPT", "unknown merge op " + s);
}

std::string MergeStep::identity() const {
    return std::string(tag_name(tag)) + "|" + output.key() + "|" + merged->key;
}

namespace {

bool is_prefix(const Path& a, const Path& b) {
    return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

bool siblings(const Path& a, const Path& b) {
    return a.size() == b.size() && !a.empty() && std::equal(a.begin(), a.end() - 1, b.begin()) && a.back() != b.back();
}

MergeArg whole(const Workspace& ws, int i) {
    return {ArgKind::Whole, i, {}, ws[i], ws[i]->leaves};
}

MergeArg term(const Workspace& ws, int i, const Path& p) {
    return {ArgKind::Term, i, p, subtree_at(ws[i], p), ws[i]->leaves};
}

MergeArg quotient_arg(const Workspace& ws, int i) {
    return {ArgKind::Quotient, i, {}, nullptr, ws[i]->leaves};
}

}  // namespace

Tag classify(const MergeStep& s) {
    const auto& a = s.first;
    const auto& b = s.second;
    auto kinds = [&](ArgKind x, ArgKind y) {
        return (a.kind == x && b.kind == y) || (a.kind == y && b.kind == x);
    };
    if (a.kind == ArgKind::Unit || b.kind == ArgKind::Unit)
        throw MergeError("BAD_PROVENANCE", "the unit is not a Merge argument of a workspace step");
    if (kinds(ArgKind::Whole, ArgKind::Whole)) {
        if (a.component == b.component) throw MergeError("BAD_PROVENANCE", "EM of a component with itself");
        return Tag::EM;
    }
    if (kinds(ArgKind::Term, ArgKind::Quotient)) {
        if (a.component != b.component) throw MergeError("BAD_PROVENANCE", "quotient of a different host");
        return Tag::IM;
    }
    if (kinds(ArgKind::Term, ArgKind::Whole)) {
        if (a.component == b.component) throw MergeError("BAD_PROVENANCE", "SM1 partner is the extraction host");
        return Tag::SM1;
    }
    if (kinds(ArgKind::Term, ArgKind::Term)) {
        if (a.component != b.component) return Tag::SM2;
        if (is_prefix(a.path, b.path) || is_prefix(b.path, a.path))
            throw MergeError("BAD_PROVENANCE", "overlapping accessible terms");
        if (a.path.size() == 1 && b.path.size() == 1) return Tag::ID_SM;
        return Tag::SM3;
    }
    throw MergeError("BAD_PROVENANCE", "unsupported argument combination");
}

MergeStep make_step(const Workspace& ws, const MergeArg& a, const MergeArg& b, Mode mode) {
    MergeStep s;
    s.input = ws;
    s.first = a;
    s.second = b;
    s.mode = mode;
    for (auto* x : {&a, &b})
        if (x->component < 0 || static_cast<std::size_t>(x->component) >= ws.size())
            throw MergeError("BAD_REF", "argument refers to a missing component");
    s.tag = classify(s);

    std::map<int, std::vector<AccessibleTermRef>> cuts;
    std::set<int> consumed;
    for (auto* x : {&a, &b}) {
        if (x->kind == ArgKind::Whole) consumed.insert(x->component);
        if (x->kind == ArgKind::Term) {
            if (x->path.empty()) throw MergeError("BAD_REF", "component root is not an accessible term");
            if (subtree_at(ws[x->component], x->path)->live == 0)
                throw MergeError("BAD_REF", "trace-only subtree is not accessible");
            cuts[x->component].push_back({0, x->path, subtree_at(ws[x->component], x->path)});
        }
    }

    std::vector<Tree> out;
    Tree quotient_tree;
    for (int i = 0; i < static_cast<int>(ws.size()); ++i) {
        if (consumed.count(i)) continue;
        auto it = cuts.find(i);
        if (it == cuts.end()) {
            out.push_back(ws[i]);
            continue;
        }
        Workspace q = quotient(Workspace{ws[i]}, it->second, mode);
        if (s.tag == Tag::IM) {
            if (q.size() != 1) throw MergeError("BAD_PROVENANCE", "IM quotient is empty");
            quotient_tree = q[0];
            continue;
        }
        for (auto& c : q.components()) out.push_back(c);
    }
    Tree x = a.kind == ArgKind::Quotient ? quotient_tree : a.tree;
    Tree y = b.kind == ArgKind::Quotient ? quotient_tree : b.tree;
    s.first.tree = x;
    s.second.tree = y;
    s.merged = merge(x, y);
    out.push_back(s.merged);
    s.output = Workspace(std::move(out));
    return s;
}

std::vector<MergeStep> all_merge_successors(const Workspace& ws, const MergeConfig& cfg) {
    std::map<std::string, MergeStep> found;
    auto emit = [&](MergeStep s) { found.emplace(s.identity(), std::move(s)); };
    const int n = static_cast<int>(ws.size());
    auto live = [&](int i) { return ws[i]->leaves > 0; };
    auto terms = accessible_terms(ws);

    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (live(i) && live(j)) emit(make_step(ws, whole(ws, i), whole(ws, j), cfg.mode));

    if (cfg.allow_IM)
        for (auto& t : terms) {
            if (cfg.mode == Mode::Deletion && t.path.size() == 1) continue;
            emit(make_step(ws, term(ws, t.component, t.path), quotient_arg(ws, t.component), cfg.mode));
        }

    if (cfg.allow_SM) {
        for (auto& t : terms) {
            if (cfg.atomic_SM_only && !t.subtree->is_leaf()) continue;
            for (int j = 0; j < n; ++j)
                if (j != t.component && live(j))
                    emit(make_step(ws, term(ws, t.component, t.path), whole(ws, j), cfg.mode));
        }
        for (std::size_t x = 0; x < terms.size(); ++x)
            for (std::size_t y = x + 1; y < terms.size(); ++y) {
                const auto& u = terms[x];
                const auto& v = terms[y];
                if (u.component != v.component) {
                    if (cfg.atomic_SM_only) continue;
                    emit(make_step(ws, term(ws, u.component, u.path), term(ws, v.component, v.path), cfg.mode));
                    continue;
                }
                if (is_prefix(u.path, v.path) || is_prefix(v.path, u.path)) continue;
                if (cfg.atomic_SM_only && !(u.subtree->is_leaf() && v.subtree->is_leaf())) continue;
                if (siblings(u.path, v.path)) {
                    if (u.path.size() == 1 && !cfg.allow_identity_SM) continue;
                    if (u.path.size() > 1 && !cfg.allow_sibling_cut) continue;
                }
                emit(make_step(ws, term(ws, u.component, u.path), term(ws, v.component, v.path), cfg.mode));
            }
    }
    std::vector<MergeStep> out;
    for (auto& kv : found) out.push_back(std::move(kv.second));
    std::sort(out.begin(), out.end(), [](const MergeStep& p, const MergeStep& q) {
        if (p.output.key() != q.output.key()) return p.output.key() < q.output.key();
        if (p.tag != q.tag) return p.tag < q.tag;
        return p.merged->key < q.merged->key;
    });
    return out;
}

QuotientGraph::QuotientGraph(Tree t) : tree_(std::move(t)) {
    nodes_ = preorder(tree_);
    parent_.assign(nodes_.size(), -1);
    std::map<Path, int> idx;
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
        idx[nodes_[i].first] = i;
        if (!nodes_[i].first.empty()) {
            Path p = nodes_[i].first;
            p.pop_back();
            parent_[i] = idx.at(p);
        }
    }
    uf_.resize(nodes_.size());
    std::iota(uf_.begin(), uf_.end(), 0);
}

int QuotientGraph::find(int x) const {
    while (uf_[x] != x) x = uf_[x] = uf_[uf_[x]];
    return x;
}

int QuotientGraph::index_of(const Path& p) const {
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i)
        if (nodes_[i].first == p) return i;
    throw MergeError("BAD_REF", "path not in tree");
}

void QuotientGraph::identify(const Path& a, const Path& b) {
    if (a == b) throw MergeError("BAD_COPY", "a subtree cannot be identified with itself");
    if (is_prefix(a, b) || is_prefix(b, a)) throw MergeError("BAD_COPY", "nested occurrences");
    Tree ta = subtree_at(tree_, a), tb = subtree_at(tree_, b);
    if (ta->key != tb->key) throw MergeError("BAD_COPY", "non-isomorphic pair " + ta->key + " / " + tb->key);
    // equal keys give equal canonical shapes, so paths inside align
    for (auto& [p, sub] : preorder(ta)) {
        Path pa = a, pb = b;
        pa.insert(pa.end(), p.begin(), p.end());
        pb.insert(pb.end(), p.begin(), p.end());
        int x = find(index_of(pa)), y = find(index_of(pb));
        if (x != y) uf_[std::max(x, y)] = std::min(x, y);
    }
}

int QuotientGraph::vertex_count() const {
    std::set<int> roots;
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) roots.insert(find(i));
    return static_cast<int>(roots.size());
}

std::vector<std::pair<int, int>> QuotientGraph::edges() const {
    std::set<std::pair<int, int>> e;
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
        if (parent_[i] < 0) continue;
        int x = find(i), y = find(parent_[i]);
        e.insert({std::min(x, y), std::max(x, y)});
    }
    return {e.begin(), e.end()};
}

int QuotientGraph::edge_count() const { return static_cast<int>(edges().size()); }

int QuotientGraph::leaf_class_count() const {
    std::set<int> roots;
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i)
        if (nodes_[i].second->is_leaf() && !nodes_[i].second->trace) roots.insert(find(i));
    return static_cast<int>(roots.size());
}

QuotientGraph form_copy_quotient(const Tree& tree, const std::vector<CopyPair>& pairs,
                                 std::vector<FormCopyStage>* stages) {
    QuotientGraph g(tree);
    for (auto& cp : pairs) {
        auto occ = occurrences(Workspace{tree}, cp.key);
        if (cp.first < 0 || cp.second < 0 || cp.first >= static_cast<int>(occ.size()) ||
            cp.second >= static_cast<int>(occ.size()))
            throw MergeError("BAD_REF", "occurrence out of range for " + cp.key);
        FormCopyStage st{cp.key, g.vertex_count(), 0, g.leaf_class_count(), 0};
        g.identify(occ[cp.first].path, occ[cp.second].path);
        st.vertices_after = g.vertex_count();
        st.leaf_classes_after = g.leaf_class_count();
        if (stages) stages->push_back(st);
    }
    return g;
}

namespace {

MergeArg resolve(const Workspace& ws, const nlohmann::json& ref) {
    if (ref.contains("component")) {
        int i = ref.at("component").get<int>();
        if (i < 0 || i >= static_cast<int>(ws.size())) throw MergeError("BAD_REF", "component index out of range");
        return whole(ws, i);
    }
    if (!ref.contains("key")) throw MergeError("BAD_SCRIPT", "reference needs key or component: " + ref.dump());
    std::string key = ref.at("key").is_string() ? ref.at("key").get<std::string>() : tree_from_json(ref.at("key"))->key;
    auto occ = occurrences(ws, key);
    if (occ.empty()) throw MergeError("BAD_REF", "no occurrence of " + key + " in " + ws.key());
    int n = 0;
    if (ref.contains("n")) {
        n = ref.at("n").get<int>();
    } else if (occ.size() > 1) {
        throw MergeError("AMBIGUOUS_OCCURRENCE", key + " occurs " + std::to_string(occ.size()) + " times");
    }
    if (n < 0 || n >= static_cast<int>(occ.size())) throw MergeError("BAD_REF", "occurrence index out of range");
    const auto& o = occ[n];
    if (o.path.empty()) return whole(ws, o.component);
    return term(ws, o.component, o.path);
}

MergeConfig read_config(const nlohmann::json& s) {
    MergeConfig cfg;
    if (s.contains("mode")) cfg.mode = parse_mode(s.at("mode").get<std::string>());
    if (s.contains("flags")) {
        const auto& f = s.at("flags");
        cfg.allow_IM = f.value("im", cfg.allow_IM);
        cfg.allow_SM = f.value("sm", cfg.allow_SM);
        cfg.allow_identity_SM = f.value("identity_sm", cfg.allow_identity_SM);
        cfg.allow_sibling_cut = f.value("sibling_cut", cfg.allow_sibling_cut);
        cfg.atomic_SM_only = f.value("atomic_sm", cfg.atomic_SM_only);
    }
    return cfg;
}

}  // namespace

Derivation replay(const nlohmann::json& s) {
    if (!s.is_object() || !s.contains("initial")) throw MergeError("BAD_SCRIPT", "script needs an initial workspace");
    Derivation d;
    d.name = s.value("name", "");
    d.config = read_config(s);
    const auto& init = s.at("initial");
    d.initial = init.is_string() ? parse_workspace(init.get<std::string>()) : workspace_from_json(init);
    Workspace ws = d.initial;
    bool copying = false;
    std::vector<CopyPair> pairs;
    for (const auto& st : s.value("steps", nlohmann::json::array())) {
        std::string op = st.value("op", "");
        if (st.contains("at") || op == "insert" || op == "late-merge")
            throw MergeError("EC_VIOLATION", "growth below a root is not a Merge operation");
        if (op == "FC") {
            copying = true;
            auto occ = st.at("occurrences");
            pairs.push_back({st.at("key").get<std::string>(), occ.at(0).get<int>(), occ.at(1).get<int>()});
            continue;
        }
        if (copying) throw MergeError("BAD_SCRIPT", "Merge steps cannot follow FormCopy steps");
        Tag want = parse_tag(op);
        auto args = st.value("args", nlohmann::json::array());
        MergeArg a, b;
        if (want == Tag::IM && args.size() == 1) {
            a = resolve(ws, args[0]);
            if (a.kind != ArgKind::Term) throw MergeError("ILLEGAL_STEP", "IM needs an accessible term");
            b = quotient_arg(ws, a.component);
        } else {
            if (args.size() != 2) throw MergeError("BAD_SCRIPT", op + " needs two arguments");
            a = resolve(ws, args[0]);
            b = resolve(ws, args[1]);
        }
        MergeStep step = make_step(ws, a, b, d.config.mode);
        if (step.tag != want)
            throw MergeError("ILLEGAL_STEP", std::string("step is ") + tag_name(step.tag) + ", script says " + op);
        auto succ = all_merge_successors(ws, d.config);
        bool legal = std::any_of(succ.begin(), succ.end(),
                                 [&](const MergeStep& x) { return x.identity() == step.identity(); });
        if (!legal) throw MergeError("ILLEGAL_STEP", op + " on " + ws.key() + " is not enabled by the configuration");
        ws = step.output;
        d.steps.push_back(std::move(step));
    }
    d.final_ws = ws;
    if (!pairs.empty()) {
        if (ws.size() != 1) throw MergeError("BAD_SCRIPT", "FormCopy needs a single final tree");
        form_copy_quotient(ws[0], pairs, &d.copies);
    }
    return d;
}

Derivation replay_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MergeError("BAD_SCRIPT", "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw MergeError("BAD_SCRIPT", std::string("malformed JSON: ") + e.what());
    }
    return replay(j);
}

}  // namespace mg
