#include "mg/forest.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

namespace mg {

namespace {

const std::string kSqcup = "\xE2\x8A\x94";  // ⊔

void check_label(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty leaf label");
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '[' || c == ']' || c == '<' || c == '>')
            throw std::invalid_argument("illegal character in leaf label: " + s);
    }
    if (s == "1") throw std::invalid_argument("label 1 is reserved for the unit");
}

}  // namespace

Tree leaf(const std::string& label) {
    check_label(label);
    auto n = std::make_shared<Node>();
    n->label = label;
    n->key = label;
    n->leaves = 1;
    n->vertices = 1;
    n->live = 1;
    return n;
}

Tree trace_leaf(const std::string& cancelled_key) {
    auto n = std::make_shared<Node>();
    n->label = cancelled_key;
    n->trace = true;
    n->key = "<" + cancelled_key + ">";
    n->vertices = 1;
    return n;
}

Tree merge(const Tree& a, const Tree& b) {
    if (!a || !b) throw std::invalid_argument("merge of a null tree");
    auto n = std::make_shared<Node>();
    if (b->key < a->key) {
        n->left = b;
        n->right = a;
    } else {
        n->left = a;
        n->right = b;
    }
    n->key = "[" + n->left->key + " " + n->right->key + "]";
    n->leaves = a->leaves + b->leaves;
    n->vertices = a->vertices + b->vertices + 1;
    n->live = a->live + b->live + (n->leaves > 0 ? 1 : 0);
    return n;
}

Tree canonicalize(const RawTree& raw) {
    if (raw.children.empty()) return raw.trace ? trace_leaf(raw.label) : leaf(raw.label);
    if (raw.children.size() != 2) throw std::invalid_argument("non-binary vertex");
    return merge(canonicalize(raw.children[0]), canonicalize(raw.children[1]));
}

Tree subtree_at(const Tree& t, const Path& p) {
    Tree cur = t;
    for (auto s : p) {
        if (cur->is_leaf() || s > 1) throw std::out_of_range("path leaves the tree");
        cur = cur->child(s);
    }
    return cur;
}

std::vector<std::pair<Path, Tree>> preorder(const Tree& t) {
    std::vector<std::pair<Path, Tree>> out;
    Path p;
    std::function<void(const Tree&)> rec = [&](const Tree& n) {
        out.emplace_back(p, n);
        if (n->is_leaf()) return;
        for (std::uint8_t i = 0; i < 2; ++i) {
            p.push_back(i);
            rec(n->child(i));
            p.pop_back();
        }
    };
    rec(t);
    return out;
}

const char* mode_name(Mode m) { return m == Mode::Contraction ? "c" : "d"; }

Mode parse_mode(const std::string& s) {
    if (s == "c" || s == "contraction") return Mode::Contraction;
    if (s == "d" || s == "deletion") return Mode::Deletion;
    throw std::invalid_argument("unknown coproduct mode: " + s);
}

Workspace::Workspace(std::vector<Tree> components) : comps_(std::move(components)) {
    for (auto& c : comps_)
        if (!c) throw std::invalid_argument("null component");
    std::sort(comps_.begin(), comps_.end(),
              [](const Tree& a, const Tree& b) { return a->key < b->key; });
    if (comps_.empty()) {
        key_ = "1";
    } else {
        key_.clear();
        for (std::size_t i = 0; i < comps_.size(); ++i) {
            if (i) key_ += " " + kSqcup + " ";
            key_ += comps_[i]->key;
        }
    }
}

int Workspace::b0() const {
    return static_cast<int>(std::count_if(comps_.begin(), comps_.end(),
                                          [](const Tree& t) { return t->leaves > 0; }));
}

int Workspace::alpha() const {
    int a = 0;
    for (auto& c : comps_) a += c->alpha();
    return a;
}

int Workspace::degree() const {
    int d = 0;
    for (auto& c : comps_) d += c->leaves;
    return d;
}

Workspace Workspace::operator+(const Workspace& other) const {
    std::vector<Tree> all = comps_;
    all.insert(all.end(), other.comps_.begin(), other.comps_.end());
    return Workspace(std::move(all));
}

std::vector<AccessibleTermRef> accessible_terms(const Workspace& ws) {
    std::vector<AccessibleTermRef> out;
    for (std::size_t i = 0; i < ws.size(); ++i) {
        for (auto& [p, t] : preorder(ws[i])) {
            if (p.empty() || t->live == 0) continue;
            out.push_back({static_cast<int>(i), p, t});
        }
    }
    return out;
}

std::vector<AccessibleTermRef> occurrences(const Workspace& ws, const std::string& key) {
    std::vector<AccessibleTermRef> out;
    for (std::size_t i = 0; i < ws.size(); ++i)
        for (auto& [p, t] : preorder(ws[i]))
            if (t->key == key) out.push_back({static_cast<int>(i), p, t});
    return out;
}

std::vector<Tree> enumerate_trees(const std::vector<std::string>& leaves) {
    if (leaves.empty()) throw std::invalid_argument("empty leaf set");
    if (leaves.size() == 1) return {leaf(leaves[0])};
    std::map<std::string, Tree> found;
    const std::size_t rest = leaves.size() - 1;
    // leaves[0] always goes to the first block; every other leaf picks a side
    for (std::uint32_t mask = 0; mask < (1u << rest); ++mask) {
        std::vector<std::string> a{leaves[0]}, b;
        for (std::size_t j = 0; j < rest; ++j)
            ((mask >> j) & 1u ? a : b).push_back(leaves[j + 1]);
        if (b.empty()) continue;
        for (auto& ta : enumerate_trees(a))
            for (auto& tb : enumerate_trees(b)) {
                auto t = merge(ta, tb);
                found.emplace(t->key, t);
            }
    }
    std::vector<Tree> out;
    for (auto& kv : found) out.push_back(kv.second);
    return out;
}

std::vector<Workspace> enumerate_forests(const std::vector<std::string>& leaves, bool require_edge) {
    if (leaves.empty()) throw std::invalid_argument("empty leaf set");
    if (require_edge && leaves.size() < 2)
        throw std::invalid_argument("a forest with an edge needs at least two leaves");
    const std::size_t n = leaves.size();
    std::map<std::string, Workspace> found;
    std::vector<int> block(n, 0);
    // restricted growth strings enumerate set partitions of the positions
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int used) {
        if (i == n) {
            std::vector<std::vector<std::string>> blocks(used);
            for (std::size_t j = 0; j < n; ++j) blocks[block[j]].push_back(leaves[j]);
            bool has_edge = std::any_of(blocks.begin(), blocks.end(),
                                        [](const auto& b) { return b.size() >= 2; });
            if (require_edge && !has_edge) return;
            std::vector<std::vector<Tree>> options;
            for (auto& b : blocks) options.push_back(enumerate_trees(b));
            std::vector<Tree> pick(blocks.size());
            std::function<void(std::size_t)> combine = [&](std::size_t k) {
                if (k == options.size()) {
                    Workspace ws(pick);
                    found.emplace(ws.key(), ws);
                    return;
                }
                for (auto& t : options[k]) {
                    pick[k] = t;
                    combine(k + 1);
                }
            };
            combine(0);
            return;
        }
        for (int b = 0; b <= used; ++b) {
            block[i] = b;
            rec(i + 1, std::max(used, b + 1));
        }
    };
    rec(0, 0);
    std::vector<Workspace> out;
    for (auto& kv : found) out.push_back(kv.second);
    std::stable_sort(out.begin(), out.end(), [](const Workspace& a, const Workspace& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a.key() < b.key();
    });
    return out;
}

namespace {

bool is_prefix(const Path& a, const Path& b) {
    return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

Tree cut_tree(const Tree& t, Path& at, const std::vector<Path>& cuts, Mode mode) {
    if (std::find(cuts.begin(), cuts.end(), at) != cuts.end())
        return mode == Mode::Contraction ? trace_leaf(t->key) : nullptr;
    if (t->is_leaf()) return t;
    bool touched = std::any_of(cuts.begin(), cuts.end(), [&](const Path& c) { return is_prefix(at, c); });
    if (!touched) return t;
    at.push_back(0);
    Tree l = cut_tree(t->left, at, cuts, mode);
    at.back() = 1;
    Tree r = cut_tree(t->right, at, cuts, mode);
    at.pop_back();
    if (!l) return r;  // unary vertex contracted away (or nothing left)
    if (!r) return l;
    return merge(l, r);
}

}  // namespace

Workspace quotient(const Workspace& ws, const std::vector<AccessibleTermRef>& cut, Mode mode) {
    std::vector<std::vector<Path>> per(ws.size());
    for (auto& r : cut) {
        if (r.component < 0 || static_cast<std::size_t>(r.component) >= ws.size())
            throw std::invalid_argument("cut refers to a missing component");
        if (r.path.empty()) throw std::invalid_argument("component root is not an accessible term");
        subtree_at(ws[r.component], r.path);
        per[r.component].push_back(r.path);
    }
    for (auto& paths : per)
        for (std::size_t i = 0; i < paths.size(); ++i)
            for (std::size_t j = 0; j < paths.size(); ++j)
                if (i != j && is_prefix(paths[i], paths[j]))
                    throw std::invalid_argument("overlapping accessible terms in cut");
    std::vector<Tree> out;
    for (std::size_t i = 0; i < ws.size(); ++i) {
        if (per[i].empty()) {
            out.push_back(ws[i]);
            continue;
        }
        Path at;
        Tree q = cut_tree(ws[i], at, per[i], mode);
        if (q) out.push_back(q);
    }
    return Workspace(std::move(out));
}

std::string to_text(const Tree& t) { return t->key; }

std::string to_text(const Workspace& ws) { return ws.key(); }

namespace {

struct TextParser {
    const std::string& s;
    std::size_t i = 0;

    void skip() {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n')) ++i;
    }
    Tree parse() {
        skip();
        if (i >= s.size()) throw std::invalid_argument("unexpected end of tree text");
        if (s[i] == '[') {
            ++i;
            Tree a = parse();
            Tree b = parse();
            skip();
            if (i >= s.size() || s[i] != ']') throw std::invalid_argument("expected ] in tree text");
            ++i;
            return merge(a, b);
        }
        if (s[i] == '<') {
            int depth = 0;
            std::size_t start = i + 1;
            for (; i < s.size(); ++i) {
                if (s[i] == '<') ++depth;
                if (s[i] == '>' && --depth == 0) break;
            }
            if (i >= s.size()) throw std::invalid_argument("unterminated trace");
            std::string inner = s.substr(start, i - start);
            ++i;
            return trace_leaf(inner);
        }
        std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '[' && s[i] != ']' && s[i] != '<' &&
               s[i] != '>' && s[i] != '\t' && s[i] != '\n')
            ++i;
        return leaf(s.substr(start, i - start));
    }
};

}  // namespace

Tree parse_tree(const std::string& text) {
    TextParser p{text};
    Tree t = p.parse();
    p.skip();
    if (p.i != text.size()) throw std::invalid_argument("trailing characters in tree text");
    return t;
}

Workspace parse_workspace(const std::string& text) {
    std::string trimmed = text;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\n"));
    trimmed.erase(trimmed.find_last_not_of(" \t\n") + 1);
    if (trimmed.empty() || trimmed == "1") return Workspace();
    std::vector<Tree> comps;
    std::size_t start = 0;
    int depth = 0;
    for (std::size_t i = 0; i <= trimmed.size(); ++i) {
        bool at_sep = i < trimmed.size() && depth == 0 && trimmed.compare(i, kSqcup.size(), kSqcup) == 0;
        if (i == trimmed.size() || at_sep) {
            comps.push_back(parse_tree(trimmed.substr(start, i - start)));
            if (at_sep) {
                i += kSqcup.size() - 1;
                start = i + 1;
            }
            continue;
        }
        if (trimmed[i] == '[' || trimmed[i] == '<') ++depth;
        if (trimmed[i] == ']' || trimmed[i] == '>') --depth;
    }
    return Workspace(std::move(comps));
}

nlohmann::json to_json(const Tree& t) {
    if (t->trace) return nlohmann::json{{"trace", t->label}};
    if (t->is_leaf()) return t->label;
    return nlohmann::json::array({"M", to_json(t->left), to_json(t->right)});
}

nlohmann::json to_json(const Workspace& ws) {
    auto arr = nlohmann::json::array();
    for (auto& c : ws.components()) arr.push_back(to_json(c));
    return arr;
}

Tree tree_from_json(const nlohmann::json& j) {
    if (j.is_string()) return leaf(j.get<std::string>());
    if (j.is_object() && j.contains("trace")) return trace_leaf(j.at("trace").get<std::string>());
    if (j.is_array() && j.size() == 3 && j[0] == "M") return merge(tree_from_json(j[1]), tree_from_json(j[2]));
    throw std::invalid_argument("bad tree JSON: " + j.dump());
}

Workspace workspace_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw std::invalid_argument("workspace JSON must be an array");
    std::vector<Tree> comps;
    for (auto& c : j) comps.push_back(tree_from_json(c));
    return Workspace(std::move(comps));
}

}  // namespace mg
