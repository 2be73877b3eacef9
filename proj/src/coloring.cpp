#include "mg/coloring.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>

namespace mg {

bool is_unit_color(const Color& c) { return c.size() > 2 && c[0] == '1' && c[1] == '.'; }

bool RuleSet::has_check(const std::string& c) const {
    return std::find(checks.begin(), checks.end(), c) != checks.end();
}

void RuleSet::require_color(const Color& c) const {
    if (!colors.count(c)) throw ColoringError("UNKNOWN_COLOR", "color " + c + " is not in rule set " + name);
}

namespace {

nlohmann::json pattern_json(const ColorPattern& p) {
    if (p.children.empty()) return p.color;
    return nlohmann::json::array({p.color, pattern_json(p.children[0]), pattern_json(p.children[1])});
}

ColorPattern pattern_from_json(const nlohmann::json& j) {
    if (j.is_string()) return {j.get<std::string>(), {}};
    if (!j.is_array() || j.size() != 3) throw ColoringError("BAD_RULES", "pattern must be a color or [root, a, b]");
    return {j[0].get<std::string>(), {pattern_from_json(j[1]), pattern_from_json(j[2])}};
}

}  // namespace

nlohmann::json to_json(const RuleSet& rs) {
    nlohmann::json j;
    j["name"] = rs.name;
    j["colors"] = std::vector<std::string>(rs.colors.begin(), rs.colors.end());
    auto gens = nlohmann::json::array();
    for (auto& g : rs.generators) {
        nlohmann::json x{{"root", g.root}, {"children", {g.left, g.right}}, {"tag", g.tag}};
        if (g.body) x["body"] = pattern_json(*g.body);
        gens.push_back(x);
    }
    j["generators"] = gens;
    j["composite"] = rs.composite;
    j["checks"] = rs.checks;
    if (!rs.sibling_cut) j["sibling_cut"] = false;
    if (!rs.charges.empty()) {
        nlohmann::json ch;
        for (auto& [c, v] : rs.charges) ch[c] = {v.first, v.second};
        j["charges"] = ch;
    }
    if (!rs.phase_heads.empty()) {
        j["phase_heads"] = std::vector<std::string>(rs.phase_heads.begin(), rs.phase_heads.end());
        j["sel"] = rs.sel;
    }
    return j;
}

RuleSet ruleset_from_json(const nlohmann::json& j) {
    RuleSet rs;
    try {
        rs.name = j.value("name", "");
        for (auto& c : j.at("colors")) rs.colors.insert(c.get<std::string>());
        rs.composite = j.value("composite", false);
        rs.sibling_cut = j.value("sibling_cut", true);
        for (auto& g : j.at("generators")) {
            Generator x;
            x.root = g.at("root").get<std::string>();
            auto ch = g.at("children");
            if (ch.size() != 2) throw ColoringError("BAD_RULES", "generators are binary");
            x.left = ch[0].get<std::string>();
            x.right = ch[1].get<std::string>();
            x.tag = g.value("tag", "base");
            if (g.contains("body")) x.body = pattern_from_json(g.at("body"));
            for (auto* c : {&x.root, &x.left, &x.right}) rs.require_color(*c);
            if (is_unit_color(x.root)) throw ColoringError("BAD_RULES", "a unit slot cannot be a root color");
            if (x.body && !rs.composite)
                throw ColoringError("BAD_RULES", "composite generator in a single-vertex rule set");
            rs.generators.push_back(std::move(x));
        }
        if (j.contains("checks"))
            for (auto& c : j.at("checks")) rs.checks.push_back(c.get<std::string>());
        if (j.contains("charges"))
            for (auto& [c, v] : j.at("charges").items()) rs.charges[c] = {v.at(0).get<int>(), v.at(1).get<int>()};
        if (j.contains("phase_heads"))
            for (auto& h : j.at("phase_heads")) rs.phase_heads.insert(h.get<std::string>());
        if (j.contains("sel")) rs.sel = j.at("sel").get<std::map<std::string, std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ColoringError("BAD_RULES", e.what());
    }
    return rs;
}

RuleSet load_ruleset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ColoringError("BAD_RULES", "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ColoringError("BAD_RULES", std::string("malformed JSON: ") + e.what());
    }
    return ruleset_from_json(j);
}

const std::vector<std::string> kHeadClasses{"V", "v*", "INFL", "C", "D", "P", "N"};

namespace {

void add_gen(RuleSet& rs, Color root, Color a, Color b, std::string tag) {
    for (auto* c : {&root, &a, &b}) rs.colors.insert(*c);
    rs.generators.push_back({std::move(root), std::move(a), std::move(b), std::move(tag), std::nullopt});
}

RuleSet theta_rules(const std::string& variant) {
    RuleSet rs;
    rs.name = variant;
    rs.checks = {"copies", "theta"};
    rs.charges = {{"thE-", {-1, 0}}, {"thI-", {0, -1}}, {"thE+", {1, 0}}, {"thI+", {0, 1}}, {"thEI+", {1, 1}}};
    for (auto c : {"thE-", "thI-", "thE+", "thI+", "thEI+", "th0", "th0p", "thSat", "1.th0"}) rs.colors.insert(c);
    add_gen(rs, "thE+", "thEI+", "thI-", "base");
    add_gen(rs, "thSat", "thE+", "thE-", "base");
    add_gen(rs, "thSat", "thI+", "thI-", "base");
    for (auto c : {"thE-", "thI-", "thE+", "thI+", "thEI+", "thSat", "th0"}) add_gen(rs, c, c, "th0p", "base");
    // θ₀ positions hang off the predicate and clausal spine, never off an argument
    for (auto c : {"thE+", "thI+", "thEI+", "thSat", "th0"}) add_gen(rs, c, c, "th0", "base");
    for (auto c : {"thE-", "thI-", "th0p", "th0"}) add_gen(rs, "th0", c, "1.th0", "IM");
    if (variant == "theta-extra") {
        const std::vector<std::string> movable{"thE-", "thI-", "th0p", "th0"};
        for (std::size_t i = 0; i < movable.size(); ++i)
            for (std::size_t k = i; k < movable.size(); ++k) {
                add_gen(rs, "th0", movable[i], movable[k], "absorbing");
            }
    }
    if (variant == "theta-clitic") add_gen(rs, "thE-", "thE-", "th0", "clitic-split");
    return rs;
}

int phase_of(const std::string& h) {
    if (h == "V" || h == "v*") return 0;
    if (h == "INFL" || h == "C") return 1;
    if (h == "N" || h == "D") return 2;
    return 3;
}

int rank_of(const std::string& h) {
    if (h == "v*" || h == "C" || h == "D") return 1;
    if (h == "V" || h == "INFL" || h == "N" || h == "P") return 0;
    return 0;
}

bool is_phase_head(const std::string& h) { return h == "v*" || h == "C" || h == "D" || h == "P"; }

// an element at an ω position may land at the edge of ω′
bool movable(const std::string& w, const std::string& w2) {
    if (phase_of(w) == phase_of(w2)) return rank_of(w) <= rank_of(w2);
    return is_phase_head(w) && phase_of(w) == 0 && phase_of(w2) == 1;
}

RuleSet phase_rules(bool composite) {
    RuleSet rs;
    rs.name = composite ? "phase-composite" : "phase";
    rs.composite = composite;
    rs.checks = {"copies", "pic"};
    rs.sel = {{"V", "v*"}, {"v*", "INFL"}, {"INFL", "C"}, {"C", "top"}, {"N", "D"}};
    for (auto& h : kHeadClasses)
        if (is_phase_head(h)) rs.phase_heads.insert(h);
    rs.colors.insert("sd.top");
    rs.colors.insert("1.m");
    rs.colors.insert("mhat");
    for (auto& w : kHeadClasses) {
        for (auto x : {"h." + w + ".z", "h." + w + ".zs", "h." + w + ".s", "sd." + w, "m." + w})
            rs.colors.insert(x);
        if (!composite) rs.colors.insert("shat." + w);
    }
    for (auto& w : kHeadClasses) {
        std::string hz = "h." + w + ".z", hzs = "h." + w + ".zs", hs = "h." + w + ".s";
        add_gen(rs, hs, hzs, "sd." + w, "base");
        std::vector<std::string> hosts{hs, "sd." + w};
        auto s = rs.sel.find(w);
        if (s != rs.sel.end()) {
            std::string up = "sd." + s->second;
            add_gen(rs, up, hs, "sd." + w, "base");
            add_gen(rs, up, hz, "sd." + w, "base");
            hosts.push_back(up);
        }
        for (auto& x : hosts) add_gen(rs, x, x, "m." + w, "base");
        for (auto& x : {hz, hzs, hs}) {
            add_gen(rs, "mhat", x, "1.m", "H2H");
            add_gen(rs, x, "mhat", x, "H2H");
        }
    }
    for (auto& w : kHeadClasses)
        for (auto& w2 : kHeadClasses) {
            if (!movable(w, w2)) continue;
            for (auto& c : {"sd." + w, "m." + w}) {
                add_gen(rs, "sd." + w2, c, "1.m", "IM");
                if (!composite) add_gen(rs, "shat." + w2, c, "1.m", "SM-split");
            }
        }
    for (auto& w : kHeadClasses) {
        std::string sd = "sd." + w;
        if (composite) {
            Generator g{sd, sd, sd, "SM-cluster",
                        ColorPattern{sd, {ColorPattern{sd, {{"*", {}}, {"1.m", {}}}},
                                          ColorPattern{sd, {{"*", {}}, {"1.m", {}}}}}}};
            rs.generators.push_back(g);
        } else {
            std::string sh = "shat." + w;
            add_gen(rs, sh, sh, sh, "SM-cluster");
            add_gen(rs, sd, sh, sh, "SM-cluster");
            add_gen(rs, sd, sd, sh, "clitic-split");
        }
    }
    return rs;
}

}  // namespace

RuleSet builtin_ruleset(const std::string& name) {
    if (name == "theta" || name == "theta-extra" || name == "theta-clitic") return theta_rules(name);
    if (name == "phase") return phase_rules(false);
    if (name == "phase-composite") return phase_rules(true);
    throw ColoringError("BAD_RULES", "no built-in rule set " + name);
}

std::vector<std::string> builtin_ruleset_names() {
    return {"theta", "theta-extra", "theta-clitic", "phase", "phase-composite"};
}

bool CNode::is_wrap() const {
    return kind == Inner && (left->kind == Unit || right->kind == Unit);
}

const CTree& CNode::inner() const { return left->kind == Unit ? right : left; }

CTree c_leaf(const std::string& label, const Color& c) {
    auto n = std::make_shared<CNode>();
    n->kind = CNode::Leaf;
    n->label = label;
    n->color = c;
    n->bare = leaf(label);
    n->key = label + ":" + c;
    return n;
}

CTree c_trace(const std::string& cancelled_key, const Color& c) {
    auto n = std::make_shared<CNode>();
    n->kind = CNode::Trace;
    n->label = cancelled_key;
    n->color = c;
    n->bare = trace_leaf(cancelled_key);
    n->key = "<" + cancelled_key + ">:" + c;
    return n;
}

CTree c_unit(const Color& c) {
    if (!is_unit_color(c)) throw ColoringError("BAD_TREE", c + " is not a unit-slot color");
    auto n = std::make_shared<CNode>();
    n->kind = CNode::Unit;
    n->color = c;
    n->key = c;
    return n;
}

CTree c_node(const Color& c, const CTree& a, const CTree& b) {
    if (!a || !b) throw ColoringError("BAD_TREE", "null child");
    if (a->kind == CNode::Unit && b->kind == CNode::Unit) throw ColoringError("BAD_TREE", "vertex over two unit slots");
    auto n = std::make_shared<CNode>();
    n->kind = CNode::Inner;
    n->color = c;
    if (b->key < a->key) {
        n->left = b;
        n->right = a;
    } else {
        n->left = a;
        n->right = b;
    }
    n->key = "[" + c + " " + n->left->key + " " + n->right->key + "]";
    if (n->left->kind == CNode::Unit)
        n->bare = n->right->bare;
    else if (n->right->kind == CNode::Unit)
        n->bare = n->left->bare;
    else
        n->bare = merge(n->left->bare, n->right->bare);
    return n;
}

namespace {

struct CParser {
    const std::string& s;
    std::size_t i = 0;

    void skip() {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n')) ++i;
    }
    std::string token() {
        std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '[' && s[i] != ']' && s[i] != '<' && s[i] != '>' &&
               s[i] != '\t' && s[i] != '\n')
            ++i;
        if (start == i) throw ColoringError("BAD_TREE", "expected a token at offset " + std::to_string(start));
        return s.substr(start, i - start);
    }
    CTree parse() {
        skip();
        if (i >= s.size()) throw ColoringError("BAD_TREE", "unexpected end of colored tree");
        if (s[i] == '[') {
            ++i;
            skip();
            Color c = token();
            CTree a = parse();
            CTree b = parse();
            skip();
            if (i >= s.size() || s[i] != ']') throw ColoringError("BAD_TREE", "expected ]");
            ++i;
            return c_node(c, a, b);
        }
        if (s[i] == '<') {
            int depth = 0;
            std::size_t start = i + 1;
            for (; i < s.size(); ++i) {
                if (s[i] == '<') ++depth;
                if (s[i] == '>' && --depth == 0) break;
            }
            if (i >= s.size()) throw ColoringError("BAD_TREE", "unterminated trace");
            std::string key = s.substr(start, i - start);
            ++i;
            if (i >= s.size() || s[i] != ':') throw ColoringError("BAD_TREE", "trace needs :color");
            ++i;
            return c_trace(key, token());
        }
        std::string t = token();
        if (is_unit_color(t)) return c_unit(t);
        auto colon = t.rfind(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == t.size())
            throw ColoringError("BAD_TREE", "leaf needs label:color, got " + t);
        return c_leaf(t.substr(0, colon), t.substr(colon + 1));
    }
};

}  // namespace

CTree parse_colored(const std::string& text) {
    CParser p{text};
    CTree t = p.parse();
    p.skip();
    if (p.i != text.size()) throw ColoringError("BAD_TREE", "trailing characters in colored tree");
    return t;
}

std::string to_text(const CTree& t) { return t->key; }

nlohmann::json to_json(const CTree& t) {
    switch (t->kind) {
        case CNode::Leaf: return {{"leaf", t->label}, {"color", t->color}};
        case CNode::Trace: return {{"trace", t->label}, {"color", t->color}};
        case CNode::Unit: return {{"unit", t->color}};
        case CNode::Inner: return {{"color", t->color}, {"children", {to_json(t->left), to_json(t->right)}}};
    }
    return nullptr;
}

CTree colored_from_json(const nlohmann::json& j) {
    if (j.is_string()) return parse_colored(j.get<std::string>());
    try {
        if (j.contains("unit")) return c_unit(j.at("unit").get<std::string>());
        if (j.contains("leaf")) return c_leaf(j.at("leaf").get<std::string>(), j.at("color").get<std::string>());
        if (j.contains("trace")) return c_trace(j.at("trace").get<std::string>(), j.at("color").get<std::string>());
        auto ch = j.at("children");
        if (ch.size() != 2) throw ColoringError("BAD_TREE", "colored vertices are binary");
        return c_node(j.at("color").get<std::string>(), colored_from_json(ch[0]), colored_from_json(ch[1]));
    } catch (const nlohmann::json::exception& e) {
        throw ColoringError("BAD_TREE", e.what());
    }
}

namespace {

struct Flat {
    CTree node;
    int parent;
    CPath path;
};

std::vector<Flat> flatten(const CTree& t) {
    std::vector<Flat> out;
    std::function<void(const CTree&, int, CPath&)> rec = [&](const CTree& n, int parent, CPath& p) {
        int me = static_cast<int>(out.size());
        out.push_back({n, parent, p});
        if (n->kind != CNode::Inner) return;
        p.push_back(0);
        rec(n->left, me, p);
        p.back() = 1;
        rec(n->right, me, p);
        p.pop_back();
    };
    CPath p;
    rec(t, -1, p);
    return out;
}

bool pattern_match(const ColorPattern& pat, const CTree& n) {
    if (pat.color != "*" && pat.color != n->color) return false;
    if (pat.children.empty()) return true;
    if (n->kind != CNode::Inner) return false;
    return (pattern_match(pat.children[0], n->left) && pattern_match(pat.children[1], n->right)) ||
           (pattern_match(pat.children[0], n->right) && pattern_match(pat.children[1], n->left));
}

bool gen_matches(const Generator& g, const Color& root, const Color& a, const Color& b) {
    return g.root == root && ((g.left == a && g.right == b) || (g.left == b && g.right == a));
}

const Generator* licensing(const RuleSet& rs, const CTree& n) {
    for (auto& g : rs.generators) {
        if (!gen_matches(g, n->color, n->left->color, n->right->color)) continue;
        if (g.body && !pattern_match(*g.body, n)) continue;
        return &g;
    }
    return nullptr;
}

std::pair<int, int> charge(const RuleSet& rs, const Color& c) {
    auto it = rs.charges.find(c);
    return it == rs.charges.end() ? std::pair<int, int>{0, 0} : it->second;
}

}  // namespace

AcceptResult accepts(const RuleSet& rs, const CTree& t, bool global_checks) {
    AcceptResult r;
    auto flat = flatten(t);
    for (auto& f : flat) rs.require_color(f.node->color);
    auto fail = [&](const Flat& f, std::string why) {
        r.accepted = false;
        r.failing_vertex = f.path;
        r.reason = std::move(why);
        return r;
    };
    if (t->kind == CNode::Unit) return fail(flat[0], "a unit slot is not a tree");
    for (auto& f : flat) {
        const auto& n = f.node;
        if ((n->kind == CNode::Leaf || n->kind == CNode::Trace) && is_unit_color(n->color))
            return fail(f, "unit color on a leaf");
        if (n->kind != CNode::Inner) continue;
        if (!licensing(rs, n))
            return fail(f, "no generator [" + n->color + "; " + n->left->color + ", " + n->right->color + "]");
    }
    if (!global_checks) return r;
    std::string why;
    if (rs.has_check("copies") && !copies_check(t, &why, rs.sibling_cut)) {
        r.accepted = false;
        r.reason = why;
        return r;
    }
    if (rs.has_check("theta") && !theta_criterion(rs, t)) {
        r.accepted = false;
        r.reason = "theta criterion";
        return r;
    }
    if (rs.has_check("pic") && !pic_check(rs, t, &why)) {
        r.accepted = false;
        r.reason = why;
        return r;
    }
    return r;
}

bool theta_criterion(const RuleSet& rs, const CTree& t) {
    int lex_e = 0, lex_i = 0, tr_e = 0, tr_i = 0, ab_e = 0, ab_i = 0;
    for (auto& f : flatten(t)) {
        const auto& n = f.node;
        auto c = charge(rs, n->color);
        if (n->kind == CNode::Leaf) {
            lex_e += c.first;
            lex_i += c.second;
        } else if (n->kind == CNode::Trace) {
            tr_e += c.first;
            tr_i += c.second;
        } else if (n->kind == CNode::Inner) {
            auto a = charge(rs, n->left->color), b = charge(rs, n->right->color);
            ab_e += a.first + b.first - c.first;
            ab_i += a.second + b.second - c.second;
        }
    }
    return lex_e == 0 && lex_i == 0 && tr_e == ab_e && tr_i == ab_i;
}

bool copies_check(const CTree& t, std::string* why, bool sibling_cut) {
    auto flat = flatten(t);
    std::map<std::string, std::set<Color>> traces;
    std::set<std::string> present;
    for (auto& f : flat) {
        if (f.node->kind == CNode::Trace) traces[f.node->label].insert(f.node->color);
        else if (f.node->kind != CNode::Unit) present.insert(f.node->bare->key);
    }
    for (auto& [k, cs] : traces)
        if (!present.count(k)) {
            if (why) *why = "trace <" + k + "> has no copy";
            return false;
        }
    // a moved copy always sits under its unit-slot vertex
    for (auto& f : flat) {
        const auto& n = f.node;
        if (n->kind == CNode::Trace || n->kind == CNode::Unit || n->is_wrap()) continue;
        if (traces.count(n->bare->key) && (f.parent < 0 || !flat[f.parent].node->is_wrap())) {
            if (why) *why = "moved copy " + n->bare->key + " has no unit slot above it";
            return false;
        }
    }
    // A copy moved k times sits under a chain of k unit slots. Each move left
    // a trace colored like the vertex it cut: the bare copy, then each slot
    // but the outermost. Which trace came from which move is checked against
    // vertex ages: a vertex is younger than its children, a moved phrase is
    // older than the parent of each of its traces, and the parent of the
    // trace of move i is older than the landing site of move i.
    const int nv = static_cast<int>(flat.size());
    auto bare_parent = [&](int v) {
        int u = flat[v].parent;
        while (u >= 0 && flat[u].node->is_wrap()) u = flat[u].parent;
        return u;
    };
    auto inside = [&](int v, int top) {
        for (; v >= 0; v = flat[v].parent)
            if (v == top) return true;
        return false;
    };
    std::map<const CNode*, int> index;
    for (int v = 0; v < nv; ++v) index[flat[v].node.get()] = v;
    std::map<std::string, std::vector<int>> trace_at;
    std::map<std::string, std::vector<std::vector<Color>>> chains;
    std::map<std::string, std::vector<int>> copy_at;
    for (int v = 0; v < nv; ++v)
        if (flat[v].node->kind == CNode::Trace) trace_at[flat[v].node->label].push_back(v);
    for (auto& f : flat) {
        if (!f.node->is_wrap() || (f.parent >= 0 && flat[f.parent].node->is_wrap())) continue;
        std::vector<Color> chain;
        CTree cur = f.node->inner();
        while (cur->is_wrap()) {
            chain.push_back(cur->color);
            cur = cur->inner();
        }
        if (!traces.count(cur->bare->key)) {
            if (why) *why = "unit slot over " + cur->bare->key + ", which was never moved";
            return false;
        }
        chain.push_back(cur->color);
        std::reverse(chain.begin(), chain.end());
        chains[cur->bare->key].push_back(chain);
        copy_at[cur->bare->key].push_back(index[cur.get()]);
    }

    std::vector<std::vector<int>> older(nv);  // u -> vertices younger than u
    for (int v = 0; v < nv; ++v) {
        auto kind = flat[v].node->kind;
        if (kind == CNode::Unit || kind == CNode::Trace || flat[v].node->is_wrap()) continue;
        int p = bare_parent(v);
        if (p >= 0 && kind == CNode::Inner) older[v].push_back(p);
    }
    for (auto& [k, ts] : trace_at) {
        if (copy_at[k].size() != 1) continue;
        int c = copy_at[k][0];
        if (flat[c].node->kind != CNode::Inner) continue;
        for (int u : ts)
            if (int p = bare_parent(u); p >= 0) older[c].push_back(p);
    }
    auto acyclic = [&](const std::vector<std::vector<int>>& g) {
        std::vector<int> state(nv, 0);
        std::function<bool(int)> dfs = [&](int v) {
            state[v] = 1;
            for (int w : g[v]) {
                if (state[w] == 1) return false;
                if (state[w] == 0 && !dfs(w)) return false;
            }
            state[v] = 2;
            return true;
        };
        for (int v = 0; v < nv; ++v)
            if (state[v] == 0 && !dfs(v)) return false;
        return true;
    };

    std::vector<std::string> ordered;
    for (auto& [k, ts] : trace_at) {
        auto describe = [&] {
            std::string a;
            for (int v : ts) a += " " + flat[v].node->color;
            return "traces of " + k + " colored" + a + " do not match the unit slots of its moved copies";
        };
        std::multiset<Color> want, got;
        for (auto& ch : chains[k]) want.insert(ch.begin(), ch.end());
        for (int v : ts) got.insert(flat[v].node->color);
        if (want != got) {
            if (why) *why = describe();
            return false;
        }
        if (chains[k].size() == 1) ordered.push_back(k);
    }
    // pick a move order for each single chain so that the ages stay consistent
    using Graph = std::vector<std::vector<int>>;
    std::function<bool(std::size_t, const Graph&, const std::vector<int>&)> place =
        [&](std::size_t i, const Graph& g, const std::vector<int>& land) {
            if (i == ordered.size()) {
                if (sibling_cut) return true;
                // sibling traces that left in one move need a sibling cut
                for (int v = 0; v < nv; ++v) {
                    const auto& n = flat[v].node;
                    if (n->kind != CNode::Inner || n->is_wrap()) continue;
                    int a = index[n->left.get()], b = index[n->right.get()];
                    if (land[a] >= 0 && land[a] == land[b]) return false;
                }
                return true;
            }
            const auto& ts = trace_at[ordered[i]];
            const auto& ch = chains[ordered[i]][0];
            int landing = bare_parent(copy_at[ordered[i]][0]);
            std::vector<int> order(ts.size());
            std::iota(order.begin(), order.end(), 0);
            do {
                bool ok = true;
                for (std::size_t j = 0; ok && j < ts.size(); ++j) ok = flat[ts[order[j]]].node->color == ch[j];
                if (!ok) continue;
                auto h = g;
                auto l = land;
                for (std::size_t j = 0; ok && j < ts.size(); ++j) {
                    int from = bare_parent(ts[order[j]]);
                    int to = j + 1 < ts.size() ? bare_parent(ts[order[j + 1]]) : landing;
                    if (from >= 0 && to >= 0) h[from].push_back(to);
                    l[ts[order[j]]] = to;
                    // a copy landing at the same vertex moved in the same step, so
                    // this trace cannot have been cut out of it
                    for (auto& [k2, cs] : copy_at)
                        for (int c : cs)
                            if (to >= 0 && bare_parent(c) == to && inside(ts[order[j]], c)) ok = false;
                }
                if (!ok) continue;
                if (acyclic(h) && place(i + 1, h, l)) return true;
            } while (std::next_permutation(order.begin(), order.end()));
            return false;
        };
    if (!acyclic(older) || !place(0, older, std::vector<int>(nv, -1))) {
        if (why) *why = "no order of the moves fits the trace colors";
        return false;
    }
    return true;
}

bool pic_check(const RuleSet& rs, const CTree& t, std::string* why) {
    auto flat = flatten(t);
    const int n = static_cast<int>(flat.size());
    auto inside = [&](int v, int top) {
        for (; v >= 0; v = flat[v].parent)
            if (v == top) return true;
        return false;
    };
    // head class whose complement is vertex a, if its head is a phase head
    auto domain_head = [&](int a) -> std::string {
        int p = flat[a].parent;
        if (p < 0 || flat[p].node->is_wrap()) return "";
        const auto& pn = flat[p].node;
        const auto& sib = pn->left == flat[a].node ? pn->right : pn->left;
        for (auto& h : rs.phase_heads) {
            if (sib->color == "h." + h + ".zs" && pn->color == "h." + h + ".s") return h;
            auto s = rs.sel.find(h);
            if (s != rs.sel.end() && sib->color == "h." + h + ".z" && pn->color == "sd." + s->second) return h;
        }
        return "";
    };
    for (int v = 0; v < n; ++v) {
        if (flat[v].node->kind != CNode::Trace) continue;
        const std::string& k = flat[v].node->label;
        for (int a = v; a >= 0; a = flat[a].parent) {
            std::string h = domain_head(a);
            if (h.empty()) continue;
            std::set<Color> proj{"h." + h + ".s"};
            if (rs.sel.count(h)) proj.insert("sd." + rs.sel.at(h));
            int y = flat[a].parent;
            while (flat[y].parent >= 0 && proj.count(flat[flat[y].parent].node->color)) y = flat[y].parent;
            bool escaped = false;
            for (int u = 0; u < n && !escaped; ++u) {
                if (u == v || flat[u].node->kind == CNode::Unit) continue;
                bool occ = flat[u].node->kind == CNode::Trace ? flat[u].node->label == k
                                                              : flat[u].node->bare->key == k;
                if (occ && inside(u, y) && !inside(u, a)) escaped = true;
            }
            if (!escaped) {
                if (why) *why = "trace <" + k + "> is stranded in the complement of phase head " + h;
                return false;
            }
            break;
        }
    }
    return true;
}

namespace {

struct GenIndex {
    std::map<std::pair<Color, Color>, std::vector<const Generator*>> by_children;
    std::map<Color, std::vector<const Generator*>> wraps_by_inner;

    explicit GenIndex(const RuleSet& rs) {
        for (auto& g : rs.generators) {
            auto k = std::minmax(g.left, g.right);
            by_children[{k.first, k.second}].push_back(&g);
            if (g.is_wrap()) wraps_by_inner[is_unit_color(g.left) ? g.right : g.left].push_back(&g);
        }
    }
    const std::vector<const Generator*>& over(const Color& a, const Color& b) const {
        static const std::vector<const Generator*> none;
        auto k = std::minmax(a, b);
        auto it = by_children.find({k.first, k.second});
        return it == by_children.end() ? none : it->second;
    }
    const std::vector<const Generator*>& wraps(const Color& c) const {
        static const std::vector<const Generator*> none;
        auto it = wraps_by_inner.find(c);
        return it == wraps_by_inner.end() ? none : it->second;
    }
};

const Color& unit_of(const Generator& g) { return is_unit_color(g.left) ? g.left : g.right; }

int leaf_count(const Tree& t) { return t->is_leaf() ? 1 : leaf_count(t->left) + leaf_count(t->right); }

void trace_keys(const Tree& t, std::map<std::string, int>& out) {
    if (t->is_leaf()) {
        if (t->trace) ++out[t->label];
        return;
    }
    trace_keys(t->left, out);
    trace_keys(t->right, out);
}

}  // namespace

std::vector<CTree> color_search(const RuleSet& rs, const Tree& bare, const SearchOptions& opt) {
    if (leaf_count(bare) > opt.max_leaves)
        throw ColoringError("BOUND_EXCEEDED", "color search is limited to " + std::to_string(opt.max_leaves) + " leaves");
    const std::size_t cap = opt.max_partials;
    GenIndex idx(rs);
    std::vector<Color> lexical;
    for (auto& c : rs.colors)
        if (!is_unit_color(c)) lexical.push_back(c);
    for (auto& [label, cs] : opt.leaves)
        for (auto& c : cs) rs.require_color(c);
    std::map<std::string, int> moved;  // key -> number of traces
    trace_keys(bare, moved);

    std::function<std::vector<CTree>(const Tree&)> rec = [&](const Tree& b) {
        std::map<std::string, CTree> out;
        if (b->is_leaf()) {
            std::string lookup = b->trace ? b->key : b->label;
            auto it = opt.leaves.find(lookup);
            const auto& cs = it == opt.leaves.end() ? lexical : it->second;
            for (auto& c : cs) {
                CTree x = b->trace ? c_trace(b->label, c) : c_leaf(b->label, c);
                out.emplace(x->key, x);
            }
        } else {
            auto ls = rec(b->left);
            auto rs_ = rec(b->right);
            std::map<Color, std::vector<CTree>> lby, rby;
            for (auto& x : ls) lby[x->color].push_back(x);
            for (auto& x : rs_) rby[x->color].push_back(x);
            for (auto& [lc, lv] : lby)
                for (auto& [rc, rv] : rby)
                    for (auto* g : idx.over(lc, rc)) {
                        if (g->is_wrap()) continue;
                        for (auto& x : lv)
                            for (auto& y : rv) {
                                CTree n = c_node(g->root, x, y);
                                if (g->body && !pattern_match(*g->body, n)) continue;
                                out.emplace(n->key, n);
                                if (out.size() > cap) throw ColoringError("BOUND_EXCEEDED", "too many partial colorings");
                            }
                    }
        }
        if (!b->trace && moved.count(b->key)) {
            // one unit slot per move
            std::vector<CTree> level;
            for (auto& kv : out) level.push_back(kv.second);
            out.clear();
            for (int d = 0; d < moved.at(b->key); ++d) {
                std::vector<CTree> next;
                for (auto& x : level)
                    for (auto* g : idx.wraps(x->color)) {
                        CTree w = c_node(g->root, x, c_unit(unit_of(*g)));
                        if (out.emplace(w->key, w).second) next.push_back(w);
                    }
                level = std::move(next);
            }
        }
        std::vector<CTree> v;
        for (auto& kv : out) v.push_back(kv.second);
        return v;
    };

    std::vector<CTree> result;
    for (auto& t : rec(bare)) {
        if (t->is_wrap()) continue;
        if (!accepts(rs, t).accepted) continue;
        result.push_back(t);
        if (result.size() >= opt.max_results) break;
    }
    return result;
}

ColoredWorkspace::ColoredWorkspace(std::vector<CTree> comps) : comps_(std::move(comps)) {
    std::sort(comps_.begin(), comps_.end(), [](const CTree& a, const CTree& b) { return a->key < b->key; });
    if (comps_.empty()) return;
    key_.clear();
    for (std::size_t i = 0; i < comps_.size(); ++i) {
        if (i) key_ += " \xE2\x8A\x94 ";
        key_ += comps_[i]->key;
    }
}

Workspace ColoredWorkspace::bare() const {
    std::vector<Tree> b;
    for (auto& c : comps_) b.push_back(c->bare);
    return Workspace(std::move(b));
}

namespace {

// colored path of the outermost colored vertex sitting at a bare path
CPath locate(const CTree& t, const Path& p) {
    CPath out;
    CTree cur = t;
    for (std::size_t d = 0; d < p.size(); ++d) {
        while (cur->is_wrap()) {
            std::uint8_t i = cur->left->kind == CNode::Unit ? 1 : 0;
            out.push_back(i);
            cur = i ? cur->right : cur->left;
        }
        if (cur->kind != CNode::Inner) throw ColoringError("BAD_TREE", "bare path leaves the colored tree");
        const Tree& want = cur->bare->child(p[d]);
        std::uint8_t i;
        if (cur->left->bare->key == cur->right->bare->key)
            i = p[d];
        else
            i = cur->left->bare->key == want->key ? 0 : 1;
        out.push_back(i);
        cur = i ? cur->right : cur->left;
    }
    return out;
}

CTree at(const CTree& t, const CPath& p) {
    CTree cur = t;
    for (auto i : p) cur = i ? cur->right : cur->left;
    return cur;
}

CTree replace_many(const CTree& t, const std::vector<std::pair<CPath, CTree>>& reps, CPath& here) {
    for (auto& [p, r] : reps)
        if (p == here) return r;
    bool below = false;
    for (auto& [p, r] : reps)
        if (p.size() > here.size() && std::equal(here.begin(), here.end(), p.begin())) below = true;
    if (!below) return t;
    here.push_back(0);
    CTree a = replace_many(t->left, reps, here);
    here.back() = 1;
    CTree b = replace_many(t->right, reps, here);
    here.pop_back();
    return c_node(t->color, a, b);
}

}  // namespace

std::vector<ColoredStep> colored_merge_successors(const ColoredWorkspace& ws, const RuleSet& rs,
                                                  const MergeConfig& cfg) {
    MergeConfig c = cfg;
    c.mode = Mode::Contraction;
    // bare components are sorted by bare key; map them back to colored components
    Workspace bare = ws.bare();
    std::vector<int> colored_of(bare.size(), -1);
    std::vector<bool> used(ws.size(), false);
    for (std::size_t i = 0; i < bare.size(); ++i)
        for (std::size_t j = 0; j < ws.size(); ++j)
            if (!used[j] && ws[j]->bare->key == bare[i]->key) {
                colored_of[i] = static_cast<int>(j);
                used[j] = true;
                break;
            }
    GenIndex idx(rs);
    std::map<std::string, ColoredStep> found;

    for (auto& st : all_merge_successors(bare, c)) {
        std::map<int, std::vector<std::pair<CPath, CTree>>> cuts;
        std::vector<CTree> extracted[2];
        std::set<int> consumed;
        const MergeArg* args[2] = {&st.first, &st.second};
        for (int k = 0; k < 2; ++k) {
            const MergeArg& a = *args[k];
            const CTree& host = ws[colored_of[a.component]];
            if (a.kind == ArgKind::Term) {
                CPath cp = locate(host, a.path);
                CTree term = at(host, cp);
                cuts[a.component].push_back({cp, c_trace(term->bare->key, term->color)});
                for (auto* g : idx.wraps(term->color))
                    extracted[k].push_back(c_node(g->root, term, c_unit(unit_of(*g))));
            } else if (a.kind == ArgKind::Whole) {
                extracted[k].push_back(host);
                consumed.insert(a.component);
            }
        }
        std::map<int, CTree> rebuilt;
        for (auto& [comp, reps] : cuts) {
            CPath here;
            rebuilt[comp] = replace_many(ws[colored_of[comp]], reps, here);
        }
        for (int k = 0; k < 2; ++k)
            if (args[k]->kind == ArgKind::Quotient) {
                extracted[k].push_back(rebuilt.at(args[k]->component));
                consumed.insert(args[k]->component);
            }
        std::vector<CTree> rest;
        for (std::size_t i = 0; i < bare.size(); ++i) {
            int ii = static_cast<int>(i);
            if (consumed.count(ii)) continue;
            rest.push_back(rebuilt.count(ii) ? rebuilt.at(ii) : ws[colored_of[i]]);
        }
        for (auto& x : extracted[0])
            for (auto& y : extracted[1])
                for (auto* g : idx.over(x->color, y->color)) {
                    if (g->is_wrap()) continue;
                    CTree m = c_node(g->root, x, y);
                    if (g->body && !pattern_match(*g->body, m)) continue;
                    auto comps = rest;
                    comps.push_back(m);
                    ColoredWorkspace out(std::move(comps));
                    if (out.bare().key() != st.output.key())
                        throw std::logic_error("colored step disagrees with bare step: " + out.bare().key() +
                                               " vs " + st.output.key());
                    std::string id = std::string(tag_name(st.tag)) + "|" + out.key();
                    found.emplace(id, ColoredStep{st, m, out, g->tag});
                }
    }
    std::vector<ColoredStep> v;
    for (auto& kv : found) v.push_back(std::move(kv.second));
    return v;
}

}  // namespace mg

namespace mg {

std::vector<Color> expand_color_macro(const RuleSet& rs, const std::string& token) {
    if (token == "@phrase") {
        std::vector<Color> out;
        for (auto& c : rs.colors)
            if (c.rfind("sd.", 0) == 0 || c.rfind("m.", 0) == 0)
                if (c != "sd.top") out.push_back(c);
        return out;
    }
    if (token.rfind("@head:", 0) == 0) {
        std::string h = token.substr(6);
        return {"h." + h + ".z", "h." + h + ".zs"};
    }
    rs.require_color(token);
    return {token};
}

ColorScenario color_scenario_from_json(const nlohmann::json& j, const std::string& base_dir) {
    ColorScenario sc;
    try {
        sc.name = j.value("name", "");
        std::string rules = j.at("rules").get<std::string>();
        if (rules.size() > 5 && rules.substr(rules.size() - 5) == ".json")
            sc.rules = load_ruleset(base_dir + "/" + rules);
        else
            sc.rules = builtin_ruleset(rules);
        if (j.contains("bare")) sc.bare = parse_tree(j.at("bare").get<std::string>());
        if (j.contains("colored")) sc.colored = colored_from_json(j.at("colored"));
        if (!sc.bare == !sc.colored) throw ColoringError("BAD_SCENARIO", "give exactly one of bare or colored");
        if (j.contains("leaves"))
            for (auto& [label, cs] : j.at("leaves").items()) {
                auto& v = sc.leaves[label];
                for (auto& c : cs) {
                    auto e = expand_color_macro(sc.rules, c.get<std::string>());
                    v.insert(v.end(), e.begin(), e.end());
                }
            }
        std::string ex = j.value("expect", "accept");
        if (ex != "accept" && ex != "reject") throw ColoringError("BAD_SCENARIO", "expect must be accept or reject");
        sc.expect_accept = ex == "accept";
        if (j.contains("min_colorings")) sc.min_colorings = j.at("min_colorings").get<std::size_t>();
        if (j.contains("max_colorings")) sc.max_colorings = j.at("max_colorings").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ColoringError("BAD_SCENARIO", e.what());
    }
    return sc;
}

ColorScenario load_color_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ColoringError("BAD_SCENARIO", "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ColoringError("BAD_SCENARIO", std::string("malformed JSON: ") + e.what());
    }
    auto slash = path.find_last_of('/');
    return color_scenario_from_json(j, slash == std::string::npos ? "." : path.substr(0, slash));
}

ScenarioResult run_scenario(const ColorScenario& sc) {
    ScenarioResult r;
    if (sc.colored) {
        auto a = accepts(sc.rules, *sc.colored);
        r.accepted = a.accepted;
        r.colorings = a.accepted ? 1 : 0;
        r.detail = a.accepted ? to_text(*sc.colored) : a.reason;
    } else {
        SearchOptions opt;
        opt.leaves = sc.leaves;
        auto found = color_search(sc.rules, *sc.bare, opt);
        r.colorings = found.size();
        r.accepted = !found.empty();
        r.detail = found.empty() ? "no accepted coloring" : to_text(found.front());
    }
    r.passed = r.accepted == sc.expect_accept;
    if (sc.min_colorings && r.colorings < *sc.min_colorings) r.passed = false;
    if (sc.max_colorings && r.colorings > *sc.max_colorings) r.passed = false;
    return r;
}

EquivalenceReport filter_equivalence(const RuleSet& rs, const std::vector<Color>& lexicon, int n, int max_moves) {
    if (lexicon.empty() || n < 1) throw std::invalid_argument("filter_equivalence needs leaves and a lexicon");
    MergeConfig cfg;
    cfg.mode = Mode::Contraction;
    std::vector<std::string> labels;
    for (int i = 0; i < n; ++i) labels.push_back(std::string(1, static_cast<char>('a' + i)));

    RuleSet rules = rs;
    rules.sibling_cut = cfg.allow_sibling_cut;
    EquivalenceReport rep;
    std::vector<int> idx(n, 0);
    while (true) {
        std::vector<CTree> leaves;
        std::vector<Tree> bare_leaves;
        LeafConstraints lc;
        for (int i = 0; i < n; ++i) {
            leaves.push_back(c_leaf(labels[i], lexicon[idx[i]]));
            bare_leaves.push_back(leaves.back()->bare);
            lc[labels[i]] = {lexicon[idx[i]]};
        }

        std::set<std::string> generated, filtered;
        std::set<std::string> seen;
        std::vector<std::pair<ColoredWorkspace, int>> todo{{ColoredWorkspace(leaves), 0}};
        while (!todo.empty()) {
            auto [w, m] = todo.back();
            todo.pop_back();
            if (w.size() == 1 && accepts(rules, w[0]).accepted) generated.insert(w[0]->bare->key);
            for (auto& s : colored_merge_successors(w, rules, cfg)) {
                int m2 = m + (s.step.tag != Tag::EM);
                if (m2 > max_moves) continue;
                if (seen.insert(s.output.key() + "#" + std::to_string(m2)).second) todo.push_back({s.output, m2});
            }
        }

        seen.clear();
        std::vector<std::pair<Workspace, int>> btodo{{Workspace(bare_leaves), 0}};
        while (!btodo.empty()) {
            auto [w, m] = btodo.back();
            btodo.pop_back();
            if (w.size() == 1) {
                SearchOptions o;
                o.leaves = lc;
                o.max_results = 1;
                if (!color_search(rules, w[0], o).empty()) filtered.insert(w[0]->key);
            }
            for (auto& s : all_merge_successors(w, cfg)) {
                int m2 = m + (s.tag != Tag::EM);
                if (m2 > max_moves) continue;
                if (seen.insert(s.output.key() + "#" + std::to_string(m2)).second) btodo.push_back({s.output, m2});
            }
        }

        ++rep.assignments;
        if (!generated.empty()) ++rep.nonempty;
        if (generated != filtered) {
            if (rep.mismatches++ == 0) {
                std::string d;
                for (auto& l : leaves) d += (d.empty() ? "" : " ") + l->key;
                for (auto& k : generated)
                    if (!filtered.count(k)) d += " | generated only: " + k;
                for (auto& k : filtered)
                    if (!generated.count(k)) d += " | filtered only: " + k;
                rep.first_mismatch = d;
            }
        }

        int i = n - 1;
        while (i >= 0 && idx[i] == static_cast<int>(lexicon.size()) - 1) --i;
        if (i < 0) break;
        ++idx[i];
        for (int k = i + 1; k < n; ++k) idx[k] = idx[i];
    }
    return rep;
}

}  // namespace mg
