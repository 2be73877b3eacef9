#pragma once

#include "mg/forest.hpp"
#include "mg/merge.hpp"

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace mg {

// Color tokens are opaque strings. Tokens starting with "1." are unit slots:
// they stand for the Hopf unit in M_{S,1} and never occur as lexical colors.
using Color = std::string;
bool is_unit_color(const Color& c);

class ColoringError : public std::runtime_error {
public:
    ColoringError(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

// Pattern for the multi-vertex generator variant; color "*" matches anything.
struct ColorPattern {
    Color color;
    std::vector<ColorPattern> children;  // empty or two
};

struct Generator {
    Color root;
    Color left, right;  // matched up to swap
    std::string tag = "base";  // base | IM | SM-split | SM-cluster | H2H | clitic-split | absorbing
    std::optional<ColorPattern> body;

    bool is_wrap() const { return is_unit_color(left) || is_unit_color(right); }
    bool composite() const { return body.has_value(); }
};

struct RuleSet {
    std::string name;
    std::set<Color> colors;
    std::vector<Generator> generators;
    bool composite = false;
    // two sibling traces may come from one move (Merge with sibling cut)
    bool sibling_cut = true;
    std::vector<std::string> checks;  // copies | theta | pic
    // theta charges per token, {E, I}; ↑ positive, ↓ negative
    std::map<Color, std::pair<int, int>> charges;
    // phase structure for the pic check
    std::set<std::string> phase_heads;
    std::map<std::string, std::string> sel;  // head -> next head up

    bool has_check(const std::string& c) const;
    void require_color(const Color& c) const;
};

nlohmann::json to_json(const RuleSet& rs);
RuleSet ruleset_from_json(const nlohmann::json& j);
RuleSet load_ruleset(const std::string& path);

// Built-in sets: theta (option 2), theta-extra (option 1), theta-clitic,
// phase (single-vertex, with split and head-movement generators),
// phase-composite (no ŝ colors, composite body instead).
RuleSet builtin_ruleset(const std::string& name);
std::vector<std::string> builtin_ruleset_names();

extern const std::vector<std::string> kHeadClasses;

// A colored binary tree. A vertex with a unit child is the M_{S,1} vertex
// sitting on top of a moved copy ("wrap"); forgetting colors contracts it.
struct CNode;
using CTree = std::shared_ptr<const CNode>;

struct CNode {
    enum Kind { Leaf, Trace, Unit, Inner } kind = Leaf;
    std::string label;  // leaf label, or the cancelled key for a trace
    Color color;
    CTree left, right;  // sorted by key
    std::string key;
    Tree bare;  // null for Unit

    bool is_wrap() const;
    const CTree& inner() const;  // the non-unit child of a wrap
};

CTree c_leaf(const std::string& label, const Color& c);
CTree c_trace(const std::string& cancelled_key, const Color& c);
CTree c_unit(const Color& c);
CTree c_node(const Color& c, const CTree& a, const CTree& b);

// text: [color x y], leaves label:color, traces <key>:color, unit slots 1.x
CTree parse_colored(const std::string& text);
std::string to_text(const CTree& t);
nlohmann::json to_json(const CTree& t);
CTree colored_from_json(const nlohmann::json& j);

// colored child index path
using CPath = std::vector<std::uint8_t>;

struct AcceptResult {
    bool accepted = true;
    std::optional<CPath> failing_vertex;
    std::string reason;
};

// Every binary vertex matches a generator (or the root of a composite body),
// then the rule set's global checks.
AcceptResult accepts(const RuleSet& rs, const CTree& t, bool global_checks = true);

// Sum of lexical charges is zero and roles held by traces balance the roles
// absorbed at non-conserving vertices. Uses rs.charges.
bool theta_criterion(const RuleSet& rs, const CTree& t);
bool copies_check(const CTree& t, std::string* why = nullptr, bool sibling_cut = true);
bool pic_check(const RuleSet& rs, const CTree& t, std::string* why = nullptr);

using LeafConstraints = std::map<std::string, std::vector<Color>>;

struct SearchOptions {
    LeafConstraints leaves;  // missing labels: any lexical color
    std::size_t max_results = 10000;
    int max_leaves = 14;
    std::size_t max_partials = 2000000;  // per subtree
};

// All accepted colorings of the bare tree, sorted by key.
std::vector<CTree> color_search(const RuleSet& rs, const Tree& bare, const SearchOptions& opt = {});

class ColoredWorkspace {
public:
    ColoredWorkspace() = default;
    explicit ColoredWorkspace(std::vector<CTree> comps);
    const std::vector<CTree>& components() const { return comps_; }
    std::size_t size() const { return comps_.size(); }
    const CTree& operator[](std::size_t i) const { return comps_[i]; }
    Workspace bare() const;
    const std::string& key() const { return key_; }

private:
    std::vector<CTree> comps_;
    std::string key_ = "1";
};

struct ColoredStep {
    MergeStep step;  // the underlying bare step (contraction mode)
    CTree merged;
    ColoredWorkspace output;
    std::string generator_tag;
};

// Merge successors whose new root vertex is licensed by some generator
// [c; c_S, c_S'], whatever the kind of step. Every extracted term is first
// wrapped by a unit-slot generator (M_{T,1}). Quotients keep colored traces,
// so the mode is forced to contraction.
std::vector<ColoredStep> colored_merge_successors(const ColoredWorkspace& ws, const RuleSet& rs,
                                                  const MergeConfig& cfg);

// Scenario file: {name, rules, bare | colored, leaves?, expect: accept|reject,
// min_colorings?, max_colorings?}. rules is a built-in name or a path relative
// to the file. Leaf color lists may use "@phrase" (every sd./m. color) and
// "@head:X" (h.X.z, h.X.zs).
struct ColorScenario {
    std::string name;
    RuleSet rules;
    std::optional<Tree> bare;
    std::optional<CTree> colored;
    LeafConstraints leaves;
    bool expect_accept = true;
    std::optional<std::size_t> min_colorings, max_colorings;
};

struct ScenarioResult {
    bool passed = false;
    bool accepted = false;
    std::size_t colorings = 0;
    std::string detail;  // first coloring, or the rejection reason
};

ColorScenario color_scenario_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
ColorScenario load_color_scenario(const std::string& path);
ScenarioResult run_scenario(const ColorScenario& sc);
std::vector<Color> expand_color_macro(const RuleSet& rs, const std::string& token);

// Filter vs generation on n leaves a, b, ...: for every multiset of lexicon
// colors on the leaves, the bare trees reached by colored Merge with an
// accepted result equal the bare trees reached by plain Merge that admit an
// accepted coloring. max_moves bounds the non-EM steps on both sides.
struct EquivalenceReport {
    int assignments = 0;
    int nonempty = 0;
    int mismatches = 0;
    std::string first_mismatch;
};
EquivalenceReport filter_equivalence(const RuleSet& rs, const std::vector<Color>& lexicon, int n, int max_moves);

}  // namespace mg
