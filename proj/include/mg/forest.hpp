#pragma once

#include "json.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace mg {

struct Node;
using Tree = std::shared_ptr<const Node>;
using Path = std::vector<std::uint8_t>;

// Immutable vertex of a non-planar binary tree. Children are stored in
// canonical order (left key <= right key), so paths are deterministic.
struct Node {
    std::string label;  // lexical label; for a trace, the key of the cancelled subtree
    bool trace = false;
    Tree left, right;
    std::string key;
    int leaves = 0;    // non-trace leaves
    int vertices = 0;  // all vertices, traces included
    int live = 0;      // vertices with at least one non-trace leaf below

    bool is_leaf() const { return !left; }
    // non-root vertices that are not traces and not trace-only subtrees
    int alpha() const { return live > 0 ? live - 1 : 0; }
    const Tree& child(int i) const { return i == 0 ? left : right; }
};

Tree leaf(const std::string& label);
Tree trace_leaf(const std::string& cancelled_key);
Tree merge(const Tree& a, const Tree& b);

// Planar input form; canonicalize() forgets the child order.
struct RawTree {
    std::string label;
    bool trace = false;
    std::vector<RawTree> children;
};
Tree canonicalize(const RawTree& raw);

Tree subtree_at(const Tree& t, const Path& p);
std::vector<std::pair<Path, Tree>> preorder(const Tree& t);

enum class Mode { Contraction, Deletion };
const char* mode_name(Mode m);
Mode parse_mode(const std::string& s);

class Workspace {
public:
    Workspace() = default;
    explicit Workspace(std::vector<Tree> components);
    Workspace(std::initializer_list<Tree> components)
        : Workspace(std::vector<Tree>(components)) {}

    const std::vector<Tree>& components() const { return comps_; }
    std::size_t size() const { return comps_.size(); }
    bool empty() const { return comps_.empty(); }
    const Tree& operator[](std::size_t i) const { return comps_[i]; }

    // components carrying at least one non-trace leaf
    int b0() const;
    int alpha() const;
    int sigma() const { return alpha() + b0(); }
    int sigma_hat() const { return b0() + sigma(); }
    int degree() const;

    const std::string& key() const { return key_; }
    Workspace operator+(const Workspace& other) const;
    bool operator==(const Workspace& o) const { return key_ == o.key_; }
    bool operator<(const Workspace& o) const { return key_ < o.key_; }

private:
    std::vector<Tree> comps_;
    std::string key_ = "1";
};

struct AccessibleTermRef {
    int component = 0;
    Path path;
    Tree subtree;
};

std::vector<AccessibleTermRef> accessible_terms(const Workspace& ws);

// Occurrences of a subtree key, in preorder over the sorted components.
// Component roots are included (empty path).
std::vector<AccessibleTermRef> occurrences(const Workspace& ws, const std::string& key);

// All binary trees on the given leaf multiset, deduplicated.
std::vector<Tree> enumerate_trees(const std::vector<std::string>& leaves);
// All forests on the leaf multiset; trees first, then by component count and key.
std::vector<Workspace> enumerate_forests(const std::vector<std::string>& leaves, bool require_edge);

Workspace quotient(const Workspace& ws, const std::vector<AccessibleTermRef>& cut, Mode mode);

// text form: [[a b] c] ⊔ [d e], traces as <key>, empty workspace as 1
std::string to_text(const Tree& t);
std::string to_text(const Workspace& ws);
Tree parse_tree(const std::string& text);
Workspace parse_workspace(const std::string& text);

nlohmann::json to_json(const Tree& t);
nlohmann::json to_json(const Workspace& ws);
Tree tree_from_json(const nlohmann::json& j);
Workspace workspace_from_json(const nlohmann::json& j);

}  // namespace mg
