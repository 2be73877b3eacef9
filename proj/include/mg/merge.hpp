#pragma once

#include "mg/forest.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mg {

struct MergeConfig {
    Mode mode = Mode::Deletion;
    bool allow_IM = true;
    bool allow_SM = true;
    bool allow_identity_SM = false;
    // two extracted terms that are siblings under a non-root vertex
    bool allow_sibling_cut = false;
    // single-leaf SM extractions, no SM2
    bool atomic_SM_only = false;
};

enum class Tag { EM, IM, SM1, SM2, SM3, ID_SM };
const char* tag_name(Tag t);
Tag parse_tag(const std::string& s);

enum class ArgKind { Whole, Term, Quotient, Unit };

struct MergeArg {
    ArgKind kind = ArgKind::Unit;
    int component = -1;  // index into the input workspace
    Path path;           // empty for Whole and Quotient
    Tree tree;           // the object actually merged
    int host_leaves = 0; // degree of the component it came from
};

struct MergeStep {
    Workspace input;
    MergeArg first, second;
    Mode mode = Mode::Deletion;
    Tree merged;
    Workspace output;
    Tag tag = Tag::EM;

    std::string identity() const;
};

class MergeError : public std::runtime_error {
public:
    MergeError(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

// Every distinct single Merge application under cfg, sorted by (output, tag, merged).
std::vector<MergeStep> all_merge_successors(const Workspace& ws, const MergeConfig& cfg);

// Tag from the provenance of the two arguments; throws MergeError on inconsistent provenance.
Tag classify(const MergeStep& step);

// Builds the step M(first, second) on ws; arguments must be Whole or Term
// (IM passes a Term and a Quotient of the same host).
MergeStep make_step(const Workspace& ws, const MergeArg& a, const MergeArg& b, Mode mode);

struct FormCopyStage {
    std::string key;
    int vertices_before = 0;
    int vertices_after = 0;
    int leaf_classes_before = 0;
    int leaf_classes_after = 0;
};

// A tree with some isomorphic subtrees glued together vertexwise.
class QuotientGraph {
public:
    explicit QuotientGraph(Tree t);

    // glue the subtrees at paths a and b; throws on equal, nested or non-isomorphic targets
    void identify(const Path& a, const Path& b);

    int vertex_count() const;
    int edge_count() const;
    int leaf_class_count() const;
    const Tree& tree() const { return tree_; }
    std::vector<std::pair<int, int>> edges() const;

private:
    int find(int x) const;
    int index_of(const Path& p) const;

    Tree tree_;
    std::vector<std::pair<Path, Tree>> nodes_;
    std::vector<int> parent_;  // tree parent, -1 at the root
    mutable std::vector<int> uf_;
};

struct CopyPair {
    std::string key;
    int first = 0;
    int second = 1;
};

QuotientGraph form_copy_quotient(const Tree& tree, const std::vector<CopyPair>& pairs,
                                 std::vector<FormCopyStage>* stages = nullptr);

struct Derivation {
    Workspace initial;
    MergeConfig config;
    std::vector<MergeStep> steps;
    Workspace final_ws;
    std::vector<FormCopyStage> copies;
    std::string name;
};

// Script: {name?, initial, mode?, flags?, steps:[{op, args:[ref...]}, ...]}
// ref = {key, n} or {component}; FC steps: {op:"FC", key, occurrences:[i,j]}
Derivation replay(const nlohmann::json& script);
Derivation replay_file(const std::string& path);

}  // namespace mg
