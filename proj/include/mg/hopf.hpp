#pragma once

#include "mg/forest.hpp"
#include "mg/rational.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mg {

// Formal linear combination over objects with a canonical key().
template <class T>
class LinComb {
public:
    struct Entry {
        T value;
        Q coef;
    };

    void add(const T& x, const Q& c) {
        if (c == Q(0)) return;
        auto it = terms_.find(x.key());
        if (it == terms_.end()) {
            terms_.emplace(x.key(), Entry{x, c});
            return;
        }
        it->second.coef += c;
        if (it->second.coef == Q(0)) terms_.erase(it);
    }
    void add(const LinComb& o, const Q& scale = 1) {
        for (auto& [k, e] : o.terms_) add(e.value, e.coef * scale);
    }
    Q coef(const std::string& key) const {
        auto it = terms_.find(key);
        return it == terms_.end() ? Q(0) : it->second.coef;
    }
    const std::map<std::string, Entry>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }

    bool operator==(const LinComb& o) const {
        if (terms_.size() != o.terms_.size()) return false;
        for (auto& [k, e] : terms_) {
            auto it = o.terms_.find(k);
            if (it == o.terms_.end() || it->second.coef != e.coef) return false;
        }
        return true;
    }
    LinComb operator-(const LinComb& o) const {
        LinComb r = *this;
        r.add(o, Q(-1));
        return r;
    }

private:
    std::map<std::string, Entry> terms_;
};

template <class T>
class TensorComb {
public:
    struct Entry {
        T left, right;
        Q coef;
    };
    using Key = std::pair<std::string, std::string>;

    void add(const T& l, const T& r, const Q& c) {
        if (c == Q(0)) return;
        Key k{l.key(), r.key()};
        auto it = terms_.find(k);
        if (it == terms_.end()) {
            terms_.emplace(k, Entry{l, r, c});
            return;
        }
        it->second.coef += c;
        if (it->second.coef == Q(0)) terms_.erase(it);
    }
    void add(const TensorComb& o, const Q& scale = 1) {
        for (auto& [k, e] : o.terms_) add(e.left, e.right, e.coef * scale);
    }
    Q coef(const std::string& l, const std::string& r) const {
        auto it = terms_.find({l, r});
        return it == terms_.end() ? Q(0) : it->second.coef;
    }
    const std::map<Key, Entry>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }

    bool operator==(const TensorComb& o) const {
        if (terms_.size() != o.terms_.size()) return false;
        for (auto& [k, e] : terms_) {
            auto it = o.terms_.find(k);
            if (it == o.terms_.end() || it->second.coef != e.coef) return false;
        }
        return true;
    }
    TensorComb operator-(const TensorComb& o) const {
        TensorComb r = *this;
        r.add(o, Q(-1));
        return r;
    }

    // (a⊗b)(c⊗d) = (a c)⊗(b d), product given by T::operator+
    TensorComb operator*(const TensorComb& o) const {
        TensorComb r;
        for (auto& [k1, x] : terms_)
            for (auto& [k2, y] : o.terms_) r.add(x.left + y.left, x.right + y.right, x.coef * y.coef);
        return r;
    }

    // apply f on the left factor and g on the right factor
    TensorComb apply(const std::function<LinComb<T>(const T&)>& f,
                     const std::function<LinComb<T>(const T&)>& g) const {
        TensorComb r;
        for (auto& [k, e] : terms_) {
            auto fl = f(e.left);
            auto gr = g(e.right);
            for (auto& [a, x] : fl.terms())
                for (auto& [b, y] : gr.terms()) r.add(x.value, y.value, e.coef * x.coef * y.coef);
        }
        return r;
    }

private:
    std::map<Key, Entry> terms_;
};

template <class T>
LinComb<T> identity_map(const T& x) {
    LinComb<T> r;
    r.add(x, 1);
    return r;
}

template <class T>
nlohmann::json to_json(const LinComb<T>& c) {
    auto arr = nlohmann::json::array();
    for (auto& [k, e] : c.terms()) arr.push_back({{"coef", to_string(e.coef)}, {"term", to_json(e.value)}});
    return arr;
}

template <class T>
nlohmann::json to_json(const TensorComb<T>& c) {
    auto arr = nlohmann::json::array();
    for (auto& [k, e] : c.terms())
        arr.push_back({{"coef", to_string(e.coef)}, {"left", to_json(e.left)}, {"right", to_json(e.right)}});
    return arr;
}

template <class T>
std::string to_text(const TensorComb<T>& c) {
    std::string s;
    for (auto& [k, e] : c.terms()) {
        if (!s.empty()) s += " + ";
        if (e.coef != Q(1)) s += to_string(e.coef) + " ";
        s += "(" + k.first + ") \xE2\x8A\x97 (" + k.second + ")";
    }
    return s.empty() ? "0" : s;
}

using WsComb = LinComb<Workspace>;
using WsTensor = TensorComb<Workspace>;

// Sum over cuts of pairwise disjoint accessible terms, plus whole components
// taken to the left. Multiplicative over components.
WsTensor coproduct(const Workspace& ws, Mode mode);

// Arbitrary-arity rooted trees with a label (possibly empty) on every vertex.
struct CKNode;
using CKTree = std::shared_ptr<const CKNode>;

struct CKNode {
    std::string label;  // empty = unlabeled
    std::vector<CKTree> children;  // sorted by key
    std::string key;
    int vertices = 1;
};

CKTree ck_vertex(const std::string& label, std::vector<CKTree> children = {});

class CKForest {
public:
    CKForest() = default;
    explicit CKForest(std::vector<CKTree> trees);

    const std::vector<CKTree>& trees() const { return trees_; }
    const std::string& key() const { return key_; }
    int vertices() const;
    CKForest operator+(const CKForest& o) const;

private:
    std::vector<CKTree> trees_;
    std::string key_ = "1";
};

nlohmann::json to_json(const CKForest& f);

using CKComb = LinComb<CKForest>;
using CKTensor = TensorComb<CKForest>;

CKTensor ck_coproduct(const CKForest& f);

// B and B^α: new root over the components of f.
CKTree graft_B(const CKForest& f, const std::optional<std::string>& root_label = std::nullopt);

// All CK forests with 1..max_vertices vertices over the alphabet, plus the empty forest.
std::vector<CKForest> enumerate_ck_forests(int max_vertices, const std::vector<std::string>& alphabet);

struct CocycleReport {
    bool passed = true;
    int checked = 0;
    std::string counterexample;
};

using GraftFn = std::function<CKTree(const CKForest&)>;

// Δ(B(F)) = B(F)⊗1 + (id⊗B)Δ(F) over every forest up to the bound.
CocycleReport verify_cocycle(int max_vertices, const std::vector<std::string>& alphabet, const GraftFn& graft);
CocycleReport verify_cocycle(int max_vertices);

// Splits each edge of target by a new vertex carrying a new leaf alpha.
// Not a Merge operation: growth happens below the root.
WsComb insertion_delta(const Tree& target, const std::string& alpha);
// Derivation extension to workspaces; edgeless components contribute nothing.
WsComb insertion_delta(const Workspace& ws, const std::string& alpha);

struct InsertionRefutation {
    WsTensor lhs;  // Δ^c(δ_α T)
    WsTensor rhs;  // δ_α(T)⊗1 + (id⊗δ_α)Δ^c(T)
    bool identity_holds = false;
    // an lhs term with α in the left factor and a non-unit right factor, absent from rhs
    std::optional<std::pair<std::string, std::string>> witness;
};

InsertionRefutation refute_insertion_cocycle(const Tree& t, const std::string& alpha);

}  // namespace mg
