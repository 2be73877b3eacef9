#pragma once

#include "mg/cost.hpp"
#include "mg/merge.hpp"
#include "mg/rational.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

namespace mg {

enum class Regime { Count, MS, MY, CL, TOTAL };
const char* regime_name(Regime r);
Regime parse_regime(const std::string& s);

struct EdgeStep {
    Tag tag;
    CostVector cost;
};

struct GraphConfig {
    MergeConfig merge;
    bool collapse = false;  // 0/1 adjacency instead of step multiplicity
};

struct TransitionGraph {
    std::vector<Workspace> vertices;  // trees first, then forests by size and key
    std::map<std::pair<int, int>, std::vector<EdgeStep>> edges;
    GraphConfig config;

    int size() const { return static_cast<int>(vertices.size()); }
    int index_of(const std::string& key) const;
};

TransitionGraph build_graph(const std::vector<std::string>& leaves, const GraphConfig& cfg);

// cost exponent of a step under a regime (MY uses Δσ under Δ^d)
Q regime_exponent(const EdgeStep& s, Regime r);

// K[x][y] = number of steps x→y (or 0/1 when collapsed)
std::vector<std::vector<int>> count_matrix(const TransitionGraph& g);
// K[x][y] = Σ t^{exponent}
Eigen::MatrixXd weighted_matrix(const TransitionGraph& g, Regime r, double t);

// entry → {exponent → multiplicity}
using SymbolicEntry = std::map<Q, int>;
std::vector<std::vector<SymbolicEntry>> symbolic_matrix(const TransitionGraph& g, Regime r);
std::string to_string(const SymbolicEntry& e);

struct PFData {
    double lambda = 0;
    Eigen::VectorXd eta;   // right eigenvector, max entry 1
    Eigen::VectorXd zeta;  // left eigenvector of K
    Eigen::MatrixXd khat;
    Eigen::VectorXd xi;    // stationary distribution of khat
    int iterations = 0;
    double residual = 0;
    bool bistochastic = false;
};

class MarkovError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// power iteration on K + I
PFData perron_frobenius(const Eigen::MatrixXd& K, double tol = 1e-13, int max_iter = 2000000);

struct ClosedForm {
    double u = 0, lambda = 0, v = 0;
    Eigen::VectorXd xi;
    Eigen::VectorXd eta;
};

// As stated: discriminant (1−t^b)² + 2t^a t^b.
ClosedForm structured_closed_form(double a, double b, double c, double t);
// Solved directly from K_{a,b,c}(t)η = λη: discriminant (1−t^b)² + 2t^a t^c.
ClosedForm solved_closed_form(double a, double b, double c, double t);

struct Exponents {
    Q a, b, c;  // SM3 block, SM1 block, EM block
};
// stated exponents per regime
Exponents stated_exponents(Regime r);
// exponents read off the 3-leaf graph from actual step costs
Exponents measured_exponents(const TransitionGraph& g3, Regime r);

struct AsymptoticReport {
    Regime regime;
    std::vector<double> t_grid;
    std::vector<double> disconnected_mass;  // per forest vertex, from the chain
    double fitted_exponent_chain = 0;
    double fitted_exponent_stated = 0;  // from the stated closed form
    double max_dev_uniform_at_one = 0;
    double max_dev_third_small_t = 0;
};

AsymptoticReport asymptotic_check(Regime r, const std::vector<double>& t_grid);

struct SCCResult {
    bool strongly_connected = false;
    int scc_count = 0;
    std::vector<int> component_of;
    std::vector<int> witness_path;  // vertex 0 → last vertex when connected
};

SCCResult strong_connectivity(const TransitionGraph& g);
SCCResult strong_connectivity(const std::vector<std::vector<int>>& adjacency);

std::string matrix_csv(const TransitionGraph& g, const Eigen::MatrixXd& K);
std::string graph_dot(const TransitionGraph& g);
nlohmann::json pf_json(const PFData& pf);

}  // namespace mg
