#include "mg/markov.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

namespace mg {

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::Count: return "count";
        case Regime::MS: return "ms";
        case Regime::MY: return "my";
        case Regime::CL: return "cl";
        case Regime::TOTAL: return "total";
    }
    return "?";
}

Regime parse_regime(const std::string& s) {
    if (s == "count" || s == "none") return Regime::Count;
    if (s == "ms") return Regime::MS;
    if (s == "my") return Regime::MY;
    if (s == "cl") return Regime::CL;
    if (s == "total") return Regime::TOTAL;
    throw std::invalid_argument("unknown regime " + s);
}

int TransitionGraph::index_of(const std::string& key) const {
    for (int i = 0; i < size(); ++i)
        if (vertices[i].key() == key) return i;
    return -1;
}

TransitionGraph build_graph(const std::vector<std::string>& leaves, const GraphConfig& cfg) {
    if (leaves.size() < 2 || leaves.size() > 6) throw MarkovError("state space needs 2 to 6 leaves");
    if (cfg.merge.mode != Mode::Deletion) throw MarkovError("state spaces are built with the deletion coproduct");
    TransitionGraph g;
    g.config = cfg;
    g.vertices = enumerate_forests(leaves, true);
    std::map<std::string, int> index;
    for (int i = 0; i < g.size(); ++i) index[g.vertices[i].key()] = i;
    for (int i = 0; i < g.size(); ++i) {
        for (auto& s : all_merge_successors(g.vertices[i], cfg.merge)) {
            auto it = index.find(s.output.key());
            if (it == index.end()) throw MarkovError("successor outside the state space: " + s.output.key());
            EdgeStep e;
            e.tag = s.tag;
            e.cost.ms = ms_cost(s);
            e.cost.rr_d = rr_between(s.input, s.output);
            e.cost.cl = cl_cost(s);
            g.edges[{i, it->second}].push_back(e);
        }
    }
    return g;
}

Q regime_exponent(const EdgeStep& s, Regime r) {
    switch (r) {
        case Regime::Count: return Q(0);
        case Regime::MS: return s.cost.ms;
        case Regime::MY: return Q(s.cost.rr_d.dsigma);
        case Regime::CL: return Q(s.cost.cl);
        case Regime::TOTAL: return s.cost.ms + Q(s.cost.rr_d.dsigma) + Q(s.cost.cl);
    }
    return Q(0);
}

std::vector<std::vector<int>> count_matrix(const TransitionGraph& g) {
    std::vector<std::vector<int>> K(g.size(), std::vector<int>(g.size(), 0));
    for (auto& [xy, steps] : g.edges)
        K[xy.first][xy.second] = g.config.collapse ? 1 : static_cast<int>(steps.size());
    return K;
}

Eigen::MatrixXd weighted_matrix(const TransitionGraph& g, Regime r, double t) {
    if (!(t > 0)) throw MarkovError("weight parameter must be positive");
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(g.size(), g.size());
    for (auto& [xy, steps] : g.edges) {
        if (g.config.collapse) {
            K(xy.first, xy.second) = std::pow(t, to_double(regime_exponent(steps.front(), r)));
            continue;
        }
        for (auto& s : steps) K(xy.first, xy.second) += std::pow(t, to_double(regime_exponent(s, r)));
    }
    return K;
}

std::vector<std::vector<SymbolicEntry>> symbolic_matrix(const TransitionGraph& g, Regime r) {
    std::vector<std::vector<SymbolicEntry>> K(g.size(), std::vector<SymbolicEntry>(g.size()));
    for (auto& [xy, steps] : g.edges) {
        auto& e = K[xy.first][xy.second];
        if (g.config.collapse) {
            e[regime_exponent(steps.front(), r)] = 1;
            continue;
        }
        for (auto& s : steps) ++e[regime_exponent(s, r)];
    }
    return K;
}

std::string to_string(const SymbolicEntry& e) {
    if (e.empty()) return "0";
    std::string s;
    for (auto& [x, m] : e) {
        if (!s.empty()) s += " + ";
        std::string term = x == Q(0) ? "1" : "t^" + to_string(x);
        s += m == 1 ? term : std::to_string(m) + (x == Q(0) ? "" : "*" + term);
    }
    return s;
}

namespace {

std::vector<std::vector<int>> support(const Eigen::MatrixXd& K) {
    std::vector<std::vector<int>> adj(K.rows());
    for (int i = 0; i < K.rows(); ++i)
        for (int j = 0; j < K.cols(); ++j)
            if (K(i, j) > 0) adj[i].push_back(j);
    return adj;
}

// dominant eigenpair of M + I for nonnegative irreducible M
std::pair<double, Eigen::VectorXd> power(const Eigen::MatrixXd& M, double tol, int max_iter, int& iters) {
    const int n = static_cast<int>(M.rows());
    Eigen::MatrixXd S = M + Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
    double mu = 0;
    for (iters = 1; iters <= max_iter; ++iters) {
        Eigen::VectorXd y = S * x;
        double m = y.maxCoeff();
        y /= m;
        double change = 0;
        for (int i = 0; i < n; ++i) change = std::max(change, std::abs(y(i) - x(i)) / std::max(y(i), 1e-300));
        x = y;
        mu = m;
        if (change <= tol && iters > n) return {mu - 1, x};
    }
    throw MarkovError("power iteration did not converge");
}

}  // namespace

PFData perron_frobenius(const Eigen::MatrixXd& K, double tol, int max_iter) {
    if (K.rows() != K.cols() || K.rows() == 0) throw MarkovError("matrix must be square and nonempty");
    if ((K.array() < 0).any()) throw MarkovError("matrix has negative entries");
    if (!strong_connectivity(support(K)).strongly_connected) throw MarkovError("support is not strongly connected");
    PFData pf;
    int it_r = 0, it_l = 0;
    auto [lambda, eta] = power(K, tol, max_iter, it_r);
    auto [lambda_l, zeta] = power(K.transpose(), tol, max_iter, it_l);
    (void)lambda_l;
    pf.lambda = lambda;
    pf.eta = eta;
    pf.zeta = zeta;
    pf.iterations = std::max(it_r, it_l);
    pf.residual = (K * eta - lambda * eta).cwiseAbs().maxCoeff() / eta.cwiseAbs().maxCoeff();
    const int n = static_cast<int>(K.rows());
    pf.khat = Eigen::MatrixXd::Zero(n, n);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) pf.khat(x, y) = K(x, y) * eta(y) / (lambda * eta(x));
    pf.xi = zeta.cwiseProduct(eta);
    pf.xi /= pf.xi.sum();
    Eigen::VectorXd cols = pf.khat.colwise().sum().transpose();
    pf.bistochastic = (cols.array() - 1.0).abs().maxCoeff() <= 1e-10;
    return pf;
}

namespace {

ClosedForm closed_form(double b, double c, double t, double e) {
    ClosedForm f;
    double s = std::pow(t, b);
    double te = std::pow(t, e);
    double root = std::sqrt((1 - s) * (1 - s) + 2 * te);
    double num = 1 - s + root;
    f.u = std::pow(t, -c) * num;
    // λ − 2 = 2t^e / (1 − s + root), written without cancellation
    double lm2 = 2 * te / num;
    f.lambda = 2 + lm2;
    f.v = num * num / (2 * te);
    double z = 3 * f.v + 3;
    f.xi = Eigen::VectorXd(6);
    f.xi << f.v / z, f.v / z, f.v / z, 1 / z, 1 / z, 1 / z;
    f.eta = Eigen::VectorXd(6);
    f.eta << f.u, f.u, f.u, 1, 1, 1;
    return f;
}

}  // namespace

ClosedForm structured_closed_form(double a, double b, double c, double t) {
    if (!(t > 0)) throw MarkovError("t must be positive");
    return closed_form(b, c, t, a + b);
}

ClosedForm solved_closed_form(double a, double b, double c, double t) {
    if (!(t > 0)) throw MarkovError("t must be positive");
    return closed_form(b, c, t, a + c);
}

Exponents stated_exponents(Regime r) {
    switch (r) {
        case Regime::Count: return {Q(0), Q(0), Q(0)};
        case Regime::MS: return {Q(1, 3), Q(1, 2), Q(0)};
        case Regime::MY: return {Q(-1), Q(0), Q(1)};
        case Regime::CL: return {Q(2), Q(1), Q(0)};
        case Regime::TOTAL: return {Q(4, 3), Q(3, 2), Q(1)};
    }
    return {};
}

Exponents measured_exponents(const TransitionGraph& g3, Regime r) {
    std::map<Tag, std::set<Q>> seen;
    for (auto& [xy, steps] : g3.edges)
        for (auto& s : steps) seen[s.tag].insert(regime_exponent(s, r));
    auto one = [&](Tag t) {
        auto it = seen.find(t);
        if (it == seen.end() || it->second.size() != 1)
            throw MarkovError(std::string("no single exponent for ") + tag_name(t));
        return *it->second.begin();
    };
    return {one(Tag::SM3), one(Tag::SM1), one(Tag::EM)};
}

namespace {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

AsymptoticReport asymptotic_check(Regime r, const std::vector<double>& t_grid) {
    if (r != Regime::MS && r != Regime::CL && r != Regime::TOTAL)
        throw MarkovError("asymptotics are checked for ms, cl and total");
    if (t_grid.size() < 2) throw MarkovError("t grid needs two points");
    AsymptoticReport rep;
    rep.regime = r;
    rep.t_grid = t_grid;
    GraphConfig cfg;
    auto g = build_graph({"a", "b", "c"}, cfg);
    Exponents ex = stated_exponents(r);
    std::vector<double> stated;
    for (double t : t_grid) {
        auto pf = perron_frobenius(weighted_matrix(g, r, t));
        rep.disconnected_mass.push_back(pf.xi.tail(3).mean());
        stated.push_back(structured_closed_form(to_double(ex.a), to_double(ex.b), to_double(ex.c), t).xi(3));
    }
    rep.fitted_exponent_chain = fit_slope(t_grid, rep.disconnected_mass);
    rep.fitted_exponent_stated = fit_slope(t_grid, stated);
    auto near_one = perron_frobenius(weighted_matrix(g, r, 1 - 1e-6));
    rep.max_dev_uniform_at_one = (near_one.xi.array() - 1.0 / 6).abs().maxCoeff();
    double tmin = *std::min_element(t_grid.begin(), t_grid.end());
    auto small = perron_frobenius(weighted_matrix(g, r, tmin));
    rep.max_dev_third_small_t = (small.xi.head(3).array() - 1.0 / 3).abs().maxCoeff();
    return rep;
}

SCCResult strong_connectivity(const std::vector<std::vector<int>>& adj) {
    const int n = static_cast<int>(adj.size());
    SCCResult r;
    r.component_of.assign(n, -1);
    std::vector<int> index(n, -1), low(n, 0), stack;
    std::vector<bool> on_stack(n, false);
    int counter = 0;
    // iterative Tarjan
    for (int root = 0; root < n; ++root) {
        if (index[root] >= 0) continue;
        std::vector<std::pair<int, std::size_t>> call{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& [v, next] = call.back();
            if (next < adj[v].size()) {
                int w = adj[v][next++];
                if (index[w] < 0) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    r.component_of[w] = r.scc_count;
                } while (w != v);
                ++r.scc_count;
            }
            int done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        }
    }
    r.strongly_connected = n > 0 && r.scc_count == 1;
    if (r.strongly_connected && n > 1) {
        std::vector<int> prev(n, -1);
        std::deque<int> q{0};
        prev[0] = 0;
        while (!q.empty()) {
            int v = q.front();
            q.pop_front();
            for (int w : adj[v])
                if (prev[w] < 0) {
                    prev[w] = v;
                    q.push_back(w);
                }
        }
        for (int v = n - 1; v != 0; v = prev[v]) r.witness_path.push_back(v);
        r.witness_path.push_back(0);
        std::reverse(r.witness_path.begin(), r.witness_path.end());
    }
    return r;
}

SCCResult strong_connectivity(const TransitionGraph& g) {
    std::vector<std::vector<int>> adj(g.size());
    for (auto& [xy, steps] : g.edges) adj[xy.first].push_back(xy.second);
    return strong_connectivity(adj);
}

namespace {

std::string quoted(const std::string& s) {
    std::string r = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') r += '\\';
        r += c;
    }
    return r + "\"";
}

}  // namespace

std::string matrix_csv(const TransitionGraph& g, const Eigen::MatrixXd& K) {
    std::ostringstream os;
    os.precision(17);
    os << "state";
    for (auto& v : g.vertices) os << "," << quoted(v.key());
    os << "\n";
    for (int i = 0; i < g.size(); ++i) {
        os << quoted(g.vertices[i].key());
        for (int j = 0; j < g.size(); ++j) os << "," << K(i, j);
        os << "\n";
    }
    return os.str();
}

std::string graph_dot(const TransitionGraph& g) {
    std::ostringstream os;
    os << "digraph G {\n";
    for (int i = 0; i < g.size(); ++i) os << "  n" << i << " [label=" << quoted(g.vertices[i].key()) << "];\n";
    for (auto& [xy, steps] : g.edges) {
        std::set<std::string> tags;
        for (auto& s : steps) tags.insert(s.tag == Tag::ID_SM ? "ID" : tag_name(s.tag));
        std::string label;
        for (auto& t : tags) label += (label.empty() ? "" : "|") + t;
        os << "  n" << xy.first << " -> n" << xy.second << " [label=" << quoted(label) << "];\n";
    }
    os << "}\n";
    return os.str();
}

nlohmann::json pf_json(const PFData& pf) {
    auto vec = [](const Eigen::VectorXd& v) {
        std::vector<double> out(v.data(), v.data() + v.size());
        return out;
    };
    return {{"lambda", pf.lambda},
            {"eta", vec(pf.eta)},
            {"xi", vec(pf.xi)},
            {"bistochastic", pf.bistochastic},
            {"iterations", pf.iterations},
            {"residual", pf.residual}};
}

}  // namespace mg
