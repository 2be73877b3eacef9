#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mg/markov.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace mg;

namespace {

constexpr double kTol = 1e-10;

const std::vector<std::vector<int>> kKXwIM = {
    {0, 1, 1, 0, 1, 1}, {1, 0, 1, 1, 0, 1}, {1, 1, 0, 1, 1, 0},
    {1, 0, 0, 0, 1, 1}, {0, 1, 0, 1, 0, 1}, {0, 0, 1, 1, 1, 0},
};

std::vector<std::string> letters(int n) {
    std::vector<std::string> v;
    for (int i = 0; i < n; ++i) v.push_back(std::string(1, static_cast<char>('a' + i)));
    return v;
}

GraphConfig config(bool im = true, bool identity = false, bool atomic = false) {
    GraphConfig g;
    g.merge.allow_IM = im;
    g.merge.allow_identity_SM = identity;
    g.merge.atomic_SM_only = atomic;
    return g;
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<int>>& k) {
    Eigen::MatrixXd m(k.size(), k.size());
    for (std::size_t i = 0; i < k.size(); ++i)
        for (std::size_t j = 0; j < k.size(); ++j) m(i, j) = k[i][j];
    return m;
}

double dominant_eigenvalue(const Eigen::MatrixXd& k) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(k);
    double best = -1;
    for (int i = 0; i < es.eigenvalues().size(); ++i) best = std::max(best, es.eigenvalues()[i].real());
    return best;
}

void check_chain(const Eigen::MatrixXd& k, const PFData& pf) {
    CHECK(std::abs(pf.lambda - dominant_eigenvalue(k)) < 1e-9);
    CHECK((k * pf.eta - pf.lambda * pf.eta).cwiseAbs().maxCoeff() < 1e-9);
    for (int i = 0; i < pf.khat.rows(); ++i) CHECK(std::abs(pf.khat.row(i).sum() - 1) < kTol);
    CHECK((pf.xi.transpose() * pf.khat - pf.xi.transpose()).cwiseAbs().maxCoeff() < kTol);
    CHECK(std::abs(pf.xi.sum() - 1) < kTol);
    CHECK(pf.eta.minCoeff() > 0);
    CHECK(pf.xi.minCoeff() > 0);
}

bool column_stochastic(const Eigen::MatrixXd& m) {
    for (int j = 0; j < m.cols(); ++j)
        if (std::abs(m.col(j).sum() - 1) > kTol) return false;
    return true;
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(b) / (a.norm() * b.norm()); }

}  // namespace

TEST_CASE("three-leaf count matrices") {
    auto g = build_graph({"a", "b", "c"}, config());
    REQUIRE(g.size() == 6);
    CHECK(count_matrix(g) == kKXwIM);

    auto no_im = count_matrix(build_graph({"a", "b", "c"}, config(false)));
    auto want = kKXwIM;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) want[i][j] = 0;
    CHECK(no_im == want);

    auto id = count_matrix(build_graph({"a", "b", "c"}, config(true, true)));
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) CHECK(id[i][j] == kKXwIM[i][j] + (i == j ? 1 : 0));

    CHECK_THROWS(build_graph(letters(7), config()));
}

TEST_CASE("Perron-Frobenius data of the unweighted chains") {
    auto k = to_matrix(kKXwIM);
    auto pf = perron_frobenius(k);
    check_chain(k, pf);
    CHECK(std::abs(pf.lambda - (2 + std::sqrt(2.0))) < kTol);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(pf.eta(i) / pf.eta(3) - std::sqrt(2.0)) < 1e-9);
    CHECK(pf.bistochastic);
    CHECK(column_stochastic(pf.khat));
    for (int i = 0; i < 6; ++i) CHECK(std::abs(pf.xi(i) - 1.0 / 6) < kTol);

    auto k1 = to_matrix(count_matrix(build_graph({"a", "b", "c"}, config(false))));
    auto pf1 = perron_frobenius(k1);
    check_chain(k1, pf1);
    CHECK(std::abs(pf1.lambda - (1 + std::sqrt(3.0))) < kTol);
    CHECK_FALSE(pf1.bistochastic);
    CHECK_FALSE(column_stochastic(pf1.khat));
    double z = 3 * (3 - std::sqrt(3.0));
    for (int i = 0; i < 3; ++i) CHECK(std::abs(pf1.xi(i) - (2 - std::sqrt(3.0)) / z) < 1e-9);
    for (int i = 3; i < 6; ++i) CHECK(std::abs(pf1.xi(i) - 1 / z) < 1e-9);

    auto k2 = to_matrix(count_matrix(build_graph({"a", "b", "c"}, config(true, true))));
    auto pf2 = perron_frobenius(k2);
    check_chain(k2, pf2);
    CHECK(std::abs(pf2.lambda - (3 + std::sqrt(2.0))) < kTol);
    CHECK(column_stochastic(pf2.khat));
    CHECK((pf2.eta - pf.eta).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("weighted chains") {
    auto g = build_graph({"a", "b", "c"}, config());
    for (auto r : {Regime::MS, Regime::MY, Regime::CL, Regime::TOTAL})
        for (double t : {0.1, 0.5, 0.9}) {
            auto k = weighted_matrix(g, r, t);
            auto pf = perron_frobenius(k);
            check_chain(k, pf);
            if (r == Regime::MY) CHECK(column_stochastic(pf.khat));
        }
    CHECK((weighted_matrix(g, Regime::MS, 1.0) - to_matrix(kKXwIM)).cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("exponents read off the steps") {
    auto g = build_graph({"a", "b", "c"}, config());
    for (auto r : {Regime::MS, Regime::MY, Regime::CL, Regime::TOTAL}) {
        auto m = measured_exponents(g, r);
        auto s = stated_exponents(r);
        CHECK(m.a == s.a);
        CHECK(m.b == s.b);
        CHECK(m.c == s.c);
    }
    auto ms = measured_exponents(g, Regime::MS), my = measured_exponents(g, Regime::MY),
         cl = measured_exponents(g, Regime::CL), tot = measured_exponents(g, Regime::TOTAL);
    CHECK(tot.a == ms.a + my.a + cl.a);
    CHECK(tot.b == ms.b + my.b + cl.b);
    CHECK(tot.c == ms.c + my.c + cl.c);
    CHECK(tot.a == Q(4, 3));
    CHECK(tot.b == Q(3, 2));
    CHECK(tot.c == Q(1));
}

TEST_CASE("solved closed form matches power iteration") {
    auto g = build_graph({"a", "b", "c"}, config());
    for (auto r : {Regime::MS, Regime::MY, Regime::CL, Regime::TOTAL}) {
        auto e = stated_exponents(r);
        for (int i = 1; i <= 20; ++i) {
            double t = 0.05 * i;
            auto pf = perron_frobenius(weighted_matrix(g, r, t));
            auto cf = solved_closed_form(to_double(e.a), to_double(e.b), to_double(e.c), t);
            CHECK(std::abs(cf.lambda - pf.lambda) < 1e-9);
            CHECK(cosine(cf.xi, pf.xi) > 1 - 1e-9);
            CHECK(cosine(cf.eta, pf.eta) > 1 - 1e-9);
        }
    }
}

TEST_CASE("stated closed form") {
    for (double t : {0.1, 0.3, 0.7, 2.0}) {
        auto my = structured_closed_form(-1, 0, 1, t);
        CHECK(std::abs(my.v - 1) < 1e-12);
    }
    auto one = structured_closed_form(1.0 / 3, 0.5, 0, 1.0);
    CHECK(std::abs(one.lambda - (2 + std::sqrt(2.0))) < 1e-12);
    CHECK(std::abs(one.u - std::sqrt(2.0)) < 1e-12);
    // the two forms agree when the SM1 and EM blocks share an exponent
    auto p = structured_closed_form(0.7, 0.4, 0.4, 0.3);
    auto q = solved_closed_form(0.7, 0.4, 0.4, 0.3);
    CHECK(std::abs(p.lambda - q.lambda) < 1e-12);
    CHECK(std::abs(p.v - q.v) < 1e-12);
}

TEST_CASE("limits of the weighted chains") {
    for (auto r : {Regime::MS, Regime::CL, Regime::TOTAL}) {
        auto rep = asymptotic_check(r, {1e-3, 1e-4, 1e-5});
        CHECK(rep.max_dev_uniform_at_one < 1e-6);
        CHECK(rep.max_dev_third_small_t < 1e-2);
        // the grid runs toward 0, so the forest sector drains
        for (std::size_t i = 0; i + 1 < rep.disconnected_mass.size(); ++i)
            CHECK(rep.disconnected_mass[i + 1] < rep.disconnected_mass[i]);
    }
}

TEST_CASE("strong connectivity") {
    for (int n = 3; n <= 5; ++n) {
        auto full = build_graph(letters(n), config());
        auto atomic = build_graph(letters(n), config(true, false, true));
        CHECK(full.size() == atomic.size());
        for (auto& [e, steps] : atomic.edges) CHECK(full.edges.count(e) == 1);
        CHECK(strong_connectivity(atomic).strongly_connected);
        CHECK(strong_connectivity(full).strongly_connected);
    }
    auto g4 = build_graph(letters(4), config());
    CHECK(g4.size() == 36);
    auto s4 = strong_connectivity(g4);
    CHECK(s4.scc_count == 1);
    REQUIRE(!s4.witness_path.empty());
    CHECK(s4.witness_path.front() == 0);
    CHECK(s4.witness_path.back() == g4.size() - 1);
    for (std::size_t i = 0; i + 1 < s4.witness_path.size(); ++i)
        CHECK(g4.edges.count({s4.witness_path[i], s4.witness_path[i + 1]}) == 1);

    GraphConfig em;
    em.merge.allow_IM = false;
    em.merge.allow_SM = false;
    auto e3 = build_graph(letters(3), em);
    auto se = strong_connectivity(e3);
    CHECK_FALSE(se.strongly_connected);
    CHECK(se.scc_count > 1);
    CHECK_THROWS_AS(perron_frobenius(to_matrix(count_matrix(e3))), MarkovError);
}

TEST_CASE("exports") {
    auto g = build_graph({"a", "b", "c"}, config());
    auto k = to_matrix(count_matrix(g));
    auto csv = matrix_csv(g, k);
    CHECK(std::count(csv.begin(), csv.end(), '\n') >= 6);
    CHECK(graph_dot(g).find("digraph") != std::string::npos);
    auto j = pf_json(perron_frobenius(k));
    CHECK(j["bistochastic"] == true);
    CHECK(j["eta"].size() == 6);
    CHECK(j["xi"].size() == 6);
    CHECK(std::abs(j["lambda"].get<double>() - (2 + std::sqrt(2.0))) < 1e-9);
}
