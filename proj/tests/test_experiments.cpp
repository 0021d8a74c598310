#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ggqm/experiments.hpp"

using namespace ggqm;

namespace {

EmbeddingExperiment diagonal_experiment(int m, double defect, int primitives) {
    EmbeddingExperiment e;
    e.m = m;
    e.M.assign(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(m), 0.0));
    for (int i = 0; i < m; ++i) e.M[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
    e.defects.assign(static_cast<std::size_t>(m), defect);
    e.primitive_counts.assign(static_cast<std::size_t>(m), primitives);
    return e;
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Experiments, SiteWordsAndLinearAlgebra) {
    EXPECT_EQ(site_word("abb", 2), (Word{3, 4, 4}));
    EXPECT_EQ(site_word("aBba", 1), (Word{1, 1}));
    EXPECT_THROW(site_word("abc", 1), std::invalid_argument);

    std::vector<std::vector<double>> a{{2, 1, 0}, {1, 3, 1}, {0, 1, 4}};
    EXPECT_NEAR(determinant(a), 2 * (12 - 1) - 1 * (4 - 0), 1e-12);
    auto inv = inverse(a);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0;
            for (int k = 0; k < 3; ++k) s += a[i][k] * inv[k][j];
            EXPECT_NEAR(s, i == j ? 1.0 : 0.0, 1e-12);
        }
    EXPECT_THROW(inverse({{1, 2}, {2, 4}}), std::domain_error);
}

TEST(Experiments, OverlapAreaMatchesMonteCarlo) {
    auto m = genus2_model();
    double r = 2.8736;
    auto site = figure_eight_pair(1, m, 0.01 * r, 0.99 * r, r);
    double quad = overlap_area(site, 400);
    Rng rng(17, 0);
    long N = 200000, hits = 0;
    for (long k = 0; k < N; ++k) {
        Point p = sample_point(m, rng);
        if (site.h_chart->region(p) == Region::U && site.g_chart->region(p) == Region::U) ++hits;
    }
    double frac = static_cast<double>(hits) / N;
    double mc = frac * m.total_area, sigma = std::sqrt(frac * (1 - frac) / N) * m.total_area;
    EXPECT_NEAR(quad, mc, 4 * sigma);
    EXPECT_GT(quad, 0.5);
}

TEST(Experiments, SingleSiteIsNormalized) {
    EmbeddingConfig cfg;
    cfg.m = 1;
    cfg.samples = 3000;
    cfg.powers = {1, 2, 4};
    cfg.workers = 1;
    auto e = run_embedding(cfg);
    ASSERT_EQ(e.M.size(), 1u);
    EXPECT_DOUBLE_EQ(e.pattern_matrix[0][0], 1.0);
    EXPECT_NEAR(e.M[0][0], 1.0, 0.05 + 4 * e.M_err[0][0] + e.M_hom_err[0][0]);
    EXPECT_EQ(e.primitive_counts[0], 3);
    EXPECT_EQ(e.qms[0], "brooks:a1 b1 b1");
    EXPECT_TRUE(e.commute);
    EXPECT_DOUBLE_EQ(e.det, e.M[0][0]);
}

TEST(Experiments, TwoSitesDecouple) {
    EmbeddingConfig cfg;
    cfg.samples = 1500;
    cfg.powers = {1, 2, 4};
    cfg.workers = 1;
    auto e = run_embedding(cfg);
    ASSERT_EQ(e.M.size(), 2u);
    EXPECT_EQ(e.M[0][1], 0.0);
    EXPECT_EQ(e.M[1][0], 0.0);
    EXPECT_EQ(e.pattern_matrix[0][1], 0.0);
    EXPECT_TRUE(e.supports_disjoint);
    EXPECT_TRUE(e.commute);
    EXPECT_NEAR(e.site_area[0], e.site_area[1], 2e-3);  // symmetric sites, up to the quadrature grid
    EXPECT_NEAR(e.det, e.M[0][0] * e.M[1][1], 1e-12);

    EXPECT_THROW(run_embedding([] {
                     EmbeddingConfig c;
                     c.m = 3;
                     return c;
                 }()),
                 std::invalid_argument);
    EXPECT_THROW(run_embedding([] {
                     EmbeddingConfig c;
                     c.ramp = 0.6;
                     return c;
                 }()),
                 std::invalid_argument);
}

TEST(Experiments, NormBoundsAreHomogeneousAndOrdered) {
    auto e = diagonal_experiment(2, 2.0, 3);
    auto r = norm_lower_bound(e, {4, -2});
    EXPECT_DOUBLE_EQ(r.lower, 2.0);
    EXPECT_DOUBLE_EQ(r.formula_lower, 6.0 / 4.0);
    EXPECT_DOUBLE_EQ(r.upper, 18.0);
    auto z = norm_lower_bound(e, {0, 0});
    EXPECT_EQ(z.lower, 0.0);
    EXPECT_EQ(z.upper, 0.0);
    EXPECT_THROW(norm_lower_bound(e, {1}), std::invalid_argument);

    // a realistic matrix: homogeneity and lower <= upper on random exponents
    EmbeddingExperiment f = e;
    f.M = {{1.02, 0.0}, {0.0, 0.97}};
    f.defects = {26.2, 26.2};
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> d(-20, 20);
    for (int k = 0; k < 100; ++k) {
        std::vector<int> v{d(rng), d(rng)};
        auto a = norm_lower_bound(f, v), b = norm_lower_bound(f, {3 * v[0], 3 * v[1]});
        EXPECT_NEAR(b.lower, 3 * a.lower, 1e-9);
        EXPECT_LE(a.lower, a.upper + 1e-12);
        EXPECT_LE(a.formula_lower, a.upper + 1e-12);
    }
    f.defects = {0.0, 1.0};
    EXPECT_TRUE(norm_lower_bound(f, {1, 1}).zero_defect);
}

TEST(Experiments, MetricTableScalesLinearly) {
    EXPECT_TRUE(metric_comparison({}).empty());
    auto tw = alpha1_twist();
    auto rows = metric_comparison({tw}, 4, 0.02);
    ASSERT_EQ(rows.size(), 5u);
    double C = core_level(tw);
    for (int n = 1; n <= 4; ++n) {
        const auto& row = rows[static_cast<std::size_t>(n - 1)];
        EXPECT_NEAR(row.hofer, n * rows[0].hofer, 1e-12);
        EXPECT_NEAR(row.target, n * C, 1e-12);
        EXPECT_GE(row.hofer, row.target);
        EXPECT_EQ(row.aut_witness, 1);
    }
    EXPECT_NEAR(rows[4].hofer, 0.01, 1e-12);
    EXPECT_EQ(rows[4].target, 0.02);
    // the core sits mid-collar: plateau from r/2 to 0.9 r plus half of the outer ramp
    EXPECT_NEAR(C, (0.4 + 0.05) * 2.8736, 1e-6);
    // repeating the segment is the flow of twice the Hamiltonian
    auto tw2 = compose(tw, tw);
    EXPECT_NEAR(core_level(tw2), 2 * C, 1e-9);
    EXPECT_NEAR(metric_comparison({tw2}, 1)[0].hofer, 2 * rows[0].hofer, 1e-9);
    EXPECT_THROW(metric_comparison({compose(tw, alpha1_twist(0.2))}), std::invalid_argument);
    EXPECT_THROW(metric_comparison({radial_twist(genus2_model(), {0.3, 0}, 0.1, 0.3, 1.0)}), std::invalid_argument);
}

TEST(Experiments, VanishingSuiteAndControl) {
    auto cases = default_vanishing_cases();
    auto rows = autonomous_vanishing_suite(cases, 600, 3, {1, 2, 4}, 1);
    ASSERT_EQ(rows.size(), cases.size());
    for (const auto& r : rows) {
        if (r.control) {
            // pi-count of the a1 twist is its flux: the profile integral 0.9 x collar area
            EXPECT_NEAR(r.value, 0.9 * 2.8736, 4 * r.std_error);
            EXPECT_FALSE(r.within);
        } else {
            EXPECT_TRUE(r.within) << r.flow << " " << r.qm << " " << r.value;
        }
    }
    EXPECT_EQ(rows.back().value, 0.0);

    std::vector<VanishingCase> bad{{"x", alpha1_twist(), make_qm("pi:a1"), false, false}};
    EXPECT_THROW(autonomous_vanishing_suite(bad, 10, 1), std::invalid_argument);
    std::vector<VanishingCase> moving{{"y", compose(alpha1_twist(), reverse(alpha1_twist())), make_qm("pi:a1"), true, false}};
    EXPECT_THROW(autonomous_vanishing_suite(moving, 10, 1), std::invalid_argument);
}

TEST(Experiments, TableWriters) {
    auto e = diagonal_experiment(2, 2.0, 3);
    e.diffeos = {"f1", "f2"};
    e.qms = {"q1", "q2"};
    e.M_err = e.M_hom_err = e.raw = e.M;
    e.site_area = {1.4, 1.4};
    auto csv = embedding_csv(e);
    EXPECT_EQ(count_lines(csv), 1 + 4);
    EXPECT_NE(embedding_markdown(e).find("| "), std::string::npos);

    std::vector<VanishingRow> v{{"flow", "qm", 0.1, 0.05, 0.0, 100, 0, false, true}};
    EXPECT_EQ(count_lines(vanishing_csv(v)), 2);
    EXPECT_NE(vanishing_markdown(v).find("flow"), std::string::npos);

    auto rows = metric_comparison({alpha1_twist()}, 2);
    EXPECT_EQ(count_lines(metric_csv(rows)), 1 + 3);
    EXPECT_EQ(fmt(0.5), "0.5");
}
