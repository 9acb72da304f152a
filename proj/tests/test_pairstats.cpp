// Paired-comparison statistics against hand-checked values and independent
// brute-force oracles.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "core/error.h"
#include "core/pairstats.h"
#include "oracles.h"

using namespace aimtrace;
using namespace aimtrace::stats;
using test_oracles::mwu_p_oracle;
using test_oracles::triads_oracle;
using test_oracles::u_by_pair_counting;
using test_oracles::wilcoxon_p_oracle;

namespace {

PreferenceMatrix random_matrix(int t, std::mt19937& rng) {
    PreferenceMatrix m = PreferenceMatrix::zeros(t);
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < t; ++i)
        for (int j = i + 1; j < t; ++j) {
            if (coin(rng))
                m.set(i, j, 1);
            else
                m.set(j, i, 1);
        }
    return m;
}

PreferenceMatrix matrix_from_order(const std::vector<int>& order) {
    int t = int(order.size());
    PreferenceMatrix m = PreferenceMatrix::zeros(t);
    for (int i = 0; i < t; ++i)
        for (int j = i + 1; j < t; ++j) m.set(order[size_t(i)], order[size_t(j)], 1);
    return m;
}

// Table 2 counts: counts[i][j] = judges preferring stimulus i over j.
ScoreSummary summary_from_counts(const std::vector<std::vector<int>>& counts, int n) {
    ScoreSummary s;
    s.t = int(counts.size());
    s.n = n;
    s.totals.assign(size_t(s.t), 0);
    for (int i = 0; i < s.t; ++i)
        for (int j = 0; j < s.t; ++j) s.totals[size_t(i)] += counts[size_t(i)][size_t(j)];
    return s;
}

const std::vector<std::vector<int>> kNoviceCounts = {
    {0, 0, 0, 0, 0}, {5, 0, 3, 2, 0}, {5, 2, 0, 2, 0}, {5, 3, 3, 0, 0}, {5, 5, 5, 5, 0}};
const std::vector<std::vector<int>> kExpertCounts = {
    {0, 0, 1, 0, 0}, {5, 0, 3, 2, 2}, {4, 2, 0, 1, 1}, {5, 3, 4, 0, 0}, {5, 3, 4, 5, 0}};
const std::vector<std::string> kVisLabels = {"Vis1", "Vis2", "Vis3", "Vis4", "Vis5"};

std::vector<std::vector<int>> combined_counts() {
    auto c = kNoviceCounts;
    for (size_t i = 0; i < c.size(); ++i)
        for (size_t j = 0; j < c.size(); ++j) c[i][j] += kExpertCounts[i][j];
    return c;
}

std::vector<std::string> group_labels(const Grouping& g, const std::vector<std::string>& labels,
                                      size_t idx) {
    std::vector<std::string> out;
    for (int i : g.groups.at(idx)) out.push_back(labels[size_t(i)]);
    return out;
}

}  // namespace

// =============================================================================
// circular triads and consistence
// =============================================================================

TEST_CASE("circular triads: canonical 3-cycle counts one") {
    PreferenceMatrix m = PreferenceMatrix::zeros(3);
    m.set(0, 1, 1);  // A > B
    m.set(1, 2, 1);  // B > C
    m.set(2, 0, 1);  // C > A
    CHECK(circular_triads(m) == 1);
}

TEST_CASE("circular triads: any transitive ranking has none") {
    std::mt19937 rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<int> order(5);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        CHECK(circular_triads(matrix_from_order(order)) == 0);
    }
}

TEST_CASE("circular triads: formula equals exhaustive triple counting") {
    std::mt19937 rng(42);
    for (int t = 3; t <= 6; ++t) {
        for (int rep = 0; rep < 200; ++rep) {
            PreferenceMatrix m = random_matrix(t, rng);
            CHECK(circular_triads(m) == triads_oracle(m));
        }
    }
}

TEST_CASE("circular triads: invariant under stimulus relabeling") {
    std::mt19937 rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        PreferenceMatrix m = random_matrix(5, rng);
        std::vector<int> perm(5);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        PreferenceMatrix p = PreferenceMatrix::zeros(5);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                p.set(perm[size_t(i)], perm[size_t(j)], m.at(i, j));
        CHECK(circular_triads(p) == circular_triads(m));
    }
}

TEST_CASE("coefficient of consistence") {
    CHECK(coefficient_of_consistence(0, 5) == doctest::Approx(1.0));  // Table 3 rows
    CHECK(coefficient_of_consistence(1, 3) == doctest::Approx(0.0));
    CHECK(coefficient_of_consistence(2, 5) == doctest::Approx(0.6));  // 1 - 48/120
    CHECK(coefficient_of_consistence(2, 4) == doctest::Approx(1.0 - 48.0 / 48.0));
    CHECK_THROWS_AS(coefficient_of_consistence(99, 5), Error);
    CHECK_THROWS_AS(coefficient_of_consistence(0, 2), Error);
}

TEST_CASE("row sums of a complete matrix total t(t-1)/2") {
    std::mt19937 rng(3);
    for (int rep = 0; rep < 30; ++rep) {
        PreferenceMatrix m = random_matrix(6, rng);
        auto sums = m.row_sums();
        CHECK(std::accumulate(sums.begin(), sums.end(), 0) == 15);
    }
}

// =============================================================================
// test of equality
// =============================================================================

TEST_CASE("test of equality reproduces the published D values") {
    auto novice = summary_from_counts(kNoviceCounts, 5);
    auto expert = summary_from_counts(kExpertCounts, 5);
    auto combined = summary_from_counts(combined_counts(), 10);

    EqualityTest tn = test_of_equality(novice, 0.05);
    CHECK(tn.d_statistic == doctest::Approx(32.32).epsilon(1e-9));
    CHECK(tn.df == 4);
    CHECK(tn.significant);

    EqualityTest te = test_of_equality(expert, 0.05);
    CHECK(te.d_statistic == doctest::Approx(22.72).epsilon(1e-9));
    CHECK(te.significant);

    EqualityTest tc = test_of_equality(combined, 0.05, 9);
    CHECK(tc.d_statistic == doctest::Approx(53.76).epsilon(1e-9));
    CHECK(tc.df == 9);
    CHECK(tc.critical == doctest::Approx(16.919).epsilon(1e-4));
    CHECK(tc.significant);
}

TEST_CASE("test of equality: equal scores give D = 0, not significant") {
    ScoreSummary s;
    s.t = 5;
    s.n = 4;  // every stimulus scores n(t-1)/2 = 8
    s.totals = {8, 8, 8, 8, 8};
    EqualityTest test = test_of_equality(s, 0.05);
    CHECK(test.d_statistic == doctest::Approx(0.0));
    CHECK_FALSE(test.significant);
}

TEST_CASE("test of equality rejects incomplete data") {
    ScoreSummary s;
    s.t = 5;
    s.n = 5;
    s.totals = {0, 0, 0, 0, 0};
    CHECK_THROWS_AS(test_of_equality(s, 0.05), Error);
}

TEST_CASE("chi-squared quantiles match reference values") {
    // Frozen from standard tables (cross-checked numerically).
    CHECK(chi_squared_quantile(0.95, 4) == doctest::Approx(9.487729).epsilon(1e-6));
    CHECK(chi_squared_quantile(0.95, 9) == doctest::Approx(16.918978).epsilon(1e-6));
    CHECK(chi_squared_quantile(0.99, 4) == doctest::Approx(13.276704).epsilon(1e-6));
    CHECK(chi_squared_quantile(0.5, 1) == doctest::Approx(0.454936).epsilon(1e-5));
    // cdf(quantile(p)) == p across a grid
    for (int df : {1, 2, 5, 10, 30}) {
        for (double p : {0.01, 0.25, 0.5, 0.9, 0.95, 0.999}) {
            CHECK(chi_squared_cdf(chi_squared_quantile(p, df), df) ==
                  doctest::Approx(p).epsilon(1e-8));
        }
    }
}

// =============================================================================
// multiple comparisons and grouping
// =============================================================================

TEST_CASE("multiple comparison threshold R") {
    CHECK(multiple_comparison_threshold(5, 5, 0.05) == 10);   // ceil(3.858 * 2.5)
    CHECK(multiple_comparison_threshold(10, 5, 0.05) == 14);  // ceil(3.858 * sqrt(12.5))
    CHECK(multiple_comparison_threshold(1, 2, 0.05) == 2);    // ceil(2.772 * sqrt(0.5))
    CHECK_THROWS_AS(multiple_comparison_threshold(5, 11, 0.05), Error);
    CHECK_THROWS_AS(multiple_comparison_threshold(5, 5, 0.10), Error);
}

TEST_CASE("group_scores reproduces the published grouping rows") {
    auto novice = summary_from_counts(kNoviceCounts, 5);
    Grouping gn = group_scores(novice, kVisLabels, 10);
    REQUIRE(gn.groups.size() == 3);
    CHECK(group_labels(gn, kVisLabels, 0) == std::vector<std::string>{"Vis5", "Vis4"});
    CHECK(group_labels(gn, kVisLabels, 1) == std::vector<std::string>{"Vis4", "Vis2", "Vis3"});
    CHECK(group_labels(gn, kVisLabels, 2) == std::vector<std::string>{"Vis3", "Vis1"});

    auto expert = summary_from_counts(kExpertCounts, 5);
    Grouping ge = group_scores(expert, kVisLabels, 10);
    REQUIRE(ge.groups.size() == 2);
    CHECK(group_labels(ge, kVisLabels, 0) ==
          std::vector<std::string>{"Vis5", "Vis2", "Vis4", "Vis3"});
    CHECK(group_labels(ge, kVisLabels, 1) == std::vector<std::string>{"Vis3", "Vis1"});

    auto combined = summary_from_counts(combined_counts(), 10);
    Grouping gc = group_scores(combined, kVisLabels, 14);
    REQUIRE(gc.groups.size() == 3);
    CHECK(group_labels(gc, kVisLabels, 0) == std::vector<std::string>{"Vis5"});
    CHECK(group_labels(gc, kVisLabels, 1) == std::vector<std::string>{"Vis4", "Vis2", "Vis3"});
    CHECK(group_labels(gc, kVisLabels, 2) == std::vector<std::string>{"Vis1"});

    // Rankings follow the published order.
    std::vector<std::string> expert_rank;
    for (int i : ge.ranking) expert_rank.push_back(kVisLabels[size_t(i)]);
    CHECK(expert_rank == std::vector<std::string>{"Vis5", "Vis2", "Vis4", "Vis3", "Vis1"});
}

TEST_CASE("group_scores: all-equal scores collapse into one group") {
    ScoreSummary s;
    s.t = 5;
    s.n = 4;
    s.totals = {8, 8, 8, 8, 8};
    Grouping g = group_scores(s, kVisLabels, 3);
    REQUIRE(g.groups.size() == 1);
    CHECK(g.groups[0].size() == 5);
    // Equal scores tie-break by label order.
    std::vector<std::string> rank;
    for (int i : g.ranking) rank.push_back(kVisLabels[size_t(i)]);
    CHECK(rank == kVisLabels);
}

TEST_CASE("grouping covers every stimulus and stays within R") {
    std::mt19937 rng(17);
    for (int rep = 0; rep < 100; ++rep) {
        ScoreSummary s;
        s.t = 5;
        s.n = 5;
        // Random totals with the right sum: distribute 50 points.
        std::vector<int> totals(5, 0);
        int left = 50;
        for (int i = 0; i < 4; ++i) {
            std::uniform_int_distribution<int> dist(0, std::min(left, 20));
            totals[size_t(i)] = dist(rng);
            left -= totals[size_t(i)];
        }
        totals[4] = left;
        if (left < 0 || left > 20) continue;
        s.totals = totals;
        int r = 1 + int(rng() % 15);
        Grouping g = group_scores(s, kVisLabels, r);
        std::vector<bool> covered(5, false);
        for (const auto& group : g.groups) {
            int hi = s.totals[size_t(group.front())], lo = s.totals[size_t(group.back())];
            CHECK(hi - lo < r);
            for (int idx : group) covered[size_t(idx)] = true;
        }
        CHECK(std::all_of(covered.begin(), covered.end(), [](bool b) { return b; }));
    }
}

// =============================================================================
// rank tests
// =============================================================================

TEST_CASE("mann-whitney: textbook cases") {
    std::vector<double> a{1, 2, 3}, b{4, 5, 6};
    MannWhitneyResult res = mann_whitney_u(a, b);
    CHECK(res.u == doctest::Approx(0.0));
    CHECK(res.exact);
    CHECK(res.p == doctest::Approx(0.1));  // 2/20 over C(6,3) assignments

    std::vector<double> same{2, 4, 6, 8};
    MannWhitneyResult eq = mann_whitney_u(same, same);
    CHECK(eq.u == doctest::Approx(8.0));  // nA*nB/2
    CHECK(eq.p == doctest::Approx(1.0));
}

TEST_CASE("mann-whitney: U_A + U_B = nA*nB") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> val(0, 6);  // ties likely
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> a(3 + rng() % 4), b(2 + rng() % 5);
        for (double& v : a) v = val(rng);
        for (double& v : b) v = val(rng);
        double ua = mann_whitney_u(a, b).u;
        double ub = mann_whitney_u(b, a).u;
        CHECK(ua + ub == doctest::Approx(double(a.size() * b.size())));
    }
}

TEST_CASE("mann-whitney: exact p equals the enumeration oracle") {
    std::mt19937 rng(23);
    std::uniform_int_distribution<int> val(0, 4);
    for (int rep = 0; rep < 60; ++rep) {
        std::vector<double> a(1 + rng() % 5), b(1 + rng() % 5);
        for (double& v : a) v = val(rng);
        for (double& v : b) v = val(rng);
        MannWhitneyResult res = mann_whitney_u(a, b);
        REQUIRE(res.exact);
        CHECK(res.u == doctest::Approx(u_by_pair_counting(a, b)).epsilon(1e-12));
        CHECK(res.p == doctest::Approx(mwu_p_oracle(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("wilcoxon: textbook cases") {
    std::vector<double> x{1, 2, 3, 4, 5}, zeros(5, 0.0);
    WilcoxonResult res = wilcoxon_signed_rank(x, zeros);
    CHECK(res.w == doctest::Approx(0.0));
    CHECK(res.exact);
    CHECK(res.p == doctest::Approx(2.0 / 32.0));
    CHECK(res.n_used == 5);

    CHECK_THROWS_AS(wilcoxon_signed_rank(x, x), Error);  // all differences zero
}

TEST_CASE("wilcoxon: sign flip leaves W and p unchanged") {
    std::mt19937 rng(31);
    std::uniform_int_distribution<int> val(-4, 4);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> x(6 + rng() % 5), y(x.size(), 0.0);
        bool any = false;
        for (double& v : x) {
            v = val(rng);
            any = any || v != 0.0;
        }
        if (!any) x[0] = 1.0;
        WilcoxonResult pos = wilcoxon_signed_rank(x, y);
        std::vector<double> neg(x.size());
        for (size_t i = 0; i < x.size(); ++i) neg[i] = -x[i];
        WilcoxonResult flipped = wilcoxon_signed_rank(neg, y);
        CHECK(pos.w == doctest::Approx(flipped.w));
        CHECK(pos.p == doctest::Approx(flipped.p));
    }
}

TEST_CASE("wilcoxon: exact p equals the sign-enumeration oracle") {
    std::mt19937 rng(13);
    std::uniform_int_distribution<int> val(-3, 3);
    for (int rep = 0; rep < 60; ++rep) {
        std::vector<double> x(2 + rng() % 9), y(x.size(), 0.0);
        bool any = false;
        for (double& v : x) {
            v = val(rng);
            any = any || v != 0.0;
        }
        if (!any) x[0] = 2.0;
        WilcoxonResult res = wilcoxon_signed_rank(x, y);
        REQUIRE(res.exact);
        CHECK(res.p == doctest::Approx(wilcoxon_p_oracle(x, y)).epsilon(1e-12));
    }
}

// =============================================================================
// csv and report plumbing
// =============================================================================

namespace {

// Transitive judge set whose totals match the Table 2 novice counts.
const char* kNoviceCsv =
    "judge_id,stimulus_a,stimulus_b,winner\n"
    "n1,Vis5,Vis2,Vis5\nn1,Vis5,Vis3,Vis5\nn1,Vis5,Vis4,Vis5\nn1,Vis5,Vis1,Vis5\n"
    "n1,Vis2,Vis3,Vis2\nn1,Vis2,Vis4,Vis2\nn1,Vis2,Vis1,Vis2\n"
    "n1,Vis3,Vis4,Vis3\nn1,Vis3,Vis1,Vis3\nn1,Vis4,Vis1,Vis4\n"
    "n2,Vis5,Vis2,Vis5\nn2,Vis5,Vis3,Vis5\nn2,Vis5,Vis4,Vis5\nn2,Vis5,Vis1,Vis5\n"
    "n2,Vis2,Vis3,Vis2\nn2,Vis2,Vis4,Vis2\nn2,Vis2,Vis1,Vis2\n"
    "n2,Vis4,Vis3,Vis4\nn2,Vis3,Vis1,Vis3\nn2,Vis4,Vis1,Vis4\n"
    "n3,Vis5,Vis2,Vis5\nn3,Vis5,Vis3,Vis5\nn3,Vis5,Vis4,Vis5\nn3,Vis5,Vis1,Vis5\n"
    "n3,Vis3,Vis2,Vis3\nn3,Vis4,Vis2,Vis4\nn3,Vis2,Vis1,Vis2\n"
    "n3,Vis3,Vis4,Vis3\nn3,Vis3,Vis1,Vis3\nn3,Vis4,Vis1,Vis4\n"
    "n4,Vis5,Vis2,Vis5\nn4,Vis5,Vis3,Vis5\nn4,Vis5,Vis4,Vis5\nn4,Vis5,Vis1,Vis5\n"
    "n4,Vis2,Vis3,Vis2\nn4,Vis4,Vis2,Vis4\nn4,Vis2,Vis1,Vis2\n"
    "n4,Vis4,Vis3,Vis4\nn4,Vis3,Vis1,Vis3\nn4,Vis4,Vis1,Vis4\n"
    "n5,Vis5,Vis2,Vis5\nn5,Vis5,Vis3,Vis5\nn5,Vis5,Vis4,Vis5\nn5,Vis5,Vis1,Vis5\n"
    "n5,Vis3,Vis2,Vis3\nn5,Vis4,Vis2,Vis4\nn5,Vis2,Vis1,Vis2\n"
    "n5,Vis4,Vis3,Vis4\nn5,Vis3,Vis1,Vis3\nn5,Vis4,Vis1,Vis4\n";

}  // namespace

TEST_CASE("preference csv parses and reproduces the novice analysis") {
    PreferenceData data = parse_preferences_csv(kNoviceCsv, "novice");
    CHECK(data.t == 5);
    CHECK(data.judges.size() == 5);

    PairwiseReport report = analyze_preferences(data, 0.05);
    CHECK(report.totals == std::vector<int>{0, 10, 9, 11, 20});  // Vis1..Vis5
    CHECK(report.zeta_group == doctest::Approx(1.0));
    CHECK(report.equality.d_statistic == doctest::Approx(32.32));
    CHECK(report.threshold_r == 10);
    REQUIRE(report.grouping.groups.size() == 3);

    std::string json = report_to_json(report);
    CHECK(json.find("\"zeta_group\": 1.0") != std::string::npos);
    std::string text = report_to_text(report, "novice");
    CHECK(text.find("D=32.32") != std::string::npos);
}

TEST_CASE("preference csv rejects malformed data") {
    // winner not among the pair
    CHECK_THROWS_AS(parse_preferences_csv("judge_id,stimulus_a,stimulus_b,winner\n"
                                          "j,A,B,C\n",
                                          "bad"),
                    Error);
    // duplicate pair
    CHECK_THROWS_AS(parse_preferences_csv("judge_id,stimulus_a,stimulus_b,winner\n"
                                          "j,A,B,A\nj,B,A,B\n",
                                          "dup"),
                    Error);
    // incomplete round robin
    CHECK_THROWS_AS(parse_preferences_csv("judge_id,stimulus_a,stimulus_b,winner\n"
                                          "j,A,B,A\nj,A,C,A\n",
                                          "gap"),
                    Error);
}

TEST_CASE("ratings analysis runs both tests") {
    const char* csv =
        "judge_id,group,stimulus,rating\n"
        "j1,novice,Vis1,2\nj1,novice,Vis2,4\n"
        "j2,novice,Vis1,1\nj2,novice,Vis2,5\n"
        "j3,expert,Vis1,3\nj3,expert,Vis2,4\n"
        "j4,expert,Vis1,2\nj4,expert,Vis2,5\n";
    RatingsData data = parse_ratings_csv(csv, "ratings");
    CHECK(data.groups.size() == 2);
    CHECK(data.judges.size() == 4);
    std::string json = analyze_ratings_json(data);
    CHECK(json.find("mann_whitney_between_groups") != std::string::npos);
    CHECK(json.find("wilcoxon_between_stimuli") != std::string::npos);
}
