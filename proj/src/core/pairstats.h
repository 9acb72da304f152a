#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aimtrace::stats {

// Paired-comparison analysis for forced-choice round-robin experiments:
// per-judge consistency via circular triads, the test of equality D against
// a chi-squared threshold, and the studentized-range threshold R that turns
// score differences into significance groupings. Plus the two nonparametric
// rating tests (Mann-Whitney U, Wilcoxon signed-rank) with exact small-n
// p-values.

// One judge's choices: m[i*t+j] == 1 iff stimulus i beat stimulus j.
struct PreferenceMatrix {
    int t = 0;
    std::vector<uint8_t> m;

    static PreferenceMatrix zeros(int t);
    uint8_t at(int i, int j) const { return m[size_t(i) * t + j]; }
    void set(int i, int j, uint8_t v) { m[size_t(i) * t + j] = v; }
    std::vector<int> row_sums() const;

    // Completeness: exactly one of m[i][j], m[j][i] set for every i != j.
    // Throws Error(Data) naming the first offending pair.
    void validate() const;
};

struct PreferenceData {
    int t = 0;
    std::vector<std::string> labels;     // stimulus names, sorted
    std::vector<std::string> judge_ids;  // aligned with judges
    std::vector<PreferenceMatrix> judges;
};

// csv columns: judge_id,stimulus_a,stimulus_b,winner. Every judge must cover
// every unordered pair exactly once.
PreferenceData load_preferences_csv(const std::string& path);
PreferenceData parse_preferences_csv(const std::string& text, const std::string& context);

struct ScoreSummary {
    int t = 0;
    int n = 0;                              // judges
    std::vector<int> totals;                // s_i
    std::vector<std::vector<int>> per_judge;  // a_i rows

    static ScoreSummary from(const PreferenceData& data);
};

// Number of intransitive triples: d = t(t-1)(2t-1)/12 - (1/2) sum a_i^2.
int circular_triads(const PreferenceMatrix& m);

// zeta = 1 - 24 d / (t^3 - t) for odd t, 1 - 24 d / (t^3 - 4t) for even t.
double coefficient_of_consistence(int d, int t);

int max_circular_triads(int t);

struct EqualityTest {
    double d_statistic = 0.0;
    int df = 0;
    double alpha = 0.05;
    double critical = 0.0;
    bool significant = false;
};

// D = (4 / (n t)) * sum_i (s_i - n(t-1)/2)^2, compared against the upper
// alpha chi-squared quantile (df defaults to t-1).
EqualityTest test_of_equality(const ScoreSummary& scores, double alpha = 0.05,
                              std::optional<int> df_override = {});

// Upper-p quantile of chi-squared via the regularized incomplete gamma
// (series + continued fraction) inverted by bisection; good to ~1e-9.
double chi_squared_quantile(double p, int df);
double chi_squared_cdf(double x, int df);

// Studentized range upper quantile q(alpha, t, df=inf) from the embedded
// table; t in 2..10, alpha 0.05 or 0.01.
double studentized_range_q(double alpha, int t);

// R = ceil(q(alpha, t, inf) * sqrt(n t / 4)).
int multiple_comparison_threshold(int n, int t, double alpha = 0.05);

struct Grouping {
    std::vector<int> ranking;               // stimulus indices, best first
    std::vector<std::vector<int>> groups;   // maximal runs with diffs < R
};

// Stimuli sorted by descending score (ties by label order); every maximal
// run of consecutive entries whose extreme scores differ by less than R
// becomes a group, so one stimulus may sit in two overlapping groups.
Grouping group_scores(const ScoreSummary& scores, const std::vector<std::string>& labels, int R);

struct MannWhitneyResult {
    double u = 0.0;  // U statistic of the first sample
    double p = 1.0;  // two-sided
    bool exact = false;
};

// Midrank ties; exact p by enumerating C(nA+nB, nA) group assignments when
// that count is at most 20000, tie-corrected normal approximation beyond.
MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

struct WilcoxonResult {
    double w = 0.0;  // min(W+, W-)
    double p = 1.0;  // two-sided
    int n_used = 0;  // pairs kept after dropping zero differences
    bool exact = false;
};

// Zero differences dropped, midranks of |d|; exact p over all sign patterns
// for up to 20 nonzero pairs, normal approximation beyond. Throws
// Error(Data) when every difference is zero.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y);

struct PairwiseReport {
    std::vector<std::string> labels;
    std::vector<std::string> judge_ids;
    std::vector<int> totals;
    std::vector<double> zeta_per_judge;
    std::vector<int> triads_per_judge;
    double zeta_group = 1.0;  // minimum over judges
    EqualityTest equality;
    int threshold_r = 0;
    Grouping grouping;
};

PairwiseReport analyze_preferences(const PreferenceData& data, double alpha = 0.05,
                                   std::optional<int> df_override = {});

std::string report_to_json(const PairwiseReport& report);
// Plain-text table: one row per analysis with zeta, D and bracketed
// ranking groups.
std::string report_to_text(const PairwiseReport& report, const std::string& row_label);

// Ratings: one row per (judge_id, group, stimulus, rating). Yields
// between-group Mann-Whitney per stimulus and within-judge Wilcoxon for
// every stimulus pair, as a json report fragment.
struct RatingsData {
    std::vector<std::string> groups;   // distinct group labels
    std::vector<std::string> stimuli;  // distinct stimulus labels
    // rating[judge][stimulus]; judges keyed by (group, judge_id)
    struct JudgeRow {
        std::string group;
        std::string judge_id;
        std::vector<double> ratings;  // indexed by stimulus, NaN = missing
    };
    std::vector<JudgeRow> judges;
};

RatingsData load_ratings_csv(const std::string& path);
RatingsData parse_ratings_csv(const std::string& text, const std::string& context);
std::string analyze_ratings_json(const RatingsData& data);

}  // namespace aimtrace::stats
