#include "pairstats.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "csv.h"
#include "error.h"
#include "strfmt.h"

namespace aimtrace::stats {

namespace {

using nlohmann::json;

constexpr double kRankTol = 1e-9;

// Midranks of `values`; ties share the average of their rank positions.
std::vector<double> midranks(std::vector<double> values) {
    size_t n = values.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double shared = (double(i + 1) + double(j + 1)) / 2.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

// Tie term sum(t^3 - t) over tie groups of sorted pooled values.
double tie_correction_term(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double term = 0.0;
    size_t i = 0;
    while (i < values.size()) {
        size_t j = i;
        while (j + 1 < values.size() && values[j + 1] == values[i]) ++j;
        double t = double(j - i + 1);
        term += t * t * t - t;
        i = j + 1;
    }
    return term;
}

double normal_two_sided(double z) {
    return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
}

// Number of size-k subsets, capped; returns cap+1 once it is exceeded.
double binomial_capped(int n, int k, double cap) {
    double c = 1.0;
    k = std::min(k, n - k);
    for (int i = 1; i <= k; ++i) {
        c *= double(n - k + i) / double(i);
        if (c > cap) return cap + 1.0;
    }
    return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// preference data
// ---------------------------------------------------------------------------

PreferenceMatrix PreferenceMatrix::zeros(int t) {
    PreferenceMatrix m;
    m.t = t;
    m.m.assign(size_t(t) * t, 0);
    return m;
}

std::vector<int> PreferenceMatrix::row_sums() const {
    std::vector<int> sums(size_t(t), 0);
    for (int i = 0; i < t; ++i)
        for (int j = 0; j < t; ++j) sums[size_t(i)] += at(i, j);
    return sums;
}

void PreferenceMatrix::validate() const {
    if (t < 2) fail(ErrorKind::Data, "preference matrix needs at least 2 stimuli");
    for (int i = 0; i < t; ++i) {
        if (at(i, i) != 0)
            fail(ErrorKind::Data, strfmt("preference matrix has a self-pair at (%d,%d)", i, i));
        for (int j = i + 1; j < t; ++j)
            if (at(i, j) + at(j, i) != 1)
                fail(ErrorKind::Data,
                     strfmt("pair (%d,%d) is not a single forced choice (values %d and %d)", i, j,
                            at(i, j), at(j, i)));
    }
}

PreferenceData parse_preferences_csv(const std::string& text, const std::string& context) {
    CsvTable table = parse_csv(text, context);
    size_t cj = table.col("judge_id", context), ca = table.col("stimulus_a", context),
           cb = table.col("stimulus_b", context), cw = table.col("winner", context);

    std::set<std::string> label_set;
    std::vector<std::string> judge_order;
    for (const auto& row : table.rows) {
        label_set.insert(row[ca]);
        label_set.insert(row[cb]);
        if (std::find(judge_order.begin(), judge_order.end(), row[cj]) == judge_order.end())
            judge_order.push_back(row[cj]);
    }

    PreferenceData data;
    data.labels.assign(label_set.begin(), label_set.end());
    data.t = int(data.labels.size());
    if (data.t < 2) fail(ErrorKind::Data, strfmt("%s: needs at least 2 stimuli", context.c_str()));
    data.judge_ids = judge_order;
    data.judges.assign(judge_order.size(), PreferenceMatrix::zeros(data.t));

    auto label_index = [&](const std::string& s) {
        return int(std::lower_bound(data.labels.begin(), data.labels.end(), s) -
                   data.labels.begin());
    };
    std::map<std::string, std::set<std::pair<int, int>>> seen;
    for (const auto& row : table.rows) {
        int a = label_index(row[ca]), b = label_index(row[cb]);
        if (a == b)
            fail(ErrorKind::Data, strfmt("%s: judge %s compares '%s' with itself",
                                         context.c_str(), row[cj].c_str(), row[ca].c_str()));
        std::pair<int, int> key{std::min(a, b), std::max(a, b)};
        if (!seen[row[cj]].insert(key).second)
            fail(ErrorKind::Data,
                 strfmt("%s: judge %s has a duplicate pair (%s, %s)", context.c_str(),
                        row[cj].c_str(), row[ca].c_str(), row[cb].c_str()));
        int winner;
        if (row[cw] == row[ca]) winner = a;
        else if (row[cw] == row[cb]) winner = b;
        else
            fail(ErrorKind::Data,
                 strfmt("%s: winner '%s' is neither '%s' nor '%s'", context.c_str(),
                        row[cw].c_str(), row[ca].c_str(), row[cb].c_str()));
        size_t judge = size_t(std::find(judge_order.begin(), judge_order.end(), row[cj]) -
                              judge_order.begin());
        data.judges[judge].set(winner, winner == a ? b : a, 1);
    }

    for (size_t j = 0; j < data.judges.size(); ++j) {
        try {
            data.judges[j].validate();
        } catch (const Error& e) {
            fail(ErrorKind::Data, strfmt("%s: judge %s: %s (incomplete round-robin?)",
                                         context.c_str(), data.judge_ids[j].c_str(), e.what()));
        }
    }
    return data;
}

PreferenceData load_preferences_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, strfmt("cannot open '%s' for reading", path.c_str()));
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_preferences_csv(text, path);
}

ScoreSummary ScoreSummary::from(const PreferenceData& data) {
    ScoreSummary s;
    s.t = data.t;
    s.n = int(data.judges.size());
    s.totals.assign(size_t(data.t), 0);
    for (const PreferenceMatrix& m : data.judges) {
        m.validate();
        s.per_judge.push_back(m.row_sums());
        for (int i = 0; i < data.t; ++i) s.totals[size_t(i)] += s.per_judge.back()[size_t(i)];
    }
    return s;
}

// ---------------------------------------------------------------------------
// consistency
// ---------------------------------------------------------------------------

int circular_triads(const PreferenceMatrix& m) {
    m.validate();
    int64_t t = m.t;
    int64_t sum_sq = 0;
    for (int a : m.row_sums()) sum_sq += int64_t(a) * a;
    // d = t(t-1)(2t-1)/12 - sum a^2 / 2, kept in integers via the x12 form.
    int64_t num = t * (t - 1) * (2 * t - 1) - 6 * sum_sq;
    if (num % 12 != 0)
        fail(ErrorKind::Internal, "triad count is not an integer; matrix validation is broken");
    return int(num / 12);
}

int max_circular_triads(int t) {
    if (t % 2 == 1) return int((int64_t(t) * t * t - t) / 24);
    return int((int64_t(t) * t * t - 4 * t) / 24);
}

double coefficient_of_consistence(int d, int t) {
    if (t < 3) fail(ErrorKind::Data, "coefficient of consistence needs at least 3 stimuli");
    int d_max = max_circular_triads(t);
    if (d < 0 || d > d_max)
        fail(ErrorKind::Data,
             strfmt("triad count %d outside [0, %d] for t=%d", d, d_max, t));
    double t3 = double(t) * t * t;
    if (t % 2 == 1) return 1.0 - 24.0 * d / (t3 - t);
    return 1.0 - 24.0 * d / (t3 - 4.0 * t);
}

// ---------------------------------------------------------------------------
// test of equality
// ---------------------------------------------------------------------------

namespace {

// Regularized lower incomplete gamma P(a, x); series for x < a+1 and the
// Lentz continued fraction for the upper tail otherwise.
double gamma_p(double a, double x) {
    if (x < 0 || a <= 0) fail(ErrorKind::Internal, "gamma_p domain");
    if (x == 0) return 0.0;
    double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    double q = std::exp(-x + a * std::log(x) - lg) * h;
    return 1.0 - q;
}

}  // namespace

double chi_squared_cdf(double x, int df) {
    if (df <= 0) fail(ErrorKind::Config, "chi-squared df must be positive");
    if (x <= 0) return 0.0;
    return gamma_p(df / 2.0, x / 2.0);
}

double chi_squared_quantile(double p, int df) {
    if (p <= 0.0 || p >= 1.0) fail(ErrorKind::Config, "quantile probability must lie in (0,1)");
    if (df <= 0) fail(ErrorKind::Config, "chi-squared df must be positive");
    double lo = 0.0, hi = df + 10.0;
    while (chi_squared_cdf(hi, df) < p) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (chi_squared_cdf(mid, df) < p)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-12 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

EqualityTest test_of_equality(const ScoreSummary& scores, double alpha,
                              std::optional<int> df_override) {
    if (scores.n <= 0 || scores.t < 2) fail(ErrorKind::Data, "test of equality needs scores");
    int64_t expect_total = int64_t(scores.n) * scores.t * (scores.t - 1) / 2;
    int64_t got = 0;
    for (int s : scores.totals) got += s;
    if (got != expect_total)
        fail(ErrorKind::Data,
             strfmt("scores sum to %lld, a complete round-robin gives %lld", (long long)got,
                    (long long)expect_total));

    EqualityTest test;
    test.alpha = alpha;
    double mean = scores.n * (scores.t - 1) / 2.0;
    double sum_sq = 0.0;
    for (int s : scores.totals) sum_sq += (s - mean) * (s - mean);
    test.d_statistic = 4.0 / (double(scores.n) * scores.t) * sum_sq;
    test.df = df_override.value_or(scores.t - 1);
    if (test.df <= 0) fail(ErrorKind::Config, "df must be positive");
    test.critical = chi_squared_quantile(1.0 - alpha, test.df);
    test.significant = test.d_statistic >= test.critical;
    return test;
}

// ---------------------------------------------------------------------------
// multiple comparisons
// ---------------------------------------------------------------------------

double studentized_range_q(double alpha, int t) {
    // Upper quantiles of the studentized range, df = infinity, t = 2..10
    // (standard published tables).
    static constexpr double k05[] = {2.772, 3.314, 3.633, 3.858, 4.030, 4.170, 4.286, 4.387, 4.474};
    static constexpr double k01[] = {3.643, 4.120, 4.403, 4.603, 4.757, 4.882, 4.987, 5.078, 5.157};
    if (t < 2 || t > 10)
        fail(ErrorKind::Unsupported, strfmt("studentized range table covers t=2..10, got %d", t));
    if (alpha == 0.05) return k05[t - 2];
    if (alpha == 0.01) return k01[t - 2];
    fail(ErrorKind::Unsupported, strfmt("studentized range table covers alpha 0.05/0.01, got %g", alpha));
}

int multiple_comparison_threshold(int n, int t, double alpha) {
    if (n <= 0) fail(ErrorKind::Data, "judge count must be positive");
    double q = studentized_range_q(alpha, t);
    return int(std::ceil(q * std::sqrt(double(n) * t / 4.0)));
}

Grouping group_scores(const ScoreSummary& scores, const std::vector<std::string>& labels, int R) {
    if (R < 1) fail(ErrorKind::Config, "threshold R must be at least 1");
    if (labels.size() != scores.totals.size())
        fail(ErrorKind::Data, "labels do not match the score vector");

    Grouping g;
    g.ranking.resize(scores.totals.size());
    for (size_t i = 0; i < g.ranking.size(); ++i) g.ranking[i] = int(i);
    std::sort(g.ranking.begin(), g.ranking.end(), [&](int a, int b) {
        if (scores.totals[size_t(a)] != scores.totals[size_t(b)])
            return scores.totals[size_t(a)] > scores.totals[size_t(b)];
        return labels[size_t(a)] < labels[size_t(b)];  // stable, documented tie-break
    });

    // Sorted descending, so a run [i..j] satisfies "all pairwise diffs < R"
    // iff s_i - s_j < R. The run end is monotone in the start, so a run is
    // maximal exactly when it reaches further than the previous one; maximal
    // runs may overlap.
    size_t n = g.ranking.size();
    std::vector<size_t> run_end(n);
    for (size_t i = 0; i < n; ++i) {
        size_t j = i;
        while (j + 1 < n &&
               scores.totals[size_t(g.ranking[i])] - scores.totals[size_t(g.ranking[j + 1])] < R)
            ++j;
        run_end[i] = j;
    }
    for (size_t i = 0; i < n; ++i) {
        if (i > 0 && run_end[i] <= run_end[i - 1]) continue;
        g.groups.emplace_back(g.ranking.begin() + long(i), g.ranking.begin() + long(run_end[i] + 1));
    }
    return g;
}

// ---------------------------------------------------------------------------
// rank tests
// ---------------------------------------------------------------------------

MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) fail(ErrorKind::Data, "mann-whitney needs two non-empty samples");
    size_t na = a.size(), nb = b.size(), n = na + nb;
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::vector<double> ranks = midranks(pooled);

    double ra = 0.0;
    for (size_t i = 0; i < na; ++i) ra += ranks[i];
    MannWhitneyResult res;
    res.u = ra - double(na) * (na + 1) / 2.0;

    double combos = binomial_capped(int(n), int(na), 20000.0);
    if (combos <= 20000.0) {
        res.exact = true;
        // All assignments of na ranks out of n; midrank sums are exact
        // multiples of 0.5, so the comparisons below are exact too.
        std::vector<size_t> pick(na);
        for (size_t i = 0; i < na; ++i) pick[i] = i;
        int64_t total = 0, le = 0, ge = 0;
        for (;;) {
            double sum = 0.0;
            for (size_t idx : pick) sum += ranks[idx];
            double u = sum - double(na) * (na + 1) / 2.0;
            ++total;
            if (u <= res.u + kRankTol) ++le;
            if (u >= res.u - kRankTol) ++ge;
            // next combination
            size_t k = na;
            while (k > 0 && pick[k - 1] == n - na + (k - 1)) --k;
            if (k == 0) break;
            ++pick[k - 1];
            for (size_t j = k; j < na; ++j) pick[j] = pick[j - 1] + 1;
        }
        res.p = std::min(1.0, 2.0 * double(std::min(le, ge)) / double(total));
    } else {
        res.exact = false;
        double mean = double(na) * nb / 2.0;
        double ties = tie_correction_term(pooled);
        double var = double(na) * nb / 12.0 *
                     (double(n + 1) - ties / (double(n) * (double(n) - 1.0)));
        if (var <= 0) {
            res.p = 1.0;  // every pooled value identical
        } else {
            double cc = res.u > mean ? 0.5 : (res.u < mean ? -0.5 : 0.0);
            res.p = normal_two_sided((res.u - cc - mean) / std::sqrt(var));
        }
    }
    return res;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) fail(ErrorKind::Data, "wilcoxon needs paired samples");
    std::vector<double> diffs;
    for (size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - y[i];
        if (d != 0.0) diffs.push_back(d);
    }
    if (diffs.empty())
        fail(ErrorKind::Data, "wilcoxon is degenerate: every paired difference is zero");

    size_t m = diffs.size();
    std::vector<double> abs_d(m);
    for (size_t i = 0; i < m; ++i) abs_d[i] = std::abs(diffs[i]);
    std::vector<double> ranks = midranks(abs_d);

    double w_plus = 0.0, total_rank = 0.0;
    for (size_t i = 0; i < m; ++i) {
        total_rank += ranks[i];
        if (diffs[i] > 0) w_plus += ranks[i];
    }
    WilcoxonResult res;
    res.n_used = int(m);
    res.w = std::min(w_plus, total_rank - w_plus);

    if (m <= 20) {
        res.exact = true;
        uint64_t patterns = uint64_t(1) << m;
        uint64_t le = 0, ge = 0;
        for (uint64_t mask = 0; mask < patterns; ++mask) {
            double wp = 0.0;
            for (size_t i = 0; i < m; ++i)
                if (mask & (uint64_t(1) << i)) wp += ranks[i];
            if (wp <= w_plus + kRankTol) ++le;
            if (wp >= w_plus - kRankTol) ++ge;
        }
        res.p = std::min(1.0, 2.0 * double(std::min(le, ge)) / double(patterns));
    } else {
        res.exact = false;
        double mean = double(m) * (m + 1) / 4.0;
        double ties = tie_correction_term(abs_d);
        double var = double(m) * (m + 1) * (2.0 * m + 1) / 24.0 - ties / 48.0;
        double cc = w_plus > mean ? 0.5 : (w_plus < mean ? -0.5 : 0.0);
        res.p = var > 0 ? normal_two_sided((w_plus - cc - mean) / std::sqrt(var)) : 1.0;
    }
    return res;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

PairwiseReport analyze_preferences(const PreferenceData& data, double alpha,
                                   std::optional<int> df_override) {
    PairwiseReport report;
    report.labels = data.labels;
    report.judge_ids = data.judge_ids;
    ScoreSummary scores = ScoreSummary::from(data);
    report.totals = scores.totals;

    report.zeta_group = 1.0;
    for (const PreferenceMatrix& m : data.judges) {
        int d = circular_triads(m);
        report.triads_per_judge.push_back(d);
        double zeta = data.t >= 3 ? coefficient_of_consistence(d, data.t) : 1.0;
        report.zeta_per_judge.push_back(zeta);
        report.zeta_group = std::min(report.zeta_group, zeta);
    }

    report.equality = test_of_equality(scores, alpha, df_override);
    report.threshold_r = multiple_comparison_threshold(scores.n, scores.t, alpha);
    report.grouping = group_scores(scores, data.labels, report.threshold_r);
    return report;
}

std::string report_to_json(const PairwiseReport& report) {
    json j;
    j["labels"] = report.labels;
    j["judges"] = report.judge_ids;
    j["totals"] = report.totals;
    j["zeta_per_judge"] = report.zeta_per_judge;
    j["circular_triads_per_judge"] = report.triads_per_judge;
    j["zeta_group"] = report.zeta_group;
    j["equality"] = {{"D", report.equality.d_statistic}, {"df", report.equality.df},
                     {"alpha", report.equality.alpha},   {"critical", report.equality.critical},
                     {"significant", report.equality.significant}};
    j["threshold_R"] = report.threshold_r;
    json ranking = json::array();
    for (int idx : report.grouping.ranking) ranking.push_back(report.labels[size_t(idx)]);
    j["ranking"] = ranking;
    json groups = json::array();
    for (const auto& group : report.grouping.groups) {
        json g = json::array();
        for (int idx : group) g.push_back(report.labels[size_t(idx)]);
        groups.push_back(g);
    }
    j["groups"] = groups;
    return j.dump(2);
}

std::string report_to_text(const PairwiseReport& report, const std::string& row_label) {
    std::ostringstream out;
    out << strfmt("%-10s zeta=%.3f  D=%.2f (df=%d, crit=%.3f, %s)  R=%d\n", row_label.c_str(),
                  report.zeta_group, report.equality.d_statistic, report.equality.df,
                  report.equality.critical,
                  report.equality.significant ? "significant" : "not significant",
                  report.threshold_r);
    out << strfmt("%-10s ranking: ", "");
    for (const auto& group : report.grouping.groups) {
        out << "[";
        for (size_t i = 0; i < group.size(); ++i) {
            out << report.labels[size_t(group[i])]
                << "=" << report.totals[size_t(group[i])];
            if (i + 1 < group.size()) out << " ";
        }
        out << "] ";
    }
    out << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// ratings
// ---------------------------------------------------------------------------

RatingsData parse_ratings_csv(const std::string& text, const std::string& context) {
    CsvTable table = parse_csv(text, context);
    size_t cj = table.col("judge_id", context), cg = table.col("group", context),
           cs = table.col("stimulus", context), cr = table.col("rating", context);

    std::set<std::string> groups, stimuli;
    for (const auto& row : table.rows) {
        groups.insert(row[cg]);
        stimuli.insert(row[cs]);
    }
    RatingsData data;
    data.groups.assign(groups.begin(), groups.end());
    data.stimuli.assign(stimuli.begin(), stimuli.end());

    auto stim_index = [&](const std::string& s) {
        return size_t(std::lower_bound(data.stimuli.begin(), data.stimuli.end(), s) -
                      data.stimuli.begin());
    };
    std::map<std::pair<std::string, std::string>, size_t> judge_row;
    for (const auto& row : table.rows) {
        auto key = std::make_pair(row[cg], row[cj]);
        if (!judge_row.count(key)) {
            judge_row[key] = data.judges.size();
            data.judges.push_back({row[cg], row[cj],
                                   std::vector<double>(data.stimuli.size(),
                                                       std::numeric_limits<double>::quiet_NaN())});
        }
        double rating;
        try {
            rating = std::stod(row[cr]);
        } catch (const std::exception&) {
            fail(ErrorKind::Format,
                 strfmt("%s: bad rating '%s' for judge %s", context.c_str(), row[cr].c_str(),
                        row[cj].c_str()));
        }
        data.judges[judge_row[key]].ratings[stim_index(row[cs])] = rating;
    }
    return data;
}

RatingsData load_ratings_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, strfmt("cannot open '%s' for reading", path.c_str()));
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_ratings_csv(text, path);
}

std::string analyze_ratings_json(const RatingsData& data) {
    json j;
    j["groups"] = data.groups;
    j["stimuli"] = data.stimuli;

    // Between-group comparison per stimulus (needs exactly two groups).
    json mwu = json::array();
    if (data.groups.size() == 2) {
        for (size_t s = 0; s < data.stimuli.size(); ++s) {
            std::vector<double> a, b;
            for (const auto& judge : data.judges) {
                double r = judge.ratings[s];
                if (std::isnan(r)) continue;
                (judge.group == data.groups[0] ? a : b).push_back(r);
            }
            if (a.empty() || b.empty()) continue;
            MannWhitneyResult res = mann_whitney_u(a, b);
            mwu.push_back({{"stimulus", data.stimuli[s]},
                           {"U", res.u},
                           {"p", res.p},
                           {"exact", res.exact},
                           {"n", {a.size(), b.size()}}});
        }
    }
    j["mann_whitney_between_groups"] = mwu;

    // Paired comparison of stimuli across all judges.
    json wilcoxon = json::array();
    for (size_t s1 = 0; s1 < data.stimuli.size(); ++s1) {
        for (size_t s2 = s1 + 1; s2 < data.stimuli.size(); ++s2) {
            std::vector<double> x, y;
            for (const auto& judge : data.judges) {
                if (std::isnan(judge.ratings[s1]) || std::isnan(judge.ratings[s2])) continue;
                x.push_back(judge.ratings[s1]);
                y.push_back(judge.ratings[s2]);
            }
            if (x.empty()) continue;
            json entry = {{"a", data.stimuli[s1]}, {"b", data.stimuli[s2]}, {"pairs", x.size()}};
            try {
                WilcoxonResult res = wilcoxon_signed_rank(x, y);
                entry["W"] = res.w;
                entry["p"] = res.p;
                entry["exact"] = res.exact;
                entry["n_nonzero"] = res.n_used;
            } catch (const Error&) {
                entry["degenerate"] = true;  // every judge rated the pair equal
            }
            wilcoxon.push_back(entry);
        }
    }
    j["wilcoxon_between_stimuli"] = wilcoxon;
    return j.dump(2);
}

}  // namespace aimtrace::stats
