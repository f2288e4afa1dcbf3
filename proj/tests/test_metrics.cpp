#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "nucleo/errors.hpp"
#include "nucleo/metrics.hpp"
#include "nucleo/pr_plot.hpp"

using namespace nucleo;

namespace {

InstanceLabelMap map_of(int w, int h, const std::vector<std::uint32_t>& labels) {
    InstanceLabelMap m(w, h);
    m.labels = labels;
    return m;
}

InstanceLabelMap square_map(int x0, int y0, int side, int w = 20, int h = 20,
                            std::uint32_t id = 1) {
    InstanceLabelMap m(w, h);
    for (int y = y0; y < y0 + side; ++y)
        for (int x = x0; x < x0 + side; ++x) m.at(x, y) = id;
    return m;
}

} // namespace

TEST_CASE("match_points: exact hits, misses, greedy order") {
    std::vector<std::pair<double, double>> gt = {{5, 5}, {15, 5}, {10, 15}};
    std::vector<ScoredPoint> exact = {{5, 5, 0.9}, {15, 5, 0.8}, {10, 15, 0.7}};
    MatchResult m = match_points(exact, gt, 3.0);
    CHECK(m.true_positives == 3);
    CHECK(m.false_positives == 0);
    CHECK(m.false_negatives == 0);

    MatchResult none = match_points({}, gt, 3.0);
    CHECK(none.true_positives == 0);
    CHECK(none.false_positives == 0);
    CHECK(none.false_negatives == 3);

    // Two predictions near one gt point: the higher-scoring one claims it.
    std::vector<ScoredPoint> both = {{5, 6, 0.5}, {5, 4, 0.9}};
    MatchResult g = match_points(both, {{5, 5}}, 3.0);
    CHECK(g.true_positives == 1);
    CHECK(g.false_positives == 1);
    REQUIRE(g.matches.size() == 1);
    CHECK(g.matches[0].first == 1);  // index of the 0.9-scoring prediction

    // TP + FN = |gt| always.
    CHECK(g.true_positives + g.false_negatives == 1);
    CHECK(m.true_positives + m.false_negatives == 3);

    CHECK_THROWS_AS(match_points(both, {{5, 5}}, 0.0), ValidationError);
}

TEST_CASE("pr_curve: perfect predictor, useless predictor, hand-enumerated case") {
    std::vector<std::pair<double, double>> gt = {{5, 5}, {15, 5}, {10, 15}, {3, 17}, {17, 17}};

    std::vector<ScoredPoint> perfect;
    for (std::size_t i = 0; i < gt.size(); ++i)
        perfect.push_back({gt[i].first, gt[i].second, 1.0 - 0.1 * i});
    auto curve = pr_curve(perfect, gt, 3.0);
    double prev_recall = -1;
    for (const auto& p : curve) {
        CHECK(p.precision == doctest::Approx(1.0));
        CHECK(p.recall >= prev_recall);
        prev_recall = p.recall;
    }
    CHECK(curve.back().recall == doctest::Approx(1.0));

    std::vector<ScoredPoint> wrong = {{100, 100, 0.9}, {120, 100, 0.8}};
    auto bad = pr_curve(wrong, gt, 3.0);
    for (const auto& p : bad) CHECK(p.precision == doctest::Approx(0.0));

    // 5 predictions: 3 correct with the top scores, 2 wrong below.
    std::vector<ScoredPoint> mixed = {{5, 5, 0.9},     {15, 5, 0.85},  {10, 15, 0.8},
                                      {100, 100, 0.4}, {120, 100, 0.3}};
    auto c = pr_curve(mixed, gt, 3.0);
    REQUIRE(c.size() == 5);
    CHECK(c[0].precision == doctest::Approx(1.0));
    CHECK(c[0].recall == doctest::Approx(0.2));
    CHECK(c[2].precision == doctest::Approx(1.0));
    CHECK(c[2].recall == doctest::Approx(0.6));
    CHECK(c[3].precision == doctest::Approx(3.0 / 4.0));
    CHECK(c[3].recall == doctest::Approx(0.6));
    CHECK(c[4].precision == doctest::Approx(3.0 / 5.0));
    CHECK(c[4].recall == doctest::Approx(0.6));

    // Recall never increases as the threshold rises.
    for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i - 1].recall <= c[i].recall);

    CHECK_THROWS_AS(pr_curve(mixed, {}, 3.0), ValidationError);
}

TEST_CASE("aji: identity, disjoint, half-overlap square") {
    InstanceLabelMap a = square_map(2, 2, 10);
    CHECK(aji(a, a) == doctest::Approx(1.0));

    InstanceLabelMap b = square_map(2, 2, 5);
    InstanceLabelMap c = square_map(12, 12, 5);
    CHECK(aji(b, c) == doctest::Approx(0.0));

    // 10x10 squares shifted by 5: overlap 50, union 150.
    InstanceLabelMap g = square_map(0, 0, 10);
    InstanceLabelMap p = square_map(5, 0, 10);
    CHECK(aji(g, p) == doctest::Approx(50.0 / 150.0).epsilon(1e-12));

    // Empty vs empty is vacuous agreement.
    InstanceLabelMap e1(4, 4), e2(4, 4);
    CHECK(aji(e1, e2) == doctest::Approx(1.0));

    // Unmatched predictions count in the denominator.
    InstanceLabelMap extra = square_map(2, 2, 10);
    for (int y = 15; y < 18; ++y)
        for (int x = 15; x < 18; ++x) extra.at(x, y) = 2;
    CHECK(aji(a, extra) == doctest::Approx(100.0 / 109.0).epsilon(1e-12));

    InstanceLabelMap wrong(5, 4);
    CHECK_THROWS_AS(aji(e1, wrong), ValidationError);
}

TEST_CASE("aji is invariant to relabeling either input") {
    InstanceLabelMap gt(12, 12);
    for (int y = 1; y < 5; ++y)
        for (int x = 1; x < 5; ++x) gt.at(x, y) = 1;
    for (int y = 7; y < 11; ++y)
        for (int x = 7; x < 11; ++x) gt.at(x, y) = 2;
    InstanceLabelMap pred(12, 12);
    for (int y = 1; y < 5; ++y)
        for (int x = 2; x < 6; ++x) pred.at(x, y) = 1;
    for (int y = 6; y < 10; ++y)
        for (int x = 7; x < 11; ++x) pred.at(x, y) = 2;

    double base = aji(gt, pred);
    InstanceLabelMap gt_swapped = gt;
    for (auto& l : gt_swapped.labels) l = l == 1 ? 2 : (l == 2 ? 1 : 0);
    InstanceLabelMap pred_swapped = pred;
    for (auto& l : pred_swapped.labels) l = l == 1 ? 2 : (l == 2 ? 1 : 0);
    CHECK(aji(gt_swapped, pred) == doctest::Approx(base).epsilon(1e-12));
    CHECK(aji(gt, pred_swapped) == doctest::Approx(base).epsilon(1e-12));
    CHECK(base > 0.0);
    CHECK(base < 1.0);
}

TEST_CASE("dsc: identity, disjoint, half overlap, empty convention") {
    InstanceLabelMap a = square_map(2, 2, 10);
    CHECK(dsc(a, a) == doctest::Approx(1.0));

    InstanceLabelMap b = square_map(2, 2, 5);
    InstanceLabelMap c = square_map(12, 12, 5);
    CHECK(dsc(b, c) == doctest::Approx(0.0));

    InstanceLabelMap g = square_map(0, 0, 10);
    InstanceLabelMap p = square_map(5, 0, 10);
    CHECK(dsc(g, p) == doctest::Approx(0.5).epsilon(1e-12));

    InstanceLabelMap e1(4, 4), e2(4, 4);
    CHECK(dsc(e1, e2) == doctest::Approx(1.0));
}

TEST_CASE("P-R table text round-trip and resampling") {
    std::vector<PrPoint> pts = {{2.0, 1.0, 0.2}, {1.5, 0.9, 0.5}, {1.0, 0.7, 0.8}};
    std::string text = pr_table_to_text(pts);
    auto back = pr_table_from_text(text);
    REQUIRE(back.size() == 3);
    CHECK(back[1].precision == doctest::Approx(0.9));
    CHECK(back[2].recall == doctest::Approx(0.8));

    auto rs = resample_pr(pts, 101);
    REQUIRE(rs.size() == 101);
    CHECK(rs[0].precision == doctest::Approx(1.0));   // max precision at recall >= 0
    CHECK(rs[50].precision == doctest::Approx(0.9));  // recall 0.5 still reachable
    CHECK(rs[80].precision == doctest::Approx(0.7));
    CHECK(rs[100].precision == doctest::Approx(0.0));  // recall 1 never reached

    CHECK(f1_of({0, 1.0, 0.5}) == doctest::Approx(2.0 / 3.0));
    CHECK(best_f1_index(pts) == 2);

    CHECK_THROWS_AS(pr_table_from_text("nonsense"), ValidationError);
}
