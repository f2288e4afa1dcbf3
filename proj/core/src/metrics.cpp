#include "nucleo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "nucleo/errors.hpp"

namespace nucleo {

MatchResult match_points(const std::vector<ScoredPoint>& pred,
                         const std::vector<std::pair<double, double>>& gt, double radius) {
    if (radius <= 0) throw ValidationError("match_points: radius must be positive");

    std::vector<std::size_t> order(pred.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pred[a].score > pred[b].score; });

    // Ground-truth raster order for distance tie-breaks.
    std::vector<std::size_t> gt_order(gt.size());
    for (std::size_t i = 0; i < gt_order.size(); ++i) gt_order[i] = i;
    std::stable_sort(gt_order.begin(), gt_order.end(), [&](std::size_t a, std::size_t b) {
        if (gt[a].second != gt[b].second) return gt[a].second < gt[b].second;
        return gt[a].first < gt[b].first;
    });

    MatchResult out;
    std::vector<bool> claimed(gt.size(), false);
    double r2 = radius * radius;
    for (std::size_t pi : order) {
        double best_d2 = r2;
        long best_gt = -1;
        for (std::size_t gi : gt_order) {
            if (claimed[gi]) continue;
            double dx = pred[pi].x - gt[gi].first;
            double dy = pred[pi].y - gt[gi].second;
            double d2 = dx * dx + dy * dy;
            if (d2 <= r2 && (best_gt < 0 || d2 < best_d2)) {
                best_d2 = d2;
                best_gt = static_cast<long>(gi);
            }
        }
        if (best_gt >= 0) {
            claimed[best_gt] = true;
            out.matches.emplace_back(static_cast<int>(pi), static_cast<int>(best_gt));
        }
    }
    out.true_positives = static_cast<int>(out.matches.size());
    out.false_positives = static_cast<int>(pred.size()) - out.true_positives;
    out.false_negatives = static_cast<int>(gt.size()) - out.true_positives;
    return out;
}

std::vector<PrPoint> pr_curve(const std::vector<ScoredPoint>& pred,
                              const std::vector<std::pair<double, double>>& gt, double radius) {
    if (gt.empty()) throw ValidationError("pr_curve: empty ground truth (recall undefined)");

    std::vector<double> thresholds;
    for (const auto& p : pred) thresholds.push_back(p.score);
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    std::vector<PrPoint> curve;
    for (double t : thresholds) {
        std::vector<ScoredPoint> surviving;
        for (const auto& p : pred)
            if (p.score >= t) surviving.push_back(p);
        MatchResult m = match_points(surviving, gt, radius);
        PrPoint pt;
        pt.threshold = t;
        pt.precision = surviving.empty()
                           ? 1.0
                           : static_cast<double>(m.true_positives) /
                                 (m.true_positives + m.false_positives);
        pt.recall = static_cast<double>(m.true_positives) / static_cast<double>(gt.size());
        curve.push_back(pt);
    }
    return curve;
}

namespace {

struct InstanceSets {
    std::vector<std::vector<std::size_t>> pixels;  // per label id (1-based -> index 0..)
};

InstanceSets collect_instances(const InstanceLabelMap& map) {
    InstanceSets sets;
    sets.pixels.resize(map.max_label());
    for (std::size_t i = 0; i < map.labels.size(); ++i) {
        std::uint32_t l = map.labels[i];
        if (l > 0) sets.pixels[l - 1].push_back(i);
    }
    return sets;
}

} // namespace

double aji(const InstanceLabelMap& gt, const InstanceLabelMap& pred) {
    if (gt.width != pred.width || gt.height != pred.height)
        throw ValidationError("aji: label maps differ in shape");

    InstanceSets g = collect_instances(gt);
    InstanceSets s = collect_instances(pred);
    if (g.pixels.empty() && s.pixels.empty()) return 1.0;

    // Joint intersection counts in one pass.
    std::map<std::pair<std::uint32_t, std::uint32_t>, long> inter;
    for (std::size_t i = 0; i < gt.labels.size(); ++i) {
        std::uint32_t a = gt.labels[i], b = pred.labels[i];
        if (a > 0 && b > 0) inter[{a, b}]++;
    }

    long num = 0, den = 0;
    std::vector<bool> used(s.pixels.size(), false);
    for (std::size_t gi = 0; gi < g.pixels.size(); ++gi) {
        long best_overlap = 0;
        long best_pred = -1;
        for (std::size_t si = 0; si < s.pixels.size(); ++si) {
            auto it = inter.find({static_cast<std::uint32_t>(gi + 1), static_cast<std::uint32_t>(si + 1)});
            long ov = it == inter.end() ? 0 : it->second;
            if (ov > best_overlap) {
                best_overlap = ov;
                best_pred = static_cast<long>(si);
            }
        }
        if (best_pred >= 0) {
            used[best_pred] = true;
            long gsz = static_cast<long>(g.pixels[gi].size());
            long ssz = static_cast<long>(s.pixels[best_pred].size());
            num += best_overlap;
            den += gsz + ssz - best_overlap;
        } else {
            den += static_cast<long>(g.pixels[gi].size());  // union with the empty set
        }
    }
    for (std::size_t si = 0; si < s.pixels.size(); ++si)
        if (!used[si]) den += static_cast<long>(s.pixels[si].size());

    if (den == 0) return 1.0;
    return static_cast<double>(num) / static_cast<double>(den);
}

double dsc(const InstanceLabelMap& gt, const InstanceLabelMap& pred) {
    if (gt.width != pred.width || gt.height != pred.height)
        throw ValidationError("dsc: label maps differ in shape");
    long a = 0, b = 0, both = 0;
    for (std::size_t i = 0; i < gt.labels.size(); ++i) {
        bool ga = gt.labels[i] > 0, pb = pred.labels[i] > 0;
        if (ga) ++a;
        if (pb) ++b;
        if (ga && pb) ++both;
    }
    if (a + b == 0) return 1.0;
    return 2.0 * static_cast<double>(both) / static_cast<double>(a + b);
}

} // namespace nucleo
