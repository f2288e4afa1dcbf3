#pragma once

#include <utility>
#include <vector>

#include "nucleo/image.hpp"

namespace nucleo {

struct ScoredPoint {
    double x = 0.0;
    double y = 0.0;
    double score = 0.0;
};

struct MatchResult {
    int true_positives = 0;
    int false_positives = 0;
    int false_negatives = 0;
    std::vector<std::pair<int, int>> matches;  // (prediction index, gt index)
};

// Greedy matching: predictions in descending score order each claim the
// nearest unclaimed ground-truth point within `radius` (Euclidean); distance
// ties go to the ground-truth point earliest in raster order.
MatchResult match_points(const std::vector<ScoredPoint>& pred,
                         const std::vector<std::pair<double, double>>& gt, double radius);

struct PrPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

// One point per unique prediction score, descending. Zero surviving
// predictions score precision 1 by convention. Empty ground truth is
// rejected (recall undefined).
std::vector<PrPoint> pr_curve(const std::vector<ScoredPoint>& pred,
                              const std::vector<std::pair<double, double>>& gt, double radius);

// Aggregated Jaccard Index per the printed formula: each ground-truth
// instance picks the prediction with maximum intersection (ties to the lower
// prediction id; possibly shared between gt instances), never-picked
// predictions count against the denominator. Empty gt and pred is 1.
double aji(const InstanceLabelMap& gt, const InstanceLabelMap& pred);

// Dice coefficient over foreground pixel sets; both empty is 1.
double dsc(const InstanceLabelMap& gt, const InstanceLabelMap& pred);

} // namespace nucleo
