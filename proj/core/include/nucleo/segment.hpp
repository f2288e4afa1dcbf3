#pragma once

#include <optional>
#include <vector>

#include "nucleo/decompose.hpp"
#include "nucleo/detect.hpp"
#include "nucleo/feature_map.hpp"
#include "nucleo/image.hpp"
#include "nucleo/mask.hpp"
#include "nucleo/vmf.hpp"

namespace nucleo {

inline constexpr double kPriorFloor = 0.05;
inline constexpr int kMinComponentArea = 20;

// Background-kernel foreground score 1 - mu_0 . f_i in [0, 2]. Textureless
// (invalid) positions score 0: featureless pixels are background here.
std::vector<double> foreground_score_map(const FeatureMap& fm, const VmfKernelBank& bank);

struct ThresholdMode {
    bool use_otsu = true;
    double fixed_value = 0.0;

    static ThresholdMode otsu() { return {true, 0.0}; }
    static ThresholdMode fixed(double v) { return {false, v}; }
};

// Binarize the score map (Otsu over 256 bins by default) and extract
// 4-connected components, dropping debris below kMinComponentArea pixels.
std::vector<PixelRegion> threshold_components(const std::vector<double>& scores, int width,
                                              int height, const ThresholdMode& mode);

struct Candidate {
    PixelRegion region;
    double cx = 0.0;
    double cy = 0.0;
    bool from_infeasible = false;  // parent component could not be decomposed
};

// Near-convex parts of every component, one candidate per part.
std::vector<Candidate> generate_candidates(const std::vector<PixelRegion>& components,
                                           double psi, double lambda);

// q(i) = max(floor, max_c exp(-dist^2 / (2 variance))) with distances taken
// to the candidate centroid pixel (rounded), so centroid pixels hit exactly 1.
PriorMap candidate_prior(const std::vector<Candidate>& candidates, double variance, int height,
                         int width, double floor = kPriorFloor);

struct SegmentResult {
    InstanceLabelMap labels;
    std::vector<Candidate> candidates;
    int infeasible_components = 0;
};

// Full weakly-supervised segmentation: foreground scores -> components ->
// near-convex candidates -> instances labeled in raster order of centroids.
SegmentResult segment_image(const FeatureMap& fm, const VmfKernelBank& bank, double psi,
                            double lambda, const ThresholdMode& mode);

} // namespace nucleo
