#pragma once

#include <limits>
#include <string>
#include <vector>

#include "nucleo/feature_map.hpp"
#include "nucleo/image.hpp"
#include "nucleo/mixture.hpp"
#include "nucleo/vmf.hpp"

namespace nucleo {

// Existence prior q(i) in [floor, 1], same shape as the image.
struct PriorMap {
    int height = 0;
    int width = 0;
    std::vector<double> q;

    double at(int x, int y) const { return q[static_cast<std::size_t>(y) * width + x]; }
};

// Dense per-pixel best masked log-likelihood over mixture components,
// window-centered. Borders where no window fits hold -infinity.
struct LikelihoodMap {
    int height = 0;
    int width = 0;
    std::vector<double> scores;
    std::vector<int> components;      // best component per pixel, -1 at borders
    std::vector<double> rotations;    // winning rotation in degrees (0 until combined)

    double score_at(int x, int y) const {
        return scores[static_cast<std::size_t>(y) * width + x];
    }
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Stride-1 sliding-window mixture scoring of every position where a
// patch_size window fits.
LikelihoodMap likelihood_map(const FeatureMap& fm, const CompositionalMixture& mixture,
                             const VmfKernelBank& bank);

// Adds log q pointwise; -infinity positions stay -infinity.
void apply_prior(LikelihoodMap& lmap, const PriorMap& prior);

struct Detection {
    int x = 0;
    int y = 0;
    double score = 0.0;
    int component = -1;
    double rotation = 0.0;
};

struct DetectionSet {
    std::vector<Detection> detections;  // descending score
    double threshold = kNegInf;
    std::string image_id;
};

struct DetectOptions {
    std::vector<double> rotations;  // degrees; 0 is always included implicitly
    double nms_radius = 6.0;
    double score_threshold = kNegInf;
};

struct FilterBank;

// Rotation-augmented detection: score each rotated copy, map the likelihood
// back to original coordinates (nearest neighbor), combine by pixel-wise max
// (0 degrees wins ties), optionally add the log prior, then take strict 5x5
// local maxima above the threshold and greedily suppress anything closer
// than nms_radius (ties by row-major position).
DetectionSet detect(const GrayImage& image, const FilterBank& filters,
                    const VmfKernelBank& bank, const CompositionalMixture& mixture,
                    const PriorMap* prior, const DetectOptions& opts);

// The combined (rotation-max) map before peak extraction; detect() is
// peaks(combined). Exposed so prior ablations can reuse one expensive map.
LikelihoodMap combined_likelihood_map(const GrayImage& image, const FilterBank& filters,
                                      const VmfKernelBank& bank,
                                      const CompositionalMixture& mixture,
                                      const std::vector<double>& rotations);

DetectionSet extract_detections(const LikelihoodMap& map, double score_threshold,
                                double nms_radius);

// Text table round-trip: header line, then one record per line
// "x y score component rotation" with 6 fractional digits on the score.
std::string detections_to_table(const DetectionSet& set);
DetectionSet detections_from_table(const std::string& text);

} // namespace nucleo
