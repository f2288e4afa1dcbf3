#pragma once

#include <cstdint>
#include <vector>

#include "nucleo/image.hpp"
#include "nucleo/vmf.hpp"

namespace nucleo {

struct SynthConfig {
    int width = 128;
    int height = 128;
    int count_min = 4;
    int count_max = 8;
    double long_axis_min = 14.0;
    double long_axis_max = 20.0;
    double short_axis_min = 10.0;
    double short_axis_max = 15.0;
    double orient_min = -1.5707963267948966;
    double orient_max = 1.5707963267948966;
    double touching_prob = 0.0;
    double bg_mean = 0.15;
    double fg_mean = 0.65;
    double noise_std = 0.02;
    double texture_amplitude = 0.12;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SynthInstance {
    double cx = 0.0;
    double cy = 0.0;
    double long_axis = 0.0;
    double short_axis = 0.0;
    double orientation = 0.0;  // radians
    Box box;                   // tight bounding box of the rendered mask
    bool isolated = true;      // mask touches no other instance (8-adjacency)
};

struct GroundTruth {
    std::vector<SynthInstance> instances;
    InstanceLabelMap masks;
    bool placement_warning = false;  // fewer instances placed than requested
};

struct SynthSample {
    GrayImage image;
    GroundTruth truth;
};

// Deterministic synthetic DAPI-like image: ellipses with low-frequency
// interior texture on a darker background plus Gaussian pixel noise.
// Touching pairs are placed along the partner's minor axis at center
// distance u * (sum of short semi-axes), u in [0.7, 0.95], so the union
// forms a single component with a controlled neck.
SynthSample generate(const SynthConfig& config);

} // namespace nucleo
