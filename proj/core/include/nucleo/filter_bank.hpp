#pragma once

#include <cstdint>
#include <vector>

#include "nucleo/feature_map.hpp"
#include "nucleo/image.hpp"

namespace nucleo {

// Single convolution layer: D filters of size kernel_size x kernel_size plus
// per-filter bias. Weights are row-major per filter.
struct FilterBank {
    int num_filters = 0;
    int kernel_size = 5;
    std::vector<double> weights;  // num_filters * kernel_size^2
    std::vector<double> bias;     // num_filters

    const double* filter(int k) const {
        return weights.data() + static_cast<std::size_t>(k) * kernel_size * kernel_size;
    }
    double* filter(int k) {
        return weights.data() + static_cast<std::size_t>(k) * kernel_size * kernel_size;
    }

    void validate() const;
};

// Raw responses below this norm are treated as textureless and flagged invalid.
inline constexpr double kFeatureNormEpsilon = 1e-8;

// Same-size convolution with reflect padding; responses are rectified at zero
// and L2-normalized across filters at each position.
FeatureMap convolve_extract(const GrayImage& image, const FilterBank& bank);

// Unsupervised filter learning: per-dimension mean removal, ZCA covariance
// whitening (ridge 1e-3), then spherical k-means with k-means++ seeding.
// The whitening transform is folded into the returned filters so that raw
// patch responses reproduce whitened-space cosine ordering. Deterministic
// for a fixed seed.
FilterBank learn_filter_bank(const std::vector<std::vector<double>>& patches,
                             int num_filters, std::uint64_t seed);

} // namespace nucleo
