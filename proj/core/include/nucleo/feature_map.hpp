#pragma once

#include <cstdint>
#include <vector>

namespace nucleo {

// H x W grid of D-dimensional feature vectors, interleaved row-major
// (index = (y*W + x)*D + d). Valid positions carry unit-norm vectors;
// positions whose raw response norm fell below epsilon are flagged invalid
// and hold all-zero vectors.
struct FeatureMap {
    int height = 0;
    int width = 0;
    int dim = 0;
    std::vector<double> vectors;
    std::vector<std::uint8_t> valid;

    FeatureMap() = default;
    FeatureMap(int h, int w, int d)
        : height(h), width(w), dim(d),
          vectors(static_cast<std::size_t>(h) * w * d, 0.0),
          valid(static_cast<std::size_t>(h) * w, 0) {}

    const double* vec(int x, int y) const {
        return vectors.data() + (static_cast<std::size_t>(y) * width + x) * dim;
    }
    double* vec(int x, int y) {
        return vectors.data() + (static_cast<std::size_t>(y) * width + x) * dim;
    }
    bool is_valid(int x, int y) const {
        return valid[static_cast<std::size_t>(y) * width + x] != 0;
    }

    // Copies the P x P sub-grid whose top-left corner is (x0, y0).
    FeatureMap window(int x0, int y0, int p) const;
};

} // namespace nucleo
