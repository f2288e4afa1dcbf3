#pragma once

#include <cstdint>
#include <vector>

#include "nucleo/errors.hpp"

namespace nucleo {

// Single-channel image with intensities in [0, 1], row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {
        if (w < 1 || h < 1) throw ValidationError("GrayImage: dimensions must be >= 1");
    }

    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }

    bool in_bounds(int x, int y) const {
        return x >= 0 && y >= 0 && x < width && y < height;
    }

    // Reflect-101 index folding: ... 2 1 | 0 1 2 ... | n-2 n-3 (edge not repeated).
    static int reflect(int i, int n) {
        if (n == 1) return 0;
        int period = 2 * (n - 1);
        i = i % period;
        if (i < 0) i += period;
        return i < n ? i : period - i;
    }

    double at_reflect(int x, int y) const {
        return at(reflect(x, width), reflect(y, height));
    }

    // Bilinear sample with reflect-101 handling outside the frame.
    double sample_bilinear(double x, double y) const;
};

// Per-pixel instance identifiers: 0 = background, 1..N = instances.
struct InstanceLabelMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint32_t> labels;

    InstanceLabelMap() = default;
    InstanceLabelMap(int w, int h)
        : width(w), height(h), labels(static_cast<std::size_t>(w) * h, 0) {}

    std::uint32_t at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
    std::uint32_t& at(int x, int y) { return labels[static_cast<std::size_t>(y) * width + x]; }

    std::uint32_t max_label() const;
};

// Rotate about the image center by `degrees` (positive = from +x axis toward
// +y axis in pixel coordinates), bilinear, reflect-101 outside the frame.
// The output has the same dimensions as the input.
GrayImage rotate_image(const GrayImage& img, double degrees);

// Extract an out_size x out_size patch centered at (cx, cy), rotated by
// `degrees` about that center, bilinear with reflect-101 sampling.
GrayImage rotate_crop(const GrayImage& img, double cx, double cy, double degrees, int out_size);

} // namespace nucleo
