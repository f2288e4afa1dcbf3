#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace nucleo {

// A connected set of pixels stored as a bounding-box-anchored bitmap.
struct PixelRegion {
    int x0 = 0, y0 = 0;
    int width = 0, height = 0;
    std::vector<std::uint8_t> mask;  // width*height, 1 = member

    bool contains(int x, int y) const {
        int lx = x - x0, ly = y - y0;
        if (lx < 0 || ly < 0 || lx >= width || ly >= height) return false;
        return mask[static_cast<std::size_t>(ly) * width + lx] != 0;
    }
    void set(int x, int y) {
        mask[static_cast<std::size_t>(y - y0) * width + (x - x0)] = 1;
    }
    int area() const {
        int a = 0;
        for (auto v : mask) a += v;
        return a;
    }
    // Global coordinates in raster order.
    std::vector<std::pair<int, int>> pixels() const;
    std::pair<double, double> centroid() const;
};

// 4- or 8-connected components of a foreground bitmap; components smaller
// than min_area are dropped. Components are ordered by their first pixel in
// raster order.
std::vector<PixelRegion> connected_components(int width, int height,
                                              const std::vector<std::uint8_t>& fg,
                                              int connectivity = 4, int min_area = 0);

// Fills interior holes (background not reachable from outside the bounding
// box, 4-connected background).
PixelRegion fill_holes(const PixelRegion& region);

} // namespace nucleo
