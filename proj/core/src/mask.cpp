#include "nucleo/mask.hpp"

#include <algorithm>

namespace nucleo {

std::vector<std::pair<int, int>> PixelRegion::pixels() const {
    std::vector<std::pair<int, int>> out;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (mask[static_cast<std::size_t>(y) * width + x]) out.emplace_back(x0 + x, y0 + y);
    return out;
}

std::pair<double, double> PixelRegion::centroid() const {
    double sx = 0, sy = 0;
    long n = 0;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (mask[static_cast<std::size_t>(y) * width + x]) {
                sx += x0 + x;
                sy += y0 + y;
                ++n;
            }
    if (n == 0) return {0.0, 0.0};
    return {sx / n, sy / n};
}

std::vector<PixelRegion> connected_components(int width, int height,
                                              const std::vector<std::uint8_t>& fg,
                                              int connectivity, int min_area) {
    std::vector<std::int32_t> label(static_cast<std::size_t>(width) * height, -1);
    std::vector<PixelRegion> out;
    std::vector<std::pair<int, int>> stack;
    const int dx4[] = {1, -1, 0, 0}, dy4[] = {0, 0, 1, -1};
    const int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1}, dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
    const int* dx = connectivity == 8 ? dx8 : dx4;
    const int* dy = connectivity == 8 ? dy8 : dy4;
    int ndir = connectivity == 8 ? 8 : 4;

    std::int32_t next = 0;
    std::vector<std::vector<std::pair<int, int>>> members;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            std::size_t idx = static_cast<std::size_t>(y) * width + x;
            if (!fg[idx] || label[idx] >= 0) continue;
            std::int32_t id = next++;
            members.emplace_back();
            stack.clear();
            stack.emplace_back(x, y);
            label[idx] = id;
            while (!stack.empty()) {
                auto [cx, cy] = stack.back();
                stack.pop_back();
                members[id].emplace_back(cx, cy);
                for (int k = 0; k < ndir; ++k) {
                    int nx = cx + dx[k], ny = cy + dy[k];
                    if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
                    std::size_t nidx = static_cast<std::size_t>(ny) * width + nx;
                    if (fg[nidx] && label[nidx] < 0) {
                        label[nidx] = id;
                        stack.emplace_back(nx, ny);
                    }
                }
            }
        }
    }

    for (auto& px : members) {
        if (static_cast<int>(px.size()) < min_area) continue;
        int minx = px[0].first, maxx = px[0].first, miny = px[0].second, maxy = px[0].second;
        for (auto [x, y] : px) {
            minx = std::min(minx, x);
            maxx = std::max(maxx, x);
            miny = std::min(miny, y);
            maxy = std::max(maxy, y);
        }
        PixelRegion r;
        r.x0 = minx;
        r.y0 = miny;
        r.width = maxx - minx + 1;
        r.height = maxy - miny + 1;
        r.mask.assign(static_cast<std::size_t>(r.width) * r.height, 0);
        for (auto [x, y] : px) r.set(x, y);
        out.push_back(std::move(r));
    }
    return out;
}

PixelRegion fill_holes(const PixelRegion& region) {
    // Flood the background from a 1px border ring; anything not reached is a hole.
    int w = region.width + 2, h = region.height + 2;
    std::vector<std::uint8_t> outside(static_cast<std::size_t>(w) * h, 0);
    auto member = [&](int x, int y) {
        if (x < 1 || y < 1 || x > region.width || y > region.height) return false;
        return region.mask[static_cast<std::size_t>(y - 1) * region.width + (x - 1)] != 0;
    };
    std::vector<std::pair<int, int>> stack;
    stack.emplace_back(0, 0);
    outside[0] = 1;
    const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
    while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        for (int k = 0; k < 4; ++k) {
            int nx = cx + dx[k], ny = cy + dy[k];
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            std::size_t idx = static_cast<std::size_t>(ny) * w + nx;
            if (!outside[idx] && !member(nx, ny)) {
                outside[idx] = 1;
                stack.emplace_back(nx, ny);
            }
        }
    }
    PixelRegion filled = region;
    for (int y = 0; y < region.height; ++y)
        for (int x = 0; x < region.width; ++x) {
            std::size_t oidx = static_cast<std::size_t>(y + 1) * w + (x + 1);
            if (!outside[oidx])
                filled.mask[static_cast<std::size_t>(y) * region.width + x] = 1;
        }
    return filled;
}

} // namespace nucleo
