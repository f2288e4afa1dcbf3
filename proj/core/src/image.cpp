#include "nucleo/image.hpp"

#include <algorithm>
#include <cmath>

namespace nucleo {

double GrayImage::sample_bilinear(double x, double y) const {
    int x0 = static_cast<int>(std::floor(x));
    int y0 = static_cast<int>(std::floor(y));
    double fx = x - x0;
    double fy = y - y0;
    double v00 = at_reflect(x0, y0);
    double v10 = at_reflect(x0 + 1, y0);
    double v01 = at_reflect(x0, y0 + 1);
    double v11 = at_reflect(x0 + 1, y0 + 1);
    return (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
}

std::uint32_t InstanceLabelMap::max_label() const {
    std::uint32_t m = 0;
    for (std::uint32_t v : labels) m = std::max(m, v);
    return m;
}

GrayImage rotate_image(const GrayImage& img, double degrees) {
    if (degrees == 0.0) return img;
    GrayImage out(img.width, img.height);
    double cx = 0.5 * (img.width - 1);
    double cy = 0.5 * (img.height - 1);
    double rad = degrees * M_PI / 180.0;
    double c = std::cos(rad), s = std::sin(rad);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            // inverse map: rotate the output pixel back into the source frame
            double dx = x - cx, dy = y - cy;
            double sx = cx + c * dx + s * dy;
            double sy = cy - s * dx + c * dy;
            out.at(x, y) = img.sample_bilinear(sx, sy);
        }
    }
    return out;
}

GrayImage rotate_crop(const GrayImage& img, double cx, double cy, double degrees, int out_size) {
    GrayImage out(out_size, out_size);
    double oc = 0.5 * (out_size - 1);
    double rad = degrees * M_PI / 180.0;
    double c = std::cos(rad), s = std::sin(rad);
    for (int y = 0; y < out_size; ++y) {
        for (int x = 0; x < out_size; ++x) {
            double dx = x - oc, dy = y - oc;
            double sx = cx + c * dx + s * dy;
            double sy = cy - s * dx + c * dy;
            out.at(x, y) = img.sample_bilinear(sx, sy);
        }
    }
    return out;
}

} // namespace nucleo
