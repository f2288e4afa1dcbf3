#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nucleo/image.hpp"

namespace nucleo {

// Reads an 8-bit or 16-bit single-channel PNG or TIFF. Intensities are
// divided by the type maximum (255 or 65535). The format is chosen by file
// magic, not extension. Multi-channel inputs are rejected.
GrayImage load_gray_image(const std::string& path);

// Writers. 8-bit PNG quantizes with round(v * 255) after clamping to [0,1];
// 16-bit with round(v * 65535).
void save_png_gray8(const std::string& path, const GrayImage& img);
void save_png_gray16(const std::string& path, const GrayImage& img);

// 16-bit label PNG for instance maps (IDs stored as raw pixel values).
void save_label_png(const std::string& path, const InstanceLabelMap& map);
InstanceLabelMap load_label_png(const std::string& path);

// 8-bit RGB writer for diagnostic overlays. `rgb` is interleaved, row-major.
void save_png_rgb8(const std::string& path, int width, int height,
                   const std::vector<std::uint8_t>& rgb);

} // namespace nucleo
