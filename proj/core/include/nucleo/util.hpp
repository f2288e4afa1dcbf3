#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nucleo {

// Otsu's threshold over a 256-bin histogram spanning [min, max] of the data.
// Returns the bin upper edge maximizing between-class variance (first maximum
// on ties); values strictly above it are foreground. Degenerate histograms
// (all mass in one bin) yield +infinity, i.e. everything background.
double otsu_threshold(const std::vector<double>& values, int bins = 256);

std::string base64_encode(const std::uint8_t* data, std::size_t len);
std::vector<std::uint8_t> base64_decode(const std::string& text);

} // namespace nucleo
