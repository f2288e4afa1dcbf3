#pragma once

#include <string>
#include <vector>

#include "nucleo/vmf.hpp"

namespace nucleo {

struct NucleusAnnotation {
    double cx = 0.0;
    double cy = 0.0;
    Box box;
    bool isolated = false;
};

struct ImageAnnotation {
    std::string image;  // image file name (relative)
    std::string mask;   // optional instance-mask PNG file name
    std::vector<NucleusAnnotation> nuclei;
};

// JSON annotation document, one per image. Boxes are inclusive pixel
// coordinates and must contain their centers.
ImageAnnotation load_annotation(const std::string& path);
void save_annotation(const std::string& path, const ImageAnnotation& ann);

} // namespace nucleo
