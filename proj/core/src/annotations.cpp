#include "nucleo/annotations.hpp"

#include <json.hpp>

#include <fstream>

#include "nucleo/errors.hpp"

namespace nucleo {

using nlohmann::json;

ImageAnnotation load_annotation(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open annotation file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("malformed annotation file " + path + ": " + e.what());
    }
    ImageAnnotation ann;
    try {
        ann.image = j.value("image", "");
        ann.mask = j.value("mask", "");
        for (const auto& n : j.at("nuclei")) {
            NucleusAnnotation na;
            na.cx = n.at("center").at(0).get<double>();
            na.cy = n.at("center").at(1).get<double>();
            na.box.x0 = n.at("box").at(0).get<int>();
            na.box.y0 = n.at("box").at(1).get<int>();
            na.box.x1 = n.at("box").at(2).get<int>();
            na.box.y1 = n.at("box").at(3).get<int>();
            na.isolated = n.at("isolated").get<bool>();
            if (na.cx < na.box.x0 || na.cx > na.box.x1 || na.cy < na.box.y0 || na.cy > na.box.y1)
                throw ValidationError("annotation box does not contain its center: " + path);
            ann.nuclei.push_back(na);
        }
    } catch (const json::exception& e) {
        throw ValidationError("malformed annotation file " + path + ": " + e.what());
    }
    return ann;
}

void save_annotation(const std::string& path, const ImageAnnotation& ann) {
    json j;
    j["image"] = ann.image;
    if (!ann.mask.empty()) j["mask"] = ann.mask;
    json nuclei = json::array();
    for (const auto& n : ann.nuclei) {
        json e;
        e["center"] = {n.cx, n.cy};
        e["box"] = {n.box.x0, n.box.y0, n.box.x1, n.box.y1};
        e["isolated"] = n.isolated;
        nuclei.push_back(e);
    }
    j["nuclei"] = nuclei;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PipelineError("cannot write annotation file: " + path);
    out << j.dump(2) << "\n";
}

} // namespace nucleo
