#pragma once

#include <string>
#include <vector>

#include "nucleo/filter_bank.hpp"
#include "nucleo/mixture.hpp"
#include "nucleo/vmf.hpp"

namespace nucleo {

inline constexpr const char* kModelMagic = "NUCLEO-MODEL";
inline constexpr int kModelVersion = 1;

struct DetectionDefaults {
    std::vector<double> rotations{-90, -60, -30, 30, 60};
    double nms_radius = 6.0;
};

struct DecompositionDefaults {
    double psi = 3.0;
    double lambda = 0.1;
    double prior_variance = 10.0;
    double prior_floor = 0.05;
};

// The trained artifact: one convolution layer, the vMF kernel bank with its
// background/foreground split, the compositional mixture, and the inference
// defaults it was tuned with.
struct NucleoModel {
    FilterBank filter_bank;
    VmfKernelBank kernel_bank;
    CompositionalMixture mixture;
    DetectionDefaults detection;
    DecompositionDefaults decomposition;

    long parameter_count() const;
    void validate() const;
};

// Versioned JSON envelope; numeric arrays ride as base64 little-endian f64
// payloads, so serialize -> deserialize reproduces them bit-exactly while the
// header stays human-readable.
std::string model_to_string(const NucleoModel& model);
NucleoModel model_from_string(const std::string& text);
void save_model(const std::string& path, const NucleoModel& model);
NucleoModel load_model(const std::string& path);

// Standalone filter-bank file (same array encoding), for pre-trained banks.
void save_filter_bank(const std::string& path, const FilterBank& bank);
FilterBank load_filter_bank(const std::string& path);

} // namespace nucleo
