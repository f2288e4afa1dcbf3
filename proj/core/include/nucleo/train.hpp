#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "nucleo/annotations.hpp"
#include "nucleo/image.hpp"
#include "nucleo/model.hpp"

namespace nucleo {

struct TrainConfig {
    int num_filters = 32;
    int kernel_size = 5;
    int kernels = 12;          // vMF kernel count K
    double sigma = 30.0;       // vMF concentration
    int mixtures = 20;         // mixture component count M
    int patch_size = 27;
    int em_iters = 3;
    std::uint64_t seed = 1;
    std::size_t max_feature_samples = 500000;
    int filter_patch_count = 20000;
    std::string filter_bank_path;  // load a pre-trained bank instead of learning

    DetectionDefaults detection;
    DecompositionDefaults decomposition;
};

struct TrainInput {
    GrayImage image;
    std::vector<NucleusAnnotation> nuclei;
};

// Full training pipeline: filter bank (loaded or learned from random
// patches), vMF kernels from sampled feature vectors, background-kernel
// selection against the dilated annotation boxes, aligned isolated-nucleus
// crops, geometry clustering, and mixture learning. Two feature passes keep
// memory flat: feature maps are recomputed rather than cached. Deterministic
// for fixed seed and inputs.
NucleoModel train_model(const std::vector<TrainInput>& data, const TrainConfig& config,
                        std::ostream* log = nullptr);

} // namespace nucleo
