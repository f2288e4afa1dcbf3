#pragma once

#include <cstdint>
#include <vector>

#include "nucleo/feature_map.hpp"

namespace nucleo {

// Bank of von-Mises-Fisher mean directions on the feature sphere with a
// shared fixed concentration. Densities are kept unnormalized throughout:
// with sigma fixed the normalizing constant cancels in every posterior and
// comparison, so log p(f|mu) is represented as sigma * (f . mu).
struct VmfKernelBank {
    int K = 0;
    int dim = 0;
    double sigma = 30.0;
    std::vector<double> kernels;  // K * dim, unit rows
    int background_index = -1;
    std::vector<int> foreground_indices;

    const double* kernel(int k) const { return kernels.data() + static_cast<std::size_t>(k) * dim; }
    double* kernel(int k) { return kernels.data() + static_cast<std::size_t>(k) * dim; }

    void validate() const;
};

// Unnormalized log density sigma * (f . mu). The all-zero "invalid" vector
// scores 0 (uninformative). Non-unit, non-zero inputs are rejected.
double vmf_log_density(const std::vector<double>& f, const std::vector<double>& mu, double sigma);

struct VmfLearnStats {
    std::vector<double> avg_log_likelihood;  // one entry per EM iteration, plus init
    int iterations = 0;
};

// Maximum-likelihood estimation of K kernels by EM with uniform component
// weights: soft assignment by softmax of sigma * (f . mu_k), mean update with
// renormalization, k-means++ initialization on cosine distance. Stops when
// the mean kernel movement drops below 1e-5 or after 200 iterations. An
// emptied component is reseeded at the currently worst-explained vector.
VmfKernelBank learn_vmf_kernels(const std::vector<std::vector<double>>& features, int K,
                                double sigma, std::uint64_t seed,
                                VmfLearnStats* stats = nullptr);

// Activation (k, y, x) = f_i . mu_k in [-1, 1]; invalid positions get -1.
// Returned as K planes of H*W, plane-major.
std::vector<double> activation_maps(const FeatureMap& fm, const VmfKernelBank& bank);

// Axis-aligned box in pixel coordinates, inclusive on both ends.
struct Box {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

// Picks the kernel with the highest mean activation over pixels outside
// every nucleus box dilated by 3px; all other kernels become foreground.
// Images without background pixels are skipped; all skipped is an error.
void select_background_kernel(VmfKernelBank& bank, const std::vector<FeatureMap>& fms,
                              const std::vector<std::vector<Box>>& boxes_per_image,
                              int dilate_px = 3);

} // namespace nucleo
