#pragma once

#include <cstdint>
#include <vector>

#include "nucleo/feature_map.hpp"
#include "nucleo/filter_bank.hpp"
#include "nucleo/image.hpp"
#include "nucleo/vmf.hpp"

namespace nucleo {

// One orientation-aligned nucleus patch with its geometry descriptors.
struct NucleusCrop {
    FeatureMap patch;        // P x P x D features of the aligned crop
    Box box;                 // source bounding box
    double long_axis = 0.0;  // ellipse-equivalent major diameter, px
    double short_axis = 0.0;
    double orientation = 0.0;  // radians, [-pi/2, pi/2)
};

struct NucleusGeometry {
    double long_axis = 0.0;
    double short_axis = 0.0;
    double orientation = 0.0;
};

// Axes and orientation from second central moments of the Otsu-binarized
// foreground inside the box. Falls back to box extents and orientation 0
// when thresholding leaves no foreground.
NucleusGeometry measure_nucleus_geometry(const GrayImage& image, const Box& box);

// Extracts the P x P aligned feature patch for a nucleus centered at
// (cx, cy): rotate the image crop by -orientation, featurize with a margin,
// keep the central P x P. Geometry fields are copied from `geom`.
NucleusCrop extract_aligned_crop(const GrayImage& image, const FilterBank& bank, double cx,
                                 double cy, const Box& box, const NucleusGeometry& geom,
                                 int patch_size);

// k-means on (long_axis, short_axis) with k-means++ seeding; at most 100
// Lloyd iterations; empty clusters keep their previous centroid.
std::vector<int> cluster_crops(const std::vector<NucleusCrop>& crops, int M, std::uint64_t seed);

// Mixture of per-cluster spatial templates over the vMF kernel bank.
struct CompositionalMixture {
    int M = 0;
    int patch_size = 0;
    int K = 0;
    // alphas[m]: patch_size^2 * K, position-major; every row sums to 1.
    std::vector<std::vector<double>> alphas;
    std::vector<double> nu;                    // component frequencies
    std::vector<std::vector<double>> fg_masks; // patch_size^2 per component

    const double* alpha_row(int m, int pos) const {
        return alphas[m].data() + static_cast<std::size_t>(pos) * K;
    }
    void validate() const;
    // Recomputes fg_masks[m][i] = sum over foreground kernels of alpha.
    void refresh_fg_masks(const VmfKernelBank& bank);
};

inline constexpr double kAlphaFloor = 1e-4;

struct MixtureLearnStats {
    std::vector<double> objective;  // mean best-component masked LL per outer iteration
    std::vector<int> assignment;    // final crop-to-component assignment
};

// Per-component coefficient estimation (5 posterior/update sweeps from a
// uniform start) followed by em_iters outer iterations that reassign crops
// to their best-scoring component and re-estimate. An outer update that
// would lower the mean best-component masked log-likelihood is rolled back
// and iteration stops, which keeps the recorded objective non-decreasing.
CompositionalMixture learn_mixture(const std::vector<NucleusCrop>& crops,
                                   const std::vector<int>& assignment,
                                   const VmfKernelBank& bank, int em_iters,
                                   MixtureLearnStats* stats = nullptr);

// Mask-weighted average of log sum_k alpha_{i,k} exp(sigma f_i . mu_k).
// All-zero masks yield -infinity.
double masked_log_likelihood(const FeatureMap& patch, const CompositionalMixture& mixture,
                             const VmfKernelBank& bank, int m);

struct MixtureScore {
    int best_component = -1;
    double score = 0.0;
};

// argmax / max of masked_log_likelihood over components; ties take the
// lowest component index.
MixtureScore mixture_score(const FeatureMap& patch, const CompositionalMixture& mixture,
                           const VmfKernelBank& bank);

} // namespace nucleo
