#include "nucleo/train.hpp"

#include <algorithm>
#include <cmath>

#include "nucleo/errors.hpp"
#include "nucleo/rng.hpp"

namespace nucleo {

NucleoModel train_model(const std::vector<TrainInput>& data, const TrainConfig& config,
                        std::ostream* log) {
    if (data.empty()) throw ValidationError("train: no input images");
    long isolated_total = 0;
    for (const auto& d : data)
        for (const auto& n : d.nuclei)
            if (n.isolated) ++isolated_total;
    if (isolated_total < config.mixtures)
        throw ValidationError("train: need >= M isolated nuclei (M=" +
                              std::to_string(config.mixtures) + ", have " +
                              std::to_string(isolated_total) + ")");

    NucleoModel model;
    model.detection = config.detection;
    model.decomposition = config.decomposition;

    // Filter bank: load, or learn from random patches.
    if (!config.filter_bank_path.empty()) {
        model.filter_bank = load_filter_bank(config.filter_bank_path);
        if (log) *log << "loaded filter bank from " << config.filter_bank_path << "\n";
    } else {
        int ks = config.kernel_size;
        int per_image = std::max(1, config.filter_patch_count / static_cast<int>(data.size()));
        std::vector<std::vector<double>> patches;
        for (std::size_t im = 0; im < data.size(); ++im) {
            const GrayImage& img = data[im].image;
            if (img.width < ks || img.height < ks)
                throw ValidationError("train: image smaller than the filter kernel");
            Rng rng(config.seed, 0x50415443 + im);  // per-image patch stream
            for (int s = 0; s < per_image; ++s) {
                int x0 = static_cast<int>(rng.uniform_int(0, img.width - ks));
                int y0 = static_cast<int>(rng.uniform_int(0, img.height - ks));
                std::vector<double> patch(static_cast<std::size_t>(ks) * ks);
                for (int v = 0; v < ks; ++v)
                    for (int u = 0; u < ks; ++u)
                        patch[static_cast<std::size_t>(v) * ks + u] = img.at(x0 + u, y0 + v);
                patches.push_back(std::move(patch));
            }
        }
        model.filter_bank = learn_filter_bank(patches, config.num_filters, config.seed);
        if (log) *log << "learned " << config.num_filters << " filters from " << patches.size()
                      << " patches\n";
    }

    // Pass A: sample unit feature vectors for kernel estimation, one pass,
    // an equal quota per image.
    std::vector<std::vector<double>> samples;
    {
        std::size_t quota = std::max<std::size_t>(1, config.max_feature_samples / data.size());
        for (std::size_t im = 0; im < data.size(); ++im) {
            FeatureMap fm = convolve_extract(data[im].image, model.filter_bank);
            long valid = 0;
            for (auto b : fm.valid) valid += b;
            if (valid == 0) continue;
            double rate = std::min(1.0, static_cast<double>(quota) / static_cast<double>(valid));
            Rng rng(config.seed, 0x53414D50 + im);  // per-image sampling stream
            std::size_t npos = static_cast<std::size_t>(fm.height) * fm.width;
            for (std::size_t i = 0; i < npos; ++i) {
                if (!fm.valid[i]) continue;
                if (rate < 1.0 && rng.next_double() >= rate) continue;
                samples.emplace_back(fm.vectors.begin() + i * fm.dim,
                                     fm.vectors.begin() + (i + 1) * fm.dim);
            }
        }
        if (samples.size() < static_cast<std::size_t>(config.kernels))
            throw ValidationError("train: not enough textured positions to learn kernels");
    }
    if (log) *log << "sampled " << samples.size() << " feature vectors\n";

    VmfLearnStats vmf_stats;
    model.kernel_bank =
        learn_vmf_kernels(samples, config.kernels, config.sigma, config.seed, &vmf_stats);
    samples.clear();
    samples.shrink_to_fit();
    if (log) *log << "vMF EM converged after " << vmf_stats.iterations << " iterations\n";

    // Pass B: background kernel from activations outside dilated boxes,
    // streamed one image at a time.
    {
        std::vector<double> sums(model.kernel_bank.K, 0.0);
        long bg_pixels = 0;
        for (std::size_t im = 0; im < data.size(); ++im) {
            FeatureMap fm = convolve_extract(data[im].image, model.filter_bank);
            std::vector<std::uint8_t> inside(static_cast<std::size_t>(fm.height) * fm.width, 0);
            for (const auto& n : data[im].nuclei) {
                int x0 = std::max(0, n.box.x0 - 3), x1 = std::min(fm.width - 1, n.box.x1 + 3);
                int y0 = std::max(0, n.box.y0 - 3), y1 = std::min(fm.height - 1, n.box.y1 + 3);
                for (int y = y0; y <= y1; ++y)
                    for (int x = x0; x <= x1; ++x)
                        inside[static_cast<std::size_t>(y) * fm.width + x] = 1;
            }
            std::vector<double> acts = activation_maps(fm, model.kernel_bank);
            std::size_t plane = static_cast<std::size_t>(fm.height) * fm.width;
            for (std::size_t i = 0; i < plane; ++i) {
                if (inside[i]) continue;
                ++bg_pixels;
                for (int k = 0; k < model.kernel_bank.K; ++k)
                    sums[k] += acts[k * plane + i];
            }
        }
        if (bg_pixels == 0)
            throw ValidationError("train: no background pixels outside dilated nucleus boxes");
        int best = 0;
        for (int k = 1; k < model.kernel_bank.K; ++k)
            if (sums[k] > sums[best]) best = k;
        model.kernel_bank.background_index = best;
        model.kernel_bank.foreground_indices.clear();
        for (int k = 0; k < model.kernel_bank.K; ++k)
            if (k != best) model.kernel_bank.foreground_indices.push_back(k);
        if (log) *log << "background kernel: " << best << "\n";
    }

    // Pass C: aligned crops of isolated nuclei.
    std::vector<NucleusCrop> crops;
    for (const auto& d : data) {
        for (const auto& n : d.nuclei) {
            if (!n.isolated) continue;
            NucleusGeometry geom = measure_nucleus_geometry(d.image, n.box);
            crops.push_back(extract_aligned_crop(d.image, model.filter_bank, n.cx, n.cy, n.box,
                                                 geom, config.patch_size));
        }
    }
    if (log) *log << "extracted " << crops.size() << " aligned crops\n";

    std::vector<int> assignment = cluster_crops(crops, config.mixtures, config.seed);
    MixtureLearnStats mix_stats;
    model.mixture =
        learn_mixture(crops, assignment, model.kernel_bank, config.em_iters, &mix_stats);
    if (log) {
        *log << "mixture objective:";
        for (double o : mix_stats.objective) *log << " " << o;
        *log << "\n";
    }

    model.validate();
    if (log) *log << "total parameters: " << model.parameter_count() << "\n";
    return model;
}

} // namespace nucleo
