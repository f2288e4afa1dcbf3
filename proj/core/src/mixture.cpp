#include "nucleo/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nucleo/errors.hpp"
#include "nucleo/rng.hpp"
#include "nucleo/util.hpp"

namespace nucleo {

NucleusGeometry measure_nucleus_geometry(const GrayImage& image, const Box& box) {
    if (box.x0 < 0 || box.y0 < 0 || box.x1 >= image.width || box.y1 >= image.height ||
        box.x1 < box.x0 || box.y1 < box.y0)
        throw ValidationError("measure_nucleus_geometry: box out of bounds");

    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(box.x1 - box.x0 + 1) * (box.y1 - box.y0 + 1));
    for (int y = box.y0; y <= box.y1; ++y)
        for (int x = box.x0; x <= box.x1; ++x) vals.push_back(image.at(x, y));

    double thr = otsu_threshold(vals);
    double sx = 0, sy = 0;
    long n = 0;
    for (int y = box.y0; y <= box.y1; ++y)
        for (int x = box.x0; x <= box.x1; ++x)
            if (image.at(x, y) > thr) {
                sx += x;
                sy += y;
                ++n;
            }

    NucleusGeometry g;
    if (n == 0) {
        g.long_axis = std::max(box.x1 - box.x0 + 1, box.y1 - box.y0 + 1);
        g.short_axis = std::min(box.x1 - box.x0 + 1, box.y1 - box.y0 + 1);
        g.orientation = 0.0;
        return g;
    }

    double cx = sx / n, cy = sy / n;
    double mxx = 0, myy = 0, mxy = 0;
    for (int y = box.y0; y <= box.y1; ++y)
        for (int x = box.x0; x <= box.x1; ++x)
            if (image.at(x, y) > thr) {
                double dx = x - cx, dy = y - cy;
                mxx += dx * dx;
                myy += dy * dy;
                mxy += dx * dy;
            }
    mxx /= n;
    myy /= n;
    mxy /= n;
    // Add the 1/12 variance of a unit pixel so single-pixel rows still have extent.
    mxx += 1.0 / 12.0;
    myy += 1.0 / 12.0;

    double tr = mxx + myy;
    double det = std::sqrt(std::max(0.0, (mxx - myy) * (mxx - myy) + 4.0 * mxy * mxy));
    double l1 = 0.5 * (tr + det);
    double l2 = 0.5 * (tr - det);
    g.long_axis = 4.0 * std::sqrt(std::max(0.0, l1));
    g.short_axis = 4.0 * std::sqrt(std::max(0.0, l2));
    double theta = 0.5 * std::atan2(2.0 * mxy, mxx - myy);
    if (theta >= M_PI / 2) theta -= M_PI;
    if (theta < -M_PI / 2) theta += M_PI;
    g.orientation = theta;
    return g;
}

NucleusCrop extract_aligned_crop(const GrayImage& image, const FilterBank& bank, double cx,
                                 double cy, const Box& box, const NucleusGeometry& geom,
                                 int patch_size) {
    if (patch_size < 1 || patch_size % 2 == 0)
        throw ValidationError("extract_aligned_crop: patch size must be odd");
    int margin = bank.kernel_size / 2;
    int src = patch_size + 2 * margin;
    GrayImage rotated =
        rotate_crop(image, cx, cy, -geom.orientation * 180.0 / M_PI, src);
    FeatureMap full = convolve_extract(rotated, bank);

    NucleusCrop crop;
    crop.patch = full.window(margin, margin, patch_size);
    crop.box = box;
    crop.long_axis = geom.long_axis;
    crop.short_axis = geom.short_axis;
    crop.orientation = geom.orientation;
    return crop;
}

std::vector<int> cluster_crops(const std::vector<NucleusCrop>& crops, int M, std::uint64_t seed) {
    if (M < 1) throw ValidationError("cluster_crops: M must be >= 1");
    if (crops.size() < static_cast<std::size_t>(M))
        throw ValidationError(
            "cluster_crops: fewer crops than clusters; lower the mixture count M");

    int n = static_cast<int>(crops.size());
    std::vector<std::pair<double, double>> pts(n);
    for (int i = 0; i < n; ++i) pts[i] = {crops[i].long_axis, crops[i].short_axis};

    auto d2 = [&](const std::pair<double, double>& a, const std::pair<double, double>& b) {
        double dx = a.first - b.first, dy = a.second - b.second;
        return dx * dx + dy * dy;
    };

    // k-means++ seeding.
    Rng rng(seed, /*stream=*/0x43524F50);  // "CROP"
    std::vector<std::pair<double, double>> centers;
    centers.push_back(pts[rng.uniform_int(0, n - 1)]);
    std::vector<double> dist(n);
    for (int i = 0; i < n; ++i) dist[i] = d2(pts[i], centers[0]);
    while (static_cast<int>(centers.size()) < M) {
        double total = 0;
        for (double v : dist) total += v;
        int pick;
        if (total <= 0.0) {
            pick = static_cast<int>(rng.uniform_int(0, n - 1));
        } else {
            double target = rng.next_double() * total;
            double run = 0;
            pick = n - 1;
            for (int i = 0; i < n; ++i) {
                run += dist[i];
                if (run >= target) { pick = i; break; }
            }
        }
        centers.push_back(pts[pick]);
        for (int i = 0; i < n; ++i) dist[i] = std::min(dist[i], d2(pts[i], pts[pick]));
    }

    std::vector<int> assign(n, -1);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = d2(pts[i], centers[0]);
            for (int m = 1; m < M; ++m) {
                double dd = d2(pts[i], centers[m]);
                if (dd < bd) { bd = dd; best = m; }
            }
            if (assign[i] != best) { assign[i] = best; changed = true; }
        }
        if (!changed) break;
        std::vector<double> sx(M, 0), sy(M, 0);
        std::vector<int> cnt(M, 0);
        for (int i = 0; i < n; ++i) {
            sx[assign[i]] += pts[i].first;
            sy[assign[i]] += pts[i].second;
            cnt[assign[i]]++;
        }
        for (int m = 0; m < M; ++m)
            if (cnt[m] > 0) centers[m] = {sx[m] / cnt[m], sy[m] / cnt[m]};
    }
    return assign;
}

void CompositionalMixture::validate() const {
    if (M < 1 || patch_size < 1 || K < 1)
        throw ValidationError("mixture: M, patch_size and K must be positive");
    if (static_cast<int>(alphas.size()) != M || static_cast<int>(nu.size()) != M ||
        static_cast<int>(fg_masks.size()) != M)
        throw ValidationError("mixture: component array size mismatch");
    std::size_t npos = static_cast<std::size_t>(patch_size) * patch_size;
    double nu_sum = 0;
    for (int m = 0; m < M; ++m) {
        if (alphas[m].size() != npos * K || fg_masks[m].size() != npos)
            throw ValidationError("mixture: coefficient array size mismatch");
        for (std::size_t i = 0; i < npos; ++i) {
            double s = 0;
            for (int k = 0; k < K; ++k) {
                double a = alphas[m][i * K + k];
                if (a < 0) throw ValidationError("mixture: negative coefficient");
                s += a;
            }
            if (std::abs(s - 1.0) > 1e-6)
                throw ValidationError("mixture: coefficient row does not sum to 1");
        }
        nu_sum += nu[m];
    }
    if (std::abs(nu_sum - 1.0) > 1e-6) throw ValidationError("mixture: nu does not sum to 1");
}

void CompositionalMixture::refresh_fg_masks(const VmfKernelBank& bank) {
    std::size_t npos = static_cast<std::size_t>(patch_size) * patch_size;
    fg_masks.assign(M, std::vector<double>(npos, 0.0));
    for (int m = 0; m < M; ++m)
        for (std::size_t i = 0; i < npos; ++i) {
            double s = 0;
            for (int k : bank.foreground_indices) s += alphas[m][i * K + k];
            fg_masks[m][i] = s;
        }
}

namespace {

// exp(sigma * (f . mu_k)) per position per kernel; invalid positions give 1
// for every kernel, making them uninformative under the coefficient sum.
std::vector<double> exp_activations(const FeatureMap& patch, const VmfKernelBank& bank) {
    std::size_t npos = static_cast<std::size_t>(patch.height) * patch.width;
    std::vector<double> E(npos * bank.K, 1.0);
    for (std::size_t i = 0; i < npos; ++i) {
        if (!patch.valid[i]) continue;
        const double* f = patch.vectors.data() + i * patch.dim;
        for (int k = 0; k < bank.K; ++k) {
            const double* mu = bank.kernel(k);
            double dot = 0;
            for (int j = 0; j < bank.dim; ++j) dot += f[j] * mu[j];
            E[i * bank.K + k] = std::exp(bank.sigma * dot);
        }
    }
    return E;
}

double masked_ll_from_exp(const std::vector<double>& E, const std::vector<double>& alpha,
                          const std::vector<double>& fg_mask, int K) {
    std::size_t npos = fg_mask.size();
    double num = 0, den = 0;
    for (std::size_t i = 0; i < npos; ++i) {
        double w = fg_mask[i];
        if (w == 0.0) continue;
        double s = 0;
        for (int k = 0; k < K; ++k) s += alpha[i * K + k] * E[i * K + k];
        num += w * std::log(s);
        den += w;
    }
    if (den == 0.0) return -std::numeric_limits<double>::infinity();
    return num / den;
}

// One component's coefficients from its member crops: uniform start, then
// `sweeps` posterior/update passes, flooring and renormalizing each time.
void estimate_alphas(const std::vector<const std::vector<double>*>& members, int K,
                     std::size_t npos, int sweeps, std::vector<double>& alpha) {
    alpha.assign(npos * K, 1.0 / K);
    if (members.empty()) return;
    std::vector<double> next(npos * K);
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        std::fill(next.begin(), next.end(), 0.0);
        for (const auto* Eptr : members) {
            const std::vector<double>& E = *Eptr;
            for (std::size_t i = 0; i < npos; ++i) {
                double s = 0;
                for (int k = 0; k < K; ++k) s += alpha[i * K + k] * E[i * K + k];
                double inv = 1.0 / s;
                for (int k = 0; k < K; ++k)
                    next[i * K + k] += alpha[i * K + k] * E[i * K + k] * inv;
            }
        }
        double inv_n = 1.0 / static_cast<double>(members.size());
        for (std::size_t i = 0; i < npos; ++i) {
            double rowsum = 0;
            for (int k = 0; k < K; ++k) {
                double a = std::max(kAlphaFloor, next[i * K + k] * inv_n);
                alpha[i * K + k] = a;
                rowsum += a;
            }
            double inv = 1.0 / rowsum;
            for (int k = 0; k < K; ++k) alpha[i * K + k] *= inv;
        }
    }
}

} // namespace

CompositionalMixture learn_mixture(const std::vector<NucleusCrop>& crops,
                                   const std::vector<int>& assignment,
                                   const VmfKernelBank& bank, int em_iters,
                                   MixtureLearnStats* stats) {
    if (crops.empty()) throw ValidationError("learn_mixture: no crops");
    if (assignment.size() != crops.size())
        throw ValidationError("learn_mixture: assignment does not cover all crops");
    if (bank.foreground_indices.empty())
        throw ValidationError("learn_mixture: kernel bank has no foreground set");

    int P = crops.front().patch.width;
    std::size_t npos = static_cast<std::size_t>(P) * P;
    for (const auto& c : crops)
        if (c.patch.width != P || c.patch.height != P || c.patch.dim != bank.dim)
            throw ValidationError("learn_mixture: inconsistent crop patches");

    int M = 0;
    for (int a : assignment) {
        if (a < 0) throw ValidationError("learn_mixture: negative assignment");
        M = std::max(M, a + 1);
    }
    int n = static_cast<int>(crops.size());
    int K = bank.K;

    // Precompute exp activations once per crop; features are not needed after.
    std::vector<std::vector<double>> E(n);
    for (int i = 0; i < n; ++i) E[i] = exp_activations(crops[i].patch, bank);

    CompositionalMixture mix;
    mix.M = M;
    mix.patch_size = P;
    mix.K = K;
    mix.alphas.assign(M, {});
    mix.nu.assign(M, 0.0);

    std::vector<int> assign = assignment;
    auto estimate_all = [&](CompositionalMixture& target, const std::vector<int>& a,
                            const CompositionalMixture* previous) {
        for (int m = 0; m < M; ++m) {
            std::vector<const std::vector<double>*> members;
            for (int i = 0; i < n; ++i)
                if (a[i] == m) members.push_back(&E[i]);
            if (members.empty() && previous) {
                target.alphas[m] = previous->alphas[m];  // emptied component keeps parameters
            } else {
                estimate_alphas(members, K, npos, 5, target.alphas[m]);
            }
            target.nu[m] = static_cast<double>(members.size()) / n;
        }
        target.refresh_fg_masks(bank);
    };

    estimate_all(mix, assign, nullptr);

    auto objective = [&](const CompositionalMixture& mx, std::vector<int>* best_out) {
        double total = 0;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bv = masked_ll_from_exp(E[i], mx.alphas[0], mx.fg_masks[0], K);
            for (int m = 1; m < M; ++m) {
                double v = masked_ll_from_exp(E[i], mx.alphas[m], mx.fg_masks[m], K);
                if (v > bv) { bv = v; best = m; }
            }
            if (best_out) (*best_out)[i] = best;
            total += bv;
        }
        return total / n;
    };

    std::vector<int> best(n);
    double obj = objective(mix, &best);
    if (stats) stats->objective.assign(1, obj);

    for (int it = 0; it < em_iters; ++it) {
        if (best == assign) break;
        CompositionalMixture trial = mix;
        estimate_all(trial, best, &mix);
        std::vector<int> trial_best(n);
        double trial_obj = objective(trial, &trial_best);
        if (trial_obj < obj) break;  // roll back a non-improving step
        assign = best;
        mix = std::move(trial);
        obj = trial_obj;
        best = trial_best;
        if (stats) stats->objective.push_back(obj);
    }

    if (stats) stats->assignment = assign;
    mix.validate();
    return mix;
}

double masked_log_likelihood(const FeatureMap& patch, const CompositionalMixture& mixture,
                             const VmfKernelBank& bank, int m) {
    if (m < 0 || m >= mixture.M) throw ValidationError("masked_log_likelihood: bad component");
    if (patch.width != mixture.patch_size || patch.height != mixture.patch_size)
        throw ValidationError("masked_log_likelihood: patch size mismatch");
    if (patch.dim != bank.dim)
        throw ValidationError("masked_log_likelihood: dimension mismatch");
    std::vector<double> E = exp_activations(patch, bank);
    return masked_ll_from_exp(E, mixture.alphas[m], mixture.fg_masks[m], mixture.K);
}

MixtureScore mixture_score(const FeatureMap& patch, const CompositionalMixture& mixture,
                           const VmfKernelBank& bank) {
    if (patch.width != mixture.patch_size || patch.height != mixture.patch_size)
        throw ValidationError("mixture_score: patch size mismatch");
    if (patch.dim != bank.dim) throw ValidationError("mixture_score: dimension mismatch");
    std::vector<double> E = exp_activations(patch, bank);
    MixtureScore out;
    out.best_component = 0;
    out.score = masked_ll_from_exp(E, mixture.alphas[0], mixture.fg_masks[0], mixture.K);
    for (int m = 1; m < mixture.M; ++m) {
        double v = masked_ll_from_exp(E, mixture.alphas[m], mixture.fg_masks[m], mixture.K);
        if (v > out.score) {
            out.score = v;
            out.best_component = m;
        }
    }
    return out;
}

} // namespace nucleo
