#include "nucleo/detect.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "nucleo/errors.hpp"
#include "nucleo/filter_bank.hpp"
#include "nucleo/parallel.hpp"

namespace nucleo {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// exp(sigma * f_p . mu_k) for every position and kernel. Invalid positions
// hold zero vectors, so their entries come out as exp(0) = 1, which the
// masked likelihood treats as uninformative.
RowMajor exp_activation_matrix(const FeatureMap& fm, const VmfKernelBank& bank) {
    std::size_t npos = static_cast<std::size_t>(fm.height) * fm.width;
    Eigen::Map<const RowMajor> F(fm.vectors.data(), npos, fm.dim);
    RowMajor M(bank.K, bank.dim);
    for (int k = 0; k < bank.K; ++k)
        for (int d = 0; d < bank.dim; ++d) M(k, d) = bank.kernel(k)[d];
    RowMajor E = F * M.transpose();
    E = (bank.sigma * E.array()).exp();
    return E;
}

} // namespace

LikelihoodMap likelihood_map(const FeatureMap& fm, const CompositionalMixture& mixture,
                             const VmfKernelBank& bank) {
    int P = mixture.patch_size;
    if (fm.height < P || fm.width < P)
        throw ValidationError("likelihood_map: feature map smaller than the patch");
    if (fm.dim != bank.dim) throw ValidationError("likelihood_map: dimension mismatch");

    int H = fm.height, W = fm.width;
    int half = P / 2;
    int iH = H - P + 1, iW = W - P + 1;  // top-left corners of valid windows
    int K = mixture.K;

    RowMajor E = exp_activation_matrix(fm, bank);

    LikelihoodMap out;
    out.height = H;
    out.width = W;
    out.scores.assign(static_cast<std::size_t>(H) * W, kNegInf);
    out.components.assign(static_cast<std::size_t>(H) * W, -1);
    out.rotations.assign(static_cast<std::size_t>(H) * W, 0.0);

    // Per-component accumulation, then a sequential max-fold in component
    // order (lowest index wins ties). One GEMM per (component, patch row)
    // evaluates log sum_k alpha exp(sigma a) for a whole band of positions.
    std::vector<std::vector<double>> acc(mixture.M);
    std::vector<double> wsum(mixture.M, 0.0);
    parallel_for(static_cast<std::size_t>(mixture.M), [&](std::size_t mm) {
        int m = static_cast<int>(mm);
        const std::vector<double>& mask = mixture.fg_masks[m];
        double ws = 0;
        for (double v : mask) ws += v;
        wsum[m] = ws;
        if (ws == 0.0) return;  // component claims no foreground anywhere
        std::vector<double>& a = acc[m];
        a.assign(static_cast<std::size_t>(iH) * iW, 0.0);
        Eigen::Map<const RowMajor> alpha(mixture.alphas[m].data(),
                                         static_cast<Eigen::Index>(P) * P, K);
        Eigen::MatrixXd G(static_cast<Eigen::Index>(iH) * W, P);  // col-major: ox contiguous
        for (int oy = 0; oy < P; ++oy) {
            // G((r-oy)*W + x, ox) = sum_k alpha[(oy,ox),k] E[r*W + x, k]
            G.noalias() = E.middleRows(static_cast<Eigen::Index>(oy) * W,
                                       static_cast<Eigen::Index>(iH) * W) *
                          alpha.middleRows(static_cast<Eigen::Index>(oy) * P, P).transpose();
            G = G.array().log();
            for (int ox = 0; ox < P; ++ox) {
                double mw = mask[oy * P + ox];
                if (mw == 0.0) continue;
                const double* gcol = G.data() + static_cast<std::size_t>(ox) * iH * W;
                for (int cy = 0; cy < iH; ++cy) {
                    Eigen::Map<Eigen::ArrayXd> acc_row(
                        a.data() + static_cast<std::size_t>(cy) * iW, iW);
                    Eigen::Map<const Eigen::ArrayXd> seg(
                        gcol + static_cast<std::size_t>(cy) * W + ox, iW);
                    acc_row += mw * seg;
                }
            }
        }
    });

    for (int m = 0; m < mixture.M; ++m) {
        if (wsum[m] == 0.0) continue;
        double inv = 1.0 / wsum[m];
        for (int cy = 0; cy < iH; ++cy) {
            for (int cx = 0; cx < iW; ++cx) {
                double s = acc[m][static_cast<std::size_t>(cy) * iW + cx] * inv;
                std::size_t idx = static_cast<std::size_t>(cy + half) * W + (cx + half);
                if (s > out.scores[idx]) {
                    out.scores[idx] = s;
                    out.components[idx] = m;
                }
            }
        }
    }
    return out;
}

void apply_prior(LikelihoodMap& lmap, const PriorMap& prior) {
    if (lmap.height != prior.height || lmap.width != prior.width)
        throw ValidationError("apply_prior: shape mismatch");
    for (std::size_t i = 0; i < lmap.scores.size(); ++i) {
        if (lmap.scores[i] == kNegInf) continue;
        lmap.scores[i] += std::log(prior.q[i]);
    }
}

LikelihoodMap combined_likelihood_map(const GrayImage& image, const FilterBank& filters,
                                      const VmfKernelBank& bank,
                                      const CompositionalMixture& mixture,
                                      const std::vector<double>& rotations) {
    std::vector<double> rset{0.0};
    for (double r : rotations) {
        bool dup = false;
        for (double e : rset)
            if (e == r) { dup = true; break; }
        if (!dup) rset.push_back(r);
    }

    LikelihoodMap combined;
    combined.height = image.height;
    combined.width = image.width;
    std::size_t npix = static_cast<std::size_t>(image.height) * image.width;
    combined.scores.assign(npix, kNegInf);
    combined.components.assign(npix, -1);
    combined.rotations.assign(npix, 0.0);

    double cx = 0.5 * (image.width - 1);
    double cy = 0.5 * (image.height - 1);

    for (double r : rset) {
        GrayImage rotated = rotate_image(image, r);
        FeatureMap fm = convolve_extract(rotated, filters);
        LikelihoodMap lm = likelihood_map(fm, mixture, bank);

        double rad = r * M_PI / 180.0;
        double c = std::cos(rad), s = std::sin(rad);
        for (int y = 0; y < image.height; ++y) {
            for (int x = 0; x < image.width; ++x) {
                // Position of this source pixel inside the rotated frame.
                double dx = x - cx, dy = y - cy;
                int u = static_cast<int>(std::lround(cx + c * dx - s * dy));
                int v = static_cast<int>(std::lround(cy + s * dx + c * dy));
                if (u < 0 || v < 0 || u >= image.width || v >= image.height) continue;
                std::size_t src = static_cast<std::size_t>(v) * image.width + u;
                std::size_t dst = static_cast<std::size_t>(y) * image.width + x;
                if (lm.scores[src] > combined.scores[dst]) {
                    combined.scores[dst] = lm.scores[src];
                    combined.components[dst] = lm.components[src];
                    combined.rotations[dst] = r;
                }
            }
        }
    }
    return combined;
}

DetectionSet extract_detections(const LikelihoodMap& map, double score_threshold,
                                double nms_radius) {
    std::vector<Detection> peaks;
    int H = map.height, W = map.width;
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            double s = map.score_at(x, y);
            if (!(s >= score_threshold) || s == kNegInf) continue;
            bool is_peak = true;
            for (int oy = -2; oy <= 2 && is_peak; ++oy) {
                for (int ox = -2; ox <= 2; ++ox) {
                    if (ox == 0 && oy == 0) continue;
                    int nx = x + ox, ny = y + oy;
                    if (nx < 0 || ny < 0 || nx >= W || ny >= H) continue;
                    if (map.score_at(nx, ny) >= s) { is_peak = false; break; }
                }
            }
            if (!is_peak) continue;
            Detection d;
            d.x = x;
            d.y = y;
            d.score = s;
            d.component = map.components[static_cast<std::size_t>(y) * W + x];
            d.rotation = map.rotations[static_cast<std::size_t>(y) * W + x];
            peaks.push_back(d);
        }
    }

    std::stable_sort(peaks.begin(), peaks.end(), [](const Detection& a, const Detection& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });

    DetectionSet out;
    out.threshold = score_threshold;
    double r2 = nms_radius * nms_radius;
    for (const Detection& d : peaks) {
        bool keep = true;
        for (const Detection& acc : out.detections) {
            double dx = d.x - acc.x, dy = d.y - acc.y;
            if (dx * dx + dy * dy < r2) { keep = false; break; }
        }
        if (keep) out.detections.push_back(d);
    }
    return out;
}

DetectionSet detect(const GrayImage& image, const FilterBank& filters,
                    const VmfKernelBank& bank, const CompositionalMixture& mixture,
                    const PriorMap* prior, const DetectOptions& opts) {
    if (filters.num_filters != bank.dim)
        throw ValidationError("detect: filter bank and kernel bank dimensions differ");
    LikelihoodMap map = combined_likelihood_map(image, filters, bank, mixture, opts.rotations);
    if (prior) apply_prior(map, *prior);
    return extract_detections(map, opts.score_threshold, opts.nms_radius);
}

std::string detections_to_table(const DetectionSet& set) {
    std::string out = "x y score component rotation\n";
    char line[128];
    for (const Detection& d : set.detections) {
        std::snprintf(line, sizeof(line), "%d %d %.6f %d %.1f\n", d.x, d.y, d.score, d.component,
                      d.rotation);
        out += line;
    }
    return out;
}

DetectionSet detections_from_table(const std::string& text) {
    DetectionSet out;
    std::istringstream in(text);
    std::string header;
    if (!std::getline(in, header) || header.rfind("x y score", 0) != 0)
        throw ValidationError("detection table: missing header line");
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Detection d;
        if (std::sscanf(line.c_str(), "%d %d %lf %d %lf", &d.x, &d.y, &d.score, &d.component,
                        &d.rotation) != 5)
            throw ValidationError("detection table: malformed record: " + line);
        out.detections.push_back(d);
    }
    return out;
}

} // namespace nucleo
