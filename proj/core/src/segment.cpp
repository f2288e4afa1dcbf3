#include "nucleo/segment.hpp"

#include <algorithm>
#include <cmath>

#include "nucleo/errors.hpp"
#include "nucleo/parallel.hpp"
#include "nucleo/util.hpp"

namespace nucleo {

std::vector<double> foreground_score_map(const FeatureMap& fm, const VmfKernelBank& bank) {
    if (bank.background_index < 0)
        throw ValidationError("foreground_score_map: background kernel not selected");
    if (fm.dim != bank.dim) throw ValidationError("foreground_score_map: dimension mismatch");
    const double* mu0 = bank.kernel(bank.background_index);
    std::size_t npos = static_cast<std::size_t>(fm.height) * fm.width;
    std::vector<double> scores(npos, 0.0);
    for (std::size_t i = 0; i < npos; ++i) {
        if (!fm.valid[i]) continue;  // textureless: background
        const double* f = fm.vectors.data() + i * fm.dim;
        double dot = 0;
        for (int d = 0; d < fm.dim; ++d) dot += f[d] * mu0[d];
        scores[i] = 1.0 - dot;
    }
    return scores;
}

std::vector<PixelRegion> threshold_components(const std::vector<double>& scores, int width,
                                              int height, const ThresholdMode& mode) {
    if (scores.size() != static_cast<std::size_t>(width) * height)
        throw ValidationError("threshold_components: score buffer size mismatch");
    for (double s : scores)
        if (!std::isfinite(s)) throw ValidationError("threshold_components: non-finite score");

    double thr = mode.use_otsu ? otsu_threshold(scores) : mode.fixed_value;
    std::vector<std::uint8_t> fg(scores.size(), 0);
    if (std::isfinite(thr)) {
        for (std::size_t i = 0; i < scores.size(); ++i)
            if (scores[i] > thr) fg[i] = 1;
    }
    return connected_components(width, height, fg, 4, kMinComponentArea);
}

std::vector<Candidate> generate_candidates(const std::vector<PixelRegion>& components,
                                           double psi, double lambda) {
    std::vector<std::vector<Candidate>> per_component(components.size());
    parallel_for(components.size(), [&](std::size_t i) {
        DecomposedParts parts = decompose(components[i], psi, lambda);
        for (const PixelRegion& part : parts.parts) {
            Candidate c;
            auto [cx, cy] = part.centroid();
            c.region = part;
            c.cx = cx;
            c.cy = cy;
            c.from_infeasible = parts.infeasible;
            per_component[i].push_back(std::move(c));
        }
    });
    std::vector<Candidate> out;
    for (auto& group : per_component)
        for (auto& c : group) out.push_back(std::move(c));
    return out;
}

PriorMap candidate_prior(const std::vector<Candidate>& candidates, double variance, int height,
                         int width, double floor) {
    if (variance <= 0) throw ValidationError("candidate_prior: variance must be positive");
    PriorMap prior;
    prior.height = height;
    prior.width = width;
    prior.q.assign(static_cast<std::size_t>(height) * width, floor);
    for (const Candidate& c : candidates) {
        int px = static_cast<int>(std::lround(c.cx));
        int py = static_cast<int>(std::lround(c.cy));
        // The bump reaches the floor at r2 = 2 v ln(1/floor); beyond that the
        // max() can never win.
        double r = std::sqrt(-2.0 * variance * std::log(floor)) + 1.0;
        int x0 = std::max(0, px - static_cast<int>(r)), x1 = std::min(width - 1, px + static_cast<int>(r));
        int y0 = std::max(0, py - static_cast<int>(r)), y1 = std::min(height - 1, py + static_cast<int>(r));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                double d2 = static_cast<double>(x - px) * (x - px) +
                            static_cast<double>(y - py) * (y - py);
                double v = std::exp(-d2 / (2.0 * variance));
                std::size_t idx = static_cast<std::size_t>(y) * width + x;
                if (v > prior.q[idx]) prior.q[idx] = v;
            }
        }
    }
    return prior;
}

SegmentResult segment_image(const FeatureMap& fm, const VmfKernelBank& bank, double psi,
                            double lambda, const ThresholdMode& mode) {
    std::vector<double> scores = foreground_score_map(fm, bank);
    std::vector<PixelRegion> components =
        threshold_components(scores, fm.width, fm.height, mode);
    std::vector<Candidate> candidates = generate_candidates(components, psi, lambda);

    // Label instances in raster order of rounded centroids.
    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        long ya = std::lround(candidates[a].cy), yb = std::lround(candidates[b].cy);
        if (ya != yb) return ya < yb;
        long xa = std::lround(candidates[a].cx), xb = std::lround(candidates[b].cx);
        return xa < xb;
    });

    SegmentResult result;
    result.labels = InstanceLabelMap(fm.width, fm.height);
    std::uint32_t next = 1;
    for (std::size_t oi : order) {
        const Candidate& c = candidates[oi];
        for (auto [x, y] : c.region.pixels()) result.labels.at(x, y) = next;
        if (c.from_infeasible) result.infeasible_components++;
        ++next;
    }
    result.candidates = std::move(candidates);
    return result;
}

} // namespace nucleo
