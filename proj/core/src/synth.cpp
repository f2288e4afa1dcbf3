#include "nucleo/synth.hpp"

#include <algorithm>
#include <cmath>

#include "nucleo/errors.hpp"
#include "nucleo/rng.hpp"

namespace nucleo {

void SynthConfig::validate() const {
    if (width < 16 || height < 16) throw ValidationError("synth: image too small");
    if (count_min < 0 || count_max < count_min) throw ValidationError("synth: bad count range");
    if (long_axis_min <= 0 || long_axis_max < long_axis_min || short_axis_min <= 0 ||
        short_axis_max < short_axis_min)
        throw ValidationError("synth: axis ranges must be positive");
    if (touching_prob < 0 || touching_prob > 1)
        throw ValidationError("synth: touching probability must be in [0,1]");
    if (!(bg_mean < fg_mean))
        throw ValidationError("synth: background mean must be below nucleus mean");
}

namespace {

struct Ellipse {
    double cx, cy, a, b, theta;  // semi-axes a >= b

    // Squared normalized radial distance; <= 1 is inside.
    double norm_dist2(double x, double y) const {
        double dx = x - cx, dy = y - cy;
        double c = std::cos(theta), s = std::sin(theta);
        double u = (dx * c + dy * s) / a;
        double v = (-dx * s + dy * c) / b;
        return u * u + v * v;
    }
};

bool separated(const Ellipse& e, const std::vector<Ellipse>& placed, int skip) {
    for (std::size_t i = 0; i < placed.size(); ++i) {
        if (static_cast<int>(i) == skip) continue;
        double dx = e.cx - placed[i].cx, dy = e.cy - placed[i].cy;
        double need = 1.1 * (e.a + placed[i].a) + 2.0;
        if (dx * dx + dy * dy < need * need) return false;
    }
    return true;
}

} // namespace

SynthSample generate(const SynthConfig& config) {
    config.validate();
    Rng rng(config.seed, /*stream=*/0x53594E54);  // "SYNT"

    int W = config.width, H = config.height;
    int want = static_cast<int>(rng.uniform_int(config.count_min, config.count_max));

    std::vector<Ellipse> ellipses;
    bool warning = false;
    const int kAttempts = 10000;
    for (int inst = 0; inst < want; ++inst) {
        double la = rng.uniform(config.long_axis_min, config.long_axis_max);
        double sa = rng.uniform(config.short_axis_min, config.short_axis_max);
        if (sa > la) std::swap(la, sa);
        double theta = rng.uniform(config.orient_min, config.orient_max);
        Ellipse e{0, 0, la / 2.0, sa / 2.0, theta};

        bool touching = !ellipses.empty() && rng.next_double() < config.touching_prob;
        bool placed = false;
        if (touching) {
            int partner = static_cast<int>(rng.uniform_int(0, static_cast<int>(ellipses.size()) - 1));
            const Ellipse& p = ellipses[partner];
            e.theta = p.theta;  // shared orientation keeps the neck well formed
            for (int attempt = 0; attempt < kAttempts && !placed; ++attempt) {
                double u = rng.uniform(0.7, 0.95);
                double jitter = rng.uniform(-M_PI / 12.0, M_PI / 12.0);
                double side = rng.next_double() < 0.5 ? 1.0 : -1.0;
                double dir = p.theta + M_PI / 2.0 + jitter;
                double dist = u * (p.b + e.b);
                e.cx = p.cx + side * dist * std::cos(dir);
                e.cy = p.cy + side * dist * std::sin(dir);
                double margin = e.a + 1.0;
                if (e.cx < margin || e.cy < margin || e.cx > W - 1 - margin ||
                    e.cy > H - 1 - margin)
                    continue;
                if (!separated(e, ellipses, partner)) continue;
                placed = true;
            }
        }
        if (!placed) {
            for (int attempt = 0; attempt < kAttempts && !placed; ++attempt) {
                double margin = e.a + 1.0;
                if (2 * margin + 2 >= std::min(W, H)) break;
                e.cx = rng.uniform(margin, W - 1 - margin);
                e.cy = rng.uniform(margin, H - 1 - margin);
                if (!separated(e, ellipses, -1)) continue;
                placed = true;
            }
        }
        if (!placed) {
            warning = true;
            break;
        }
        ellipses.push_back(e);
    }

    int n = static_cast<int>(ellipses.size());
    SynthSample out;
    out.image = GrayImage(W, H, config.bg_mean);
    out.truth.masks = InstanceLabelMap(W, H);
    out.truth.placement_warning = warning;

    // Disjoint instance masks: overlap pixels go to the instance whose
    // normalized radial distance is smallest, which runs the seam through
    // the middle of the neck.
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            double best = 1.0;
            int who = -1;
            for (int i = 0; i < n; ++i) {
                double d2 = ellipses[i].norm_dist2(x, y);
                if (d2 <= 1.0 && (who < 0 || d2 < best)) {
                    best = d2;
                    who = i;
                }
            }
            if (who >= 0) out.truth.masks.at(x, y) = static_cast<std::uint32_t>(who + 1);
        }
    }

    // Low-frequency value noise over nucleus interiors.
    const int cell = 8;
    int gw = W / cell + 2, gh = H / cell + 2;
    std::vector<double> grid(static_cast<std::size_t>(gw) * gh);
    for (double& g : grid) g = rng.next_double();
    auto value_noise = [&](double x, double y) {
        double gx = x / cell, gy = y / cell;
        int x0 = static_cast<int>(gx), y0 = static_cast<int>(gy);
        double fx = gx - x0, fy = gy - y0;
        auto g = [&](int i, int j) { return grid[static_cast<std::size_t>(j) * gw + i]; };
        return (1 - fy) * ((1 - fx) * g(x0, y0) + fx * g(x0 + 1, y0)) +
               fy * ((1 - fx) * g(x0, y0 + 1) + fx * g(x0 + 1, y0 + 1));
    };

    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            double v;
            if (out.truth.masks.at(x, y) > 0) {
                v = config.fg_mean + config.texture_amplitude * (value_noise(x, y) - 0.5);
            } else {
                v = config.bg_mean;
            }
            v += config.noise_std * rng.next_normal();
            out.image.at(x, y) = std::clamp(v, 0.0, 1.0);
        }
    }

    // Ground truth records: tight boxes and isolation flags from the masks.
    out.truth.instances.resize(n);
    std::vector<int> minx(n, W), miny(n, H), maxx(n, -1), maxy(n, -1);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            std::uint32_t l = out.truth.masks.at(x, y);
            if (l == 0) continue;
            int i = static_cast<int>(l) - 1;
            minx[i] = std::min(minx[i], x);
            maxx[i] = std::max(maxx[i], x);
            miny[i] = std::min(miny[i], y);
            maxy[i] = std::max(maxy[i], y);
        }
    for (int i = 0; i < n; ++i) {
        SynthInstance& si = out.truth.instances[i];
        si.cx = ellipses[i].cx;
        si.cy = ellipses[i].cy;
        si.long_axis = 2 * ellipses[i].a;
        si.short_axis = 2 * ellipses[i].b;
        si.orientation = ellipses[i].theta;
        si.box = {minx[i], miny[i], maxx[i], maxy[i]};
        si.isolated = true;
    }
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            std::uint32_t l = out.truth.masks.at(x, y);
            if (l == 0) continue;
            for (int oy = -1; oy <= 1; ++oy)
                for (int ox = -1; ox <= 1; ++ox) {
                    int nx = x + ox, ny = y + oy;
                    if (nx < 0 || ny < 0 || nx >= W || ny >= H) continue;
                    std::uint32_t o = out.truth.masks.at(nx, ny);
                    if (o != 0 && o != l) out.truth.instances[l - 1].isolated = false;
                }
        }
    return out;
}

} // namespace nucleo
