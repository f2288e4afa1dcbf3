#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace oracle {

using namespace nucleo;

FeatureMap direct_convolve(const GrayImage& image, const FilterBank& bank) {
    int h = image.height, w = image.width, d = bank.num_filters;
    int ks = bank.kernel_size, half = ks / 2;
    FeatureMap fm(h, w, d);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::vector<double> resp(d);
            double norm2 = 0;
            for (int k = 0; k < d; ++k) {
                double acc = bank.bias[k];
                for (int u = 0; u < ks; ++u)
                    for (int v = 0; v < ks; ++v) {
                        int sy = GrayImage::reflect(y + u - half, h);
                        int sx = GrayImage::reflect(x + v - half, w);
                        acc += bank.filter(k)[u * ks + v] * image.at(sx, sy);
                    }
                resp[k] = acc > 0 ? acc : 0;
                norm2 += resp[k] * resp[k];
            }
            double norm = std::sqrt(norm2);
            if (norm >= kFeatureNormEpsilon) {
                fm.valid[static_cast<std::size_t>(y) * w + x] = 1;
                for (int k = 0; k < d; ++k) fm.vec(x, y)[k] = resp[k] / norm;
            }
        }
    }
    return fm;
}

double direct_response(const GrayImage& image, const FilterBank& bank, int k, int x, int y) {
    int ks = bank.kernel_size, half = ks / 2;
    double acc = bank.bias[k];
    for (int u = 0; u < ks; ++u)
        for (int v = 0; v < ks; ++v) {
            int sy = GrayImage::reflect(y + u - half, image.height);
            int sx = GrayImage::reflect(x + v - half, image.width);
            acc += bank.filter(k)[u * ks + v] * image.at(sx, sy);
        }
    return acc;
}

std::vector<int> brute_force_assignment(const std::vector<std::vector<double>>& cost) {
    int n = static_cast<int>(cost.size());
    std::vector<int> perm(n), best;
    std::iota(perm.begin(), perm.end(), 0);
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double c = 0;
        for (int i = 0; i < n; ++i) c += cost[i][perm[i]];
        if (c < best_cost) {
            best_cost = c;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

namespace {

double gamma_sample(double shape, Rng& rng) {
    // Marsaglia-Tsang; shape >= 1 here.
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = rng.next_normal();
        double v = 1.0 + c * x;
        if (v <= 0) continue;
        v = v * v * v;
        double u = rng.next_double();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (u > 0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double beta_sample(double a, double b, Rng& rng) {
    double ga = gamma_sample(a, rng);
    double gb = gamma_sample(b, rng);
    return ga / (ga + gb);
}

} // namespace

std::vector<double> sample_vmf(const std::vector<double>& mu, double kappa, Rng& rng) {
    int dim = static_cast<int>(mu.size());
    double dm1 = dim - 1;
    double b = (-2.0 * kappa + std::sqrt(4.0 * kappa * kappa + dm1 * dm1)) / dm1;
    double x0 = (1.0 - b) / (1.0 + b);
    double c = kappa * x0 + dm1 * std::log(1.0 - x0 * x0);

    double w = 0;
    for (;;) {
        double z = beta_sample(dm1 / 2.0, dm1 / 2.0, rng);
        double u = rng.next_double();
        w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
        if (kappa * w + dm1 * std::log(1.0 - x0 * w) - c >= std::log(std::max(u, 1e-300))) break;
    }

    // Uniform direction orthogonal to mu.
    std::vector<double> v(dim);
    for (;;) {
        double dot = 0, n2 = 0;
        for (int i = 0; i < dim; ++i) v[i] = rng.next_normal();
        for (int i = 0; i < dim; ++i) dot += v[i] * mu[i];
        for (int i = 0; i < dim; ++i) v[i] -= dot * mu[i];
        for (int i = 0; i < dim; ++i) n2 += v[i] * v[i];
        if (n2 > 1e-12) {
            double inv = 1.0 / std::sqrt(n2);
            for (int i = 0; i < dim; ++i) v[i] *= inv;
            break;
        }
    }

    std::vector<double> x(dim);
    double s = std::sqrt(std::max(0.0, 1.0 - w * w));
    for (int i = 0; i < dim; ++i) x[i] = w * mu[i] + s * v[i];
    double n2 = 0;
    for (double xv : x) n2 += xv * xv;
    double inv = 1.0 / std::sqrt(n2);
    for (double& xv : x) xv *= inv;
    return x;
}

std::vector<int> reference_kmeans_2d(const std::vector<std::pair<double, double>>& pts, int k,
                                     std::uint64_t seed) {
    int n = static_cast<int>(pts.size());
    auto d2 = [&](const std::pair<double, double>& a, const std::pair<double, double>& b) {
        double dx = a.first - b.first, dy = a.second - b.second;
        return dx * dx + dy * dy;
    };
    Rng rng(seed, 0x43524F50);  // same stream tag as the library
    std::vector<std::pair<double, double>> centers;
    centers.push_back(pts[rng.uniform_int(0, n - 1)]);
    std::vector<double> dist(n);
    for (int i = 0; i < n; ++i) dist[i] = d2(pts[i], centers[0]);
    while (static_cast<int>(centers.size()) < k) {
        double total = std::accumulate(dist.begin(), dist.end(), 0.0);
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
            for (int m = 1; m < k; ++m) {
                double dd = d2(pts[i], centers[m]);
                if (dd < bd) { bd = dd; best = m; }
            }
            if (assign[i] != best) { assign[i] = best; changed = true; }
        }
        if (!changed) break;
        std::vector<double> sx(k, 0), sy(k, 0);
        std::vector<int> cnt(k, 0);
        for (int i = 0; i < n; ++i) {
            sx[assign[i]] += pts[i].first;
            sy[assign[i]] += pts[i].second;
            cnt[assign[i]]++;
        }
        for (int m = 0; m < k; ++m)
            if (cnt[m] > 0) centers[m] = {sx[m] / cnt[m], sy[m] / cnt[m]};
    }
    return assign;
}

double direct_masked_ll(const FeatureMap& patch, const std::vector<double>& alphas,
                        const std::vector<double>& fg_mask, const VmfKernelBank& bank) {
    std::size_t npos = static_cast<std::size_t>(patch.height) * patch.width;
    double num = 0, den = 0;
    for (std::size_t i = 0; i < npos; ++i) {
        double w = fg_mask[i];
        if (w == 0.0) continue;
        double inner = 0;
        for (int k = 0; k < bank.K; ++k) {
            double dot = 0;
            if (patch.valid[i])
                for (int d = 0; d < bank.dim; ++d)
                    dot += patch.vectors[i * bank.dim + d] * bank.kernel(k)[d];
            inner += alphas[i * bank.K + k] * std::exp(bank.sigma * dot);
        }
        num += w * std::log(inner);
        den += w;
    }
    if (den == 0) return -std::numeric_limits<double>::infinity();
    return num / den;
}

CutSelection exhaustive_cut_selection(const CutSelectionProblem& problem) {
    int n = problem.num_cuts;
    int m = problem.num_mutex;
    CutSelection out;
    double best_cost = std::numeric_limits<double>::infinity();
    std::uint64_t best_mask = 0;
    bool found = false;

    auto lex_smaller = [&](std::uint64_t a, std::uint64_t b) {
        for (int i = 0; i < n; ++i) {
            bool ba = a & (1ULL << i), bb = b & (1ULL << i);
            if (ba != bb) return !ba;
        }
        return false;
    };

    for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
        bool ok = true;
        for (int j = 0; j < m && ok; ++j) {
            bool covered = false;
            for (int i = 0; i < n; ++i)
                if ((mask & (1ULL << i)) && problem.A[i][j]) { covered = true; break; }
            if (!covered) ok = false;
        }
        for (int i = 0; i < n && ok; ++i)
            for (int j = 0; j < n && ok; ++j)
                if (i != j && (mask & (1ULL << i)) && (mask & (1ULL << j)) && problem.B[i][j])
                    ok = false;
        if (!ok) continue;
        double cost = 0;
        for (int i = 0; i < n; ++i)
            if (mask & (1ULL << i)) cost += problem.weights[i];
        if (!found || cost < best_cost || (cost == best_cost && lex_smaller(mask, best_mask))) {
            found = true;
            best_cost = cost;
            best_mask = mask;
        }
    }
    out.feasible = found;
    if (found) {
        out.cost = best_cost;
        out.selected.assign(n, 0);
        for (int i = 0; i < n; ++i)
            if (best_mask & (1ULL << i)) out.selected[i] = 1;
    }
    return out;
}

double brute_force_pair_concavity(const BoundaryPolygon& poly, const PixelRegion& region,
                                  int v1, int v2) {
    if (v1 == v2) return 0.0;
    int n = poly.size();
    auto [ax, ay] = poly.vertices[v1];
    auto [bx, by] = poly.vertices[v2];

    // Chord exit test by dense sampling at 0.1px, skipping the 0.75px
    // endpoint neighborhoods (same convention as the library).
    double len = std::hypot(static_cast<double>(bx - ax), static_cast<double>(by - ay));
    int steps = std::max(2, static_cast<int>(std::ceil(len / 0.1)));
    bool exits = false;
    for (int s = 1; s < steps && !exits; ++s) {
        double t = static_cast<double>(s) / steps;
        if (t * len < 0.75 || (1.0 - t) * len < 0.75) continue;
        double x = ax + t * (bx - ax), y = ay + t * (by - ay);
        if (!region.contains(static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y))))
            exits = true;
    }
    if (!exits) return 0.0;

    int fwd = (v2 - v1 + n) % n;
    int bwd = n - fwd;
    int arc_len = std::min(fwd, bwd);
    int step = (fwd <= bwd) ? 1 : -1;
    double best = 0;
    for (int s = 1; s < arc_len; ++s) {
        int idx = ((v1 + step * s) % n + n) % n;
        auto [ux, uy] = poly.vertices[idx];
        double abx = bx - ax, aby = by - ay;
        double l2 = abx * abx + aby * aby;
        double t = l2 > 0 ? std::clamp(((ux - ax) * abx + (uy - ay) * aby) / l2, 0.0, 1.0) : 0.0;
        double dx = ux - (ax + t * abx), dy = uy - (ay + t * aby);
        best = std::max(best, std::hypot(dx, dy));
    }
    return best;
}

double brute_force_region_concavity(const PixelRegion& region) {
    BoundaryPolygon poly = trace_boundary(region);
    int n = poly.size();
    if (n < 3) return 0.0;
    double best = 0;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            best = std::max(best, brute_force_pair_concavity(poly, region, a, b));
    return best;
}

bool segments_properly_intersect(std::pair<int, int> p1, std::pair<int, int> q1,
                                 std::pair<int, int> p2, std::pair<int, int> q2) {
    // Parametric solve in doubles; inputs are small integer coordinates.
    double x1 = p1.first, y1 = p1.second, x2 = q1.first, y2 = q1.second;
    double x3 = p2.first, y3 = p2.second, x4 = q2.first, y4 = q2.second;
    double den = (x2 - x1) * (y4 - y3) - (y2 - y1) * (x4 - x3);
    if (std::abs(den) < 1e-12) {
        // Parallel; collinear interior overlap check by projection.
        double cross = (x3 - x1) * (y2 - y1) - (y3 - y1) * (x2 - x1);
        if (std::abs(cross) > 1e-9) return false;
        auto lo1 = std::min(p1, q1), hi1 = std::max(p1, q1);
        auto lo2 = std::min(p2, q2), hi2 = std::max(p2, q2);
        return lo1 < hi2 && lo2 < hi1;
    }
    double t = ((x3 - x1) * (y4 - y3) - (y3 - y1) * (x4 - x3)) / den;
    double u = ((x3 - x1) * (y2 - y1) - (y3 - y1) * (x2 - x1)) / den;
    const double eps = 1e-12;
    return t > eps && t < 1 - eps && u > eps && u < 1 - eps;
}

double independent_cut_weight(const BoundaryPolygon& poly, const PixelRegion& shape, int p,
                              int q, double lambda) {
    int n = poly.size();
    auto smoothed = smooth_contour(poly, 7);
    // Tangent and candidate normals at one vertex; inward sign decided by a
    // global vote, mirroring the library's rule with separate code.
    auto tangent = [&](int i) {
        auto [px_, py_] = smoothed[((i - 1) % n + n) % n];
        auto [nx_, ny_] = smoothed[(i + 1) % n];
        double tx = nx_ - px_, ty = ny_ - py_;
        double l = std::hypot(tx, ty);
        if (l < 1e-12) return std::pair<double, double>{1.0, 0.0};
        return std::pair<double, double>{tx / l, ty / l};
    };
    long votes = 0;
    for (int i = 0; i < n; ++i) {
        auto [tx, ty] = tangent(i);
        int lx = static_cast<int>(std::lround(poly.vertices[i].first - 1.5 * ty));
        int ly = static_cast<int>(std::lround(poly.vertices[i].second + 1.5 * tx));
        int rx = static_cast<int>(std::lround(poly.vertices[i].first + 1.5 * ty));
        int ry = static_cast<int>(std::lround(poly.vertices[i].second - 1.5 * tx));
        bool li = shape.contains(lx, ly), ri = shape.contains(rx, ry);
        if (li && !ri) ++votes;
        if (ri && !li) --votes;
    }
    double sign = votes >= 0 ? 1.0 : -1.0;
    auto normal = [&](int i) {
        auto [tx, ty] = tangent(i);
        return std::pair<double, double>{-sign * ty, sign * tx};
    };
    auto angle = [](std::pair<double, double> a, std::pair<double, double> b) {
        double dot = a.first * b.first + a.second * b.second;
        double cross = a.first * b.second - a.second * b.first;
        return std::atan2(std::abs(cross), dot) * 180.0 / M_PI;
    };
    auto [px_, py_] = poly.vertices[p];
    auto [qx_, qy_] = poly.vertices[q];
    std::pair<double, double> pq{static_cast<double>(qx_ - px_), static_cast<double>(qy_ - py_)};
    std::pair<double, double> qp{-pq.first, -pq.second};
    double len = std::hypot(pq.first, pq.second);
    return std::exp(angle(normal(p), pq)) + std::exp(angle(normal(q), qp)) +
           std::exp(lambda * len);
}

PixelRegion make_ellipse_region(double a, double b, double theta_rad, int canvas) {
    int size = canvas > 0 ? canvas : static_cast<int>(std::ceil(2 * std::max(a, b))) + 5;
    double c = (size - 1) / 2.0;
    std::vector<std::uint8_t> fg(static_cast<std::size_t>(size) * size, 0);
    double ct = std::cos(theta_rad), st = std::sin(theta_rad);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            double dx = x - c, dy = y - c;
            double u = (dx * ct + dy * st) / a;
            double v = (-dx * st + dy * ct) / b;
            if (u * u + v * v <= 1.0) fg[static_cast<std::size_t>(y) * size + x] = 1;
        }
    auto comps = connected_components(size, size, fg, 4, 0);
    return comps.at(0);
}

PixelRegion make_disk_union(const std::vector<std::array<double, 3>>& disks) {
    double maxx = 0, maxy = 0;
    for (const auto& d : disks) {
        maxx = std::max(maxx, d[0] + d[2]);
        maxy = std::max(maxy, d[1] + d[2]);
    }
    int w = static_cast<int>(std::ceil(maxx)) + 3, h = static_cast<int>(std::ceil(maxy)) + 3;
    std::vector<std::uint8_t> fg(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (const auto& d : disks) {
                double dx = x - d[0], dy = y - d[1];
                if (dx * dx + dy * dy <= d[2] * d[2]) {
                    fg[static_cast<std::size_t>(y) * w + x] = 1;
                    break;
                }
            }
    auto comps = connected_components(w, h, fg, 4, 0);
    return comps.at(0);
}

PixelRegion make_ellipse_union(const std::vector<std::array<double, 5>>& es) {
    double maxx = 0, maxy = 0;
    for (const auto& e : es) {
        maxx = std::max(maxx, e[0] + std::max(e[2], e[3]));
        maxy = std::max(maxy, e[1] + std::max(e[2], e[3]));
    }
    int w = static_cast<int>(std::ceil(maxx)) + 3, h = static_cast<int>(std::ceil(maxy)) + 3;
    std::vector<std::uint8_t> fg(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (const auto& e : es) {
                double dx = x - e[0], dy = y - e[1];
                double ct = std::cos(e[4]), st = std::sin(e[4]);
                double u = (dx * ct + dy * st) / e[2];
                double v = (-dx * st + dy * ct) / e[3];
                if (u * u + v * v <= 1.0) {
                    fg[static_cast<std::size_t>(y) * w + x] = 1;
                    break;
                }
            }
    auto comps = connected_components(w, h, fg, 4, 0);
    // Keep the largest component (ellipses are expected to overlap).
    std::size_t best = 0;
    for (std::size_t i = 1; i < comps.size(); ++i)
        if (comps[i].area() > comps[best].area()) best = i;
    return comps.at(best);
}

} // namespace oracle
