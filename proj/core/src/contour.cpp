#include "nucleo/decompose.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>

#include "nucleo/errors.hpp"

namespace nucleo {

double BoundaryPolygon::signed_area() const {
    double a = 0;
    int n = size();
    for (int i = 0; i < n; ++i) {
        auto [x0, y0] = vertices[i];
        auto [x1, y1] = vertices[(i + 1) % n];
        a += static_cast<double>(x0) * y1 - static_cast<double>(x1) * y0;
    }
    return 0.5 * a;
}

BoundaryPolygon trace_boundary(const PixelRegion& component) {
    if (component.area() == 0) throw ValidationError("trace_boundary: empty component");
    PixelRegion filled = fill_holes(component);

    // Lexicographically smallest boundary pixel: smallest y, then x. The first
    // foreground pixel in raster order is always on the boundary.
    int sx = -1, sy = -1;
    for (int y = 0; y < filled.height && sx < 0; ++y)
        for (int x = 0; x < filled.width; ++x)
            if (filled.mask[static_cast<std::size_t>(y) * filled.width + x]) {
                sx = filled.x0 + x;
                sy = filled.y0 + y;
                break;
            }

    BoundaryPolygon poly;
    if (filled.area() == 1) {
        poly.vertices.emplace_back(sx, sy);
        poly.trivially_convex = true;
        return poly;
    }

    // Moore neighborhood, clockwise in (x right, y down) screen order.
    static const int mx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
    static const int my[8] = {0, 1, 1, 1, 0, -1, -1, -1};
    auto dir_index = [](int dx, int dy) {
        for (int d = 0; d < 8; ++d)
            if (mx[d] == dx && my[d] == dy) return d;
        return -1;
    };
    auto inside = [&](int x, int y) { return filled.contains(x, y); };

    // Moore tracing: clockwise scans of the neighborhood starting from the
    // backtrack (last background pixel). Terminates on re-entering the start
    // pixel with the same outgoing move as the first step.
    std::vector<std::pair<int, int>> contour;
    int cx = sx, cy = sy;
    int bx = sx - 1, by = sy;  // west of the raster-first pixel is background
    int ftx = INT_MIN, fty = INT_MIN;  // target of the first move out of s
    contour.emplace_back(cx, cy);
    for (long guard = 0; guard < 8L * filled.width * filled.height + 64; ++guard) {
        int bdir = dir_index(bx - cx, by - cy);
        int found = -1, prevx = bx, prevy = by;
        for (int t = 1; t <= 8; ++t) {
            int dir = (bdir + t) % 8;
            int nx = cx + mx[dir], ny = cy + my[dir];
            if (inside(nx, ny)) { found = dir; break; }
            prevx = nx;
            prevy = ny;
        }
        if (found < 0) break;  // single isolated pixel; handled above
        int nx = cx + mx[found], ny = cy + my[found];
        if (cx == sx && cy == sy) {
            if (ftx == INT_MIN) {
                ftx = nx;
                fty = ny;
            } else if (nx == ftx && ny == fty) {
                break;  // loop closed
            }
        }
        bx = prevx;
        by = prevy;
        cx = nx;
        cy = ny;
        contour.emplace_back(cx, cy);
    }
    // Collapse consecutive duplicates and a possibly repeated closing vertex.
    while (contour.size() > 1 && contour.back() == contour.front()) contour.pop_back();
    std::vector<std::pair<int, int>> dedup;
    for (auto& v : contour)
        if (dedup.empty() || dedup.back() != v) dedup.push_back(v);

    poly.vertices = std::move(dedup);
    if (poly.size() < 3) {
        poly.trivially_convex = true;
        return poly;
    }
    if (poly.signed_area() < 0) {
        std::reverse(poly.vertices.begin() + 1, poly.vertices.end());
    }
    return poly;
}

std::vector<std::pair<double, double>> smooth_contour(const BoundaryPolygon& poly, int window) {
    int n = poly.size();
    int half = window / 2;
    std::vector<std::pair<double, double>> out(n);
    for (int i = 0; i < n; ++i) {
        double sx = 0, sy = 0;
        for (int o = -half; o <= half; ++o) {
            auto [x, y] = poly.vertices[((i + o) % n + n) % n];
            sx += x;
            sy += y;
        }
        out[i] = {sx / window, sy / window};
    }
    return out;
}

std::vector<double> boundary_curvature(const BoundaryPolygon& poly, int smooth_window) {
    if (smooth_window < 1 || smooth_window % 2 == 0)
        throw ValidationError("boundary_curvature: window must be odd and positive");
    int n = poly.size();
    const double kConvexSentinel = std::numeric_limits<double>::infinity();
    if (n < smooth_window || n < 7)
        return std::vector<double>(std::max(n, 0), kConvexSentinel);

    auto smoothed = smooth_contour(poly, smooth_window);
    std::vector<double> curv(n, 0.0);
    const int stencil = 3;
    for (int i = 0; i < n; ++i) {
        auto [bx, by] = smoothed[((i - stencil) % n + n) % n];
        auto [cx, cy] = smoothed[i];
        auto [fx, fy] = smoothed[(i + stencil) % n];
        double t1x = cx - bx, t1y = cy - by;
        double t2x = fx - cx, t2y = fy - cy;
        double l1 = std::hypot(t1x, t1y), l2 = std::hypot(t2x, t2y);
        if (l1 < 1e-12 || l2 < 1e-12) {
            curv[i] = 0.0;
            continue;
        }
        double cross = t1x * t2y - t1y * t2x;
        double dot = t1x * t2x + t1y * t2y;
        double turn = std::atan2(cross, dot);
        // CCW orientation here has positive shoelace area in y-down pixel
        // coordinates, where interior-left turning gives positive cross.
        curv[i] = turn / (0.5 * (l1 + l2));
    }
    return curv;
}

std::vector<int> concave_points(const std::vector<double>& curvatures, double kappa_min) {
    int n = static_cast<int>(curvatures.size());
    std::vector<int> out;
    if (n == 0) return out;

    // Runs of negative curvature, circular. Start scanning from a non-negative
    // vertex so a run is never split across the seam.
    int start = -1;
    for (int i = 0; i < n; ++i)
        if (!(curvatures[i] < 0)) { start = i; break; }
    if (start < 0) {
        // Entire contour negative: one run, one representative.
        int best = 0;
        for (int i = 1; i < n; ++i)
            if (curvatures[i] < curvatures[best]) best = i;
        if (curvatures[best] < -kappa_min) out.push_back(best);
        return out;
    }

    int i = 0;
    while (i < n) {
        int idx = (start + i) % n;
        if (curvatures[idx] < 0) {
            int best = idx;
            while (i < n && curvatures[(start + i) % n] < 0) {
                int j = (start + i) % n;
                if (curvatures[j] < curvatures[best]) best = j;
                ++i;
            }
            if (curvatures[best] < -kappa_min) out.push_back(best);
        } else {
            ++i;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

double point_segment_distance(double px, double py, double ax, double ay, double bx, double by) {
    double abx = bx - ax, aby = by - ay;
    double apx = px - ax, apy = py - ay;
    double len2 = abx * abx + aby * aby;
    if (len2 < 1e-24) return std::hypot(apx, apy);
    double t = std::clamp((apx * abx + apy * aby) / len2, 0.0, 1.0);
    return std::hypot(px - (ax + t * abx), py - (ay + t * aby));
}

} // namespace

// Shared by pair_concavity and cut enumeration: does the open chord stay
// inside the shape? Sampled at 0.25px; a point belongs to the shape when its
// nearest pixel center is a member. Samples within 0.75px of an endpoint are
// skipped: the endpoints sit on boundary pixels, where rounding can land
// just outside without any real pocket.
static bool chord_inside(const PixelRegion& shape, double ax, double ay, double bx, double by) {
    double len = std::hypot(bx - ax, by - ay);
    int steps = std::max(1, static_cast<int>(std::ceil(len / 0.25)));
    for (int s = 1; s < steps; ++s) {
        double t = static_cast<double>(s) / steps;
        if (t * len < 0.75 || (1.0 - t) * len < 0.75) continue;
        double x = ax + t * (bx - ax);
        double y = ay + t * (by - ay);
        if (!shape.contains(static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y))))
            return false;
    }
    return true;
}

bool chord_inside_shape(const PixelRegion& shape, double ax, double ay, double bx, double by);
bool chord_inside_shape(const PixelRegion& shape, double ax, double ay, double bx, double by) {
    return chord_inside(shape, ax, ay, bx, by);
}

double pair_concavity(const BoundaryPolygon& poly, const PixelRegion& shape, int v1, int v2) {
    int n = poly.size();
    if (v1 < 0 || v2 < 0 || v1 >= n || v2 >= n)
        throw ValidationError("pair_concavity: vertex index out of range");
    if (v1 == v2) return 0.0;

    auto [ax, ay] = poly.vertices[v1];
    auto [bx, by] = poly.vertices[v2];
    if (chord_inside(shape, ax, ay, bx, by)) return 0.0;

    // Walk the shorter arc (forward vs backward in index space).
    int fwd = (v2 - v1 + n) % n;
    int bwd = n - fwd;
    int len = std::min(fwd, bwd);
    int step = (fwd <= bwd) ? 1 : -1;
    double best = 0.0;
    for (int s = 1; s < len; ++s) {
        int idx = ((v1 + step * s) % n + n) % n;
        auto [ux, uy] = poly.vertices[idx];
        best = std::max(best, point_segment_distance(ux, uy, ax, ay, bx, by));
    }
    return best;
}

} // namespace nucleo
