#include "nucleo/decompose.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <map>

#include "nucleo/errors.hpp"

namespace nucleo {

bool chord_inside_shape(const PixelRegion& shape, double ax, double ay, double bx, double by);

namespace {

// Exact orientation sign of (b - a) x (c - a) on integer pixel coordinates.
long long orient(std::pair<int, int> a, std::pair<int, int> b, std::pair<int, int> c) {
    long long abx = b.first - a.first, aby = b.second - a.second;
    long long acx = c.first - a.first, acy = c.second - a.second;
    return abx * acy - aby * acx;
}

bool collinear_interiors_overlap(std::pair<int, int> p1, std::pair<int, int> q1,
                                 std::pair<int, int> p2, std::pair<int, int> q2) {
    auto lo1 = std::min(p1, q1), hi1 = std::max(p1, q1);
    auto lo2 = std::min(p2, q2), hi2 = std::max(p2, q2);
    return lo1 < hi2 && lo2 < hi1;
}

// Open segments properly intersect: interiors cross, or collinear overlap.
bool cuts_intersect(std::pair<int, int> p1, std::pair<int, int> q1, std::pair<int, int> p2,
                    std::pair<int, int> q2) {
    long long d1 = orient(p2, q2, p1);
    long long d2 = orient(p2, q2, q1);
    long long d3 = orient(p1, q1, p2);
    long long d4 = orient(p1, q1, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    if (d1 == 0 && d2 == 0 && d3 == 0 && d4 == 0)
        return collinear_interiors_overlap(p1, q1, p2, q2);
    return false;
}

// Inward unit normals of the smoothed contour. The rotation sign is decided
// globally by probing which side of the tangent lands inside the shape.
std::vector<std::pair<double, double>> inward_normals(const BoundaryPolygon& poly,
                                                      const PixelRegion& shape, int window) {
    int n = poly.size();
    auto smoothed = smooth_contour(poly, window);
    std::vector<std::pair<double, double>> tangents(n);
    for (int i = 0; i < n; ++i) {
        auto [px, py] = smoothed[((i - 1) % n + n) % n];
        auto [nx, ny] = smoothed[(i + 1) % n];
        double tx = nx - px, ty = ny - py;
        double len = std::hypot(tx, ty);
        if (len < 1e-12) {
            tangents[i] = {1.0, 0.0};
        } else {
            tangents[i] = {tx / len, ty / len};
        }
    }
    long votes = 0;
    for (int i = 0; i < n; ++i) {
        auto [tx, ty] = tangents[i];
        double cx = poly.vertices[i].first - 1.5 * ty;
        double cy = poly.vertices[i].second + 1.5 * tx;
        bool left_in = shape.contains(static_cast<int>(std::lround(cx)),
                                      static_cast<int>(std::lround(cy)));
        double dx = poly.vertices[i].first + 1.5 * ty;
        double dy = poly.vertices[i].second - 1.5 * tx;
        bool right_in = shape.contains(static_cast<int>(std::lround(dx)),
                                       static_cast<int>(std::lround(dy)));
        if (left_in && !right_in) ++votes;
        if (right_in && !left_in) --votes;
    }
    double sign = votes >= 0 ? 1.0 : -1.0;
    std::vector<std::pair<double, double>> normals(n);
    for (int i = 0; i < n; ++i) {
        auto [tx, ty] = tangents[i];
        normals[i] = {-sign * ty, sign * tx};
    }
    return normals;
}

double angle_deg(double ax, double ay, double bx, double by) {
    double dot = ax * bx + ay * by;
    double cross = ax * by - ay * bx;
    return std::atan2(std::abs(cross), dot) * 180.0 / M_PI;
}

} // namespace

double cut_weight(const BoundaryPolygon& poly, const PixelRegion& shape, int p, int q,
                  double lambda) {
    int n = poly.size();
    if (p < 0 || q < 0 || p >= n || q >= n)
        throw ValidationError("cut_weight: vertex index out of range");
    auto [px, py] = poly.vertices[p];
    auto [qx, qy] = poly.vertices[q];
    double dx = qx - px, dy = qy - py;
    double len = std::hypot(dx, dy);
    if (len < 1e-12) throw ValidationError("cut_weight: zero-length cut");

    auto normals = inward_normals(poly, shape, 7);
    double a1 = angle_deg(normals[p].first, normals[p].second, dx, dy);
    double a2 = angle_deg(normals[q].first, normals[q].second, -dx, -dy);
    return std::exp(a1) + std::exp(a2) + std::exp(lambda * len);
}

CutEnumeration enumerate_cuts_and_mutex(const BoundaryPolygon& poly, const PixelRegion& shape,
                                        const std::vector<int>& concave, double psi,
                                        double lambda) {
    if (psi <= 0) throw ValidationError("enumerate_cuts_and_mutex: psi must be positive");
    CutEnumeration out;
    out.problem.psi = psi;
    int n = poly.size();
    if (n < 3 || concave.empty()) return out;

    auto normals = inward_normals(poly, shape, 7);
    auto vertex = [&](int i) { return poly.vertices[i]; };

    // Candidate cuts: concave pairs whose open chord stays inside the shape.
    for (std::size_t a = 0; a < concave.size(); ++a) {
        for (std::size_t b = a + 1; b < concave.size(); ++b) {
            int p = concave[a], q = concave[b];
            auto [px, py] = vertex(p);
            auto [qx, qy] = vertex(q);
            if (px == qx && py == qy) continue;
            if (!chord_inside_shape(shape, px, py, qx, qy)) continue;
            double dx = qx - px, dy = qy - py;
            double len = std::hypot(dx, dy);
            Cut cut;
            cut.p_index = p;
            cut.q_index = q;
            double a1 = angle_deg(normals[p].first, normals[p].second, dx, dy);
            double a2 = angle_deg(normals[q].first, normals[q].second, -dx, -dy);
            cut.weight = std::exp(a1) + std::exp(a2) + std::exp(lambda * len);
            out.cuts.push_back(cut);
        }
    }

    int ncuts = static_cast<int>(out.cuts.size());
    if (ncuts > kMaxCutsPerComponent)
        throw PipelineError("enumerate_cuts_and_mutex: more than 64 candidate cuts");

    // Does cut (p, q) separate the boundary pair (a, b) in cyclic order?
    // Pairs sharing an endpoint with the cut are treated as not separated.
    auto splits = [&](const Cut& c, int a, int b) {
        if (a == c.p_index || a == c.q_index || b == c.p_index || b == c.q_index) return false;
        int fa = (a - c.p_index + n) % n;
        int fb = (b - c.p_index + n) % n;
        int fq = (c.q_index - c.p_index + n) % n;
        bool a_in = fa > 0 && fa < fq;
        bool b_in = fb > 0 && fb < fq;
        return a_in != b_in;
    };

    // Raw mutex pairs, deduplicated by their splitting-cut set: identical
    // constraint rows are redundant, so one deepest representative per set
    // is kept. Arc depth is checked before the chord test; only pairs with
    // depth above psi can qualify.
    struct Group {
        MutexPair rep;
        std::uint64_t cutset = 0;
        int order = 0;
    };
    std::map<std::uint64_t, Group> groups;
    int order = 0;
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            int fwd = (b - a + n) % n;
            int arc = std::min(fwd, n - fwd);
            if (arc < 2) continue;  // adjacent vertices have no interior arc
            double depth = pair_concavity(poly, shape, a, b);
            if (depth <= psi) continue;
            std::uint64_t cset = 0;
            for (int i = 0; i < ncuts; ++i)
                if (splits(out.cuts[i], a, b)) cset |= (1ULL << i);
            auto it = groups.find(cset);
            if (it == groups.end()) {
                Group g;
                g.rep = {a, b, depth};
                g.cutset = cset;
                g.order = order++;
                groups.emplace(cset, g);
            } else if (depth > it->second.rep.concavity) {
                it->second.rep = {a, b, depth};
            }
        }
    }

    std::vector<const Group*> ordered;
    ordered.reserve(groups.size());
    for (auto& [cset, g] : groups) ordered.push_back(&g);
    std::sort(ordered.begin(), ordered.end(),
              [](const Group* x, const Group* y) { return x->order < y->order; });

    int nmutex = static_cast<int>(ordered.size());
    out.problem.num_cuts = ncuts;
    out.problem.num_mutex = nmutex;
    out.problem.weights.resize(ncuts);
    for (int i = 0; i < ncuts; ++i) out.problem.weights[i] = out.cuts[i].weight;
    out.problem.A.assign(ncuts, std::vector<std::uint8_t>(nmutex, 0));
    out.problem.B.assign(ncuts, std::vector<std::uint8_t>(ncuts, 0));
    out.mutex_pairs.reserve(nmutex);
    for (int j = 0; j < nmutex; ++j) {
        out.mutex_pairs.push_back(ordered[j]->rep);
        std::uint64_t cset = ordered[j]->cutset;
        if (cset == 0) out.problem.feasible = false;
        for (int i = 0; i < ncuts; ++i)
            if (cset & (1ULL << i)) out.problem.A[i][j] = 1;
    }
    for (int i = 0; i < ncuts; ++i) {
        for (int j = i + 1; j < ncuts; ++j) {
            bool x = cuts_intersect(vertex(out.cuts[i].p_index), vertex(out.cuts[i].q_index),
                                    vertex(out.cuts[j].p_index), vertex(out.cuts[j].q_index));
            out.problem.B[i][j] = out.problem.B[j][i] = x ? 1 : 0;
        }
    }
    return out;
}

namespace {

// Fixed-capacity bitset for covered mutex constraints.
constexpr int kMaxMutexConstraints = 256;
struct CoverSet {
    std::array<std::uint64_t, 4> bits{};
    bool test(int j) const { return bits[j >> 6] & (1ULL << (j & 63)); }
    void set(int j) { bits[j >> 6] |= (1ULL << (j & 63)); }
    bool operator==(const CoverSet&) const = default;
};

} // namespace

CutSelection solve_cut_selection(const CutSelectionProblem& problem) {
    CutSelection out;
    int n = problem.num_cuts;
    int m = problem.num_mutex;
    if (n > kMaxCutsPerComponent)
        throw PipelineError("solve_cut_selection: more than 64 candidate cuts");
    if (m > kMaxMutexConstraints)
        throw PipelineError("solve_cut_selection: more than 256 mutex constraints");
    if (static_cast<int>(problem.weights.size()) != n)
        throw ValidationError("solve_cut_selection: weight vector size mismatch");

    if (m == 0) {
        out.feasible = true;
        out.selected.assign(n, 0);
        out.cost = 0.0;
        return out;
    }

    std::vector<std::uint64_t> split(m, 0);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i)
            if (problem.A[i][j]) split[j] |= (1ULL << i);
    for (int j = 0; j < m; ++j)
        if (split[j] == 0) {
            out.feasible = false;  // stated explicitly, never a silent empty answer
            return out;
        }

    std::vector<std::uint64_t> conflict(n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && problem.B[i][j]) conflict[i] |= (1ULL << j);

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (problem.weights[a] != problem.weights[b]) return problem.weights[a] < problem.weights[b];
        return a < b;
    });

    const std::vector<double>& w = problem.weights;
    // Canonical cost: weights summed in original index order, so branch-order
    // rounding cannot desynchronize incumbent comparisons.
    auto canonical_cost = [&](std::uint64_t mask) {
        double c = 0;
        for (int i = 0; i < n; ++i)
            if (mask & (1ULL << i)) c += w[i];
        return c;
    };
    auto lex_smaller = [&](std::uint64_t a, std::uint64_t b) {
        for (int i = 0; i < n; ++i) {
            bool ba = a & (1ULL << i), bb = b & (1ULL << i);
            if (ba != bb) return !ba;  // 0 beats 1 at the first difference
        }
        return false;
    };

    bool have_incumbent = false;
    std::uint64_t best_mask = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    long nodes = 0;

    // Admissible lower bound: greedily take uncovered pairs whose allowed
    // splitter sets are pairwise disjoint; any cover pays at least the
    // cheapest splitter of each such pair.
    auto lower_bound = [&](std::uint64_t avail, const std::vector<int>& uncovered) {
        double bound = 0;
        std::uint64_t used = 0;
        for (int j : uncovered) {
            std::uint64_t allowed = split[j] & avail;
            if (allowed & used) continue;
            double mn = std::numeric_limits<double>::infinity();
            std::uint64_t bits = allowed;
            while (bits) {
                int i = std::countr_zero(bits);
                bits &= bits - 1;
                mn = std::min(mn, w[i]);
            }
            bound += mn;
            used |= allowed;
        }
        return bound;
    };

    // DFS over cuts in ascending-weight order.
    auto dfs = [&](auto&& self, int pos, std::uint64_t chosen, std::uint64_t banned,
                   double path_cost, const CoverSet& covered) -> void {
        ++nodes;
        std::uint64_t avail = ~(chosen | banned);
        std::vector<int> uncovered;
        uncovered.reserve(m);
        for (int j = 0; j < m; ++j)
            if (!covered.test(j)) {
                if ((split[j] & avail) == 0) return;  // pair lost all splitters
                uncovered.push_back(j);
            }
        if (uncovered.empty()) {
            double cost = canonical_cost(chosen);
            if (!have_incumbent || cost < best_cost ||
                (cost == best_cost && lex_smaller(chosen, best_mask))) {
                have_incumbent = true;
                best_cost = cost;
                best_mask = chosen;
            }
            return;
        }
        if (have_incumbent &&
            path_cost + lower_bound(avail, uncovered) > best_cost + 1e-9)
            return;

        // Next branching cut: cheapest available that splits something uncovered.
        int pick = -1;
        for (int oi = pos; oi < n; ++oi) {
            int i = order[oi];
            if (!(avail & (1ULL << i))) continue;
            bool useful = false;
            for (int j : uncovered)
                if (split[j] & (1ULL << i)) { useful = true; break; }
            if (useful) { pick = oi; break; }
        }
        if (pick < 0) return;  // nothing left can extend coverage

        int i = order[pick];
        // Include branch.
        CoverSet ncov = covered;
        for (int j : uncovered)
            if (split[j] & (1ULL << i)) ncov.set(j);
        self(self, pick + 1, chosen | (1ULL << i), banned | conflict[i], path_cost + w[i], ncov);
        // Exclude branch.
        self(self, pick + 1, chosen, banned | (1ULL << i), path_cost, covered);
    };
    dfs(dfs, 0, 0, 0, 0.0, CoverSet{});

    out.nodes_explored = nodes;
    if (!have_incumbent) {
        out.feasible = false;
        return out;
    }
    out.feasible = true;
    out.cost = best_cost;
    out.selected.assign(n, 0);
    for (int i = 0; i < n; ++i)
        if (best_mask & (1ULL << i)) out.selected[i] = 1;
    return out;
}

namespace {

// 4-connected raster line between two pixels; diagonal steps insert the
// horizontal intermediate first.
std::vector<std::pair<int, int>> raster_line_4(std::pair<int, int> a, std::pair<int, int> b) {
    std::vector<std::pair<int, int>> px;
    int x = a.first, y = a.second;
    int dx = std::abs(b.first - a.first), dy = std::abs(b.second - a.second);
    int sx = a.first < b.first ? 1 : -1;
    int sy = a.second < b.second ? 1 : -1;
    int err = dx - dy;
    px.emplace_back(x, y);
    while (x != b.first || y != b.second) {
        int e2 = 2 * err;
        if (e2 > -dy && e2 < dx) {
            // diagonal move: break into horizontal then vertical
            x += sx;
            err -= dy;
            px.emplace_back(x, y);
            y += sy;
            err += dx;
            px.emplace_back(x, y);
            continue;
        }
        if (e2 > -dy) {
            err -= dy;
            x += sx;
        } else if (e2 < dx) {
            err += dx;
            y += sy;
        }
        px.emplace_back(x, y);
    }
    return px;
}

} // namespace

DecomposedParts decompose(const PixelRegion& component, double psi, double lambda) {
    if (psi <= 0) throw ValidationError("decompose: psi must be positive");
    DecomposedParts out;
    PixelRegion filled = fill_holes(component);
    out.boundary = trace_boundary(filled);

    auto single_part = [&]() {
        out.parts.assign(1, filled);
        return out;
    };

    if (out.boundary.trivially_convex || out.boundary.size() < 7) return single_part();

    auto curv = boundary_curvature(out.boundary, 7);
    out.concave_indices = concave_points(curv, 0.02);
    if (out.concave_indices.empty()) return single_part();

    CutEnumeration en =
        enumerate_cuts_and_mutex(out.boundary, filled, out.concave_indices, psi, lambda);
    out.candidate_cuts = en.cuts;
    if (en.problem.num_mutex == 0) return single_part();
    if (!en.problem.feasible) {
        out.infeasible = true;
        return single_part();
    }

    CutSelection sel = solve_cut_selection(en.problem);
    if (!sel.feasible) {
        out.infeasible = true;
        return single_part();
    }
    for (std::size_t i = 0; i < sel.selected.size(); ++i)
        if (sel.selected[i]) out.selected_cuts.push_back(en.cuts[i]);
    if (out.selected_cuts.empty()) return single_part();

    // Remove rasterized cuts, label the remaining pieces, then hand each cut
    // pixel to the neighboring part with the larger shared border.
    int w = filled.width, h = filled.height;
    std::vector<std::uint8_t> remaining = filled.mask;
    std::vector<std::uint8_t> is_cut(remaining.size(), 0);
    for (const Cut& c : out.selected_cuts) {
        auto line = raster_line_4(out.boundary.vertices[c.p_index],
                                  out.boundary.vertices[c.q_index]);
        for (auto [gx, gy] : line) {
            int lx = gx - filled.x0, ly = gy - filled.y0;
            if (lx < 0 || ly < 0 || lx >= w || ly >= h) continue;
            std::size_t idx = static_cast<std::size_t>(ly) * w + lx;
            if (filled.mask[idx]) {
                remaining[idx] = 0;
                is_cut[idx] = 1;
            }
        }
    }

    std::vector<PixelRegion> pieces = connected_components(w, h, remaining, 4, 0);
    if (pieces.empty()) return single_part();

    std::vector<std::int32_t> label(remaining.size(), -1);
    for (std::size_t p = 0; p < pieces.size(); ++p)
        for (auto [gx, gy] : pieces[p].pixels())
            label[static_cast<std::size_t>(gy) * w + gx] = static_cast<std::int32_t>(p);

    // Multi-pass synchronous reassignment of cut pixels.
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < is_cut.size(); ++i)
        if (is_cut[i]) pending.push_back(i);
    const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
    while (!pending.empty()) {
        std::vector<std::pair<std::size_t, std::int32_t>> assigned;
        for (std::size_t idx : pending) {
            int x = static_cast<int>(idx % w), y = static_cast<int>(idx / w);
            std::vector<int> count(pieces.size(), 0);
            for (int k = 0; k < 4; ++k) {
                int nx = x + dx[k], ny = y + dy[k];
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                std::int32_t l = label[static_cast<std::size_t>(ny) * w + nx];
                if (l >= 0) count[l]++;
            }
            int best = -1;
            for (std::size_t p = 0; p < pieces.size(); ++p)
                if (count[p] > 0 && (best < 0 || count[p] > count[best])) best = static_cast<int>(p);
            if (best >= 0) assigned.emplace_back(idx, best);
        }
        if (assigned.empty()) {
            for (std::size_t idx : pending) label[idx] = 0;  // fully enclosed by cuts
            break;
        }
        for (auto [idx, l] : assigned) label[idx] = l;
        std::vector<std::size_t> rest;
        for (std::size_t idx : pending)
            if (label[idx] < 0) rest.push_back(idx);
        pending = std::move(rest);
    }

    out.parts.clear();
    for (std::size_t p = 0; p < pieces.size(); ++p) {
        std::vector<std::uint8_t> pm(remaining.size(), 0);
        for (std::size_t i = 0; i < pm.size(); ++i)
            if (label[i] == static_cast<std::int32_t>(p)) pm[i] = 1;
        // Rebuild a tight region (cut pixels may extend the piece bbox).
        auto comps = connected_components(w, h, pm, 4, 0);
        PixelRegion merged;
        if (comps.size() == 1) {
            merged = comps[0];
        } else {
            // Keep the piece in one region even if reassignment split it.
            int minx = w, miny = h, maxx = -1, maxy = -1;
            for (std::size_t i = 0; i < pm.size(); ++i)
                if (pm[i]) {
                    int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
                    minx = std::min(minx, x);
                    maxx = std::max(maxx, x);
                    miny = std::min(miny, y);
                    maxy = std::max(maxy, y);
                }
            merged.x0 = minx;
            merged.y0 = miny;
            merged.width = maxx - minx + 1;
            merged.height = maxy - miny + 1;
            merged.mask.assign(static_cast<std::size_t>(merged.width) * merged.height, 0);
            for (std::size_t i = 0; i < pm.size(); ++i)
                if (pm[i]) merged.set(static_cast<int>(i % w), static_cast<int>(i / w));
        }
        out.parts.push_back(std::move(merged));
    }
    // Shift part coordinates back to global frame.
    for (auto& part : out.parts) {
        part.x0 += filled.x0;
        part.y0 += filled.y0;
    }
    return out;
}

} // namespace nucleo
