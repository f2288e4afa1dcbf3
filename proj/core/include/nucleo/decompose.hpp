#pragma once

#include <cstdint>
#include <vector>

#include "nucleo/mask.hpp"

namespace nucleo {

// Closed outer contour of a hole-filled component: boundary pixel centers in
// counter-clockwise order (positive shoelace area in x-right/y-down pixel
// coordinates), starting at the lexicographically smallest (y, x) boundary
// pixel. Thin structures may revisit pixels, but never consecutively.
struct BoundaryPolygon {
    std::vector<std::pair<int, int>> vertices;  // (x, y)
    bool trivially_convex = false;              // degenerate: fewer than 3 vertices

    int size() const { return static_cast<int>(vertices.size()); }
    double signed_area() const;
};

BoundaryPolygon trace_boundary(const PixelRegion& component);

// Signed curvature per vertex from the turning of +-3-vertex tangents on a
// circularly smoothed contour (moving average, default window 7). Positive
// means convex for the CCW orientation above. Contours shorter than the
// window get +infinity everywhere (treated convex).
std::vector<double> boundary_curvature(const BoundaryPolygon& poly, int smooth_window = 7);

// Circularly smoothed contour coordinates (helper shared with normals).
std::vector<std::pair<double, double>> smooth_contour(const BoundaryPolygon& poly, int window);

// Local curvature minima below -kappa_min, at most one per contiguous
// negative run.
std::vector<int> concave_points(const std::vector<double>& curvatures, double kappa_min = 0.02);

// Concavity of a boundary pair: zero when the open chord stays inside the
// shape; otherwise the maximum distance from the vertices of the shorter
// boundary arc between v1 and v2 to the chord.
double pair_concavity(const BoundaryPolygon& poly, const PixelRegion& shape, int v1, int v2);

struct Cut {
    int p_index = -1;
    int q_index = -1;
    double weight = 0.0;
};

struct CutSelectionProblem {
    int num_cuts = 0;
    int num_mutex = 0;
    // A[i][j] = 1 iff cut i separates mutex pair j in cyclic boundary order.
    std::vector<std::vector<std::uint8_t>> A;
    // B[i][j] = 1 iff the open segments of cuts i and j properly intersect.
    std::vector<std::vector<std::uint8_t>> B;
    std::vector<double> weights;
    double psi = 3.0;
    bool feasible = true;  // false if some mutex pair has no splitting cut
};

struct MutexPair {
    int v1 = -1;
    int v2 = -1;
    double concavity = 0.0;
};

struct CutEnumeration {
    std::vector<Cut> cuts;
    std::vector<MutexPair> mutex_pairs;
    CutSelectionProblem problem;
};

// Candidate cuts between concave points whose open chord lies strictly
// inside the shape; mutex pairs are all boundary pairs with concavity > psi,
// deduplicated to the deepest representative per distinct splitting-cut set
// (identical constraint rows add nothing to the program).
CutEnumeration enumerate_cuts_and_mutex(const BoundaryPolygon& poly, const PixelRegion& shape,
                                        const std::vector<int>& concave, double psi,
                                        double lambda);

// w_pq = exp(angle(n_p, pq)) + exp(angle(n_q, qp)) + exp(lambda * |pq|) with
// angles in degrees in [0, 180] against the inward smoothed-contour normals.
double cut_weight(const BoundaryPolygon& poly, const PixelRegion& shape, int p, int q,
                  double lambda);

struct CutSelection {
    bool feasible = false;
    std::vector<std::uint8_t> selected;  // x, one flag per cut
    double cost = 0.0;
    long nodes_explored = 0;
};

inline constexpr int kMaxCutsPerComponent = 64;

// Exact minimum-weight cut selection (min w.x, every mutex pair split,
// no two selected cuts intersecting) by depth-first branch-and-bound.
// Equal-cost optima resolve to the lexicographically smallest x. Instances
// with more than 64 cuts are rejected.
CutSelection solve_cut_selection(const CutSelectionProblem& problem);

struct DecomposedParts {
    std::vector<PixelRegion> parts;
    std::vector<Cut> selected_cuts;
    BoundaryPolygon boundary;
    std::vector<int> concave_indices;
    std::vector<Cut> candidate_cuts;
    bool infeasible = false;  // no valid cut selection existed; single part returned
};

// Full near-convex decomposition of one connected component. Interior holes
// are filled first. Selected cut segments are rasterized 4-connected,
// removed, and their pixels reassigned to the adjacent part with the larger
// shared border (ties to the lower part id).
DecomposedParts decompose(const PixelRegion& component, double psi, double lambda);

} // namespace nucleo
