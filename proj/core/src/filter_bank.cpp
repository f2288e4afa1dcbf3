#include "nucleo/filter_bank.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "nucleo/errors.hpp"
#include "nucleo/parallel.hpp"
#include "nucleo/rng.hpp"

namespace nucleo {

void FilterBank::validate() const {
    if (num_filters < 1) throw ValidationError("filter bank: need at least one filter");
    if (kernel_size < 1 || kernel_size % 2 == 0)
        throw ValidationError("filter bank: kernel_size must be odd and positive");
    std::size_t expect = static_cast<std::size_t>(num_filters) * kernel_size * kernel_size;
    if (weights.size() != expect || bias.size() != static_cast<std::size_t>(num_filters))
        throw ValidationError("filter bank: weight/bias sizes do not match num_filters");
    for (double w : weights)
        if (!std::isfinite(w)) throw ValidationError("filter bank: non-finite weight");
}

FeatureMap convolve_extract(const GrayImage& image, const FilterBank& bank) {
    bank.validate();
    int ks = bank.kernel_size;
    if (image.width < ks || image.height < ks)
        throw ValidationError("convolve_extract: image smaller than the kernel");

    int h = image.height, w = image.width, d = bank.num_filters;
    int half = ks / 2;
    FeatureMap fm(h, w, d);

    parallel_for(static_cast<std::size_t>(h), [&](std::size_t yy) {
        int y = static_cast<int>(yy);
        // Gather the reflected row window once per output row.
        std::vector<const double*> rows(ks);
        std::vector<std::vector<double>> padded;
        bool interior_y = (y >= half && y + half < h);
        if (!interior_y) padded.resize(ks);
        for (int u = 0; u < ks; ++u) {
            int sy = GrayImage::reflect(y + u - half, h);
            rows[u] = image.values.data() + static_cast<std::size_t>(sy) * w;
        }
        std::vector<double> resp(d);
        for (int x = 0; x < w; ++x) {
            bool interior_x = (x >= half && x + half < w);
            double norm2 = 0.0;
            if (interior_x) {
                for (int k = 0; k < d; ++k) {
                    const double* f = bank.filter(k);
                    double acc = bank.bias[k];
                    for (int u = 0; u < ks; ++u) {
                        const double* row = rows[u] + (x - half);
                        const double* fr = f + u * ks;
                        for (int v = 0; v < ks; ++v) acc += fr[v] * row[v];
                    }
                    double r = acc > 0.0 ? acc : 0.0;
                    resp[k] = r;
                    norm2 += r * r;
                }
            } else {
                for (int k = 0; k < d; ++k) {
                    const double* f = bank.filter(k);
                    double acc = bank.bias[k];
                    for (int u = 0; u < ks; ++u)
                        for (int v = 0; v < ks; ++v)
                            acc += f[u * ks + v] * rows[u][GrayImage::reflect(x + v - half, w)];
                    double r = acc > 0.0 ? acc : 0.0;
                    resp[k] = r;
                    norm2 += r * r;
                }
            }
            double norm = std::sqrt(norm2);
            std::size_t idx = static_cast<std::size_t>(y) * w + x;
            if (norm >= kFeatureNormEpsilon) {
                double inv = 1.0 / norm;
                double* out = fm.vectors.data() + idx * d;
                for (int k = 0; k < d; ++k) out[k] = resp[k] * inv;
                fm.valid[idx] = 1;
            }
        }
    });
    return fm;
}

FeatureMap FeatureMap::window(int x0, int y0, int p) const {
    FeatureMap out(p, p, dim);
    for (int y = 0; y < p; ++y) {
        const double* src = vec(x0, y0 + y);
        std::memcpy(out.vec(0, y), src, static_cast<std::size_t>(p) * dim * sizeof(double));
        for (int x = 0; x < p; ++x)
            out.valid[static_cast<std::size_t>(y) * p + x] = valid[static_cast<std::size_t>(y0 + y) * width + (x0 + x)];
    }
    return out;
}

namespace {

// k-means++ seeding on unit vectors with cosine distance 1 - x.c.
std::vector<int> kmeanspp_cosine(const Eigen::MatrixXd& unit_rows, int k, Rng& rng) {
    int n = static_cast<int>(unit_rows.rows());
    std::vector<int> centers;
    centers.push_back(static_cast<int>(rng.uniform_int(0, n - 1)));
    Eigen::VectorXd dist(n);
    for (int i = 0; i < n; ++i)
        dist[i] = std::max(0.0, 1.0 - unit_rows.row(i).dot(unit_rows.row(centers[0])));
    while (static_cast<int>(centers.size()) < k) {
        double total = dist.sum();
        int pick;
        if (total <= 0.0) {
            pick = static_cast<int>(rng.uniform_int(0, n - 1));
        } else {
            double target = rng.next_double() * total;
            double run = 0.0;
            pick = n - 1;
            for (int i = 0; i < n; ++i) {
                run += dist[i];
                if (run >= target) { pick = i; break; }
            }
        }
        centers.push_back(pick);
        for (int i = 0; i < n; ++i)
            dist[i] = std::min(dist[i], std::max(0.0, 1.0 - unit_rows.row(i).dot(unit_rows.row(pick))));
    }
    return centers;
}

} // namespace

FilterBank learn_filter_bank(const std::vector<std::vector<double>>& patches,
                             int num_filters, std::uint64_t seed) {
    if (num_filters < 1) throw ValidationError("learn_filter_bank: num_filters must be >= 1");
    if (patches.size() < static_cast<std::size_t>(num_filters))
        throw ValidationError("learn_filter_bank: fewer patches than filters");
    std::size_t dsz = patches.front().size();
    for (const auto& p : patches)
        if (p.size() != dsz) throw ValidationError("learn_filter_bank: patches differ in size");
    int ks = static_cast<int>(std::lround(std::sqrt(static_cast<double>(dsz))));
    if (static_cast<std::size_t>(ks) * ks != dsz || ks % 2 == 0)
        throw ValidationError("learn_filter_bank: patch size must be an odd square");

    int n = static_cast<int>(patches.size());
    int d = static_cast<int>(dsz);
    Eigen::MatrixXd X(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) X(i, j) = patches[i][j];

    Eigen::RowVectorXd mean = X.colwise().mean();
    Eigen::MatrixXd C = X.rowwise() - mean;

    // Degenerate collection: all patches identical. Fall back to copies of
    // the single normalized direction.
    double total_var = C.squaredNorm() / n;
    FilterBank bank;
    bank.num_filters = num_filters;
    bank.kernel_size = ks;
    bank.weights.resize(static_cast<std::size_t>(num_filters) * dsz);
    bank.bias.assign(num_filters, 0.0);
    if (total_var < 1e-18) {
        double norm = mean.norm();
        if (norm < 1e-300)
            throw ValidationError("learn_filter_bank: all patches identical and zero");
        Eigen::RowVectorXd f = mean / norm;
        for (int k = 0; k < num_filters; ++k)
            for (int j = 0; j < d; ++j) bank.weights[static_cast<std::size_t>(k) * d + j] = f[j];
        return bank;
    }

    Eigen::MatrixXd cov = (C.transpose() * C) / n;
    cov.diagonal().array() += 1e-3;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    Eigen::VectorXd inv_sqrt = eig.eigenvalues().array().max(1e-12).rsqrt();
    Eigen::MatrixXd W = eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();

    Eigen::MatrixXd Z = C * W;  // whitened patches
    for (int i = 0; i < n; ++i) {
        double norm = Z.row(i).norm();
        if (norm > 1e-12) Z.row(i) /= norm;
    }

    Rng rng(seed, /*stream=*/0x46494C54);  // "FILT"
    std::vector<int> seeds = kmeanspp_cosine(Z, num_filters, rng);
    Eigen::MatrixXd centroids(num_filters, d);
    for (int k = 0; k < num_filters; ++k) centroids.row(k) = Z.row(seeds[k]);

    std::vector<int> assign(n, -1);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        Eigen::MatrixXd sims = Z * centroids.transpose();
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bv = sims(i, 0);
            for (int k = 1; k < num_filters; ++k)
                if (sims(i, k) > bv) { bv = sims(i, k); best = k; }
            if (assign[i] != best) { assign[i] = best; changed = true; }
        }
        if (!changed && iter > 0) break;
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(num_filters, d);
        std::vector<int> counts(num_filters, 0);
        for (int i = 0; i < n; ++i) {
            sums.row(assign[i]) += Z.row(i);
            counts[assign[i]]++;
        }
        for (int k = 0; k < num_filters; ++k) {
            double norm = sums.row(k).norm();
            if (counts[k] == 0 || norm < 1e-12) {
                // Reseed an empty cluster at the vector worst covered by its centroid.
                int worst = 0;
                double wv = 2.0;
                for (int i = 0; i < n; ++i) {
                    double s = sims(i, assign[i]);
                    if (s < wv) { wv = s; worst = i; }
                }
                centroids.row(k) = Z.row(worst);
            } else {
                centroids.row(k) = sums.row(k) / norm;
            }
        }
    }

    // Fold the whitening so the filter applies directly to raw patches:
    // centroid . W(x - mean) = (W centroid) . x - (W centroid) . mean.
    for (int k = 0; k < num_filters; ++k) {
        Eigen::VectorXd eff = W * centroids.row(k).transpose();
        double b = -eff.dot(mean.transpose());
        double norm = eff.norm();
        if (norm < 1e-12) norm = 1.0;
        eff /= norm;
        b /= norm;
        for (int j = 0; j < d; ++j) bank.weights[static_cast<std::size_t>(k) * d + j] = eff[j];
        bank.bias[k] = b;
    }
    return bank;
}

} // namespace nucleo
