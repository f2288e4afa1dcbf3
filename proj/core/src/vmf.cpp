#include "nucleo/vmf.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "nucleo/errors.hpp"
#include "nucleo/rng.hpp"

namespace nucleo {

void VmfKernelBank::validate() const {
    if (K < 1 || dim < 1) throw ValidationError("vMF bank: K and dim must be positive");
    if (sigma <= 0) throw ValidationError("vMF bank: sigma must be positive");
    if (kernels.size() != static_cast<std::size_t>(K) * dim)
        throw ValidationError("vMF bank: kernel array size mismatch");
    for (int k = 0; k < K; ++k) {
        double n2 = 0;
        for (int d = 0; d < dim; ++d) n2 += kernel(k)[d] * kernel(k)[d];
        if (std::abs(std::sqrt(n2) - 1.0) > 1e-6)
            throw ValidationError("vMF bank: kernel not unit norm");
    }
    if (background_index >= 0) {
        if (background_index >= K) throw ValidationError("vMF bank: background index out of range");
        for (int f : foreground_indices) {
            if (f < 0 || f >= K) throw ValidationError("vMF bank: foreground index out of range");
            if (f == background_index)
                throw ValidationError("vMF bank: background kernel listed as foreground");
        }
    }
}

double vmf_log_density(const std::vector<double>& f, const std::vector<double>& mu, double sigma) {
    if (f.size() != mu.size()) throw ValidationError("vmf_log_density: dimension mismatch");
    if (sigma <= 0) throw ValidationError("vmf_log_density: sigma must be positive");
    double fn2 = 0, mn2 = 0, dot = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        fn2 += f[i] * f[i];
        mn2 += mu[i] * mu[i];
        dot += f[i] * mu[i];
    }
    if (std::abs(std::sqrt(mn2) - 1.0) > 1e-6)
        throw ValidationError("vmf_log_density: mu must be unit norm");
    if (fn2 == 0.0) return 0.0;  // invalid-feature convention
    if (std::abs(std::sqrt(fn2) - 1.0) > 1e-6)
        throw ValidationError("vmf_log_density: f must be unit norm or zero");
    return sigma * dot;
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<int> kmeanspp_cosine_rows(const RowMajor& X, int k, Rng& rng) {
    int n = static_cast<int>(X.rows());
    std::vector<int> centers;
    centers.push_back(static_cast<int>(rng.uniform_int(0, n - 1)));
    Eigen::VectorXd dist = (1.0 - (X * X.row(centers[0]).transpose()).array()).max(0.0);
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
        Eigen::VectorXd nd = (1.0 - (X * X.row(pick).transpose()).array()).max(0.0);
        dist = dist.cwiseMin(nd);
    }
    return centers;
}

} // namespace

VmfKernelBank learn_vmf_kernels(const std::vector<std::vector<double>>& features, int K,
                                double sigma, std::uint64_t seed, VmfLearnStats* stats) {
    if (K < 1) throw ValidationError("learn_vmf_kernels: K must be >= 1");
    if (sigma <= 0) throw ValidationError("learn_vmf_kernels: sigma must be positive");
    if (features.size() < static_cast<std::size_t>(K))
        throw ValidationError("learn_vmf_kernels: need at least K feature vectors");

    int n = static_cast<int>(features.size());
    int d = static_cast<int>(features.front().size());
    RowMajor X(n, d);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(features[i].size()) != d)
            throw ValidationError("learn_vmf_kernels: inconsistent feature dimension");
        for (int j = 0; j < d; ++j) X(i, j) = features[i][j];
    }

    Rng rng(seed, /*stream=*/0x764D4646);  // "vMFF"
    std::vector<int> seeds = kmeanspp_cosine_rows(X, K, rng);
    RowMajor M(K, d);
    for (int k = 0; k < K; ++k) M.row(k) = X.row(seeds[k]);

    const double log_uniform = -std::log(static_cast<double>(K));
    auto avg_loglik = [&](const RowMajor& kernels) {
        Eigen::MatrixXd S = X * kernels.transpose();  // n x K cosines
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double mx = sigma * S.row(i).maxCoeff();
            double acc = 0.0;
            for (int k = 0; k < K; ++k) acc += std::exp(sigma * S(i, k) - mx);
            total += mx + std::log(acc) + log_uniform;
        }
        return total / n;
    };

    if (stats) {
        stats->avg_log_likelihood.clear();
        stats->avg_log_likelihood.push_back(avg_loglik(M));
    }

    Eigen::MatrixXd R(n, K);
    int iter = 0;
    for (; iter < 200; ++iter) {
        // E-step: softmax responsibilities over kernels.
        Eigen::MatrixXd S = X * M.transpose();
        for (int i = 0; i < n; ++i) {
            double mx = sigma * S.row(i).maxCoeff();
            double sum = 0.0;
            for (int k = 0; k < K; ++k) {
                double e = std::exp(sigma * S(i, k) - mx);
                R(i, k) = e;
                sum += e;
            }
            R.row(i) /= sum;
        }

        // M-step: weighted mean directions, renormalized.
        RowMajor Mnew(K, d);
        Eigen::VectorXd mass = R.colwise().sum();
        Eigen::MatrixXd sums = R.transpose() * X;  // K x d
        for (int k = 0; k < K; ++k) {
            double norm = sums.row(k).norm();
            if (mass[k] < 1e-8 || norm < 1e-12) {
                // Reseed at the worst-explained vector (lowest best-cosine).
                int worst = 0;
                double wv = 2.0;
                for (int i = 0; i < n; ++i) {
                    double best = S.row(i).maxCoeff();
                    if (best < wv) { wv = best; worst = i; }
                }
                Mnew.row(k) = X.row(worst);
            } else {
                Mnew.row(k) = sums.row(k) / norm;
            }
        }

        double movement = 0.0;
        for (int k = 0; k < K; ++k) movement += (Mnew.row(k) - M.row(k)).norm();
        movement /= K;
        M = Mnew;
        if (stats) stats->avg_log_likelihood.push_back(avg_loglik(M));
        if (movement < 1e-5) { ++iter; break; }
    }

    VmfKernelBank bank;
    bank.K = K;
    bank.dim = d;
    bank.sigma = sigma;
    bank.kernels.resize(static_cast<std::size_t>(K) * d);
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < d; ++j) bank.kernels[static_cast<std::size_t>(k) * d + j] = M(k, j);
    if (stats) stats->iterations = iter;
    bank.validate();
    return bank;
}

std::vector<double> activation_maps(const FeatureMap& fm, const VmfKernelBank& bank) {
    if (fm.dim != bank.dim)
        throw ValidationError("activation_maps: feature/kernel dimension mismatch");
    std::size_t plane = static_cast<std::size_t>(fm.height) * fm.width;
    std::vector<double> maps(static_cast<std::size_t>(bank.K) * plane, -1.0);
    for (int y = 0; y < fm.height; ++y) {
        for (int x = 0; x < fm.width; ++x) {
            std::size_t idx = static_cast<std::size_t>(y) * fm.width + x;
            if (!fm.valid[idx]) continue;
            const double* f = fm.vec(x, y);
            for (int k = 0; k < bank.K; ++k) {
                const double* mu = bank.kernel(k);
                double dot = 0;
                for (int j = 0; j < bank.dim; ++j) dot += f[j] * mu[j];
                maps[k * plane + idx] = dot;
            }
        }
    }
    return maps;
}

void select_background_kernel(VmfKernelBank& bank, const std::vector<FeatureMap>& fms,
                              const std::vector<std::vector<Box>>& boxes_per_image,
                              int dilate_px) {
    if (fms.size() != boxes_per_image.size())
        throw ValidationError("select_background_kernel: images/annotations count mismatch");
    std::vector<double> sums(bank.K, 0.0);
    long count = 0;
    for (std::size_t im = 0; im < fms.size(); ++im) {
        const FeatureMap& fm = fms[im];
        std::vector<std::uint8_t> inside(static_cast<std::size_t>(fm.height) * fm.width, 0);
        for (const Box& b : boxes_per_image[im]) {
            int x0 = std::max(0, b.x0 - dilate_px), x1 = std::min(fm.width - 1, b.x1 + dilate_px);
            int y0 = std::max(0, b.y0 - dilate_px), y1 = std::min(fm.height - 1, b.y1 + dilate_px);
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x)
                    inside[static_cast<std::size_t>(y) * fm.width + x] = 1;
        }
        std::vector<double> acts = activation_maps(fm, bank);
        std::size_t plane = static_cast<std::size_t>(fm.height) * fm.width;
        bool any = false;
        for (std::size_t i = 0; i < plane; ++i) {
            if (inside[i]) continue;
            any = true;
            for (int k = 0; k < bank.K; ++k) sums[k] += acts[k * plane + i];
        }
        if (any) {
            long bg = 0;
            for (std::size_t i = 0; i < plane; ++i) bg += inside[i] ? 0 : 1;
            count += bg;
        }
    }
    if (count == 0)
        throw ValidationError("select_background_kernel: no background pixels in any image");

    int best = 0;
    for (int k = 1; k < bank.K; ++k)
        if (sums[k] > sums[best]) best = k;  // ties keep the lowest index

    bank.background_index = best;
    bank.foreground_indices.clear();
    for (int k = 0; k < bank.K; ++k)
        if (k != best) bank.foreground_indices.push_back(k);
}

} // namespace nucleo
