#include "nucleo/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nucleo/errors.hpp"

namespace nucleo {

double otsu_threshold(const std::vector<double>& values, int bins) {
    if (values.empty()) return std::numeric_limits<double>::infinity();
    double lo = values[0], hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo)) return std::numeric_limits<double>::infinity();

    std::vector<long> hist(bins, 0);
    double scale = bins / (hi - lo);
    for (double v : values) {
        int b = static_cast<int>((v - lo) * scale);
        if (b >= bins) b = bins - 1;
        hist[b]++;
    }

    long total = static_cast<long>(values.size());
    double sum_all = 0;
    for (int b = 0; b < bins; ++b) sum_all += static_cast<double>(b) * hist[b];

    long w0 = 0;
    double sum0 = 0, best_var = -1.0;
    int best_bin = -1;
    for (int t = 0; t < bins - 1; ++t) {
        w0 += hist[t];
        if (w0 == 0) continue;
        long w1 = total - w0;
        if (w1 == 0) break;
        sum0 += static_cast<double>(t) * hist[t];
        double m0 = sum0 / w0;
        double m1 = (sum_all - sum0) / w1;
        double var = static_cast<double>(w0) * static_cast<double>(w1) * (m0 - m1) * (m0 - m1);
        if (var > best_var) {
            best_var = var;
            best_bin = t;
        }
    }
    if (best_bin < 0) return std::numeric_limits<double>::infinity();
    return lo + (best_bin + 1) / scale;
}

static const char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::uint8_t* data, std::size_t len) {
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (std::size_t i = 0; i < len; i += 3) {
        std::uint32_t v = data[i] << 16;
        int rem = static_cast<int>(len - i);
        if (rem > 1) v |= data[i + 1] << 8;
        if (rem > 2) v |= data[i + 2];
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(rem > 1 ? kB64Alphabet[(v >> 6) & 63] : '=');
        out.push_back(rem > 2 ? kB64Alphabet[v & 63] : '=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    auto value = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    std::uint32_t buf = 0;
    int have = 0;
    for (char c : text) {
        if (c == '=' || c == '\n' || c == '\r') continue;
        int v = value(c);
        if (v < 0) throw ValidationError("invalid base64 payload");
        buf = (buf << 6) | static_cast<std::uint32_t>(v);
        have += 6;
        if (have >= 8) {
            have -= 8;
            out.push_back(static_cast<std::uint8_t>((buf >> have) & 0xFF));
        }
    }
    return out;
}

} // namespace nucleo
