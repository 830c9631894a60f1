#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "rnadot/image.hpp"

namespace rnadot {

// ---------------------------------------------------------------------------
// Windows and quantization
// ---------------------------------------------------------------------------

struct Window {
    int side = 0;
    std::vector<std::uint8_t> values;  // row-major side*side samples
};

inline Window extract_window(const ChannelImage& img, int cx, int cy, int side) {
    if (side != 7 && side != 11) throw std::invalid_argument("window side must be 7 or 11");
    Window w;
    w.side = side;
    w.values.resize(static_cast<std::size_t>(side) * side);
    const int r = side / 2;
    std::size_t k = 0;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) w.values[k++] = img.at_reflect(cx + dx, cy + dy);
    return w;
}

struct QuantizedWindow {
    static constexpr int Ng = 32;  // fixed bin width 8 over [0,255]
    int side = 0;
    std::vector<int> levels;  // values in [1, Ng]
};

inline QuantizedWindow quantize(const Window& w) {
    QuantizedWindow q;
    q.side = w.side;
    q.levels.resize(w.values.size());
    for (std::size_t i = 0; i < w.values.size(); ++i) q.levels[i] = w.values[i] / 8 + 1;
    return q;
}

using Matrix = std::vector<std::vector<double>>;

// ---------------------------------------------------------------------------
// Matrix builders
// ---------------------------------------------------------------------------

// Symmetric co-occurrence counts summed over the four unique directions at the
// given distance (axis-scaled offsets).
inline Matrix glcm(const QuantizedWindow& q, int delta) {
    if (delta < 1 || delta > 3) throw std::invalid_argument("glcm distance must be 1..3");
    const int s = q.side, Ng = QuantizedWindow::Ng;
    Matrix m(Ng, std::vector<double>(Ng, 0.0));
    const int offs[4][2] = {{delta, 0}, {delta, delta}, {0, delta}, {-delta, delta}};
    for (auto& off : offs) {
        for (int y = 0; y < s; ++y)
            for (int x = 0; x < s; ++x) {
                int nx = x + off[0], ny = y + off[1];
                if (nx < 0 || nx >= s || ny < 0 || ny >= s) continue;
                int a = q.levels[y * s + x] - 1, b = q.levels[ny * s + nx] - 1;
                m[a][b] += 1.0;
                m[b][a] += 1.0;
            }
    }
    return m;
}

// Maximal same-level run lengths over the four directions. Columns index run
// length - 1, up to the window side.
inline Matrix glrlm(const QuantizedWindow& q) {
    const int s = q.side, Ng = QuantizedWindow::Ng;
    Matrix m(Ng, std::vector<double>(s, 0.0));
    auto lvl = [&](int x, int y) { return q.levels[y * s + x]; };
    auto scan_line = [&](int x0, int y0, int dx, int dy) {
        int x = x0, y = y0;
        int cur = -1, len = 0;
        while (x >= 0 && x < s && y >= 0 && y < s) {
            int v = lvl(x, y);
            if (v == cur) {
                ++len;
            } else {
                if (cur > 0) m[cur - 1][len - 1] += 1.0;
                cur = v;
                len = 1;
            }
            x += dx;
            y += dy;
        }
        if (cur > 0) m[cur - 1][len - 1] += 1.0;
    };
    for (int y = 0; y < s; ++y) scan_line(0, y, 1, 0);                       // 0 deg
    for (int x = 0; x < s; ++x) scan_line(x, 0, 0, 1);                       // 90 deg
    for (int x = 0; x < s; ++x) scan_line(x, 0, -1, 1);                      // 135 deg in image coords
    for (int y = 1; y < s; ++y) scan_line(s - 1, y, -1, 1);
    for (int x = 0; x < s; ++x) scan_line(x, 0, 1, 1);                       // 45 deg
    for (int y = 1; y < s; ++y) scan_line(0, y, 1, 1);
    return m;
}

// 8-connected same-level zone sizes. Columns index zone size - 1.
inline Matrix glszm(const QuantizedWindow& q) {
    const int s = q.side, Ng = QuantizedWindow::Ng;
    Matrix m(Ng, std::vector<double>(s * s, 0.0));
    std::vector<bool> seen(q.levels.size(), false);
    std::vector<int> stack;
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) {
            int idx = y * s + x;
            if (seen[idx]) continue;
            int level = q.levels[idx];
            int size = 0;
            stack.push_back(idx);
            seen[idx] = true;
            while (!stack.empty()) {
                int cur = stack.back();
                stack.pop_back();
                ++size;
                int cx = cur % s, cy = cur / s;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        int nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || nx >= s || ny < 0 || ny >= s) continue;
                        int nidx = ny * s + nx;
                        if (!seen[nidx] && q.levels[nidx] == level) {
                            seen[nidx] = true;
                            stack.push_back(nidx);
                        }
                    }
            }
            m[level - 1][size - 1] += 1.0;
        }
    return m;
}

// Dependence counts: for each pixel, the number of neighbours within Chebyshev
// distance delta whose level differs by at most alpha. Dependence 0 is a valid
// column, so the matrix has (2*delta+1)^2 columns indexed by j directly.
inline Matrix gldm(const QuantizedWindow& q, int delta, int alpha) {
    if (delta < 1 || delta > 3) throw std::invalid_argument("gldm distance must be 1..3");
    if (alpha < 0 || alpha > 2) throw std::invalid_argument("gldm cutoff must be 0..2");
    const int s = q.side, Ng = QuantizedWindow::Ng;
    const int maxdep = (2 * delta + 1) * (2 * delta + 1) - 1;
    Matrix m(Ng, std::vector<double>(maxdep + 1, 0.0));
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) {
            int level = q.levels[y * s + x];
            int dep = 0;
            for (int dy = -delta; dy <= delta; ++dy)
                for (int dx = -delta; dx <= delta; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    int nx = x + dx, ny = y + dy;
                    if (nx < 0 || nx >= s || ny < 0 || ny >= s) continue;
                    if (std::abs(q.levels[ny * s + nx] - level) <= alpha) ++dep;
                }
            m[level - 1][dep] += 1.0;
        }
    return m;
}

struct Ngtdm {
    static constexpr int Ng = QuantizedWindow::Ng;
    std::array<double, Ng + 1> n{};  // pixel counts per level (index 1..Ng)
    std::array<double, Ng + 1> p{};  // n / total
    std::array<double, Ng + 1> s{};  // accumulated |level - neighbourhood mean|
    double total = 0;
};

inline Ngtdm ngtdm(const QuantizedWindow& q, int delta) {
    if (delta < 1 || delta > 3) throw std::invalid_argument("ngtdm distance must be 1..3");
    const int side = q.side;
    Ngtdm out;
    out.total = static_cast<double>(side) * side;
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
            int level = q.levels[y * side + x];
            double sum = 0;
            int cnt = 0;
            for (int dy = -delta; dy <= delta; ++dy)
                for (int dx = -delta; dx <= delta; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    int nx = x + dx, ny = y + dy;
                    if (nx < 0 || nx >= side || ny < 0 || ny >= side) continue;
                    sum += q.levels[ny * side + nx];
                    ++cnt;
                }
            out.n[level] += 1.0;
            if (cnt > 0) out.s[level] += std::fabs(level - sum / cnt);
        }
    for (int i = 1; i <= Ngtdm::Ng; ++i) out.p[i] = out.n[i] / out.total;
    return out;
}

// ---------------------------------------------------------------------------
// Individual features named in the reduced set
// ---------------------------------------------------------------------------

inline double feature_energy(const Window& w) {
    double e = 0;
    for (std::uint8_t v : w.values) e += static_cast<double>(v) * v;
    return e;
}

inline double feature_variance(const Window& w) {
    double mean = 0;
    for (std::uint8_t v : w.values) mean += v;
    mean /= static_cast<double>(w.values.size());
    double var = 0;
    for (std::uint8_t v : w.values) var += (v - mean) * (v - mean);
    return var / static_cast<double>(w.values.size());
}

inline constexpr double kCoarsenessCap = 1e6;

inline double feature_coarseness(const Ngtdm& t) {
    double denom = 0;
    for (int i = 1; i <= Ngtdm::Ng; ++i) denom += t.p[i] * t.s[i];
    if (denom == 0) return kCoarsenessCap;
    return std::min(1.0 / denom, kCoarsenessCap);
}

inline double feature_ldhgle(const Matrix& gldm_matrix) {
    double nz = 0, acc = 0;
    for (std::size_t i = 0; i < gldm_matrix.size(); ++i)
        for (std::size_t j = 0; j < gldm_matrix[i].size(); ++j) {
            double p = gldm_matrix[i][j];
            nz += p;
            acc += p * double((i + 1) * (i + 1)) * double(j * j);
        }
    return nz > 0 ? acc / nz : 0.0;
}

inline double feature_lahgle(const Matrix& glszm_matrix) {
    double nz = 0, acc = 0;
    for (std::size_t i = 0; i < glszm_matrix.size(); ++i)
        for (std::size_t j = 0; j < glszm_matrix[i].size(); ++j) {
            double p = glszm_matrix[i][j];
            nz += p;
            acc += p * double((i + 1) * (i + 1)) * double((j + 1) * (j + 1));
        }
    return nz > 0 ? acc / nz : 0.0;
}

// ---------------------------------------------------------------------------
// Family feature vectors
// ---------------------------------------------------------------------------

namespace detail {

inline double plog2(double p) { return p > 0 ? p * std::log2(p) : 0.0; }

inline double percentile(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    double rank = q / 100.0 * (n - 1);
    std::size_t lo = static_cast<std::size_t>(rank);
    double frac = rank - lo;
    if (lo + 1 >= n) return sorted[n - 1];
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace detail

inline const std::vector<std::string>& firstorder_feature_names() {
    static const std::vector<std::string> names = {
        "Energy", "TotalEnergy", "Entropy", "Minimum", "Percentile10", "Percentile90",
        "Maximum", "Mean", "Median", "InterquartileRange", "Range", "MeanAbsoluteDeviation",
        "RobustMeanAbsoluteDeviation", "RootMeanSquared", "Skewness", "Kurtosis", "Variance",
        "Uniformity"};
    return names;
}

inline std::vector<double> firstorder_features(const Window& w, const QuantizedWindow& q) {
    const double n = static_cast<double>(w.values.size());
    std::vector<double> sorted(w.values.begin(), w.values.end());
    std::sort(sorted.begin(), sorted.end());
    double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
    double m2 = 0, m3 = 0, m4 = 0, mad = 0;
    for (double v : sorted) {
        double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
        mad += std::fabs(d);
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    mad /= n;
    double p10 = detail::percentile(sorted, 10), p90 = detail::percentile(sorted, 90);
    double rsum = 0, rcnt = 0;
    for (double v : sorted)
        if (v >= p10 && v <= p90) {
            rsum += v;
            ++rcnt;
        }
    double rmad = 0;
    if (rcnt > 0) {
        double rmean = rsum / rcnt;
        for (double v : sorted)
            if (v >= p10 && v <= p90) rmad += std::fabs(v - rmean);
        rmad /= rcnt;
    }
    double energy = feature_energy(w);
    std::array<double, QuantizedWindow::Ng + 1> hist{};
    for (int lv : q.levels) hist[lv] += 1.0;
    double entropy = 0, uniformity = 0;
    for (int i = 1; i <= QuantizedWindow::Ng; ++i) {
        double p = hist[i] / n;
        entropy -= detail::plog2(p);
        uniformity += p * p;
    }
    double skew = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
    double kurt = m2 > 0 ? m4 / (m2 * m2) : 0.0;
    return {energy,
            energy,  // unit voxel volume
            entropy,
            sorted.front(),
            p10,
            p90,
            sorted.back(),
            mean,
            detail::percentile(sorted, 50),
            detail::percentile(sorted, 75) - detail::percentile(sorted, 25),
            sorted.back() - sorted.front(),
            mad,
            rmad,
            std::sqrt(energy / n),
            skew,
            kurt,
            feature_variance(w),
            uniformity};
}

inline const std::vector<std::string>& glcm_feature_names() {
    static const std::vector<std::string> names = {
        "Autocorrelation", "ClusterProminence", "ClusterShade", "ClusterTendency", "Contrast",
        "Correlation", "DifferenceAverage", "DifferenceEntropy", "DifferenceVariance", "Id",
        "Idm", "Idmn", "Idn", "Imc1", "Imc2", "InverseVariance", "JointAverage", "JointEnergy",
        "JointEntropy", "MaximumProbability", "SumAverage", "SumEntropy", "SumSquares",
        "SumVariance"};
    return names;
}

inline std::vector<double> glcm_features(const Matrix& counts) {
    const int Ng = QuantizedWindow::Ng;
    double total = 0;
    for (const auto& row : counts) total += std::accumulate(row.begin(), row.end(), 0.0);
    Matrix p(Ng, std::vector<double>(Ng, 0.0));
    if (total > 0)
        for (int i = 0; i < Ng; ++i)
            for (int j = 0; j < Ng; ++j) p[i][j] = counts[i][j] / total;

    std::vector<double> px(Ng, 0), py(Ng, 0);
    std::vector<double> pxy_sum(2 * Ng + 1, 0), pxy_diff(Ng, 0);
    for (int i = 0; i < Ng; ++i)
        for (int j = 0; j < Ng; ++j) {
            px[i] += p[i][j];
            py[j] += p[i][j];
            pxy_sum[i + j + 2] += p[i][j];
            pxy_diff[std::abs(i - j)] += p[i][j];
        }
    double mux = 0, muy = 0;
    for (int i = 0; i < Ng; ++i) {
        mux += (i + 1) * px[i];
        muy += (i + 1) * py[i];
    }
    double sx = 0, sy = 0;
    for (int i = 0; i < Ng; ++i) {
        sx += px[i] * ((i + 1) - mux) * ((i + 1) - mux);
        sy += py[i] * ((i + 1) - muy) * ((i + 1) - muy);
    }
    sx = std::sqrt(sx);
    sy = std::sqrt(sy);

    double autoc = 0, prom = 0, shade = 0, tend = 0, contrast = 0, corr_num = 0;
    double id = 0, idm = 0, idmn = 0, idn = 0, invvar = 0;
    double jenergy = 0, jentropy = 0, maxprob = 0, sumsq = 0;
    for (int i = 0; i < Ng; ++i)
        for (int j = 0; j < Ng; ++j) {
            double v = p[i][j];
            double ii = i + 1, jj = j + 1;
            autoc += v * ii * jj;
            double c = ii + jj - mux - muy;
            prom += v * c * c * c * c;
            shade += v * c * c * c;
            tend += v * c * c;
            contrast += v * (ii - jj) * (ii - jj);
            corr_num += v * ii * jj;
            double ad = std::fabs(ii - jj);
            id += v / (1.0 + ad);
            idm += v / (1.0 + ad * ad);
            idmn += v / (1.0 + ad * ad / (double(Ng) * Ng));
            idn += v / (1.0 + ad / Ng);
            if (i != j) invvar += v / (ad * ad);
            jenergy += v * v;
            jentropy -= detail::plog2(v);
            maxprob = std::max(maxprob, v);
            sumsq += v * (ii - mux) * (ii - mux);
        }
    double correlation = (sx > 0 && sy > 0) ? (corr_num - mux * muy) / (sx * sy) : 0.0;

    double da = 0, de = 0;
    for (int k = 0; k < Ng; ++k) {
        da += k * pxy_diff[k];
        de -= detail::plog2(pxy_diff[k]);
    }
    double dv = 0;
    for (int k = 0; k < Ng; ++k) dv += (k - da) * (k - da) * pxy_diff[k];

    double sa = 0, se = 0;
    for (int k = 2; k <= 2 * Ng; ++k) {
        sa += k * pxy_sum[k];
        se -= detail::plog2(pxy_sum[k]);
    }
    double sv = 0;
    for (int k = 2; k <= 2 * Ng; ++k) sv += (k - sa) * (k - sa) * pxy_sum[k];

    double hx = 0, hy = 0, hxy = jentropy, hxy1 = 0, hxy2 = 0;
    for (int i = 0; i < Ng; ++i) {
        hx -= detail::plog2(px[i]);
        hy -= detail::plog2(py[i]);
    }
    for (int i = 0; i < Ng; ++i)
        for (int j = 0; j < Ng; ++j) {
            double q = px[i] * py[j];
            if (q > 0) {
                if (p[i][j] > 0) hxy1 -= p[i][j] * std::log2(q);
                hxy2 -= q * std::log2(q);
            }
        }
    double imc1 = std::max(hx, hy) > 0 ? (hxy - hxy1) / std::max(hx, hy) : 0.0;
    double imc2_arg = 1.0 - std::exp(-2.0 * (hxy2 - hxy));
    double imc2 = imc2_arg > 0 ? std::sqrt(imc2_arg) : 0.0;

    return {autoc, prom, shade, tend, contrast, correlation, da, de, dv, id, idm, idmn, idn,
            imc1, imc2, invvar, mux, jenergy, jentropy, maxprob, sa, se, sumsq, sv};
}

inline const std::vector<std::string>& glrlm_feature_names() {
    static const std::vector<std::string> names = {
        "ShortRunEmphasis", "LongRunEmphasis", "GrayLevelNonUniformity",
        "GrayLevelNonUniformityNormalized", "RunLengthNonUniformity",
        "RunLengthNonUniformityNormalized", "RunPercentage", "GrayLevelVariance", "RunVariance",
        "RunEntropy", "LowGrayLevelRunEmphasis", "HighGrayLevelRunEmphasis",
        "ShortRunLowGrayLevelEmphasis", "ShortRunHighGrayLevelEmphasis",
        "LongRunLowGrayLevelEmphasis", "LongRunHighGrayLevelEmphasis"};
    return names;
}

// Shared shape for GLRLM and GLSZM: rows are gray levels, columns are run
// lengths / zone sizes starting at 1. `np_scaled` is the RunPercentage /
// ZonePercentage denominator.
inline std::vector<double> level_length_features(const Matrix& counts, double np_scaled) {
    const int Ng = static_cast<int>(counts.size());
    const int Nl = static_cast<int>(counts[0].size());
    double nz = 0;
    for (const auto& row : counts) nz += std::accumulate(row.begin(), row.end(), 0.0);
    if (nz == 0) return std::vector<double>(16, 0.0);

    double sre = 0, lre = 0, lgl = 0, hgl = 0, srlgl = 0, srhgl = 0, lrlgl = 0, lrhgl = 0;
    double gln = 0, rln = 0, glv = 0, rv = 0, rent = 0;
    double mu_i = 0, mu_j = 0;
    std::vector<double> rowsum(Ng, 0), colsum(Nl, 0);
    for (int i = 0; i < Ng; ++i)
        for (int j = 0; j < Nl; ++j) {
            double v = counts[i][j];
            if (v == 0) continue;
            double ii = i + 1, jj = j + 1;
            rowsum[i] += v;
            colsum[j] += v;
            sre += v / (jj * jj);
            lre += v * jj * jj;
            lgl += v / (ii * ii);
            hgl += v * ii * ii;
            srlgl += v / (ii * ii * jj * jj);
            srhgl += v * ii * ii / (jj * jj);
            lrlgl += v * jj * jj / (ii * ii);
            lrhgl += v * ii * ii * jj * jj;
            mu_i += v / nz * ii;
            mu_j += v / nz * jj;
            rent -= detail::plog2(v / nz);
        }
    for (double r : rowsum) gln += r * r;
    for (double c : colsum) rln += c * c;
    for (int i = 0; i < Ng; ++i)
        for (int j = 0; j < Nl; ++j) {
            double v = counts[i][j] / nz;
            if (v == 0) continue;
            glv += v * ((i + 1) - mu_i) * ((i + 1) - mu_i);
            rv += v * ((j + 1) - mu_j) * ((j + 1) - mu_j);
        }
    return {sre / nz,        lre / nz, gln / nz, gln / (nz * nz), rln / nz, rln / (nz * nz),
            nz / np_scaled,  glv,      rv,       rent,            lgl / nz, hgl / nz,
            srlgl / nz,      srhgl / nz, lrlgl / nz, lrhgl / nz};
}

inline std::vector<double> glrlm_features(const Matrix& counts, int npixels) {
    return level_length_features(counts, 4.0 * npixels);  // four accumulated directions
}

inline const std::vector<std::string>& glszm_feature_names() {
    static const std::vector<std::string> names = {
        "SmallAreaEmphasis", "LargeAreaEmphasis", "GrayLevelNonUniformity",
        "GrayLevelNonUniformityNormalized", "SizeZoneNonUniformity",
        "SizeZoneNonUniformityNormalized", "ZonePercentage", "GrayLevelVariance", "ZoneVariance",
        "ZoneEntropy", "LowGrayLevelZoneEmphasis", "HighGrayLevelZoneEmphasis",
        "SmallAreaLowGrayLevelEmphasis", "SmallAreaHighGrayLevelEmphasis",
        "LargeAreaLowGrayLevelEmphasis", "LargeAreaHighGrayLevelEmphasis"};
    return names;
}

inline std::vector<double> glszm_features(const Matrix& counts, int npixels) {
    auto v = level_length_features(counts, static_cast<double>(npixels));
    // keep LAHGLE bit-identical with the standalone reduced-set function
    v[15] = feature_lahgle(counts);
    return v;
}

inline const std::vector<std::string>& gldm_feature_names() {
    static const std::vector<std::string> names = {
        "SmallDependenceEmphasis", "LargeDependenceEmphasis", "GrayLevelNonUniformity",
        "DependenceNonUniformity", "DependenceNonUniformityNormalized", "GrayLevelVariance",
        "DependenceVariance", "DependenceEntropy", "LowGrayLevelEmphasis", "HighGrayLevelEmphasis",
        "SmallDependenceLowGrayLevelEmphasis", "SmallDependenceHighGrayLevelEmphasis",
        "LargeDependenceLowGrayLevelEmphasis", "LargeDependenceHighGrayLevelEmphasis"};
    return names;
}

// Dependence columns start at 0; reciprocal (small-dependence) terms weight by
// 1/(j+1)^2 so the j=0 column stays finite.
inline std::vector<double> gldm_features(const Matrix& counts) {
    const int Ng = static_cast<int>(counts.size());
    const int Nd = static_cast<int>(counts[0].size());
    double nz = 0;
    for (const auto& row : counts) nz += std::accumulate(row.begin(), row.end(), 0.0);
    if (nz == 0) return std::vector<double>(14, 0.0);

    double sde = 0, lde = 0, lgl = 0, hgl = 0, sdlgl = 0, sdhgl = 0, ldlgl = 0;
    double gln = 0, dn = 0, dent = 0;
    double mu_i = 0, mu_j = 0;
    std::vector<double> rowsum(Ng, 0), colsum(Nd, 0);
    for (int i = 0; i < Ng; ++i)
        for (int j = 0; j < Nd; ++j) {
            double v = counts[i][j];
            if (v == 0) continue;
            double ii = i + 1, jr = j + 1.0;  // reciprocal index
            rowsum[i] += v;
            colsum[j] += v;
            sde += v / (jr * jr);
            lde += v * double(j) * j;
            lgl += v / (ii * ii);
            hgl += v * ii * ii;
            sdlgl += v / (ii * ii * jr * jr);
            sdhgl += v * ii * ii / (jr * jr);
            ldlgl += v * double(j) * j / (ii * ii);
            mu_i += v / nz * ii;
            mu_j += v / nz * j;
            dent -= detail::plog2(v / nz);
        }
    for (double r : rowsum) gln += r * r;
    for (double c : colsum) dn += c * c;
    double glv = 0, dv = 0;
    for (int i = 0; i < Ng; ++i)
        for (int j = 0; j < Nd; ++j) {
            double v = counts[i][j] / nz;
            if (v == 0) continue;
            glv += v * ((i + 1) - mu_i) * ((i + 1) - mu_i);
            dv += v * (j - mu_j) * (j - mu_j);
        }
    return {sde / nz,  lde / nz,  gln / nz, dn / nz, dn / (nz * nz), glv, dv,
            dent,      lgl / nz,  hgl / nz, sdlgl / nz, sdhgl / nz,  ldlgl / nz,
            feature_ldhgle(counts)};
}

inline const std::vector<std::string>& ngtdm_feature_names() {
    static const std::vector<std::string> names = {"Coarseness", "Contrast", "Busyness",
                                                   "Complexity", "Strength"};
    return names;
}

inline std::vector<double> ngtdm_features(const Ngtdm& t) {
    const int Ng = Ngtdm::Ng;
    double coarseness = feature_coarseness(t);
    int ngp = 0;
    double ssum = 0, nvp = 0;
    for (int i = 1; i <= Ng; ++i) {
        if (t.p[i] > 0) ++ngp;
        ssum += t.s[i];
        nvp += t.n[i];
    }
    double contrast = 0;
    if (ngp > 1 && nvp > 0) {
        double acc = 0;
        for (int i = 1; i <= Ng; ++i)
            for (int j = 1; j <= Ng; ++j)
                if (t.p[i] > 0 && t.p[j] > 0) acc += t.p[i] * t.p[j] * (i - j) * (i - j);
        contrast = acc / (double(ngp) * (ngp - 1)) * (ssum / nvp);
    }
    double busy_den = 0;
    for (int i = 1; i <= Ng; ++i)
        for (int j = 1; j <= Ng; ++j)
            if (t.p[i] > 0 && t.p[j] > 0) busy_den += std::fabs(i * t.p[i] - j * t.p[j]);
    double busy_num = 0;
    for (int i = 1; i <= Ng; ++i) busy_num += t.p[i] * t.s[i];
    double busyness = busy_den > 0 ? busy_num / busy_den : 0.0;
    double complexity = 0;
    if (nvp > 0) {
        for (int i = 1; i <= Ng; ++i)
            for (int j = 1; j <= Ng; ++j)
                if (t.p[i] > 0 && t.p[j] > 0)
                    complexity += std::fabs(i - j) * (t.p[i] * t.s[i] + t.p[j] * t.s[j]) /
                                  (t.p[i] + t.p[j]);
        complexity /= nvp;
    }
    double strength = 0;
    if (ssum > 0) {
        for (int i = 1; i <= Ng; ++i)
            for (int j = 1; j <= Ng; ++j)
                if (t.p[i] > 0 && t.p[j] > 0) strength += (t.p[i] + t.p[j]) * (i - j) * (i - j);
        strength /= ssum;
    }
    return {coarseness, contrast, busyness, complexity, strength};
}

// ---------------------------------------------------------------------------
// Feature manifest and per-candidate extraction
// ---------------------------------------------------------------------------

struct FeatureDef {
    std::string channel;  // gray | haem | rnascope
    int window = 0;       // 7 | 11
    std::string family;   // firstorder | glcm | glrlm | glszm | gldm | ngtdm
    std::string name;
    int delta = 0;  // 0 when not applicable
    int alpha = -1; // -1 when not applicable
};

inline std::string feature_column_name(const FeatureDef& d) {
    std::string s = d.channel + "_w" + std::to_string(d.window) + "_" + d.family;
    if (d.delta > 0) s += "_d" + std::to_string(d.delta);
    if (d.alpha >= 0) s += "_a" + std::to_string(d.alpha);
    return s + "_" + d.name;
}

inline const std::vector<std::string>& feature_channels() {
    static const std::vector<std::string> c = {"gray", "haem", "rnascope"};
    return c;
}

inline std::vector<FeatureDef> full_manifest() {
    std::vector<FeatureDef> out;
    for (const auto& ch : feature_channels())
        for (int win : {7, 11}) {
            for (const auto& n : firstorder_feature_names()) out.push_back({ch, win, "firstorder", n, 0, -1});
            for (int d = 1; d <= 3; ++d)
                for (const auto& n : glcm_feature_names()) out.push_back({ch, win, "glcm", n, d, -1});
            for (const auto& n : glrlm_feature_names()) out.push_back({ch, win, "glrlm", n, 0, -1});
            for (const auto& n : glszm_feature_names()) out.push_back({ch, win, "glszm", n, 0, -1});
            for (int d = 1; d <= 3; ++d)
                for (int a = 0; a <= 2; ++a)
                    for (const auto& n : gldm_feature_names()) out.push_back({ch, win, "gldm", n, d, a});
            for (int d = 1; d <= 3; ++d)
                for (const auto& n : ngtdm_feature_names()) out.push_back({ch, win, "ngtdm", n, d, -1});
        }
    return out;
}

inline std::vector<FeatureDef> reduced_manifest() {
    std::vector<FeatureDef> out;
    for (const auto& ch : feature_channels())
        for (int win : {7, 11}) {
            out.push_back({ch, win, "firstorder", "Energy", 0, -1});
            out.push_back({ch, win, "firstorder", "Variance", 0, -1});
            out.push_back({ch, win, "ngtdm", "Coarseness", 3, -1});
            out.push_back({ch, win, "gldm", "LargeDependenceHighGrayLevelEmphasis", 3, 2});
        }
    return out;
}

struct ChannelSet {
    const ChannelImage* gray = nullptr;
    const ChannelImage* haem = nullptr;
    const ChannelImage* rnascope = nullptr;

    const ChannelImage& by_name(const std::string& name) const {
        if (name == "gray") return *gray;
        if (name == "haem") return *haem;
        return *rnascope;
    }
};

inline std::vector<double> extract_full(const ChannelSet& channels, int cx, int cy) {
    std::vector<double> out;
    out.reserve(1578);
    for (const auto& ch : feature_channels()) {
        const ChannelImage& img = channels.by_name(ch);
        for (int win : {7, 11}) {
            Window w = extract_window(img, cx, cy, win);
            QuantizedWindow q = quantize(w);
            auto fo = firstorder_features(w, q);
            out.insert(out.end(), fo.begin(), fo.end());
            for (int d = 1; d <= 3; ++d) {
                auto f = glcm_features(glcm(q, d));
                out.insert(out.end(), f.begin(), f.end());
            }
            auto rl = glrlm_features(glrlm(q), win * win);
            out.insert(out.end(), rl.begin(), rl.end());
            auto sz = glszm_features(glszm(q), win * win);
            out.insert(out.end(), sz.begin(), sz.end());
            for (int d = 1; d <= 3; ++d)
                for (int a = 0; a <= 2; ++a) {
                    auto f = gldm_features(gldm(q, d, a));
                    out.insert(out.end(), f.begin(), f.end());
                }
            for (int d = 1; d <= 3; ++d) {
                auto f = ngtdm_features(ngtdm(q, d));
                out.insert(out.end(), f.begin(), f.end());
            }
        }
    }
    return out;
}

inline std::vector<double> extract_reduced(const ChannelSet& channels, int cx, int cy) {
    std::vector<double> out;
    out.reserve(24);
    for (const auto& ch : feature_channels()) {
        const ChannelImage& img = channels.by_name(ch);
        for (int win : {7, 11}) {
            Window w = extract_window(img, cx, cy, win);
            QuantizedWindow q = quantize(w);
            out.push_back(feature_energy(w));
            out.push_back(feature_variance(w));
            out.push_back(feature_coarseness(ngtdm(q, 3)));
            out.push_back(feature_ldhgle(gldm(q, 3, 2)));
        }
    }
    return out;
}

}  // namespace rnadot
