#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "rnadot/image.hpp"

namespace rnadot {

// ---------------------------------------------------------------------------
// Gaussian blur, 5x5, sigma 1.1, reflect-padded, rounded back to 8-bit.
// ---------------------------------------------------------------------------

inline std::array<double, 25> gaussian5_kernel(double sigma = 1.1) {
    std::array<double, 25> k{};
    double sum = 0;
    for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx) {
            double w = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            k[(dy + 2) * 5 + (dx + 2)] = w;
            sum += w;
        }
    for (auto& w : k) w /= sum;
    return k;
}

inline ChannelImage gaussian_blur5(const ChannelImage& img, double sigma = 1.1) {
    const std::array<double, 25> kernel = gaussian5_kernel(sigma);
    ChannelImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0;
            for (int dy = -2; dy <= 2; ++dy)
                for (int dx = -2; dx <= 2; ++dx)
                    acc += kernel[(dy + 2) * 5 + (dx + 2)] * img.at_reflect(x + dx, y + dy);
            long v = std::lround(acc);
            out.at(x, y) = static_cast<std::uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Histogram threshold selection on the blurred RNAscope plane.
// Values above 250 are treated as non-tissue (white background).
// ---------------------------------------------------------------------------

inline std::uint8_t select_threshold(const ChannelImage& blurred_rnascope, int decrement = 8) {
    std::array<std::size_t, 251> hist{};
    std::size_t tissue = 0;
    for (std::uint8_t v : blurred_rnascope.data) {
        if (v <= 250) {
            ++hist[v];
            ++tissue;
        }
    }
    if (tissue == 0) throw std::runtime_error("no tissue");
    int thresh = 0;
    std::size_t best = 0;
    for (int v = 0; v <= 250; ++v) {
        if (hist[v] > best) {  // tie keeps the lowest value
            best = hist[v];
            thresh = v;
        }
    }
    std::size_t below = 0;
    for (int v = 0; v < thresh; ++v) below += hist[v];
    // more than half of the tissue darker than the peak: tighten once by 8
    if (below * 2 > tissue) thresh = std::max(0, thresh - decrement);
    return static_cast<std::uint8_t>(thresh);
}

// Binary mask of heavily stained areas: 1 iff value < 100.
inline ChannelImage dark_regions(const ChannelImage& blurred_gray, int cutoff = 100) {
    ChannelImage mask(blurred_gray.width, blurred_gray.height);
    for (std::size_t i = 0; i < blurred_gray.data.size(); ++i)
        mask.data[i] = blurred_gray.data[i] < cutoff ? 1 : 0;
    return mask;
}

inline ChannelImage threshold_below(const ChannelImage& img, std::uint8_t thresh) {
    ChannelImage mask(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i) mask.data[i] = img.data[i] < thresh ? 1 : 0;
    return mask;
}

// ---------------------------------------------------------------------------
// Suzuki-Abe border following (8-connectivity), outer borders and holes.
// ---------------------------------------------------------------------------

struct ContourPoint {
    int x = 0;
    int y = 0;
    bool operator==(const ContourPoint&) const = default;
};

struct Contour {
    std::vector<ContourPoint> points;
    enum Kind { Outer, Hole } kind = Outer;
};

namespace detail {

// Clockwise 8-neighbour ring starting at east.
inline constexpr int kDx8[8] = {1, 1, 0, -1, -1, -1, 0, 1};
inline constexpr int kDy8[8] = {0, 1, 1, 1, 0, -1, -1, -1};

inline int dir_from_to(int x0, int y0, int x1, int y1) {
    for (int d = 0; d < 8; ++d)
        if (x0 + kDx8[d] == x1 && y0 + kDy8[d] == y1) return d;
    return -1;
}

}  // namespace detail

// Border following after Suzuki & Abe. The scan is row-major; each border is
// traced clockwise in image coordinates (y down).
inline std::vector<Contour> find_contours(const ChannelImage& mask) {
    const int w = mask.width, h = mask.height;
    std::vector<int> f(static_cast<std::size_t>(w) * h, 0);
    for (std::size_t i = 0; i < mask.data.size(); ++i) f[i] = mask.data[i] ? 1 : 0;
    auto F = [&](int x, int y) -> int& { return f[static_cast<std::size_t>(y) * w + x]; };
    auto in = [&](int x, int y) { return x >= 0 && x < w && y >= 0 && y < h; };

    std::vector<Contour> contours;
    int nbd = 1;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int fv = F(x, y);
            bool outer = (fv == 1) && (x == 0 || F(x - 1, y) == 0);
            bool hole = (fv >= 1) && (x == w - 1 || F(x + 1, y) == 0);
            if (!outer && !hole) continue;

            ++nbd;
            Contour c;
            c.kind = outer ? Contour::Outer : Contour::Hole;
            int x2 = outer ? x - 1 : x + 1;  // starting probe pixel
            int y2 = y;

            // Find the first nonzero pixel clockwise from (x2,y2) around (x,y).
            int start = detail::dir_from_to(x, y, x2, y2);
            int d = -1;
            for (int k = 1; k <= 8; ++k) {
                int cand = (start + k) % 8;
                int nx = x + detail::kDx8[cand], ny = y + detail::kDy8[cand];
                if (in(nx, ny) && F(nx, ny) != 0) {
                    d = cand;
                    break;
                }
            }
            if (d < 0) {
                // isolated pixel
                F(x, y) = -nbd;
                c.points.push_back({x, y});
                contours.push_back(std::move(c));
                continue;
            }

            int px = x + detail::kDx8[d], py = y + detail::kDy8[d];  // previous pixel
            int cx = x, cy = y;                                      // current pixel
            const int x0 = x, y0 = y, fx = px, fy = py;              // termination anchors
            while (true) {
                // Search counter-clockwise from the previous pixel for the next
                // nonzero neighbour; remember if the east pixel was examined as 0.
                int from = detail::dir_from_to(cx, cy, px, py);
                int next = -1;
                bool east_zero = false;
                for (int k = 1; k <= 8; ++k) {
                    int cand = (from - k + 16) % 8;
                    int nx = cx + detail::kDx8[cand], ny = cy + detail::kDy8[cand];
                    if (!in(nx, ny) || F(nx, ny) == 0) {
                        if (cand == 0) east_zero = true;  // east == (x+1, y)
                        continue;
                    }
                    next = cand;
                    break;
                }
                c.points.push_back({cx, cy});
                if (east_zero)
                    F(cx, cy) = -nbd;
                else if (F(cx, cy) == 1)
                    F(cx, cy) = nbd;

                int nx = cx + detail::kDx8[next], ny = cy + detail::kDy8[next];
                if (nx == x0 && ny == y0 && cx == fx && cy == fy) break;
                px = cx;
                py = cy;
                cx = nx;
                cy = ny;
            }
            contours.push_back(std::move(c));
        }
    }
    return contours;
}

// ---------------------------------------------------------------------------
// Candidate mask and extraction, eq-driven exclusion radii.
// ---------------------------------------------------------------------------

struct CandidateMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;
    std::uint8_t thresh = 0;

    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

struct Candidate {
    int x = 0;
    int y = 0;
    std::uint8_t intensity = 0;
    int radius = 0;
};

inline int exclusion_radius(int intensity, int thresh) {
    return std::max(intensity - thresh + 64, 0) / 32;
}

namespace detail {

// Pixels enclosed by a contour, boundary included. Scanline even-odd fill over
// the boundary polyline, then the boundary pixels are OR-ed in.
inline void for_each_filled(const Contour& c, int w, int h, const std::function<void(int, int)>& visit) {
    if (c.points.empty()) return;
    int ymin = c.points[0].y, ymax = c.points[0].y;
    for (const auto& p : c.points) {
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    std::vector<std::vector<bool>> done(ymax - ymin + 1, std::vector<bool>(w, false));
    const std::size_t n = c.points.size();
    for (int y = ymin; y <= ymax; ++y) {
        std::vector<double> xs;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& a = c.points[i];
            const auto& b = c.points[(i + 1) % n];
            if (a.y == b.y) continue;
            int lo = std::min(a.y, b.y), hi = std::max(a.y, b.y);
            if (y < lo || y >= hi) continue;  // half-open rule
            double t = double(y - a.y) / double(b.y - a.y);
            xs.push_back(a.x + t * (b.x - a.x));
        }
        std::sort(xs.begin(), xs.end());
        for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
            int xa = static_cast<int>(std::ceil(xs[i]));
            int xb = static_cast<int>(std::floor(xs[i + 1]));
            for (int x = std::max(0, xa); x <= std::min(w - 1, xb); ++x) {
                if (!done[y - ymin][x]) {
                    done[y - ymin][x] = true;
                    visit(x, y);
                }
            }
        }
    }
    for (const auto& p : c.points) {
        if (p.x < 0 || p.x >= w || p.y < 0 || p.y >= h) continue;
        if (!done[p.y - ymin][p.x]) {
            done[p.y - ymin][p.x] = true;
            visit(p.x, p.y);
        }
    }
}

}  // namespace detail

// Background is the selected threshold; RNAscope contour interiors carry their
// blurred-plane values (clamped below thresh), dark-region interiors a constant
// thresh - dark_offset. Overlaps keep the minimum.
inline CandidateMask build_mask(const ChannelImage& blurred_rnascope, std::uint8_t thresh,
                                const std::vector<Contour>& rna_contours,
                                const std::vector<Contour>& dark_contours, int dark_offset = 11) {
    CandidateMask m;
    m.width = blurred_rnascope.width;
    m.height = blurred_rnascope.height;
    m.thresh = thresh;
    m.data.assign(static_cast<std::size_t>(m.width) * m.height, thresh);
    for (const auto& c : rna_contours) {
        detail::for_each_filled(c, m.width, m.height, [&](int x, int y) {
            int v = blurred_rnascope.at(x, y);
            if (v >= thresh) v = std::max(0, thresh - 1);
            m.at(x, y) = static_cast<std::uint8_t>(std::min<int>(m.at(x, y), v));
        });
    }
    const std::uint8_t dark_value = static_cast<std::uint8_t>(std::max(0, thresh - dark_offset));
    for (const auto& c : dark_contours) {
        detail::for_each_filled(c, m.width, m.height, [&](int x, int y) {
            m.at(x, y) = std::min(m.at(x, y), dark_value);
        });
    }
    return m;
}

// Greedy extraction: repeatedly take the darkest remaining mask pixel (ties by
// row-major order), then paint its exclusion disc back to the threshold value.
inline std::vector<Candidate> extract_candidates(CandidateMask mask) {
    std::vector<Candidate> out;
    const int w = mask.width, h = mask.height;

    // Bucket queue over the 256 possible values keeps the global-min scan cheap.
    std::array<std::vector<std::uint32_t>, 256> buckets;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::uint8_t v = mask.at(x, y);
            if (v < mask.thresh) buckets[v].push_back(static_cast<std::uint32_t>(y) * w + x);
        }
    for (int v = 0; v < mask.thresh; ++v) {
        for (std::size_t qi = 0; qi < buckets[v].size(); ++qi) {
            std::uint32_t idx = buckets[v][qi];
            int x = idx % w, y = idx / w;
            if (mask.data[idx] != v) continue;  // repainted or demoted since queueing
            Candidate c;
            c.x = x;
            c.y = y;
            c.intensity = static_cast<std::uint8_t>(v);
            c.radius = exclusion_radius(v, mask.thresh);
            out.push_back(c);
            for (int dy = -c.radius; dy <= c.radius; ++dy)
                for (int dx = -c.radius; dx <= c.radius; ++dx) {
                    if (dx * dx + dy * dy > c.radius * c.radius) continue;
                    int px = x + dx, py = y + dy;
                    if (px < 0 || px >= w || py < 0 || py >= h) continue;
                    mask.at(px, py) = mask.thresh;
                }
        }
        buckets[v].clear();
    }
    return out;
}

}  // namespace rnadot
