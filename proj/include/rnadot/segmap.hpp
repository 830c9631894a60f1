#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <vector>

#include "rnadot/candidates.hpp"
#include "rnadot/image.hpp"

namespace rnadot {

using SegmentationMap = ChannelImage;

struct Detection {
    double x = 0;
    double y = 0;
    int area = 0;
    std::uint8_t peak = 0;
};

// Classifier margins squashed through a logistic into 8-bit confidences; each
// candidate paints its exclusion disc, overlaps keep the maximum.
inline SegmentationMap render_map(const std::vector<Candidate>& cands,
                                  const std::vector<double>& margins, int width, int height) {
    if (cands.size() != margins.size()) throw std::invalid_argument("render_map: length mismatch");
    SegmentationMap map(width, height, 0);
    for (std::size_t i = 0; i < cands.size(); ++i) {
        double conf = 255.0 / (1.0 + std::exp(-margins[i]));
        std::uint8_t v = static_cast<std::uint8_t>(std::clamp<long>(std::lround(conf), 0, 255));
        int r = cands[i].radius;
        for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx) {
                if (dx * dx + dy * dy > r * r) continue;
                int px = cands[i].x + dx, py = cands[i].y + dy;
                if (px < 0 || px >= width || py < 0 || py >= height) continue;
                map.at(px, py) = std::max(map.at(px, py), v);
            }
    }
    return map;
}

namespace detail {

// Plateau-merged local maxima of the confidence map, restricted to pixels at
// or above the gray threshold. One seed per plateau, at the plateau pixel
// nearest its centroid.
inline std::vector<std::pair<int, int>> local_maxima_seeds(const SegmentationMap& map,
                                                           std::uint8_t gray_threshold) {
    const int w = map.width, h = map.height;
    std::vector<int> comp(static_cast<std::size_t>(w) * h, -1);
    std::vector<std::pair<int, int>> seeds;
    std::vector<int> stack;
    int ncomp = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int idx = y * w + x;
            if (comp[idx] >= 0 || map.data[idx] < gray_threshold) continue;
            const std::uint8_t v = map.data[idx];
            // flood the equal-value plateau, checking for any higher neighbour
            bool is_max = true;
            std::vector<int> plateau;
            comp[idx] = ncomp;
            stack.push_back(idx);
            while (!stack.empty()) {
                int cur = stack.back();
                stack.pop_back();
                plateau.push_back(cur);
                int cx = cur % w, cy = cur / w;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        int nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                        int nidx = ny * w + nx;
                        if (map.data[nidx] > v) is_max = false;
                        if (map.data[nidx] == v && comp[nidx] < 0) {
                            comp[nidx] = ncomp;
                            stack.push_back(nidx);
                        }
                    }
            }
            ++ncomp;
            if (!is_max) continue;
            double sx = 0, sy = 0;
            for (int p : plateau) {
                sx += p % w;
                sy += p / w;
            }
            double cx = sx / plateau.size(), cy = sy / plateau.size();
            int best = plateau[0];
            double bestd = 1e18;
            std::sort(plateau.begin(), plateau.end());
            for (int p : plateau) {
                double dx = p % w - cx, dy = p / w - cy;
                double dd = dx * dx + dy * dy;
                if (dd < bestd) {
                    bestd = dd;
                    best = p;
                }
            }
            seeds.emplace_back(best % w, best / w);
        }
    return seeds;
}

}  // namespace detail

// Binarize at the gray threshold, split touching blobs by watershed flooding
// from local-maximum seeds, drop regions below the area threshold, and report
// confidence-weighted centroids.
inline std::vector<Detection> detect(const SegmentationMap& map, std::uint8_t gray_threshold,
                                     int area_threshold) {
    if (area_threshold < 1) throw std::invalid_argument("detect: area_threshold must be >= 1");
    const int w = map.width, h = map.height;
    auto seeds = detail::local_maxima_seeds(map, gray_threshold);

    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
    struct QEntry {
        std::uint8_t conf;
        std::uint64_t order;
        int idx;
        int lab;
    };
    auto cmp = [](const QEntry& a, const QEntry& b) {
        if (a.conf != b.conf) return a.conf < b.conf;  // higher confidence first
        return a.order > b.order;                      // then FIFO
    };
    std::priority_queue<QEntry, std::vector<QEntry>, decltype(cmp)> pq(cmp);
    std::uint64_t order = 0;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        int idx = seeds[s].second * w + seeds[s].first;
        pq.push({map.data[idx], order++, idx, static_cast<int>(s)});
    }
    while (!pq.empty()) {
        QEntry e = pq.top();
        pq.pop();
        if (label[e.idx] >= 0) continue;
        label[e.idx] = e.lab;
        int cx = e.idx % w, cy = e.idx / w;
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                int nx = cx + dx, ny = cy + dy;
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                int nidx = ny * w + nx;
                if (label[nidx] >= 0 || map.data[nidx] < gray_threshold) continue;
                pq.push({map.data[nidx], order++, nidx, e.lab});
            }
    }

    struct Acc {
        double wsum = 0, xsum = 0, ysum = 0;
        int area = 0;
        std::uint8_t peak = 0;
    };
    std::vector<Acc> acc(seeds.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int l = label[y * w + x];
            if (l < 0) continue;
            double c = map.at(x, y);
            acc[l].wsum += c;
            acc[l].xsum += c * x;
            acc[l].ysum += c * y;
            acc[l].area += 1;
            acc[l].peak = std::max(acc[l].peak, map.at(x, y));
        }
    std::vector<Detection> out;
    for (const auto& a : acc) {
        if (a.area < area_threshold || a.wsum <= 0) continue;
        out.push_back({a.xsum / a.wsum, a.ysum / a.wsum, a.area, a.peak});
    }
    std::sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    return out;
}

}  // namespace rnadot
