// Naive, independent reimplementations of the texture matrix builders, used
// only as test oracles. Deliberately written as direct double/triple loops
// with no shared code with the library implementations.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rnadot/texture.hpp"

namespace oracle {

struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed * 2654435761u + 1) {}
    std::uint64_t next() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return state;
    }
    int below(int n) { return static_cast<int>(next() % n); }
};

inline rnadot::Window random_window(int side, Rng& rng) {
    rnadot::Window w;
    w.side = side;
    w.values.resize(static_cast<std::size_t>(side) * side);
    for (auto& v : w.values) v = static_cast<std::uint8_t>(rng.below(256));
    return w;
}

// Structured windows: piecewise-constant blocks so runs/zones are nontrivial.
inline rnadot::Window blocky_window(int side, Rng& rng) {
    rnadot::Window w;
    w.side = side;
    w.values.resize(static_cast<std::size_t>(side) * side);
    int nvals = 2 + rng.below(5);
    std::vector<std::uint8_t> palette(nvals);
    for (auto& p : palette) p = static_cast<std::uint8_t>(rng.below(256));
    int bs = 1 + rng.below(3);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x)
            w.values[y * side + x] = palette[((x / bs) + (y / bs) * 3) % nvals];
    return w;
}

inline std::vector<int> quantize_levels(const rnadot::Window& w) {
    std::vector<int> q(w.values.size());
    for (std::size_t i = 0; i < w.values.size(); ++i) q[i] = int(w.values[i]) / 8 + 1;
    return q;
}

inline rnadot::Matrix glcm(const std::vector<int>& lv, int side, int delta) {
    rnadot::Matrix m(32, std::vector<double>(32, 0.0));
    const int offs[4][2] = {{delta, 0}, {delta, delta}, {0, delta}, {-delta, delta}};
    for (int y1 = 0; y1 < side; ++y1)
        for (int x1 = 0; x1 < side; ++x1)
            for (int y2 = 0; y2 < side; ++y2)
                for (int x2 = 0; x2 < side; ++x2)
                    for (const auto& o : offs)
                        if (x2 - x1 == o[0] && y2 - y1 == o[1]) {
                            int a = lv[y1 * side + x1] - 1, b = lv[y2 * side + x2] - 1;
                            m[a][b] += 1;
                            m[b][a] += 1;
                        }
    return m;
}

inline rnadot::Matrix glrlm(const std::vector<int>& lv, int side) {
    rnadot::Matrix m(32, std::vector<double>(side, 0.0));
    const int dirs[4][2] = {{1, 0}, {0, 1}, {1, 1}, {-1, 1}};
    for (const auto& d : dirs) {
        // every pixel that has no same-level predecessor along -d starts a run
        for (int y = 0; y < side; ++y)
            for (int x = 0; x < side; ++x) {
                int level = lv[y * side + x];
                int bx = x - d[0], by = y - d[1];
                bool starts = bx < 0 || bx >= side || by < 0 || by >= side ||
                              lv[by * side + bx] != level;
                if (!starts) continue;
                int len = 0, cx = x, cy = y;
                while (cx >= 0 && cx < side && cy >= 0 && cy < side &&
                       lv[cy * side + cx] == level) {
                    ++len;
                    cx += d[0];
                    cy += d[1];
                }
                m[level - 1][len - 1] += 1;
            }
    }
    return m;
}

inline rnadot::Matrix glszm(const std::vector<int>& lv, int side) {
    rnadot::Matrix m(32, std::vector<double>(side * side, 0.0));
    std::vector<int> zone(lv.size(), -1);
    int nzones = 0;
    for (std::size_t start = 0; start < lv.size(); ++start) {
        if (zone[start] >= 0) continue;
        // repeated full-grid sweeps until the zone stops growing
        zone[start] = nzones;
        bool grew = true;
        while (grew) {
            grew = false;
            for (int y = 0; y < side; ++y)
                for (int x = 0; x < side; ++x) {
                    if (zone[y * side + x] != nzones) continue;
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            int nx = x + dx, ny = y + dy;
                            if (nx < 0 || nx >= side || ny < 0 || ny >= side) continue;
                            int ni = ny * side + nx;
                            if (zone[ni] < 0 && lv[ni] == lv[start]) {
                                zone[ni] = nzones;
                                grew = true;
                            }
                        }
                }
        }
        int size = 0;
        for (int z : zone)
            if (z == nzones) ++size;
        m[lv[start] - 1][size - 1] += 1;
        ++nzones;
    }
    return m;
}

inline rnadot::Matrix gldm(const std::vector<int>& lv, int side, int delta, int alpha) {
    const int maxdep = (2 * delta + 1) * (2 * delta + 1) - 1;
    rnadot::Matrix m(32, std::vector<double>(maxdep + 1, 0.0));
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
            int dep = 0;
            for (int ny = 0; ny < side; ++ny)
                for (int nx = 0; nx < side; ++nx) {
                    if (nx == x && ny == y) continue;
                    if (std::abs(nx - x) <= delta && std::abs(ny - y) <= delta &&
                        std::abs(lv[ny * side + nx] - lv[y * side + x]) <= alpha)
                        ++dep;
                }
            m[lv[y * side + x] - 1][dep] += 1;
        }
    return m;
}

inline rnadot::Ngtdm ngtdm(const std::vector<int>& lv, int side, int delta) {
    rnadot::Ngtdm t;
    t.total = double(side) * side;
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
            double sum = 0;
            int cnt = 0;
            for (int ny = 0; ny < side; ++ny)
                for (int nx = 0; nx < side; ++nx) {
                    if (nx == x && ny == y) continue;
                    if (std::abs(nx - x) <= delta && std::abs(ny - y) <= delta) {
                        sum += lv[ny * side + nx];
                        ++cnt;
                    }
                }
            int level = lv[y * side + x];
            t.n[level] += 1;
            if (cnt > 0) t.s[level] += std::fabs(level - sum / cnt);
        }
    for (int i = 1; i <= rnadot::Ngtdm::Ng; ++i) t.p[i] = t.n[i] / t.total;
    return t;
}

inline bool matrices_equal(const rnadot::Matrix& a, const rnadot::Matrix& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != b[i].size()) return false;
        for (std::size_t j = 0; j < a[i].size(); ++j)
            if (a[i][j] != b[i][j]) return false;
    }
    return true;
}

}  // namespace oracle
