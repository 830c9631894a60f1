#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rnadot/image.hpp"
#include "rnadot/stain.hpp"

namespace rnadot {

struct SynthConfig {
    std::uint64_t seed = 0;
    int side = 480;
    int dot_count = 80;
    int dot_radius_min = 1;
    int dot_radius_max = 3;
    double dot_hue_jitter = 0.08;       // haem admixture jitter on transcripts
    double dot_intensity_min = 0.9;     // RNAscope concentration range
    double dot_intensity_max = 1.5;
    int nucleus_count = 12;
    double nucleus_axis_min = 8.0;
    double nucleus_axis_max = 20.0;
    double nucleus_intensity = 0.85;    // haem concentration inside nuclei
    double background_haem = 0.10;      // base tissue tint (haem concentration)
    double background_rnascope = 0.04;  // keeps the RNAscope plane in tissue range
    double noise_amplitude = 0.03;      // value-noise amplitude on concentrations
    StainMatrix stains = default_stain_matrix();
};

namespace detail {

struct SynthRng {
    std::uint64_t state;
    explicit SynthRng(std::uint64_t seed) : state(seed ^ 0x2545f4914f6cdd1dull) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d4a77c735f7ccfull;
        return z ^ (z >> 31);
    }
    double uniform() { return (next() >> 11) * (1.0 / 9007199254740992.0); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int uniform_int(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }
};

// Bilinear value noise on a 16-pixel lattice, in [-1, 1].
struct ValueNoise {
    int cells;
    std::vector<double> grid;
    static constexpr int kCell = 16;

    ValueNoise(int side, SynthRng& rng) {
        cells = side / kCell + 2;
        grid.resize(static_cast<std::size_t>(cells) * cells);
        for (auto& g : grid) g = rng.uniform(-1.0, 1.0);
    }
    double at(int x, int y) const {
        int gx = x / kCell, gy = y / kCell;
        double fx = double(x % kCell) / kCell, fy = double(y % kCell) / kCell;
        auto g = [&](int a, int b) { return grid[static_cast<std::size_t>(b) * cells + a]; };
        double top = g(gx, gy) * (1 - fx) + g(gx + 1, gy) * fx;
        double bot = g(gx, gy + 1) * (1 - fx) + g(gx + 1, gy + 1) * fx;
        return top * (1 - fy) + bot * fy;
    }
};

}  // namespace detail

// Deterministic synthetic RNAscope patch: tinted noisy background, soft-edged
// haematoxylin nuclei, and RNAscope transcript dots rendered through the same
// stain forward model the deconvolution inverts. Annotations are the exact
// dot centres.
inline std::pair<RgbImage, AnnotationSet> generate(const SynthConfig& cfg) {
    if (cfg.dot_radius_min < 1 || cfg.dot_radius_max < cfg.dot_radius_min)
        throw std::invalid_argument("synth: bad dot radius range");
    if (cfg.dot_count < 0 || cfg.nucleus_count < 0)
        throw std::invalid_argument("synth: negative counts");

    detail::SynthRng rng(cfg.seed);
    const int side = cfg.side;
    detail::ValueNoise noise(side, rng);

    struct Nucleus {
        double cx, cy, ax, ay, angle, conc;
    };
    std::vector<Nucleus> nuclei;
    for (int i = 0; i < cfg.nucleus_count; ++i) {
        Nucleus n;
        n.cx = rng.uniform(0, side - 1);
        n.cy = rng.uniform(0, side - 1);
        n.ax = rng.uniform(cfg.nucleus_axis_min, cfg.nucleus_axis_max);
        n.ay = rng.uniform(cfg.nucleus_axis_min, cfg.nucleus_axis_max);
        n.angle = rng.uniform(0, 3.14159265358979323846);
        n.conc = cfg.nucleus_intensity * rng.uniform(0.8, 1.2);
        nuclei.push_back(n);
    }

    struct Dot {
        int cx, cy;
        double radius, conc, haem_mix;
    };
    const int margin = 2 * cfg.dot_radius_max + 4;
    const double min_sep = 2.0 * cfg.dot_radius_max;
    std::vector<Dot> dots;
    for (int i = 0; i < cfg.dot_count; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < 10000; ++attempt) {
            int x = rng.uniform_int(margin, side - 1 - margin);
            int y = rng.uniform_int(margin, side - 1 - margin);
            bool ok = true;
            for (const auto& d : dots) {
                double dx = d.cx - x, dy = d.cy - y;
                if (dx * dx + dy * dy < min_sep * min_sep) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            Dot d;
            d.cx = x;
            d.cy = y;
            d.radius = rng.uniform(cfg.dot_radius_min, cfg.dot_radius_max);
            d.conc = rng.uniform(cfg.dot_intensity_min, cfg.dot_intensity_max);
            d.haem_mix = rng.uniform(-cfg.dot_hue_jitter, cfg.dot_hue_jitter);
            dots.push_back(d);
            placed = true;
            break;
        }
        if (!placed) throw std::runtime_error("too dense");
    }

    RgbImage img(side, side);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            double haem = cfg.background_haem * (1.0 + 0.5 * noise.at(x, y)) +
                          cfg.noise_amplitude * noise.at(x + 7 * detail::ValueNoise::kCell, y);
            // one-sided modulation keeps the background mode at the bright end of
            // the tissue range, so thresholding isolates dots and nuclei
            double rna = cfg.background_rnascope * (1.0 + 0.35 * std::fabs(noise.at(y, x)));
            for (const auto& n : nuclei) {
                double dx = x - n.cx, dy = y - n.cy;
                double rx = dx * std::cos(n.angle) + dy * std::sin(n.angle);
                double ry = -dx * std::sin(n.angle) + dy * std::cos(n.angle);
                double q = (rx * rx) / (n.ax * n.ax) + (ry * ry) / (n.ay * n.ay);
                if (q < 1.44) {  // soft edge out to 1.2x the ellipse
                    double f = q <= 1.0 ? 1.0 : (1.44 - q) / 0.44;
                    haem += n.conc * f;
                }
            }
            for (const auto& d : dots) {
                double dx = x - d.cx, dy = y - d.cy;
                double dist2 = dx * dx + dy * dy;
                double cut = (d.radius + 1.5) * (d.radius + 1.5);
                if (dist2 > cut) continue;
                double sigma = d.radius / 1.2;
                double f = std::exp(-dist2 / (2.0 * sigma * sigma));
                rna += d.conc * f;
                haem += d.conc * d.haem_mix * f;
            }
            if (haem < 0) haem = 0;
            if (rna < 0) rna = 0;
            auto rgb = forward_pixel(cfg.stains, haem, rna);
            img.at(x, y, 0) = rgb[0];
            img.at(x, y, 1) = rgb[1];
            img.at(x, y, 2) = rgb[2];
        }
    }

    AnnotationSet truth;
    truth.source = "synth seed " + std::to_string(cfg.seed);
    for (const auto& d : dots) truth.points.push_back({double(d.cx), double(d.cy)});
    return {std::move(img), std::move(truth)};
}

}  // namespace rnadot
