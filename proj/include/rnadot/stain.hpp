#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "rnadot/image.hpp"

namespace rnadot {

using Vec3 = std::array<double, 3>;

inline Vec3 normalized(const Vec3& v) {
    double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (n <= 0) throw std::invalid_argument("zero stain vector");
    return {v[0] / n, v[1] / n, v[2] / n};
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Rows are unit optical-density vectors: haematoxylin, RNAscope (DAB-like), residual.
struct StainMatrix {
    std::array<Vec3, 3> rows;

    static StainMatrix from_vectors(const Vec3& haem, const Vec3& rnascope) {
        StainMatrix m;
        m.rows[0] = normalized(haem);
        m.rows[1] = normalized(rnascope);
        m.rows[2] = normalized(cross(m.rows[0], m.rows[1]));
        return m;
    }

    // Inverse of the 3x3 row matrix; throws on singular input.
    std::array<Vec3, 3> inverse() const {
        const auto& r = rows;
        double det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) -
                     r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0]) +
                     r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
        if (std::fabs(det) < 1e-12) throw std::runtime_error("singular stain matrix");
        std::array<Vec3, 3> inv;
        inv[0][0] = (r[1][1] * r[2][2] - r[1][2] * r[2][1]) / det;
        inv[0][1] = (r[0][2] * r[2][1] - r[0][1] * r[2][2]) / det;
        inv[0][2] = (r[0][1] * r[1][2] - r[0][2] * r[1][1]) / det;
        inv[1][0] = (r[1][2] * r[2][0] - r[1][0] * r[2][2]) / det;
        inv[1][1] = (r[0][0] * r[2][2] - r[0][2] * r[2][0]) / det;
        inv[1][2] = (r[0][2] * r[1][0] - r[0][0] * r[1][2]) / det;
        inv[2][0] = (r[1][0] * r[2][1] - r[1][1] * r[2][0]) / det;
        inv[2][1] = (r[0][1] * r[2][0] - r[0][0] * r[2][1]) / det;
        inv[2][2] = (r[0][0] * r[1][1] - r[0][1] * r[1][0]) / det;
        return inv;
    }
};

// Standard H-DAB optical-density vectors; chromogenic RNAscope stains DAB-brown.
inline StainMatrix default_stain_matrix() {
    return StainMatrix::from_vectors({0.650, 0.704, 0.286}, {0.269, 0.568, 0.778});
}

struct StainPlanes {
    ChannelImage haem;
    ChannelImage rnascope;
    ChannelImage residual;
};

inline std::uint8_t od_to_intensity(double concentration) {
    double v = 255.0 * std::pow(10.0, -concentration);
    long r = std::lround(v);
    return static_cast<std::uint8_t>(r < 0 ? 0 : (r > 255 ? 255 : r));
}

// Per-pixel unmixing: OD = -log10(max(I,1)/255) per RGB channel, concentrations
// a = M^-1 * OD, plane intensity = 255 * 10^(-a). 255 means no stain.
inline StainPlanes deconvolve(const RgbImage& img, const StainMatrix& m) {
    auto inv = m.inverse();
    StainPlanes out{ChannelImage(img.width, img.height), ChannelImage(img.width, img.height),
                    ChannelImage(img.width, img.height)};
    // concentrations a satisfy OD = a . rows, i.e. a = OD . inv (inv of row matrix,
    // applied on the right); with column convention a_s = sum_c inv[c][s] * od_c.
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            Vec3 od;
            for (int c = 0; c < 3; ++c) {
                double I = std::max<double>(img.at(x, y, c), 1.0);
                od[c] = -std::log10(I / 255.0);
            }
            Vec3 a;
            for (int s = 0; s < 3; ++s) a[s] = inv[0][s] * od[0] + inv[1][s] * od[1] + inv[2][s] * od[2];
            out.haem.at(x, y) = od_to_intensity(a[0]);
            out.rnascope.at(x, y) = od_to_intensity(a[1]);
            out.residual.at(x, y) = od_to_intensity(a[2]);
        }
    }
    return out;
}

// Forward model: RGB pixel for given per-stain concentrations. Used by the
// synthetic generator and the round-trip tests.
inline std::array<std::uint8_t, 3> forward_pixel(const StainMatrix& m, double haem, double rnascope,
                                                 double residual = 0.0) {
    std::array<std::uint8_t, 3> rgb{};
    for (int c = 0; c < 3; ++c) {
        double od = haem * m.rows[0][c] + rnascope * m.rows[1][c] + residual * m.rows[2][c];
        rgb[c] = od_to_intensity(od);
    }
    return rgb;
}

}  // namespace rnadot
