#pragma once

#include <cstdint>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace rnadot {

// Mirror an index into [0, n) without repeating the edge pixel runs
// (symmetric reflection: -1 -> 0, n -> n-1).
inline int reflect_index(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - i - 1;
    }
    return i;
}

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // row-major R,G,B triples

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {
        if (w <= 0 || h <= 0) throw std::invalid_argument("RgbImage: non-positive dimensions");
    }

    std::uint8_t& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
    std::uint8_t at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
};

struct ChannelImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // row-major single channel

    ChannelImage() = default;
    ChannelImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {
        if (w <= 0 || h <= 0) throw std::invalid_argument("ChannelImage: non-positive dimensions");
    }

    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

    // Reflect-padded read for window extraction near borders.
    std::uint8_t at_reflect(int x, int y) const {
        return at(reflect_index(x, width), reflect_index(y, height));
    }
};

struct Point2d {
    double x = 0;
    double y = 0;
};

struct AnnotationSet {
    std::vector<Point2d> points;
    std::string source;
};

inline RgbImage load_patch(const std::string& path) {
    cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
    if (bgr.empty()) throw std::runtime_error("unreadable file: " + path);
    if (bgr.depth() != CV_8U) throw std::runtime_error("unsupported bit depth: " + path);
    RgbImage img(bgr.cols, bgr.rows);
    for (int y = 0; y < bgr.rows; ++y) {
        const cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x) {
            img.at(x, y, 0) = row[x][2];
            img.at(x, y, 1) = row[x][1];
            img.at(x, y, 2) = row[x][0];
        }
    }
    return img;
}

inline void save_patch(const std::string& path, const RgbImage& img) {
    cv::Mat bgr(img.height, img.width, CV_8UC3);
    for (int y = 0; y < img.height; ++y) {
        cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < img.width; ++x) {
            row[x][2] = img.at(x, y, 0);
            row[x][1] = img.at(x, y, 1);
            row[x][0] = img.at(x, y, 2);
        }
    }
    if (!cv::imwrite(path, bgr)) throw std::runtime_error("cannot write image: " + path);
}

inline void save_channel(const std::string& path, const ChannelImage& img) {
    cv::Mat gray(img.height, img.width, CV_8UC1);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) gray.at<std::uint8_t>(y, x) = img.at(x, y);
    if (!cv::imwrite(path, gray)) throw std::runtime_error("cannot write image: " + path);
}

// ITU-R BT.601 luma, rounded to 8-bit.
inline ChannelImage to_grayscale(const RgbImage& img) {
    ChannelImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double g = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
            long v = std::lround(g);
            out.at(x, y) = static_cast<std::uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
        }
    }
    return out;
}

// CSV with an "x,y" header, coordinates 0-based with origin at top-left.
// When width/height are given, out-of-bounds rows are rejected.
inline AnnotationSet load_annotations(const std::string& path, int width = -1, int height = -1) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("unreadable file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty annotation file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x,y") throw std::runtime_error("expected \"x,y\" header in " + path);

    AnnotationSet set;
    set.source = path;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string xs, ys;
        if (!std::getline(ss, xs, ',') || !std::getline(ss, ys)) {
            throw std::runtime_error("malformed row at line " + std::to_string(lineno) + " in " + path);
        }
        Point2d p;
        try {
            std::size_t px = 0, py = 0;
            p.x = std::stod(xs, &px);
            p.y = std::stod(ys, &py);
            if (px != xs.size() || py != ys.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw std::runtime_error("malformed row at line " + std::to_string(lineno) + " in " + path);
        }
        if (width > 0 && (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height)) {
            throw std::runtime_error("out-of-bounds point at line " + std::to_string(lineno) + " in " + path);
        }
        set.points.push_back(p);
    }
    return set;
}

inline void save_annotations(const std::string& path, const AnnotationSet& set) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "x,y\n";
    out.precision(17);
    for (const auto& p : set.points) out << p.x << ',' << p.y << '\n';
}

}  // namespace rnadot
