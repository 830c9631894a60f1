#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rnadot/candidates.hpp"
#include "rnadot/eval.hpp"
#include "rnadot/image.hpp"
#include "rnadot/model.hpp"
#include "rnadot/segmap.hpp"
#include "rnadot/stain.hpp"
#include "rnadot/texture.hpp"

namespace rnadot {

struct PipelineConfig {
    Vec3 stain_haem = {0.650, 0.704, 0.286};
    Vec3 stain_rnascope = {0.269, 0.568, 0.778};
    double blur_sigma = 1.1;
    int threshold_decrement = 8;
    int dark_fill_offset = 11;
    int dark_region_cutoff = 100;
    std::string feature_set = "reduced";  // full | reduced
    TrainConfig train;
    int gray_threshold = 132;
    int area_threshold = 2;
    double match_radius = 5.0;

    StainMatrix stain_matrix() const { return StainMatrix::from_vectors(stain_haem, stain_rnascope); }
};

// Flat key=value config with dotted keys; '#' starts a comment line.
inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("unreadable config: " + path);
    PipelineConfig cfg;
    std::string line;
    int lineno = 0;
    auto parse_vec3 = [](const std::string& s) {
        Vec3 v;
        std::istringstream ss(s);
        std::string tok;
        for (int i = 0; i < 3; ++i) {
            if (!std::getline(ss, tok, ',')) throw std::runtime_error("expected 3 components");
            v[i] = std::stod(tok);
        }
        return v;
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t"));
            auto e = s.find_last_not_of(" \t\r");
            s.erase(e == std::string::npos ? 0 : e + 1);
            return s;
        };
        std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        try {
            if (key == "stain.haem") cfg.stain_haem = parse_vec3(val);
            else if (key == "stain.rnascope") cfg.stain_rnascope = parse_vec3(val);
            else if (key == "blur.sigma") cfg.blur_sigma = std::stod(val);
            else if (key == "threshold.decrement") cfg.threshold_decrement = std::stoi(val);
            else if (key == "mask.dark_fill_offset") cfg.dark_fill_offset = std::stoi(val);
            else if (key == "mask.dark_region_cutoff") cfg.dark_region_cutoff = std::stoi(val);
            else if (key == "features.set") cfg.feature_set = val;
            else if (key == "train.C") cfg.train.C = std::stod(val);
            else if (key == "train.tolerance") cfg.train.tolerance = std::stod(val);
            else if (key == "train.max_iterations") cfg.train.max_iterations = std::stol(val);
            else if (key == "train.seed") cfg.train.seed = std::stoull(val);
            else if (key == "segment.gray_threshold") cfg.gray_threshold = std::stoi(val);
            else if (key == "segment.area_threshold") cfg.area_threshold = std::stoi(val);
            else if (key == "evaluate.match_radius") cfg.match_radius = std::stod(val);
            else throw std::runtime_error("unknown key");
        } catch (const std::exception& e) {
            throw std::runtime_error("config " + path + " line " + std::to_string(lineno) + ": " +
                                     key + ": " + e.what());
        }
    }
    return cfg;
}

// Deconvolved channel planes for one patch, raw and blurred.
struct PatchChannels {
    ChannelImage gray;
    ChannelImage haem;
    ChannelImage rnascope;
    ChannelImage blurred_gray;
    ChannelImage blurred_rnascope;

    ChannelSet raw() const { return {&gray, &haem, &rnascope}; }
};

inline PatchChannels prepare_channels(const RgbImage& img, const PipelineConfig& cfg) {
    PatchChannels ch;
    ch.gray = to_grayscale(img);
    auto planes = deconvolve(img, cfg.stain_matrix());
    ch.haem = std::move(planes.haem);
    ch.rnascope = std::move(planes.rnascope);
    ch.blurred_gray = gaussian_blur5(ch.gray, cfg.blur_sigma);
    ch.blurred_rnascope = gaussian_blur5(ch.rnascope, cfg.blur_sigma);
    return ch;
}

struct CandidateStage {
    std::uint8_t thresh = 0;
    CandidateMask mask;
    std::vector<Candidate> candidates;
};

inline CandidateStage run_candidate_stage(const PatchChannels& ch, const PipelineConfig& cfg) {
    CandidateStage st;
    st.thresh = select_threshold(ch.blurred_rnascope, cfg.threshold_decrement);
    auto rna_mask = threshold_below(ch.blurred_rnascope, st.thresh);
    auto dark_mask = dark_regions(ch.blurred_gray, cfg.dark_region_cutoff);
    auto rna_contours = find_contours(rna_mask);
    auto dark_contours = find_contours(dark_mask);
    st.mask = build_mask(ch.blurred_rnascope, st.thresh, rna_contours, dark_contours,
                         cfg.dark_fill_offset);
    st.candidates = extract_candidates(st.mask);
    return st;
}

inline std::vector<double> extract_features(const ChannelSet& channels, int x, int y,
                                            const std::string& set) {
    if (set == "full") return extract_full(channels, x, y);
    if (set == "reduced") return extract_reduced(channels, x, y);
    throw std::invalid_argument("unknown feature set: " + set);
}

// ---------------------------------------------------------------------------
// CSV plumbing shared by the CLI subcommands
// ---------------------------------------------------------------------------

inline void save_candidates_csv(const std::string& path, const std::vector<Candidate>& cands) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write: " + path);
    out << "x,y,intensity,radius\n";
    for (const auto& c : cands)
        out << c.x << ',' << c.y << ',' << int(c.intensity) << ',' << c.radius << '\n';
}

inline std::vector<Candidate> load_candidates_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("unreadable file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
    std::vector<Candidate> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        Candidate c;
        std::getline(ss, tok, ',');
        c.x = std::stoi(tok);
        std::getline(ss, tok, ',');
        c.y = std::stoi(tok);
        if (std::getline(ss, tok, ',')) c.intensity = static_cast<std::uint8_t>(std::stoi(tok));
        if (std::getline(ss, tok, ',')) c.radius = std::stoi(tok);
        out.push_back(c);
    }
    return out;
}

inline void save_features_csv(const std::string& path, const std::vector<Candidate>& cands,
                              const std::vector<std::vector<double>>& rows,
                              const std::vector<FeatureDef>& manifest) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write: " + path);
    out.precision(17);
    out << "x,y";
    for (const auto& d : manifest) out << ',' << feature_column_name(d);
    out << '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << cands[i].x << ',' << cands[i].y;
        for (double v : rows[i]) out << ',' << v;
        out << '\n';
    }
}

struct FeatureTable {
    std::vector<std::string> columns;  // feature column names, x/y excluded
    std::vector<Candidate> candidates;
    std::vector<std::vector<double>> rows;
};

inline FeatureTable load_features_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("unreadable file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
    FeatureTable t;
    {
        std::istringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        std::getline(ss, tok, ',');
        while (std::getline(ss, tok, ',')) t.columns.push_back(tok);
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        Candidate c;
        std::getline(ss, tok, ',');
        c.x = std::stoi(tok);
        std::getline(ss, tok, ',');
        c.y = std::stoi(tok);
        std::vector<double> row;
        row.reserve(t.columns.size());
        while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
        if (row.size() != t.columns.size())
            throw std::runtime_error("ragged feature row in " + path);
        t.candidates.push_back(c);
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline void save_detections_csv(const std::string& path, const std::vector<Detection>& dets) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write: " + path);
    out.precision(17);
    out << "x,y,area,peak\n";
    for (const auto& d : dets) out << d.x << ',' << d.y << ',' << d.area << ',' << int(d.peak) << '\n';
}

inline std::vector<Point2d> load_points_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("unreadable file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
    std::vector<Point2d> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string xs, ys;
        if (!std::getline(ss, xs, ',') || !std::getline(ss, ys, ','))
            throw std::runtime_error("malformed row at line " + std::to_string(lineno) + " in " + path);
        out.push_back({std::stod(xs), std::stod(ys)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// End-to-end per-patch run and the threshold sweep
// ---------------------------------------------------------------------------

struct PatchResult {
    std::vector<Detection> detections;
    MatchResult metrics;  // only filled when truth was supplied
    bool evaluated = false;
};

inline std::vector<Detection> detect_patch(const RgbImage& img, const LinearModel& model,
                                           const PipelineConfig& cfg,
                                           SegmentationMap* map_out = nullptr) {
    auto ch = prepare_channels(img, cfg);
    auto stage = run_candidate_stage(ch, cfg);
    auto channels = ch.raw();
    std::vector<double> margins;
    margins.reserve(stage.candidates.size());
    for (const auto& c : stage.candidates)
        margins.push_back(predict_score(model, extract_features(channels, c.x, c.y, cfg.feature_set)));
    auto map = render_map(stage.candidates, margins, img.width, img.height);
    auto dets = detect(map, static_cast<std::uint8_t>(cfg.gray_threshold), cfg.area_threshold);
    if (map_out) *map_out = std::move(map);
    return dets;
}

inline PatchResult run_patch(const RgbImage& img, const LinearModel& model,
                             const PipelineConfig& cfg, const AnnotationSet* truth = nullptr) {
    PatchResult r;
    r.detections = detect_patch(img, model, cfg);
    if (truth) {
        std::vector<Point2d> det_points;
        for (const auto& d : r.detections) det_points.push_back({d.x, d.y});
        r.metrics = match(det_points, truth->points, cfg.match_radius);
        r.evaluated = true;
    }
    return r;
}

// F1 surface over (gray 0..254 step 2) x (area 1..10). Detections are pooled
// per grid point across patches before scoring.
inline std::vector<SweepRow> sweep(const std::vector<SegmentationMap>& maps,
                                   const std::vector<const AnnotationSet*>& truths,
                                   double match_radius = 5.0) {
    if (maps.empty() || maps.size() != truths.size())
        throw std::invalid_argument("sweep: need equal nonempty maps and truths");
    std::vector<SweepRow> rows;
    for (int gray = 0; gray <= 254; gray += 2) {
        for (int area = 1; area <= 10; ++area) {
            std::size_t tp = 0, fp = 0, fn = 0;
            for (std::size_t p = 0; p < maps.size(); ++p) {
                auto dets = detect(maps[p], static_cast<std::uint8_t>(gray), area);
                std::vector<Point2d> pts;
                for (const auto& d : dets) pts.push_back({d.x, d.y});
                auto m = match(pts, truths[p]->points, match_radius);
                tp += m.tp;
                fp += m.fp;
                fn += m.fn;
            }
            SweepRow r;
            r.gray = gray;
            r.area = area;
            r.precision = (tp + fp) > 0 ? double(tp) / (tp + fp) : 0.0;
            r.recall = (tp + fn) > 0 ? double(tp) / (tp + fn) : 0.0;
            r.f1 = (2 * tp + fp + fn) > 0 ? 2.0 * tp / (2.0 * tp + fp + fn) : 0.0;
            rows.push_back(r);
        }
    }
    return rows;
}

inline void save_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write: " + path);
    char buf[128];
    out << "gray,area,f1,precision,recall\n";
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.9f,%.9f,%.9f\n", r.gray, r.area, r.f1,
                      r.precision, r.recall);
        out << buf;
    }
}

}  // namespace rnadot
