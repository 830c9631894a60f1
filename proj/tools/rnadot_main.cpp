// rnadot: chromogenic RNAscope dot segmentation pipeline CLI.
//
// Subcommands: synth, candidates, extract-features, train, predict, analyze,
// segment, evaluate, sweep, run. Exit codes: 0 success, 1 input error,
// 2 stage failure.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "rnadot/eval.hpp"
#include "rnadot/pipeline.hpp"
#include "rnadot/synth.hpp"

namespace fs = std::filesystem;
using namespace rnadot;

namespace {

constexpr int kExitInputError = 1;
constexpr int kExitStageFailure = 2;

PipelineConfig make_config(const std::string& config_path) {
    return config_path.empty() ? PipelineConfig{} : load_config(config_path);
}

std::vector<FeatureDef> manifest_for(const std::string& set) {
    if (set == "full") return full_manifest();
    if (set == "reduced") return reduced_manifest();
    throw std::runtime_error("unknown feature set: " + set);
}

int cmd_synth(std::uint64_t seed, int dots, int side, const std::string& out,
              const std::string& truth_path) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.dot_count = dots;
    cfg.side = side;
    auto [img, truth] = generate(cfg);
    save_patch(out, img);
    if (!truth_path.empty()) save_annotations(truth_path, truth);
    std::cout << "wrote " << out << " with " << truth.points.size() << " dots\n";
    return 0;
}

int cmd_candidates(const std::string& in, const std::string& out, const std::string& dump_mask,
                   const std::string& config_path) {
    auto cfg = make_config(config_path);
    auto img = load_patch(in);
    auto ch = prepare_channels(img, cfg);
    auto stage = run_candidate_stage(ch, cfg);
    save_candidates_csv(out, stage.candidates);
    if (!dump_mask.empty()) {
        ChannelImage m(stage.mask.width, stage.mask.height);
        m.data = stage.mask.data;
        save_channel(dump_mask, m);
    }
    std::cout << stage.candidates.size() << " candidates (threshold " << int(stage.thresh)
              << ")\n";
    return 0;
}

int cmd_extract(const std::string& in, const std::string& cand_path, const std::string& set,
                const std::string& out, const std::string& config_path) {
    auto cfg = make_config(config_path);
    cfg.feature_set = set;
    auto img = load_patch(in);
    auto ch = prepare_channels(img, cfg);
    auto cands = load_candidates_csv(cand_path);
    auto channels = ch.raw();
    std::vector<std::vector<double>> rows;
    rows.reserve(cands.size());
    auto t0 = std::chrono::steady_clock::now();
    for (const auto& c : cands) rows.push_back(extract_features(channels, c.x, c.y, set));
    auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    save_features_csv(out, cands, rows, manifest_for(set));
    std::cout << rows.size() << " rows, " << set << " set, " << dt << " s\n";
    return 0;
}

std::vector<int> read_labels_csv(const std::string& path, std::size_t expected) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("unreadable file: " + path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<int> labels;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto comma = line.rfind(',');
        labels.push_back(std::stoi(comma == std::string::npos ? line : line.substr(comma + 1)));
    }
    if (labels.size() != expected)
        throw std::runtime_error("label count does not match feature rows");
    return labels;
}

int cmd_train(const std::string& features_path, const std::string& labels_path,
              const std::string& truth_path, const std::string& out,
              const std::string& config_path) {
    auto cfg = make_config(config_path);
    auto table = load_features_csv(features_path);
    if (table.rows.empty()) throw std::runtime_error("no feature rows in " + features_path);

    std::vector<int> labels;
    if (!labels_path.empty()) {
        labels = read_labels_csv(labels_path, table.rows.size());
    } else if (!truth_path.empty()) {
        auto truth = load_annotations(truth_path);
        labels = label_candidates(table.candidates, truth);
    } else {
        throw std::runtime_error("train needs --labels or --truth");
    }

    auto manifest = table.columns.size() == reduced_manifest().size() ? reduced_manifest()
                                                                      : full_manifest();
    if (manifest.size() != table.columns.size())
        throw std::runtime_error("feature column count matches no known manifest");

    auto norm = fit_normalizer(table.rows);
    std::vector<std::vector<double>> normalized;
    normalized.reserve(table.rows.size());
    for (const auto& r : table.rows) normalized.push_back(apply_normalizer(norm, r));
    auto model = train(normalized, labels, cfg.train);
    model.norm = norm;
    model.manifest = manifest;
    save_model(out, model);
    std::size_t npos = 0;
    for (int l : labels) npos += l;
    std::cout << "trained on " << labels.size() << " rows (" << npos << " positive) -> " << out
              << "\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& features_path,
                const std::string& out) {
    auto model = load_model(model_path);
    auto table = load_features_csv(features_path);
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write: " + out);
    os.precision(17);
    os << "x,y,score,label\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        double s = predict_score(model, table.rows[i]);
        os << table.candidates[i].x << ',' << table.candidates[i].y << ',' << s << ','
           << (s > 0 ? 1 : 0) << '\n';
    }
    std::cout << table.rows.size() << " scores -> " << out << "\n";
    return 0;
}

int cmd_analyze(const std::string& model_path, const std::string& out) {
    auto model = load_model(model_path);
    auto shares = weight_breakdown(model);
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write: " + out);
    os << "feature,channel,share\n";
    os.precision(9);
    for (const auto& s : shares) os << s.family << ',' << s.channel << ',' << std::fixed << s.share << '\n';
    std::cout << shares.size() << " rows -> " << out << "\n";
    return 0;
}

int cmd_segment(const std::string& model_path, const std::string& in, int gray, int area,
                const std::string& out, const std::string& dump_map,
                const std::string& config_path) {
    auto cfg = make_config(config_path);
    cfg.gray_threshold = gray;
    cfg.area_threshold = area;
    auto model = load_model(model_path);
    if (model.manifest.size() == reduced_manifest().size()) cfg.feature_set = "reduced";
    else cfg.feature_set = "full";
    auto img = load_patch(in);
    SegmentationMap map;
    auto dets = detect_patch(img, model, cfg, &map);
    save_detections_csv(out, dets);
    if (!dump_map.empty()) save_channel(dump_map, map);
    std::cout << dets.size() << " detections -> " << out << "\n";
    return 0;
}

int cmd_evaluate(const std::string& det_path, const std::string& truth_path, double radius,
                 bool optimal) {
    auto dets = load_points_csv(det_path);
    auto truth = load_points_csv(truth_path);
    auto m = match(dets, truth, radius, optimal);
    std::cout << score_table({{"result", m.precision, m.recall, m.f1}});
    std::cout << "tp=" << m.tp << " fp=" << m.fp << " fn=" << m.fn << "\n";
    return 0;
}

struct PatchPair {
    std::string image;
    std::string truth;
};

std::vector<PatchPair> collect_patch_pairs(const std::string& dir) {
    std::vector<PatchPair> pairs;
    std::vector<fs::path> images;
    for (const auto& e : fs::directory_iterator(dir)) {
        auto ext = e.path().extension().string();
        if (ext == ".png" || ext == ".tif" || ext == ".tiff") images.push_back(e.path());
    }
    std::sort(images.begin(), images.end());
    for (const auto& p : images) {
        auto truth = p;
        truth.replace_extension(".csv");
        if (fs::exists(truth)) pairs.push_back({p.string(), truth.string()});
    }
    return pairs;
}

int cmd_sweep(const std::string& model_path, const std::string& patches_dir,
              const std::string& out, const std::string& config_path) {
    auto cfg = make_config(config_path);
    auto model = load_model(model_path);
    cfg.feature_set = model.manifest.size() == reduced_manifest().size() ? "reduced" : "full";
    auto pairs = collect_patch_pairs(patches_dir);
    if (pairs.empty()) throw std::runtime_error("no patch/truth pairs under " + patches_dir);

    std::vector<SegmentationMap> maps;
    std::vector<AnnotationSet> truths;
    for (const auto& p : pairs) {
        auto img = load_patch(p.image);
        SegmentationMap map;
        detect_patch(img, model, cfg, &map);
        maps.push_back(std::move(map));
        truths.push_back(load_annotations(p.truth, img.width, img.height));
    }
    std::vector<const AnnotationSet*> tp;
    for (const auto& t : truths) tp.push_back(&t);
    auto rows = sweep(maps, tp, cfg.match_radius);
    save_sweep_csv(out, rows);
    auto best = std::max_element(rows.begin(), rows.end(),
                                 [](const SweepRow& a, const SweepRow& b) { return a.f1 < b.f1; });
    std::cout << rows.size() << " grid points -> " << out << "\nbest f1=" << best->f1
              << " at gray=" << best->gray << " area=" << best->area << "\n";
    return 0;
}

int cmd_run(const std::string& model_path, const std::vector<std::string>& patches,
            const std::string& out_dir, const std::string& config_path, int threads) {
    auto cfg = make_config(config_path);
    auto model = load_model(model_path);
    cfg.feature_set = model.manifest.size() == reduced_manifest().size() ? "reduced" : "full";
    fs::create_directories(out_dir);

    struct Row {
        std::string patch;
        std::size_t detections = 0;
        bool evaluated = false;
        double precision = 0, recall = 0, f1 = 0;
        bool failed = false;
        std::string error;
    };
    std::vector<Row> rows(patches.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= patches.size()) return;
            Row& row = rows[i];
            row.patch = patches[i];
            try {
                auto img = load_patch(patches[i]);
                fs::path truth_path = fs::path(patches[i]).replace_extension(".csv");
                AnnotationSet truth;
                bool has_truth = fs::exists(truth_path);
                if (has_truth) truth = load_annotations(truth_path.string(), img.width, img.height);
                auto res = run_patch(img, model, cfg, has_truth ? &truth : nullptr);
                auto stem = fs::path(patches[i]).stem().string();
                save_detections_csv((fs::path(out_dir) / (stem + "_detections.csv")).string(),
                                    res.detections);
                row.detections = res.detections.size();
                if (res.evaluated) {
                    row.evaluated = true;
                    row.precision = res.metrics.precision;
                    row.recall = res.metrics.recall;
                    row.f1 = res.metrics.f1;
                }
            } catch (const std::exception& e) {
                row.failed = true;
                row.error = e.what();
                std::lock_guard lk(log_mutex);
                std::cerr << "patch " << patches[i] << " failed: " << e.what() << "\n";
            }
        }
    };
    int nthreads = std::max(1, threads);
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::ofstream summary(fs::path(out_dir) / "summary.csv");
    summary << "patch,detections,precision,recall,f1,status\n";
    summary.precision(9);
    bool any_failed = false;
    for (const auto& r : rows) {
        summary << r.patch << ',' << r.detections << ',';
        if (r.evaluated) summary << std::fixed << r.precision << ',' << r.recall << ',' << r.f1;
        else summary << ",,";
        summary << ',' << (r.failed ? "failed" : "ok") << '\n';
        any_failed |= r.failed;
    }
    std::cout << "summary -> " << (fs::path(out_dir) / "summary.csv").string() << "\n";
    return any_failed ? kExitStageFailure : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chromogenic RNAscope dot segmentation pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "flat key=value pipeline config")->configurable(false);

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic ground-truthed patch");
    std::uint64_t seed = 7;
    int dots = 100, side = 480;
    std::string synth_out, synth_truth;
    synth_cmd->add_option("--seed", seed);
    synth_cmd->add_option("--dots", dots);
    synth_cmd->add_option("--side", side);
    synth_cmd->add_option("--out", synth_out)->required();
    synth_cmd->add_option("--truth", synth_truth);

    // candidates
    auto* cand_cmd = app.add_subcommand("candidates", "extract candidate coordinates");
    std::string cand_in, cand_out, cand_dump;
    cand_cmd->add_option("--in", cand_in)->required();
    cand_cmd->add_option("--out", cand_out)->required();
    cand_cmd->add_option("--dump-mask", cand_dump);

    // extract-features
    auto* feat_cmd = app.add_subcommand("extract-features", "texture features per candidate");
    std::string feat_in, feat_cands, feat_set = "reduced", feat_out;
    feat_cmd->add_option("--in", feat_in)->required();
    feat_cmd->add_option("--candidates", feat_cands)->required();
    feat_cmd->add_option("--set", feat_set)->check(CLI::IsMember({"full", "reduced"}));
    feat_cmd->add_option("--out", feat_out)->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "fit the linear SVM");
    std::string train_features, train_labels, train_truth, train_out;
    train_cmd->add_option("--features", train_features)->required();
    train_cmd->add_option("--labels", train_labels);
    train_cmd->add_option("--truth", train_truth);
    train_cmd->add_option("--out", train_out)->required();

    // predict
    auto* pred_cmd = app.add_subcommand("predict", "score feature rows with a model");
    std::string pred_model, pred_features, pred_out;
    pred_cmd->add_option("--model", pred_model)->required();
    pred_cmd->add_option("--features", pred_features)->required();
    pred_cmd->add_option("--out", pred_out)->required();

    // analyze
    auto* ana_cmd = app.add_subcommand("analyze", "coefficient weight breakdown");
    std::string ana_model, ana_out;
    ana_cmd->add_option("--model", ana_model)->required();
    ana_cmd->add_option("--out", ana_out)->required();

    // segment
    auto* seg_cmd = app.add_subcommand("segment", "detections for one patch");
    std::string seg_model, seg_in, seg_out, seg_dump;
    int seg_gray = 132, seg_area = 2;
    seg_cmd->add_option("--model", seg_model)->required();
    seg_cmd->add_option("--in", seg_in)->required();
    seg_cmd->add_option("--gray", seg_gray);
    seg_cmd->add_option("--area", seg_area);
    seg_cmd->add_option("--out", seg_out)->required();
    seg_cmd->add_option("--dump-map", seg_dump);

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "match detections against truth");
    std::string eval_dets, eval_truth;
    double eval_radius = 5.0;
    bool eval_optimal = false;
    eval_cmd->add_option("--detections", eval_dets)->required();
    eval_cmd->add_option("--truth", eval_truth)->required();
    eval_cmd->add_option("--radius", eval_radius);
    eval_cmd->add_flag("--optimal", eval_optimal, "exact maximum-cardinality matching");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "gray/area threshold F1 surface");
    std::string sweep_model, sweep_dir, sweep_out;
    sweep_cmd->add_option("--model", sweep_model)->required();
    sweep_cmd->add_option("--patches", sweep_dir)->required();
    sweep_cmd->add_option("--out", sweep_out)->required();

    // run
    auto* run_cmd = app.add_subcommand("run", "full pipeline over patches");
    std::string run_model, run_out_dir = ".";
    std::vector<std::string> run_patches;
    int run_threads = 1;
    run_cmd->add_option("--model", run_model)->required();
    run_cmd->add_option("--out-dir", run_out_dir);
    run_cmd->add_option("--threads", run_threads);
    run_cmd->add_option("patches", run_patches)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth_cmd) return cmd_synth(seed, dots, side, synth_out, synth_truth);
        if (*cand_cmd) return cmd_candidates(cand_in, cand_out, cand_dump, config_path);
        if (*feat_cmd) return cmd_extract(feat_in, feat_cands, feat_set, feat_out, config_path);
        if (*train_cmd) return cmd_train(train_features, train_labels, train_truth, train_out, config_path);
        if (*pred_cmd) return cmd_predict(pred_model, pred_features, pred_out);
        if (*ana_cmd) return cmd_analyze(ana_model, ana_out);
        if (*seg_cmd) return cmd_segment(seg_model, seg_in, seg_gray, seg_area, seg_out, seg_dump, config_path);
        if (*eval_cmd) return cmd_evaluate(eval_dets, eval_truth, eval_radius, eval_optimal);
        if (*sweep_cmd) return cmd_sweep(sweep_model, sweep_dir, sweep_out, config_path);
        if (*run_cmd) return cmd_run(run_model, run_patches, run_out_dir, config_path, run_threads);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::runtime_error& e) {
        std::string msg = e.what();
        std::cerr << "error: " << msg << "\n";
        bool input_error = msg.find("unreadable") != std::string::npos ||
                           msg.find("cannot write") != std::string::npos ||
                           msg.find("malformed") != std::string::npos ||
                           msg.find("needs --labels") != std::string::npos ||
                           msg.find("no patch") != std::string::npos;
        return input_error ? kExitInputError : kExitStageFailure;
    }
    return 0;
}
