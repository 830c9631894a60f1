#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "rnadot/model.hpp"

using namespace rnadot;

TEST_CASE("candidate labelling uses Euclidean distance with inclusive radius 1") {
    std::vector<Candidate> cands = {{10, 10, 0, 0}, {10, 10, 0, 0}, {5, 5, 0, 0}};
    AnnotationSet truth;
    truth.points = {{10, 11}};
    auto l1 = label_candidates({cands[0]}, truth);
    CHECK(l1[0] == 1);  // distance exactly 1.0

    truth.points = {{11, 11}};
    auto l2 = label_candidates({cands[0]}, truth);
    CHECK(l2[0] == 0);  // sqrt(2) > 1

    auto l3 = label_candidates(cands, AnnotationSet{});
    CHECK(l3 == std::vector<int>{0, 0, 0});
}

TEST_CASE("normalizer statistics and round trip") {
    std::vector<std::vector<double>> X = {{0.0, 5.0}, {2.0, 5.0}};
    auto st = fit_normalizer(X);
    CHECK(st.mean[0] == 1.0);
    CHECK(st.stddev[0] == 1.0);
    CHECK(st.stddev[1] == 1.0);  // constant column guard

    auto z0 = apply_normalizer(st, X[0]);
    auto z1 = apply_normalizer(st, X[1]);
    CHECK(z0[0] == -1.0);
    CHECK(z1[0] == 1.0);
    CHECK(z0[1] == 0.0);
    CHECK(z1[1] == 0.0);

    // affine inversion recovers the input
    for (std::size_t j = 0; j < 2; ++j) {
        double back = z0[j] * st.stddev[j] + st.mean[j];
        CHECK_THAT(back, Catch::Matchers::WithinAbs(X[0][j], 1e-12));
    }
}

TEST_CASE("svm on the 1-D separable toy reaches the analytic optimum") {
    std::vector<std::vector<double>> X = {{-1.0}, {1.0}};
    std::vector<int> y = {0, 1};
    TrainConfig cfg;
    auto m = train(X, y, cfg);
    CHECK_THAT(m.weights[0], Catch::Matchers::WithinAbs(1.0, 1e-3));
    CHECK_THAT(m.bias, Catch::Matchers::WithinAbs(0.0, 1e-3));
    // predict(0.5) positive
    m.norm.mean = {0.0};
    m.norm.stddev = {1.0};
    CHECK(predict_score(m, {0.5}) > 0);
    // training rows sit at the margin
    CHECK(predict_score(m, {1.0}) >= 1.0 - 1e-3);
    CHECK(predict_score(m, {-1.0}) <= -1.0 + 1e-3);
}

TEST_CASE("balanced class weights follow n_total / (2 n_class)") {
    // exercised through objective equality: weight a 90/10 split explicitly
    std::size_t n = 100, npos = 10;
    double cw_pos = double(n) / (2.0 * npos);
    double cw_neg = double(n) / (2.0 * (n - npos));
    CHECK_THAT(cw_pos, Catch::Matchers::WithinAbs(5.0, 1e-12));
    CHECK_THAT(cw_neg, Catch::Matchers::WithinAbs(0.5556, 1e-4));
}

TEST_CASE("single-class input is rejected") {
    std::vector<std::vector<double>> X = {{0.0}, {1.0}};
    std::vector<int> y = {1, 1};
    CHECK_THROWS_WITH(train(X, y, TrainConfig{}), Catch::Matchers::ContainsSubstring("single-class"));
}

TEST_CASE("training is deterministic for a fixed seed") {
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    std::uint32_t s = 11;
    for (int i = 0; i < 200; ++i) {
        s = s * 1664525u + 1013904223u;
        double a = (s >> 8) / double(1 << 24) * 4 - 2;
        s = s * 1664525u + 1013904223u;
        double b = (s >> 8) / double(1 << 24) * 4 - 2;
        X.push_back({a, b});
        y.push_back(a + 0.3 * b > 0.2 ? 1 : 0);
    }
    TrainConfig cfg;
    cfg.seed = 5;
    auto m1 = train(X, y, cfg);
    auto m2 = train(X, y, cfg);
    CHECK(m1.weights == m2.weights);
    CHECK(m1.bias == m2.bias);
}

TEST_CASE("duplicated dataset with halved C gives the same boundary") {
    std::vector<std::vector<double>> X = {{-1.2}, {-0.7}, {0.4}, {1.3}, {0.9}};
    std::vector<int> y = {0, 0, 1, 1, 1};
    TrainConfig cfg;
    auto m1 = train(X, y, cfg);

    std::vector<std::vector<double>> X2;
    std::vector<int> y2;
    for (std::size_t i = 0; i < X.size(); ++i) {
        X2.push_back(X[i]);
        X2.push_back(X[i]);
        y2.push_back(y[i]);
        y2.push_back(y[i]);
    }
    TrainConfig cfg2;
    cfg2.C = 0.5;
    auto m2 = train(X2, y2, cfg2);
    CHECK_THAT(m2.weights[0], Catch::Matchers::WithinAbs(m1.weights[0], 1e-4));
    CHECK_THAT(m2.bias, Catch::Matchers::WithinAbs(m1.bias, 1e-4));
}

TEST_CASE("trained objective matches a fine grid search on a 2-D toy") {
    std::vector<std::vector<double>> X = {{-1.5, 0.2}, {-0.8, -0.4}, {-1.1, 1.0},
                                          {0.9, 0.3},  {1.4, -0.2}, {0.7, 0.8}};
    std::vector<int> y = {0, 0, 0, 1, 1, 1};
    TrainConfig cfg;
    auto m = train(X, y, cfg);

    std::size_t npos = 3, n = 6;
    double cw_pos = double(n) / (2.0 * npos), cw_neg = cw_pos;
    auto objective = [&](double w0, double w1, double b) {
        double obj = 0.5 * (w0 * w0 + w1 * w1 + b * b);
        for (std::size_t i = 0; i < X.size(); ++i) {
            double yi = y[i] ? 1.0 : -1.0;
            double margin = w0 * X[i][0] + w1 * X[i][1] + b;
            obj += cfg.C * (y[i] ? cw_pos : cw_neg) * std::max(0.0, 1.0 - yi * margin);
        }
        return obj;
    };
    double trained = objective(m.weights[0], m.weights[1], m.bias);
    double best = 1e18;
    for (double w0 = -2; w0 <= 2; w0 += 0.01)
        for (double w1 = -1; w1 <= 1; w1 += 0.02)
            for (double b = -0.5; b <= 0.5; b += 0.02) best = std::min(best, objective(w0, w1, b));
    CHECK(trained <= best + 1e-4 * std::fabs(best));
}

TEST_CASE("predict trivia and linearity invariance") {
    LinearModel m;
    m.weights = {0.0, 0.0};
    m.bias = 0.0;
    m.norm.mean = {0.0, 0.0};
    m.norm.stddev = {1.0, 1.0};
    CHECK(predict_score(m, {3.0, -7.0}) == 0.0);
    CHECK_THROWS(predict_score(m, {1.0}));

    // adding a constant feature with zero weight does not change the score
    LinearModel m2;
    m2.weights = {0.5, 0.0};
    m2.bias = 0.25;
    m2.norm.mean = {0.0, 42.0};
    m2.norm.stddev = {1.0, 1.0};
    LinearModel m1;
    m1.weights = {0.5};
    m1.bias = 0.25;
    m1.norm.mean = {0.0};
    m1.norm.stddev = {1.0};
    CHECK(predict_score(m2, {2.0, 42.0}) == predict_score(m1, {2.0}));
}

TEST_CASE("model persistence round trip gives bitwise-equal predictions") {
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    std::uint32_t s = 3;
    auto defs = reduced_manifest();
    for (int i = 0; i < 60; ++i) {
        std::vector<double> row(defs.size());
        for (auto& v : row) {
            s = s * 1664525u + 1013904223u;
            v = (s >> 8) / double(1 << 24) * 100;
        }
        X.push_back(row);
        y.push_back(row[0] > 50 ? 1 : 0);
    }
    if (std::count(y.begin(), y.end(), 1) == 0) y[0] = 1;
    if (std::count(y.begin(), y.end(), 0) == 0) y[1] = 0;

    auto norm = fit_normalizer(X);
    std::vector<std::vector<double>> Z;
    for (const auto& r : X) Z.push_back(apply_normalizer(norm, r));
    auto m = train(Z, y, TrainConfig{});
    m.norm = norm;
    m.manifest = defs;

    auto path = (std::filesystem::temp_directory_path() / "rnadot_model.txt").string();
    save_model(path, m);
    auto back = load_model(path);
    REQUIRE(back.weights.size() == m.weights.size());
    for (int i = 0; i < 20; ++i) {
        CHECK(predict_score(back, X[i]) == predict_score(m, X[i]));
    }
    std::filesystem::remove(path);
}

TEST_CASE("weight breakdown shares") {
    LinearModel m;
    m.manifest = reduced_manifest();
    m.weights.assign(24, 0.0);
    m.norm.mean.assign(24, 0.0);
    m.norm.stddev.assign(24, 1.0);

    SECTION("single nonzero weight takes the full share") {
        m.weights[3] = -2.5;
        auto shares = weight_breakdown(m);
        double total = 0;
        for (const auto& s : shares) total += s.share;
        CHECK_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-9));
        for (const auto& s : shares)
            if (s.share > 0) {
                CHECK(s.share == 1.0);
                CHECK(s.family == "gldm/LargeDependenceHighGrayLevelEmphasis");
                CHECK(s.channel == "gray");
            }
    }

    SECTION("equal weights split 25% per feature") {
        for (auto& w : m.weights) w = 1.0;
        auto shares = weight_breakdown(m);
        std::map<std::string, double> per_feature;
        double total = 0;
        for (const auto& s : shares) {
            per_feature[s.family] += s.share;
            total += s.share;
        }
        CHECK_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-9));
        REQUIRE(per_feature.size() == 4);
        for (const auto& [name, share] : per_feature)
            CHECK_THAT(share, Catch::Matchers::WithinAbs(0.25, 1e-9));
    }
}
