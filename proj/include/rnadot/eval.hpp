#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rnadot/image.hpp"

namespace rnadot {

struct MatchPair {
    std::size_t det_index;
    std::size_t truth_index;
    double distance;
};

struct MatchResult {
    std::vector<MatchPair> pairs;
    std::size_t tp = 0, fp = 0, fn = 0;
    double precision = 0, recall = 0, f1 = 0;
};

namespace detail {

inline void fill_scores(MatchResult& r, std::size_t ndets, std::size_t ntruth) {
    r.tp = r.pairs.size();
    r.fp = ndets - r.tp;
    r.fn = ntruth - r.tp;
    r.precision = ndets > 0 ? double(r.tp) / ndets : 0.0;
    r.recall = ntruth > 0 ? double(r.tp) / ntruth : 0.0;
    r.f1 = (r.precision + r.recall) > 0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
}

// Maximum-cardinality bipartite matching (augmenting paths) over the same
// strict-radius candidate edges.
inline std::size_t max_matching(const std::vector<std::vector<std::size_t>>& adj, std::size_t ntruth,
                                std::vector<long>& det_of_truth, std::vector<long>& truth_of_det) {
    det_of_truth.assign(ntruth, -1);
    truth_of_det.assign(adj.size(), -1);
    std::size_t matched = 0;
    std::vector<bool> visited;
    std::function<bool(std::size_t)> try_augment = [&](std::size_t d) -> bool {
        for (std::size_t t : adj[d]) {
            if (visited[t]) continue;
            visited[t] = true;
            if (det_of_truth[t] < 0 || try_augment(static_cast<std::size_t>(det_of_truth[t]))) {
                det_of_truth[t] = static_cast<long>(d);
                truth_of_det[d] = static_cast<long>(t);
                return true;
            }
        }
        return false;
    };
    for (std::size_t d = 0; d < adj.size(); ++d) {
        visited.assign(ntruth, false);
        if (try_augment(d)) ++matched;
    }
    return matched;
}

}  // namespace detail

// Radius-constrained one-to-one point matching. Pairs closer than `radius`
// (strict) are candidates; default greedy acceptance in ascending distance
// with index tie-breaks, or exact maximum-cardinality matching when `optimal`.
inline MatchResult match(const std::vector<Point2d>& dets, const std::vector<Point2d>& truth,
                         double radius = 5.0, bool optimal = false) {
    if (radius <= 0) throw std::invalid_argument("match: radius must be positive");
    MatchResult r;
    std::vector<MatchPair> cand;
    for (std::size_t d = 0; d < dets.size(); ++d)
        for (std::size_t t = 0; t < truth.size(); ++t) {
            double dx = dets[d].x - truth[t].x, dy = dets[d].y - truth[t].y;
            double dist = std::sqrt(dx * dx + dy * dy);
            if (dist < radius) cand.push_back({d, t, dist});
        }
    if (optimal) {
        std::vector<std::vector<std::size_t>> adj(dets.size());
        for (const auto& c : cand) adj[c.det_index].push_back(c.truth_index);
        std::vector<long> det_of_truth, truth_of_det;
        detail::max_matching(adj, truth.size(), det_of_truth, truth_of_det);
        for (std::size_t d = 0; d < dets.size(); ++d) {
            if (truth_of_det[d] < 0) continue;
            std::size_t t = static_cast<std::size_t>(truth_of_det[d]);
            double dx = dets[d].x - truth[t].x, dy = dets[d].y - truth[t].y;
            r.pairs.push_back({d, t, std::sqrt(dx * dx + dy * dy)});
        }
    } else {
        std::sort(cand.begin(), cand.end(), [](const MatchPair& a, const MatchPair& b) {
            if (a.distance != b.distance) return a.distance < b.distance;
            if (a.det_index != b.det_index) return a.det_index < b.det_index;
            return a.truth_index < b.truth_index;
        });
        std::vector<bool> dused(dets.size(), false), tused(truth.size(), false);
        for (const auto& c : cand) {
            if (dused[c.det_index] || tused[c.truth_index]) continue;
            dused[c.det_index] = true;
            tused[c.truth_index] = true;
            r.pairs.push_back(c);
        }
    }
    detail::fill_scores(r, dets.size(), truth.size());
    return r;
}

struct ScoreRow {
    std::string name;
    double precision = 0, recall = 0, f1 = 0;
};

inline std::string score_table(const std::vector<ScoreRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("score_table: no rows");
    std::string out = "name,precision,recall,f1\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f\n", r.name.c_str(), r.precision,
                      r.recall, r.f1);
        out += buf;
    }
    return out;
}

struct SweepRow {
    int gray = 0;
    int area = 0;
    double f1 = 0, precision = 0, recall = 0;
};

}  // namespace rnadot
