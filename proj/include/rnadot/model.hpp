#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rnadot/candidates.hpp"
#include "rnadot/image.hpp"
#include "rnadot/texture.hpp"

namespace rnadot {

// Positive iff some ground-truth point lies within Euclidean distance 1.
inline std::vector<int> label_candidates(const std::vector<Candidate>& cands,
                                         const AnnotationSet& truth) {
    std::vector<int> labels(cands.size(), 0);
    for (std::size_t i = 0; i < cands.size(); ++i) {
        for (const auto& t : truth.points) {
            double dx = cands[i].x - t.x, dy = cands[i].y - t.y;
            if (dx * dx + dy * dy <= 1.0) {
                labels[i] = 1;
                break;
            }
        }
    }
    return labels;
}

struct NormStats {
    std::vector<double> mean;
    std::vector<double> stddev;  // zero-variance dimensions stored as 1
};

inline NormStats fit_normalizer(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("fit_normalizer: no rows");
    const std::size_t d = rows[0].size();
    NormStats st;
    st.mean.assign(d, 0.0);
    st.stddev.assign(d, 0.0);
    for (const auto& r : rows)
        for (std::size_t j = 0; j < d; ++j) st.mean[j] += r[j];
    for (std::size_t j = 0; j < d; ++j) st.mean[j] /= rows.size();
    for (const auto& r : rows)
        for (std::size_t j = 0; j < d; ++j) {
            double dv = r[j] - st.mean[j];
            st.stddev[j] += dv * dv;
        }
    for (std::size_t j = 0; j < d; ++j) {
        st.stddev[j] = std::sqrt(st.stddev[j] / rows.size());
        if (st.stddev[j] == 0) st.stddev[j] = 1.0;
    }
    return st;
}

inline std::vector<double> apply_normalizer(const NormStats& st, const std::vector<double>& x) {
    if (x.size() != st.mean.size()) throw std::invalid_argument("dimension mismatch");
    std::vector<double> z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - st.mean[j]) / st.stddev[j];
    return z;
}

struct TrainConfig {
    double C = 1.0;
    double tolerance = 1e-7;
    long max_iterations = 10000000;  // epoch cap
    std::uint64_t seed = 0;
};

struct LinearModel {
    std::vector<double> weights;
    double bias = 0;
    NormStats norm;
    std::vector<FeatureDef> manifest;
    TrainConfig config;
};

namespace detail {

// splitmix64, used for the epoch shuffles so training is portable-deterministic.
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d4a77c735f7ccfull;
        return z ^ (z >> 31);
    }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
};

}  // namespace detail

inline double hinge_objective(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                              const std::vector<double>& ci, const std::vector<double>& w) {
    double obj = 0;
    for (double v : w) obj += 0.5 * v * v;
    for (std::size_t i = 0; i < X.size(); ++i) {
        double margin = 0;
        for (std::size_t j = 0; j < X[i].size(); ++j) margin += w[j] * X[i][j];
        double yi = y[i] > 0 ? 1.0 : -1.0;
        obj += ci[i] * std::max(0.0, 1.0 - yi * margin);
    }
    return obj;
}

// Dual coordinate descent for the L2-regularized L1-loss SVM, bias handled by
// augmenting each row with a constant 1 feature. Rows are already normalized.
inline LinearModel train(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
                         const TrainConfig& cfg) {
    if (rows.empty() || rows.size() != labels.size()) throw std::invalid_argument("train: bad input");
    std::size_t npos = 0, nneg = 0;
    for (int l : labels) (l > 0 ? npos : nneg)++;
    if (npos == 0 || nneg == 0) throw std::runtime_error("train: single-class input");

    const std::size_t n = rows.size();
    const std::size_t d = rows[0].size() + 1;  // bias column
    std::vector<std::vector<double>> X(n);
    for (std::size_t i = 0; i < n; ++i) {
        X[i] = rows[i];
        X[i].push_back(1.0);
    }
    const double cw_pos = double(n) / (2.0 * npos);
    const double cw_neg = double(n) / (2.0 * nneg);
    std::vector<double> ci(n);
    std::vector<double> qii(n);
    for (std::size_t i = 0; i < n; ++i) {
        ci[i] = cfg.C * (labels[i] > 0 ? cw_pos : cw_neg);
        double s = 0;
        for (double v : X[i]) s += v * v;
        qii[i] = s;
    }

    std::vector<double> w(d, 0.0), alpha(n, 0.0);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    detail::SplitMix64 rng(cfg.seed + 0x51d5eedull);

    // The dual objective (in minimization form) decreases monotonically under
    // coordinate descent, so the per-epoch improvement test cannot stall on a
    // transient primal plateau.
    auto dual_objective = [&]() {
        double o = 0;
        for (double v : w) o += 0.5 * v * v;
        for (double a : alpha) o -= a;
        return o;
    };
    double prev_obj = dual_objective();
    for (long epoch = 0; epoch < cfg.max_iterations; ++epoch) {
        for (std::size_t k = n; k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t i = order[k];
            if (qii[i] == 0) continue;
            double yi = labels[i] > 0 ? 1.0 : -1.0;
            double margin = 0;
            for (std::size_t j = 0; j < d; ++j) margin += w[j] * X[i][j];
            double g = yi * margin - 1.0;
            double pg = g;
            if (alpha[i] <= 0)
                pg = std::min(g, 0.0);
            else if (alpha[i] >= ci[i])
                pg = std::max(g, 0.0);
            if (pg == 0) continue;
            double a_new = std::clamp(alpha[i] - g / qii[i], 0.0, ci[i]);
            double delta = a_new - alpha[i];
            if (delta == 0) continue;
            alpha[i] = a_new;
            for (std::size_t j = 0; j < d; ++j) w[j] += delta * yi * X[i][j];
        }
        double obj = dual_objective();
        if (prev_obj - obj < cfg.tolerance * std::max(1.0, std::fabs(obj))) break;
        prev_obj = obj;
    }

    LinearModel m;
    m.weights.assign(w.begin(), w.end() - 1);
    m.bias = w.back();
    m.config = cfg;
    return m;
}

inline double predict_score(const LinearModel& m, const std::vector<double>& raw) {
    auto z = apply_normalizer(m.norm, raw);
    if (z.size() != m.weights.size()) throw std::invalid_argument("dimension mismatch");
    double margin = m.bias;
    for (std::size_t j = 0; j < z.size(); ++j) margin += m.weights[j] * z[j];
    return margin;
}

inline int predict_label(const LinearModel& m, const std::vector<double>& raw) {
    return predict_score(m, raw) > 0 ? 1 : 0;
}

// ---------------------------------------------------------------------------
// Persistence: versioned plain-text format with full numeric precision.
// ---------------------------------------------------------------------------

inline void save_model(const std::string& path, const LinearModel& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model: " + path);
    out.precision(17);
    out << "rnadot-model v1\n";
    out << "dims " << m.weights.size() << "\n";
    out << "bias " << m.bias << "\n";
    out << "config C=" << m.config.C << " tol=" << m.config.tolerance
        << " max_iter=" << m.config.max_iterations << " seed=" << m.config.seed << "\n";
    out << "columns channel,window,family,name,delta,alpha,mean,std,weight\n";
    for (std::size_t j = 0; j < m.weights.size(); ++j) {
        const FeatureDef& d = m.manifest[j];
        out << d.channel << ',' << d.window << ',' << d.family << ',' << d.name << ',' << d.delta
            << ',' << d.alpha << ',' << m.norm.mean[j] << ',' << m.norm.stddev[j] << ','
            << m.weights[j] << "\n";
    }
}

inline LinearModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("unreadable model: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "rnadot-model v1")
        throw std::runtime_error("bad model header: " + path);
    LinearModel m;
    std::size_t dims = 0;
    while (std::getline(in, line)) {
        if (line.rfind("dims ", 0) == 0) {
            dims = std::stoul(line.substr(5));
        } else if (line.rfind("bias ", 0) == 0) {
            m.bias = std::stod(line.substr(5));
        } else if (line.rfind("config ", 0) == 0) {
            std::istringstream ss(line.substr(7));
            std::string tok;
            while (ss >> tok) {
                auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
                if (key == "C") m.config.C = std::stod(val);
                else if (key == "tol") m.config.tolerance = std::stod(val);
                else if (key == "max_iter") m.config.max_iterations = std::stol(val);
                else if (key == "seed") m.config.seed = std::stoull(val);
            }
        } else if (line.rfind("columns ", 0) == 0) {
            break;
        }
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        FeatureDef d;
        std::getline(ss, d.channel, ',');
        std::getline(ss, tok, ',');
        d.window = std::stoi(tok);
        std::getline(ss, d.family, ',');
        std::getline(ss, d.name, ',');
        std::getline(ss, tok, ',');
        d.delta = std::stoi(tok);
        std::getline(ss, tok, ',');
        d.alpha = std::stoi(tok);
        std::getline(ss, tok, ',');
        m.norm.mean.push_back(std::stod(tok));
        std::getline(ss, tok, ',');
        m.norm.stddev.push_back(std::stod(tok));
        std::getline(ss, tok, ',');
        m.weights.push_back(std::stod(tok));
        m.manifest.push_back(d);
    }
    if (m.weights.size() != dims) throw std::runtime_error("model dims mismatch: " + path);
    return m;
}

// ---------------------------------------------------------------------------
// Coefficient-weight breakdown: share of total |w| per (family, channel),
// aggregated across distance, cutoff, and window size.
// ---------------------------------------------------------------------------

struct WeightShare {
    std::string family;
    std::string channel;
    double share = 0;
};

inline std::vector<WeightShare> weight_breakdown(const LinearModel& m) {
    if (m.manifest.size() != m.weights.size())
        throw std::invalid_argument("weight_breakdown: manifest/weight size mismatch");
    double total = 0;
    std::map<std::pair<std::string, std::string>, double> acc;
    for (std::size_t j = 0; j < m.weights.size(); ++j) {
        double a = std::fabs(m.weights[j]);
        total += a;
        acc[{m.manifest[j].family + "/" + m.manifest[j].name, m.manifest[j].channel}] += a;
    }
    std::vector<WeightShare> out;
    for (const auto& [key, v] : acc)
        out.push_back({key.first, key.second, total > 0 ? v / total : 0.0});
    return out;
}

}  // namespace rnadot
