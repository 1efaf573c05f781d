// Copyright 2026 The mbqcnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "mbqcnn/models.hpp"

#include <concepts>
#include <optional>
#include <random>

namespace mbqcnn {

template <class M>
concept TrainableModel = requires(M m, const M cm, std::vector<double> v, std::span<const EncodedSample> xs) {
    { cm.param_count() } -> std::convertible_to<std::size_t>;
    { cm.get_params() } -> std::convertible_to<std::vector<double>>;
    m.set_params(v);
    { cm.predict_batch(xs) } -> std::convertible_to<std::vector<double>>;
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

inline constexpr Range kAngleInit{0.0, 2.0 * std::numbers::pi};
inline constexpr Range kWeightInit{-1.0, 1.0};

struct TrainingConfig {
    std::size_t epochs = 100;
    double fd_step = 1e-3;
    std::uint64_t seed = 0;
    Range lr_low{0.25, 0.75};
    Range lr_high{0.95, 1.45};
    std::size_t repeats = 5;
    Task task = Task::Binary;

    void validate() const {
        if (!(fd_step > 0.0) || !std::isfinite(fd_step)) {
            throw std::invalid_argument("TrainingConfig: fd_step must be positive");
        }
        if (lr_low.lo > lr_low.hi || lr_high.lo > lr_high.hi) {
            throw std::invalid_argument("TrainingConfig: empty learning-rate range");
        }
    }
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double test_accuracy = 0.0;
    double grad_norm = 0.0;
    double lr = 0.0;
};

struct TrainingTrace {
    std::vector<EpochRecord> records;
    std::vector<double> final_params;

    /// First epoch whose recorded training loss is at or below `target`.
    [[nodiscard]] std::optional<std::size_t> epochs_to_reach(double target) const {
        for (const auto& r : records) {
            if (r.train_loss <= target) {
                return r.epoch;
            }
        }
        return std::nullopt;
    }
};

/// (1/2N) Σ (L_n - prediction_n)².
inline double mse_from_predictions(const std::vector<double>& pred, std::span<const EncodedSample> data) {
    if (data.empty()) {
        throw std::invalid_argument("mse_loss: empty dataset");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double e = data[i].label - pred[i];
        s += e * e;
    }
    return s / (2.0 * static_cast<double>(data.size()));
}

template <TrainableModel M>
double mse_loss(const M& model, std::span<const EncodedSample> data) {
    if (data.empty()) {
        throw std::invalid_argument("mse_loss: empty dataset");
    }
    return mse_from_predictions(model.predict_batch(data), data);
}

/// Central differences, one parameter at a time.
template <TrainableModel M>
std::vector<double> fd_gradient(const M& model, std::span<const EncodedSample> data, double h) {
    if (!(h > 0.0)) {
        throw std::invalid_argument("fd_gradient: step must be positive");
    }
    M probe = model;
    const std::vector<double> theta = model.get_params();
    std::vector<double> g(theta.size());
    std::vector<double> shifted = theta;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        shifted[i] = theta[i] + h;
        probe.set_params(shifted);
        const double up = mse_loss(probe, data);
        shifted[i] = theta[i] - h;
        probe.set_params(shifted);
        const double down = mse_loss(probe, data);
        shifted[i] = theta[i];
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

inline double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

template <TrainableModel M>
double accuracy(const M& model, std::span<const EncodedSample> data, Task task) {
    if (data.empty()) {
        throw std::invalid_argument("accuracy: empty dataset");
    }
    const auto pred = model.predict_batch(data);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (decide(task, pred[i]) == data[i].label) {
            ++hit;
        }
    }
    return static_cast<double>(hit) / static_cast<double>(data.size());
}

inline std::vector<double> draw_uniform(std::mt19937_64& rng, std::size_t n, Range r) {
    std::uniform_real_distribution<double> u(r.lo, r.hi);
    std::vector<double> v(n);
    for (auto& x : v) {
        x = u(rng);
    }
    return v;
}

/// Sets every parameter uniformly in `r` from an RNG seeded with `seed`.
template <TrainableModel M>
void init_params(M& model, std::uint64_t seed, Range r) {
    std::mt19937_64 rng(seed);
    model.set_params(draw_uniform(rng, model.param_count(), r));
}

/// Gradient descent with a randomized learning rate: the rate is drawn from
/// lr_low when the gradient norm dropped since the previous epoch and from
/// lr_high otherwise (including the first epoch). Each record holds the
/// loss and test accuracy after that epoch's update.
template <TrainableModel M>
TrainingTrace train(M& model, std::span<const EncodedSample> train_set, std::span<const EncodedSample> test_set,
                    const TrainingConfig& cfg) {
    cfg.validate();
    if (train_set.empty()) {
        throw std::invalid_argument("train: empty training set");
    }
    std::mt19937_64 rng(cfg.seed);
    TrainingTrace trace;
    std::optional<double> prev_norm;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto g = fd_gradient(model, train_set, cfg.fd_step);
        const double norm = l2_norm(g);
        const Range r = (prev_norm && norm < *prev_norm) ? cfg.lr_low : cfg.lr_high;
        const double lr = std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
        auto theta = model.get_params();
        for (std::size_t i = 0; i < theta.size(); ++i) {
            theta[i] -= lr * g[i];
        }
        model.set_params(theta);
        prev_norm = norm;

        const double loss = mse_loss(model, train_set);
        if (!std::isfinite(loss)) {
            throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                     " (gradient norm " + std::to_string(norm) + ")");
        }
        const double acc = test_set.empty() ? 0.0 : accuracy(model, test_set, cfg.task);
        trace.records.push_back({epoch, loss, acc, norm, lr});
    }
    trace.final_params = model.get_params();
    return trace;
}

struct AggregateRecord {
    std::size_t epoch = 0;
    double mean_loss = 0.0;
    double var_loss = 0.0;
    double mean_acc = 0.0;
    double var_acc = 0.0;
};

/// Per-epoch mean and population variance across traces of equal length.
inline std::vector<AggregateRecord> aggregate(const std::vector<TrainingTrace>& traces) {
    if (traces.empty()) {
        throw std::invalid_argument("aggregate: no traces");
    }
    const std::size_t n = traces.front().records.size();
    for (const auto& t : traces) {
        if (t.records.size() != n) {
            throw std::invalid_argument("aggregate: traces differ in length");
        }
    }
    const auto k = static_cast<double>(traces.size());
    std::vector<AggregateRecord> out(n);
    for (std::size_t e = 0; e < n; ++e) {
        double ml = 0.0;
        double ma = 0.0;
        for (const auto& t : traces) {
            ml += t.records[e].train_loss;
            ma += t.records[e].test_accuracy;
        }
        ml /= k;
        ma /= k;
        double vl = 0.0;
        double va = 0.0;
        for (const auto& t : traces) {
            vl += (t.records[e].train_loss - ml) * (t.records[e].train_loss - ml);
            va += (t.records[e].test_accuracy - ma) * (t.records[e].test_accuracy - ma);
        }
        out[e] = {traces.front().records[e].epoch, ml, vl / k, ma, va / k};
    }
    return out;
}

struct GradStudyResult {
    std::vector<std::size_t> counts;
    std::vector<double> log10_avg_grad;
};

inline std::vector<std::size_t> doubling_counts(std::size_t first = 8, std::size_t last = 1024) {
    std::vector<std::size_t> v;
    for (std::size_t c = first; c <= last; c *= 2) {
        v.push_back(c);
    }
    return v;
}

/// Average ‖∇loss‖ over nested random parameter draws: the draws for count
/// k are the first k of one seeded sequence. A zero average is reported as
/// -infinity.
template <TrainableModel M>
GradStudyResult avg_gradient_magnitude(const M& prototype, std::span<const EncodedSample> data,
                                       const std::vector<std::size_t>& counts, std::uint64_t seed, Range init,
                                       double fd_step = 1e-3) {
    if (counts.empty()) {
        throw std::invalid_argument("avg_gradient_magnitude: no sample counts");
    }
    for (std::size_t i = 1; i < counts.size(); ++i) {
        if (counts[i] <= counts[i - 1]) {
            throw std::invalid_argument("avg_gradient_magnitude: counts must increase");
        }
    }
    std::mt19937_64 rng(seed);
    M model = prototype;
    GradStudyResult res;
    double sum = 0.0;
    std::size_t done = 0;
    for (auto c : counts) {
        for (; done < c; ++done) {
            model.set_params(draw_uniform(rng, model.param_count(), init));
            sum += l2_norm(fd_gradient(model, data, fd_step));
        }
        const double avg = sum / static_cast<double>(c);
        res.counts.push_back(c);
        res.log10_avg_grad.push_back(avg > 0.0 ? std::log10(avg) : -std::numeric_limits<double>::infinity());
    }
    return res;
}

}  // namespace mbqcnn
