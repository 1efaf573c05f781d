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

#include "mbqcnn/gadgets.hpp"

#include <memory>

namespace mbqcnn {

/// A model input: a normalized state (3 qubits for the spin chain, 4 for
/// iris) and its label.
struct EncodedSample {
    StateVector state;
    double label = 0.0;
};

enum class Task { Binary, ThreeClass };

/// Binary: 1 if the output exceeds 0.5. Three-class: nearest of {0, 0.5, 1},
/// ties going to the smaller label.
inline double decide(Task task, double output) {
    if (task == Task::Binary) {
        return output > 0.5 ? 1.0 : 0.0;
    }
    double best = 0.0;
    double best_d = std::abs(output);
    for (double l : {0.5, 1.0}) {
        const double d = std::abs(output - l);
        if (d < best_d) {
            best = l;
            best_d = d;
        }
    }
    return best;
}

inline std::string grid_label(int r, int c) { return "L(" + std::to_string(r) + "," + std::to_string(c) + ")"; }

// ---------------------------------------------------------------------------
// Lattice MBQCNN

/// Square-lattice cluster with bonded data qubits; every qubit, data and
/// cluster, is projected onto <0|R_y(alpha)R_z(beta). Qubit i of the joint
/// register (data qubits first, then cluster nodes) owns slots 2i and 2i+1.
class ClusterModel {
   public:
    ClusterModel(std::string topology, GraphSpec graph, std::size_t data_qubits, std::vector<Bond> bonds)
        : topology_(std::move(topology)), graph_(std::move(graph)), data_qubits_(data_qubits), bonds_(std::move(bonds)) {
        graph_.validate();
        for (std::size_t i = 0; i < data_qubits_; ++i) {
            labels_.push_back("d" + std::to_string(i + 1));
        }
        labels_.insert(labels_.end(), graph_.node_labels.begin(), graph_.node_labels.end());
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            pattern_.assignments[labels_[i]] = ProjectorSpec::zero_ry_rz(2 * i, 2 * i + 1);
        }
        pattern_.total_params = 2 * labels_.size();
        pattern_.validate();
        cluster_ = std::make_shared<const StateVector>(build_cluster(graph_));
        for (const auto& b : bonds_) {
            if (std::find(bonded_.begin(), bonded_.end(), b.node) == bonded_.end()) {
                bonded_.push_back(b.node);
            }
        }
        params_.assign(pattern_.total_params, 0.0);
    }

    [[nodiscard]] const std::string& topology() const { return topology_; }
    [[nodiscard]] const GraphSpec& graph() const { return graph_; }
    [[nodiscard]] const MeasurementPattern& pattern() const { return pattern_; }
    [[nodiscard]] const std::vector<Bond>& bonds() const { return bonds_; }
    [[nodiscard]] const std::vector<std::string>& qubit_labels() const { return labels_; }
    [[nodiscard]] std::size_t data_qubits() const { return data_qubits_; }
    [[nodiscard]] std::size_t measured_qubits() const { return labels_.size(); }
    [[nodiscard]] std::size_t param_count() const { return params_.size(); }
    [[nodiscard]] const std::vector<double>& get_params() const { return params_; }

    void set_params(std::vector<double> v) {
        if (v.size() != params_.size()) {
            throw std::invalid_argument("ClusterModel::set_params: expected " + std::to_string(params_.size()) +
                                        " values, got " + std::to_string(v.size()));
        }
        params_ = std::move(v);
    }

    /// The joint register: data ⊗ cluster with the bonds applied.
    [[nodiscard]] StateVector joint_state(const StateVector& x) const {
        check_input(x);
        return attach_inputs(x, *cluster_, graph_, bonds_);
    }

    /// Reference evaluation: attach, then project every qubit.
    [[nodiscard]] double predict_reference(const StateVector& x) const {
        const auto r = contract(joint_state(x), labels_, pattern_, params_);
        return std::norm(r.amplitude);
    }

    /// The amplitude is linear in x: amp(x) = sum_d w[d] x[d]. The weights
    /// come from contracting every unbonded cluster node once, then, for
    /// each data basis state d, the bonded nodes with their bras flipped by
    /// Z wherever a bonded data bit of d is 1.
    [[nodiscard]] Eigen::VectorXcd functional() const {
        std::vector<std::string> keep = bonded_;
        const auto partial = contract(*cluster_, graph_.node_labels, pattern_, params_, keep);
        const std::size_t k = data_qubits_;
        Eigen::VectorXcd w(static_cast<Eigen::Index>(std::size_t{1} << k));
        std::vector<Eigen::RowVector2cd> data_bras;
        for (std::size_t i = 0; i < k; ++i) {
            data_bras.push_back(pattern_.assignments.at(labels_[i]).instantiate(params_).bra());
        }
        for (std::size_t d = 0; d < (std::size_t{1} << k); ++d) {
            StateVector r = partial.residual;
            cplx coeff = 1.0;
            for (std::size_t i = 0; i < k; ++i) {
                coeff *= data_bras[i]((d >> (k - 1 - i)) & 1U);
            }
            // Project from the last residual qubit backwards so indices stay valid.
            for (std::size_t q = partial.residual_labels.size(); q-- > 0;) {
                const auto& node = partial.residual_labels[q];
                Eigen::RowVector2cd bra = pattern_.assignments.at(node).instantiate(params_).bra();
                unsigned flip = 0;
                for (const auto& b : bonds_) {
                    if (b.node == node) {
                        flip ^= static_cast<unsigned>((d >> (k - 1 - b.data_qubit)) & 1U);
                    }
                }
                if (flip) {
                    bra(1) = -bra(1);
                }
                r = project_out(r, q, Projector1::unnormalized(bra)).residual;
            }
            w(static_cast<Eigen::Index>(d)) = coeff * r.scalar();
        }
        return w;
    }

    [[nodiscard]] double predict(const StateVector& x) const {
        check_input(x);
        return apply_functional(functional(), x);
    }

    [[nodiscard]] std::vector<double> predict_batch(std::span<const EncodedSample> xs) const {
        const Eigen::VectorXcd w = functional();
        std::vector<double> out;
        out.reserve(xs.size());
        for (const auto& s : xs) {
            check_input(s.state);
            out.push_back(apply_functional(w, s.state));
        }
        return out;
    }

   private:
    void check_input(const StateVector& x) const {
        if (x.n_qubits() != data_qubits_) {
            throw std::invalid_argument("ClusterModel '" + topology_ + "': expected a " + std::to_string(data_qubits_) +
                                        "-qubit input, got " + std::to_string(x.n_qubits()));
        }
    }

    static double apply_functional(const Eigen::VectorXcd& w, const StateVector& x) {
        cplx amp = 0.0;
        for (std::size_t d = 0; d < x.dim(); ++d) {
            amp += w(static_cast<Eigen::Index>(d)) * x[d];
        }
        return std::norm(amp);
    }

    std::string topology_;
    GraphSpec graph_;
    std::size_t data_qubits_;
    std::vector<Bond> bonds_;
    std::vector<std::string> labels_;
    std::vector<std::string> bonded_;
    MeasurementPattern pattern_;
    std::shared_ptr<const StateVector> cluster_;
    std::vector<double> params_;
};

/// 2×5 grid; data qubits d1..d3 bonded to the middle of row 0.
inline ClusterModel haldane_lattice() {
    GraphSpec g;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 5; ++c) {
            g.node_labels.push_back(grid_label(r, c));
        }
    }
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 4; ++c) {
            g.edges.emplace_back(grid_label(r, c), grid_label(r, c + 1));
        }
    }
    for (int c = 0; c < 5; ++c) {
        g.edges.emplace_back(grid_label(0, c), grid_label(1, c));
    }
    g.input_ports = {grid_label(0, 1), grid_label(0, 2), grid_label(0, 3)};
    return {"haldane-2x5", g, 3, {{0, grid_label(0, 1)}, {1, grid_label(0, 2)}, {2, grid_label(0, 3)}}};
}

/// 2×4 grid with extra nodes e1, e2 off column 0, the two diagonals of the
/// far 2×2 square, and data qubits d1..d4 on {e1, L(0,0), L(1,0), e2}.
inline ClusterModel iris_lattice() {
    GraphSpec g;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 4; ++c) {
            g.node_labels.push_back(grid_label(r, c));
        }
    }
    g.node_labels.emplace_back("e1");
    g.node_labels.emplace_back("e2");
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 3; ++c) {
            g.edges.emplace_back(grid_label(r, c), grid_label(r, c + 1));
        }
    }
    for (int c = 0; c < 4; ++c) {
        g.edges.emplace_back(grid_label(0, c), grid_label(1, c));
    }
    g.edges.emplace_back("e1", grid_label(0, 0));
    g.edges.emplace_back("e2", grid_label(1, 0));
    g.edges.emplace_back(grid_label(0, 2), grid_label(1, 3));
    g.edges.emplace_back(grid_label(0, 3), grid_label(1, 2));
    g.input_ports = {"e1", grid_label(0, 0), grid_label(1, 0), "e2"};
    return {"iris-2x4x2", g, 4, {{0, "e1"}, {1, grid_label(0, 0)}, {2, grid_label(1, 0)}, {3, "e2"}}};
}

// ---------------------------------------------------------------------------
// QCNN baseline

/// Convolution gate on a neighbouring pair (first factor = upper qubit).
inline Unitary4 qcnn_conv_gate(std::span<const double, 8> t) {
    const Unitary2 h = hadamard();
    return kron(ry(t[0]), rz(t[1]) * h) * cnot() * kron(ry(t[2]), h) * cnot_reversed() * kron(rz(t[3]), ry(t[4])) *
           cnot() * kron(rz(t[5]), rz(t[6]) * ry(t[7]));
}

/// Pooling gate; control is the first factor.
inline Unitary4 qcnn_pool_gate(double t1, double t2) {
    const Unitary2 id = Unitary2::Identity();
    return kron(id, rz(t1) * ry(t2)) * cnot() * kron(id, rz(-t1) * ry(-t2)) * cnot();
}

/// Three convolution gates on (0,1), (1,2), (2,3), pooling with controls 0, 2
/// and targets 1, 3, then the probability that both targets read |+>.
class QcnnModel {
   public:
    static constexpr std::size_t kParams = 28;

    QcnnModel() : params_(kParams, 0.0) {}

    [[nodiscard]] std::string topology() const { return "qcnn-iris"; }
    [[nodiscard]] std::size_t param_count() const { return kParams; }
    [[nodiscard]] const std::vector<double>& get_params() const { return params_; }

    void set_params(std::vector<double> v) {
        if (v.size() != kParams) {
            throw std::invalid_argument("QcnnModel::set_params: expected 28 values, got " + std::to_string(v.size()));
        }
        params_ = std::move(v);
    }

    [[nodiscard]] StateVector circuit_output(const StateVector& x) const {
        if (x.n_qubits() != 4) {
            throw std::invalid_argument("QcnnModel: expected a 4-qubit input, got " + std::to_string(x.n_qubits()));
        }
        StateVector s = x;
        for (std::size_t g = 0; g < 3; ++g) {
            s = apply_2q(std::move(s), g, g + 1, qcnn_conv_gate(std::span<const double, 8>(params_.data() + 8 * g, 8)));
        }
        s = apply_2q(std::move(s), 0, 1, qcnn_pool_gate(params_[24], params_[25]));
        s = apply_2q(std::move(s), 2, 3, qcnn_pool_gate(params_[26], params_[27]));
        return s;
    }

    [[nodiscard]] double predict(const StateVector& x) const {
        StateVector s = circuit_output(x);
        s = project_out(s, 3, Projector1::plus()).residual;
        return project_out(s, 1, Projector1::plus()).probability;
    }

    [[nodiscard]] std::vector<double> predict_batch(std::span<const EncodedSample> xs) const {
        std::vector<double> out;
        out.reserve(xs.size());
        for (const auto& s : xs) {
            out.push_back(predict(s.state));
        }
        return out;
    }

   private:
    std::vector<double> params_;
};

// ---------------------------------------------------------------------------
// CNN baseline

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Five 3-tap kernels (entry 1 of kernel 4 frozen), sigmoid, average pooling,
/// two sigmoid hidden units and one sigmoid output. Parameter layout: the 14
/// free kernel entries row-major, hidden weights (2×5) and biases (2), output
/// weights (2) and bias.
class CnnModel {
   public:
    static constexpr std::size_t kKernels = 5;
    static constexpr std::size_t kTaps = 3;
    static constexpr std::size_t kInput = 16;
    static constexpr std::size_t kFrozenIndex = 4 * kTaps + 1;
    static constexpr std::size_t kParams = kKernels * kTaps - 1 + 2 * (kKernels + 1) + 3;
    static constexpr std::size_t kClaimedParams = 28;

    enum class Activation { Sigmoid, Identity };

    CnnModel() : params_(kParams, 0.0) {}

    [[nodiscard]] std::string topology() const { return "cnn-iris"; }
    [[nodiscard]] std::size_t param_count() const { return kParams; }
    [[nodiscard]] bool count_discrepancy() const { return kParams != kClaimedParams; }
    [[nodiscard]] const std::vector<double>& get_params() const { return params_; }

    void set_params(std::vector<double> v) {
        if (v.size() != kParams) {
            throw std::invalid_argument("CnnModel::set_params: expected " + std::to_string(kParams) + " values, got " +
                                        std::to_string(v.size()));
        }
        params_ = std::move(v);
    }

    /// Value held by the frozen kernel entry; 0 unless a test overrides it.
    [[nodiscard]] double frozen_value() const { return frozen_value_; }
    void set_frozen_value(double v) { frozen_value_ = v; }

    void set_activation(Activation a) { activation_ = a; }

    [[nodiscard]] std::array<double, kKernels * kTaps> kernels() const {
        std::array<double, kKernels * kTaps> k{};
        std::size_t p = 0;
        for (std::size_t i = 0; i < k.size(); ++i) {
            k[i] = i == kFrozenIndex ? frozen_value_ : params_[p++];
        }
        return k;
    }

    [[nodiscard]] double predict(std::span<const double> x) const {
        if (x.size() != kInput) {
            throw std::invalid_argument("CnnModel: expected 16 inputs, got " + std::to_string(x.size()));
        }
        const auto k = kernels();
        std::array<double, kKernels> pooled{};
        for (std::size_t f = 0; f < kKernels; ++f) {
            double acc = 0.0;
            for (std::size_t j = 0; j + kTaps <= kInput; ++j) {
                double z = 0.0;
                for (std::size_t m = 0; m < kTaps; ++m) {
                    z += k[f * kTaps + m] * x[j + m];
                }
                acc += act(z);
            }
            pooled[f] = acc / static_cast<double>(kInput - kTaps + 1);
        }
        const double* hw = params_.data() + (kKernels * kTaps - 1);
        const double* hb = hw + 2 * kKernels;
        const double* ow = hb + 2;
        const double ob = ow[2];
        double out = ob;
        for (std::size_t i = 0; i < 2; ++i) {
            double z = hb[i];
            for (std::size_t f = 0; f < kKernels; ++f) {
                z += hw[i * kKernels + f] * pooled[f];
            }
            out += ow[i] * act(z);
        }
        return act(out);
    }

    [[nodiscard]] double predict(const StateVector& x) const {
        std::array<double, kInput> v{};
        if (x.dim() != kInput) {
            throw std::invalid_argument("CnnModel: expected a 16-amplitude input");
        }
        for (std::size_t i = 0; i < kInput; ++i) {
            v[i] = x[i].real();
        }
        return predict(std::span<const double>(v));
    }

    [[nodiscard]] std::vector<double> predict_batch(std::span<const EncodedSample> xs) const {
        std::vector<double> out;
        out.reserve(xs.size());
        for (const auto& s : xs) {
            out.push_back(predict(s.state));
        }
        return out;
    }

   private:
    [[nodiscard]] double act(double z) const { return activation_ == Activation::Sigmoid ? sigmoid(z) : z; }

    std::vector<double> params_;
    double frozen_value_ = 0.0;
    Activation activation_ = Activation::Sigmoid;
};

// ---------------------------------------------------------------------------
// Encoding

/// Per-feature min-max bounds, fitted on a set of feature rows.
struct FeatureScaling {
    std::array<double, 4> lo{};
    std::array<double, 4> hi{};

    static FeatureScaling fit(std::span<const std::array<double, 4>> rows) {
        if (rows.empty()) {
            throw std::invalid_argument("FeatureScaling::fit: no rows");
        }
        FeatureScaling s;
        s.lo = s.hi = rows[0];
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < 4; ++i) {
                s.lo[i] = std::min(s.lo[i], r[i]);
                s.hi[i] = std::max(s.hi[i], r[i]);
            }
        }
        return s;
    }

    [[nodiscard]] std::array<double, 4> apply(const std::array<double, 4>& f) const {
        std::array<double, 4> out{};
        for (std::size_t i = 0; i < 4; ++i) {
            out[i] = hi[i] > lo[i] ? (f[i] - lo[i]) / (hi[i] - lo[i]) : 0.0;
        }
        return out;
    }
};

/// (f1, f2, f3, f4, 0, ..., 0) normalized, as 4-qubit amplitudes.
inline EncodedSample encode_iris(const std::array<double, 4>& features, double label = 0.0) {
    double n2 = 0.0;
    for (double f : features) {
        if (!std::isfinite(f)) {
            throw std::invalid_argument("encode_iris: non-finite feature");
        }
        n2 += f * f;
    }
    if (n2 == 0.0) {
        throw std::invalid_argument("encode_iris: all features are zero");
    }
    const double n = std::sqrt(n2);
    std::vector<cplx> a(16);
    for (std::size_t i = 0; i < 4; ++i) {
        a[i] = features[i] / n;
    }
    return {StateVector(4, std::move(a)), label};
}

}  // namespace mbqcnn
