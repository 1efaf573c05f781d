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

#include "mbqcnn/graphstate.hpp"

#include <array>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>

namespace mbqcnn {

/// Z-X-Z Euler angles; the rotation is R_z(xi) R_x(zeta) R_z(theta).
struct RotationTriple {
    double theta = 0.0;
    double zeta = 0.0;
    double xi = 0.0;

    [[nodiscard]] Unitary2 matrix() const { return rz(xi) * rx(zeta) * rz(theta); }
};

struct UijParams {
    std::array<std::array<double, 3>, 4> a{};  // rows for R_1, R_2, R_7, R_8
    double h1 = 0.0;
    double h2 = 0.0;
    double h3 = 0.0;

    [[nodiscard]] double t1() const { return -2.0 * h3 - std::numbers::pi / 2; }
    [[nodiscard]] double t2() const { return std::numbers::pi / 2 + 2.0 * h1; }
    [[nodiscard]] double t3() const { return -2.0 * h2 - std::numbers::pi / 2; }
};

struct VijParams {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

/// A measurement pattern with its trainable slots bound to concrete angles.
struct Gadget {
    GraphSpec graph;
    MeasurementPattern pattern;
    std::vector<double> params;
    std::vector<std::string> outputs;
    /// Slot indices of selected measurement angles, by role name.
    std::map<std::string, std::size_t> named_slots;

    [[nodiscard]] Eigen::MatrixXcd map() const { return induced_map(graph, pattern, params, outputs); }
};

struct GadgetReport {
    Eigen::MatrixXcd target;
    Eigen::MatrixXcd realized;
    double distance = 0.0;
    double scale = 0.0;
    std::string dressing = "I,I";
};

/// Wire-oriented pattern assembly. Each wire has a current node; step()
/// measures it at <+|R_z(angle), which teleports U_H R_z(angle) onto a fresh
/// node. A CZ between the current nodes of two wires is a logical CZ.
class PatternBuilder {
   public:
    std::size_t port() {
        const std::size_t w = current_.size();
        const auto n = add_node();
        graph_.input_ports.push_back(n);
        current_.push_back(n);
        return w;
    }

    /// Measures the wire's node at <+|R_z(angle) through a bound slot.
    void step(std::size_t wire, double angle, const std::string& name = "") {
        const auto& cur = current_.at(wire);
        const std::size_t slot = params_.size();
        params_.push_back(angle);
        pattern_.assignments[cur] = ProjectorSpec::plus_rz(slot);
        if (!name.empty()) {
            named_.emplace(name, slot);
        }
        advance(wire);
    }

    /// Measures the wire's node at the fixed <+| basis.
    void step_fixed(std::size_t wire) {
        pattern_.assignments[current_.at(wire)] = ProjectorSpec::fixed_plus();
        advance(wire);
    }

    void cz(std::size_t a, std::size_t b) { graph_.edges.emplace_back(current_.at(a), current_.at(b)); }

    /// CNOT from wire c to wire t: six fixed measurements on the T-shaped block.
    void cnot(std::size_t c, std::size_t t) {
        step_fixed(c);
        step_fixed(c);
        step_fixed(t);
        cz(c, t);
        step_fixed(c);
        step_fixed(c);
        step_fixed(t);
    }

    /// R_z(r3) R_x(r2) R_z(r1) on a wire via four measurements.
    void rotation(std::size_t wire, const std::array<double, 3>& r, const std::string& name = "") {
        for (std::size_t i = 0; i < 3; ++i) {
            step(wire, r[i], name.empty() ? "" : name + "." + std::to_string(i + 1));
        }
        step_fixed(wire);
    }

    Gadget finish() {
        Gadget g;
        g.graph = graph_;
        g.pattern = pattern_;
        g.pattern.total_params = params_.size();
        g.params = params_;
        g.outputs = current_;
        g.named_slots = named_;
        return g;
    }

   private:
    std::string add_node() {
        char buf[16];
        std::snprintf(buf, sizeof buf, "n%03zu", graph_.node_labels.size());
        graph_.node_labels.emplace_back(buf);
        return buf;
    }

    void advance(std::size_t wire) {
        const auto next = add_node();
        graph_.edges.emplace_back(current_[wire], next);
        current_[wire] = next;
    }

    GraphSpec graph_;
    MeasurementPattern pattern_;
    std::vector<double> params_;
    std::vector<std::string> current_;
    std::map<std::string, std::size_t> named_;
};

/// 4-node path; node "1" is the input, "4" the output; nodes 1-3 measured at
/// <+|R_z of theta, zeta, xi. Realizes U_H R_z(xi) R_x(zeta) R_z(theta).
inline Gadget l4_gadget(const RotationTriple& rt) {
    Gadget g;
    g.graph.node_labels = {"1", "2", "3", "4"};
    g.graph.edges = {{"1", "2"}, {"2", "3"}, {"3", "4"}};
    g.graph.input_ports = {"1"};
    g.pattern.assignments = {{"1", ProjectorSpec::plus_rz(0)},
                             {"2", ProjectorSpec::plus_rz(1)},
                             {"3", ProjectorSpec::plus_rz(2)}};
    g.pattern.total_params = 3;
    g.params = {rt.theta, rt.zeta, rt.xi};
    g.outputs = {"4"};
    g.named_slots = {{"theta", 0}, {"zeta", 1}, {"xi", 2}};
    return g;
}

inline Unitary2 l4_oracle(const RotationTriple& rt) { return hadamard() * rt.matrix(); }

/// T-shaped 8-node block: control enters at "1" and leaves at "5"; target
/// enters at "6" and leaves at "8".
inline Gadget e8_gadget() {
    Gadget g;
    for (int i = 1; i <= 8; ++i) {
        g.graph.node_labels.push_back(std::to_string(i));
    }
    g.graph.edges = {{"1", "2"}, {"2", "3"}, {"3", "4"}, {"4", "5"}, {"3", "7"}, {"6", "7"}, {"7", "8"}};
    g.graph.input_ports = {"1", "6"};
    for (const char* v : {"1", "2", "3", "4", "6", "7"}) {
        g.pattern.assignments[v] = ProjectorSpec::fixed_plus();
    }
    g.pattern.total_params = 0;
    g.outputs = {"5", "8"};
    return g;
}

inline bool is_unitary(const Eigen::MatrixXcd& u, double tol = 1e-12) {
    return u.rows() == u.cols() &&
           (u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
}

/// (R_7 ⊗ R_8) CNOT (R_5 ⊗ R_6) CNOT (R_3 ⊗ R_4) CNOT (R_1 ⊗ R_2), with r[0] = R_1.
inline Unitary4 two_qubit_decomposition_oracle(const std::array<Unitary2, 8>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!is_unitary(r[i])) {
            throw std::invalid_argument("two_qubit_decomposition_oracle: R_" + std::to_string(i + 1) +
                                        " is not unitary");
        }
    }
    const Unitary4 c = cnot();
    return kron(r[6], r[7]) * c * kron(r[4], r[5]) * c * kron(r[2], r[3]) * c * kron(r[0], r[1]);
}

/// The eight rotations the U_ij cluster is built to realize.
inline std::array<Unitary2, 8> uij_rotations(const UijParams& p) {
    auto zxz = [](const std::array<double, 3>& a) { return RotationTriple{a[0], a[1], a[2]}.matrix(); };
    const Unitary2 h = hadamard();
    return {zxz(p.a[0]),         zxz(p.a[1]),         rz(p.t1()) * h, ry(p.t2()) * h,
            h,                   h * ry(p.t3()),      zxz(p.a[2]),    zxz(p.a[3])};
}

inline Unitary4 uij_oracle(const UijParams& p) { return two_qubit_decomposition_oracle(uij_rotations(p)); }

/// Two wires joined by three CNOT blocks. The middle rotations are compiled
/// to measurement angles directly: U_H R_z(t) U_H is R_x(t), and the R_y
/// factors are conjugated into R_x by fixed quarter-turn R_z measurements.
inline Gadget uij_cluster(const UijParams& p) {
    using std::numbers::pi;
    PatternBuilder b;
    const auto A = b.port();
    const auto B = b.port();
    b.rotation(A, p.a[0], "R1");
    b.rotation(B, p.a[1], "R2");
    b.cnot(A, B);
    b.step_fixed(A);
    b.step(A, p.t1(), "t1");
    b.step_fixed(A);
    b.step_fixed(B);
    b.step(B, -pi / 2);
    b.step(B, p.t2(), "t2");
    b.step(B, pi / 2);
    b.step_fixed(B);
    b.cnot(A, B);
    b.step_fixed(A);
    b.step(B, -pi / 2);
    b.step(B, p.t3(), "t3");
    b.step(B, pi / 2);
    b.cnot(A, B);
    b.rotation(A, p.a[2], "R7");
    b.rotation(B, p.a[3], "R8");
    return b.finish();
}

/// Split R = R(second) R(first). The canonical split puts everything in
/// `first` and leaves `second` as the identity.
struct RotationSplit {
    RotationTriple first;
    RotationTriple second;
};

inline RotationSplit split_rotation(const RotationTriple& r) { return {r, RotationTriple{}}; }

/// Split that peels off the leading R_z(theta) as its own rotation.
inline RotationSplit split_rotation_leading_z(const RotationTriple& r) {
    return {RotationTriple{r.theta, 0.0, 0.0}, RotationTriple{0.0, r.zeta, r.xi}};
}

/// Target rotation U = R_z(-a) R_x(-b) R_z(g) R_x(b) R_z(a) controlled on the
/// X basis of the first qubit, built from A, B, C with ABC = I and
/// A X B X C = U, plus a control phase e^{ia}.
inline Unitary4 controlled_rotation_oracle(const VijParams& p) {
    const Unitary2 c = rz(p.gamma / 4) * rx(p.beta) * rz(p.alpha);
    const Unitary2 b = rz(-p.gamma / 2);
    const Unitary2 a = rz(-p.alpha) * rx(-p.beta) * rz(p.gamma / 4);
    Unitary2 phase = Unitary2::Identity();
    phase(1, 1) = std::polar(1.0, p.alpha);
    const Unitary2 id = Unitary2::Identity();
    const Unitary2 h = hadamard();
    return kron(h, id) * kron(phase, a) * cnot() * kron(id, b) * cnot() * kron(id, c) * kron(h, id);
}

/// Overrides for the V_ij measurement angles, used to probe constraint violations.
struct VijAngles {
    std::array<double, 3> l4a;
    std::array<double, 3> l4b;
    double shared = 0.0;
    double line = 0.0;

    static VijAngles from(const VijParams& p) {
        return {{p.alpha, p.beta, p.gamma / 4}, {p.gamma / 4, -p.beta, -p.alpha}, -p.gamma / 2, p.alpha};
    }
};

/// Controlled rotation: the control line is an extra qubit feeding the first
/// CNOT block; the target passes L4a, two CNOT blocks whose middle target
/// node is shared, then L4b; the control leaves through two more qubits.
/// Output frame is U_H ⊗ U_H relative to controlled_rotation_oracle.
inline Gadget vij_cluster(const VijAngles& ang) {
    PatternBuilder b;
    const auto C = b.port();
    const auto T = b.port();
    b.step_fixed(C);
    b.step(T, ang.l4a[0], "l4a.1");
    b.step(T, ang.l4a[1], "l4a.2");
    b.step(T, ang.l4a[2], "l4a.3");
    b.step_fixed(T);
    b.step_fixed(C);
    b.step_fixed(C);
    b.step_fixed(T);
    b.cz(C, T);
    b.step_fixed(C);
    b.step_fixed(C);
    b.step_fixed(T);
    b.step_fixed(C);
    b.step_fixed(C);
    b.step(T, ang.shared, "shared");
    b.cz(C, T);
    b.step_fixed(C);
    b.step_fixed(C);
    b.step_fixed(T);
    b.step(T, ang.l4b[0], "l4b.1");
    b.step(T, ang.l4b[1], "l4b.2");
    b.step(T, ang.l4b[2], "l4b.3");
    b.step(C, ang.line, "line");
    b.step_fixed(C);
    return b.finish();
}

inline Gadget vij_cluster(const VijParams& p) { return vij_cluster(VijAngles::from(p)); }

inline Unitary4 vij_output_frame() { return kron(hadamard(), hadamard()); }

// ---------------------------------------------------------------------------
// Verification

namespace detail {

inline Unitary2 named_local(char c) {
    switch (c) {
        case 'I':
            return Unitary2::Identity();
        case 'X':
            return pauli(Axis::X);
        case 'Y':
            return pauli(Axis::Y);
        case 'Z':
            return pauli(Axis::Z);
        case 'H':
            return hadamard();
    }
    throw std::invalid_argument("unknown local frame");
}

}  // namespace detail

/// Candidate output dressings for two-qubit gadgets, identity first, then the
/// Pauli byproducts, then frames involving U_H.
inline std::vector<std::string> dressing_candidates() {
    std::vector<std::string> out;
    const std::string paulis = "IXYZ";
    for (char a : paulis) {
        for (char b : paulis) {
            out.push_back(std::string{a, ',', b});
        }
    }
    const std::string all = "IXYZH";
    for (char a : all) {
        for (char b : all) {
            if (a == 'H' || b == 'H') {
                out.push_back(std::string{a, ',', b});
            }
        }
    }
    return out;
}

inline Unitary4 dressing_matrix(const std::string& d) {
    if (d.size() != 3 || d[1] != ',') {
        throw std::invalid_argument("malformed dressing '" + d + "'");
    }
    return kron(detail::named_local(d[0]), detail::named_local(d[2]));
}

inline GadgetReport compare_map(const Eigen::MatrixXcd& realized, const Eigen::MatrixXcd& target,
                                const std::string& dressing = "I,I") {
    GadgetReport r;
    r.target = target;
    r.realized = realized;
    r.dressing = dressing;
    r.distance = distance_up_to_phase(realized, target);
    r.scale = realized.norm() / target.norm();
    return r;
}

/// Picks the first dressing D with D·target matching every realized map.
inline std::string search_dressing(const std::vector<Eigen::MatrixXcd>& realized,
                                   const std::vector<Eigen::MatrixXcd>& targets, double tol = 1e-9) {
    for (const auto& d : dressing_candidates()) {
        const Unitary4 dm = dressing_matrix(d);
        bool ok = true;
        for (std::size_t i = 0; i < realized.size() && ok; ++i) {
            ok = distance_up_to_phase(realized[i], dm * targets[i]) <= tol;
        }
        if (ok) {
            return d;
        }
    }
    return "I,I";
}

enum class GadgetKind { L4, E8, Uij, Vij };

inline const char* gadget_name(GadgetKind k) {
    switch (k) {
        case GadgetKind::L4:
            return "L4";
        case GadgetKind::E8:
            return "E8";
        case GadgetKind::Uij:
            return "Uij";
        case GadgetKind::Vij:
            return "Vij";
    }
    return "?";
}

struct VerifySummary {
    GadgetKind kind = GadgetKind::L4;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    double max_distance = 0.0;
    double min_scale = std::numeric_limits<double>::infinity();
    double max_scale = 0.0;
    std::string dressing = "I,I";
    std::size_t nodes = 0;
};

inline Eigen::VectorXcd random_state(std::mt19937_64& rng, std::size_t n_qubits) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXcd v(static_cast<Eigen::Index>(std::size_t{1} << n_qubits));
    for (auto& x : v) {
        x = {g(rng), g(rng)};
    }
    return v / v.norm();
}

/// Compares a gadget's induced map against its circuit oracle over `trials`
/// random parameter draws. For L4 and E8 the maps are also checked on random
/// input states (and for E8, every computational basis input). Two-qubit
/// gadgets get one output dressing chosen across all trials.
inline VerifySummary verify_gadget(GadgetKind kind, std::size_t trials, std::uint64_t seed) {
    if (trials < 1) {
        throw std::invalid_argument("verify_gadget: trials must be at least 1");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
    VerifySummary s;
    s.kind = kind;
    s.trials = trials;
    s.seed = seed;

    std::vector<Eigen::MatrixXcd> realized;
    std::vector<Eigen::MatrixXcd> targets;
    std::vector<Eigen::VectorXcd> probes;
    for (std::size_t t = 0; t < trials; ++t) {
        Gadget g;
        Eigen::MatrixXcd target;
        switch (kind) {
            case GadgetKind::L4: {
                RotationTriple rt{ang(rng), ang(rng), ang(rng)};
                g = l4_gadget(rt);
                target = l4_oracle(rt);
                break;
            }
            case GadgetKind::E8:
                g = e8_gadget();
                target = cnot();
                break;
            case GadgetKind::Uij: {
                UijParams p;
                for (auto& row : p.a) {
                    for (auto& x : row) {
                        x = ang(rng);
                    }
                }
                p.h1 = ang(rng);
                p.h2 = ang(rng);
                p.h3 = ang(rng);
                g = uij_cluster(p);
                target = uij_oracle(p);
                break;
            }
            case GadgetKind::Vij: {
                VijParams p{ang(rng), ang(rng), ang(rng)};
                g = vij_cluster(p);
                target = controlled_rotation_oracle(p);
                break;
            }
        }
        s.nodes = g.graph.node_labels.size();
        realized.push_back(g.map());
        targets.push_back(target);
        if (kind == GadgetKind::L4 || kind == GadgetKind::E8) {
            const std::size_t nq = kind == GadgetKind::L4 ? 1 : 2;
            probes.push_back(random_state(rng, nq));
        }
    }

    if (kind != GadgetKind::L4) {
        s.dressing = search_dressing(realized, targets);
    }
    const Eigen::MatrixXcd dm = kind == GadgetKind::L4 ? Eigen::MatrixXcd::Identity(2, 2)
                                                       : Eigen::MatrixXcd(dressing_matrix(s.dressing));
    auto record = [&](double d, double scale) {
        s.max_distance = std::max(s.max_distance, d);
        s.min_scale = std::min(s.min_scale, scale);
        s.max_scale = std::max(s.max_scale, scale);
    };
    for (std::size_t t = 0; t < trials; ++t) {
        const Eigen::MatrixXcd tgt = dm * targets[t];
        record(distance_up_to_phase(realized[t], tgt), realized[t].norm() / tgt.norm());
        if (!probes.empty()) {
            s.max_distance =
                std::max(s.max_distance, distance_up_to_phase(Eigen::VectorXcd(realized[t] * probes[t]),
                                                              Eigen::VectorXcd(tgt * probes[t])));
        }
    }
    if (kind == GadgetKind::E8) {
        const Eigen::MatrixXcd tgt = dm * targets[0];
        for (Eigen::Index j = 0; j < 4; ++j) {
            s.max_distance = std::max(
                s.max_distance, distance_up_to_phase(Eigen::VectorXcd(realized[0].col(j)), Eigen::VectorXcd(tgt.col(j))));
        }
    }
    return s;
}

}  // namespace mbqcnn
