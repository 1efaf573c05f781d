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

#include "mbqcnn/qstate.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mbqcnn {

/// Nodes, CZ edges and the ordered list of nodes that accept external inputs.
/// Qubit k of any state built from a GraphSpec is node_labels[k].
struct GraphSpec {
    std::vector<std::string> node_labels;
    std::vector<std::pair<std::string, std::string>> edges;
    std::vector<std::string> input_ports;

    [[nodiscard]] std::size_t index_of(const std::string& label) const {
        auto it = std::find(node_labels.begin(), node_labels.end(), label);
        if (it == node_labels.end()) {
            throw std::invalid_argument("GraphSpec: unknown node label '" + label + "'");
        }
        return static_cast<std::size_t>(it - node_labels.begin());
    }

    [[nodiscard]] bool has_node(const std::string& label) const {
        return std::find(node_labels.begin(), node_labels.end(), label) != node_labels.end();
    }

    void validate() const {
        std::set<std::string> seen;
        for (const auto& l : node_labels) {
            if (!seen.insert(l).second) {
                throw std::invalid_argument("GraphSpec: duplicate node label '" + l + "'");
            }
        }
        for (const auto& [a, b] : edges) {
            if (a == b) {
                throw std::invalid_argument("GraphSpec: self-loop on '" + a + "'");
            }
            if (!seen.count(a) || !seen.count(b)) {
                throw std::invalid_argument("GraphSpec: edge endpoint not declared ('" + a + "', '" + b + "')");
            }
        }
        std::set<std::string> ports;
        for (const auto& p : input_ports) {
            if (!seen.count(p)) {
                throw std::invalid_argument("GraphSpec: input port '" + p + "' not declared");
            }
            if (!ports.insert(p).second) {
                throw std::invalid_argument("GraphSpec: duplicate input port '" + p + "'");
            }
        }
    }

    [[nodiscard]] std::vector<std::string> neighbours(const std::string& label) const {
        std::vector<std::string> out;
        for (const auto& [a, b] : edges) {
            if (a == label) {
                out.push_back(b);
            } else if (b == label) {
                out.push_back(a);
            }
        }
        return out;
    }
};

enum class ProjectorKind { FixedZero, FixedPlus, PlusRz, ZeroRyRz };

inline std::size_t slot_count(ProjectorKind k) {
    switch (k) {
        case ProjectorKind::FixedZero:
        case ProjectorKind::FixedPlus:
            return 0;
        case ProjectorKind::PlusRz:
            return 1;
        case ProjectorKind::ZeroRyRz:
            return 2;
    }
    return 0;
}

inline const char* kind_name(ProjectorKind k) {
    switch (k) {
        case ProjectorKind::FixedZero:
            return "FixedZero";
        case ProjectorKind::FixedPlus:
            return "FixedPlus";
        case ProjectorKind::PlusRz:
            return "PlusRz";
        case ProjectorKind::ZeroRyRz:
            return "ZeroRyRz";
    }
    return "?";
}

inline ProjectorKind kind_from_name(const std::string& s) {
    for (auto k : {ProjectorKind::FixedZero, ProjectorKind::FixedPlus, ProjectorKind::PlusRz, ProjectorKind::ZeroRyRz}) {
        if (s == kind_name(k)) {
            return k;
        }
    }
    throw std::invalid_argument("unknown projector kind '" + s + "'");
}

struct ProjectorSpec {
    ProjectorKind kind = ProjectorKind::FixedPlus;
    std::vector<std::size_t> slots;

    static ProjectorSpec fixed_zero() { return {ProjectorKind::FixedZero, {}}; }
    static ProjectorSpec fixed_plus() { return {ProjectorKind::FixedPlus, {}}; }
    static ProjectorSpec plus_rz(std::size_t slot) { return {ProjectorKind::PlusRz, {slot}}; }
    static ProjectorSpec zero_ry_rz(std::size_t alpha_slot, std::size_t beta_slot) {
        return {ProjectorKind::ZeroRyRz, {alpha_slot, beta_slot}};
    }

    [[nodiscard]] Projector1 instantiate(std::span<const double> params) const {
        for (auto s : slots) {
            if (s >= params.size()) {
                throw std::out_of_range("ProjectorSpec: slot " + std::to_string(s) + " beyond parameter vector");
            }
        }
        switch (kind) {
            case ProjectorKind::FixedZero:
                return Projector1::zero();
            case ProjectorKind::FixedPlus:
                return Projector1::plus();
            case ProjectorKind::PlusRz:
                return Projector1::plus_rz(params[slots[0]]);
            case ProjectorKind::ZeroRyRz:
                return Projector1::zero_ry_rz(params[slots[0]], params[slots[1]]);
        }
        throw std::logic_error("ProjectorSpec: bad kind");
    }
};

/// Per-node projector assignment. Nodes absent from `assignments` are left
/// unmeasured (the outputs of a gadget). Iteration order of the map is the
/// projection order.
struct MeasurementPattern {
    std::map<std::string, ProjectorSpec> assignments;
    std::size_t total_params = 0;

    void validate() const {
        std::vector<int> used(total_params, 0);
        for (const auto& [label, spec] : assignments) {
            if (spec.slots.size() != slot_count(spec.kind)) {
                throw std::invalid_argument("MeasurementPattern: node '" + label + "' has " +
                                            std::to_string(spec.slots.size()) + " slots for kind " +
                                            kind_name(spec.kind));
            }
            for (auto s : spec.slots) {
                if (s >= total_params) {
                    throw std::invalid_argument("MeasurementPattern: slot " + std::to_string(s) +
                                                " outside 0.." + std::to_string(total_params));
                }
                used[s] = 1;
            }
        }
        for (std::size_t s = 0; s < total_params; ++s) {
            if (!used[s]) {
                throw std::invalid_argument("MeasurementPattern: slot " + std::to_string(s) + " is never used");
            }
        }
    }

    /// Checks that every assigned label exists in g.
    void validate_against(const GraphSpec& g) const {
        validate();
        for (const auto& [label, spec] : assignments) {
            if (!g.has_node(label)) {
                throw std::invalid_argument("MeasurementPattern: node '" + label + "' not in graph");
            }
        }
    }

    [[nodiscard]] bool measures(const std::string& label) const { return assignments.count(label) != 0; }
};

/// Builds the graph state: |+> on every node (or the supplied state on a
/// port), then one CZ per edge.
inline StateVector build_cluster(const GraphSpec& g, const std::optional<std::vector<StateVector>>& input_states = {}) {
    g.validate();
    StateVector::check_capacity(g.node_labels.size());
    if (input_states && input_states->size() != g.input_ports.size()) {
        throw std::invalid_argument("build_cluster: " + std::to_string(input_states->size()) +
                                    " input states for " + std::to_string(g.input_ports.size()) + " ports");
    }
    const StateVector plus = make_plus_state(1);
    StateVector s;
    for (const auto& label : g.node_labels) {
        const StateVector* factor = &plus;
        if (input_states) {
            auto it = std::find(g.input_ports.begin(), g.input_ports.end(), label);
            if (it != g.input_ports.end()) {
                factor = &(*input_states)[static_cast<std::size_t>(it - g.input_ports.begin())];
                if (factor->n_qubits() != 1) {
                    throw std::invalid_argument("build_cluster: port states must be single-qubit");
                }
            }
        }
        s = tensor(s, *factor);
    }
    for (const auto& [a, b] : g.edges) {
        s = apply_cz(std::move(s), g.index_of(a), g.index_of(b));
    }
    return s;
}

/// A CZ bond between data qubit `data_qubit` and cluster node `node`.
struct Bond {
    std::size_t data_qubit = 0;
    std::string node;
};

/// data ⊗ cluster followed by one CZ per bond. Data qubits come first in the
/// result; cluster qubit k sits at index data.n_qubits() + k.
inline StateVector attach_inputs(const StateVector& data, const StateVector& cluster, const GraphSpec& g,
                                 const std::vector<Bond>& bonds) {
    const std::size_t k = data.n_qubits();
    if (cluster.n_qubits() != g.node_labels.size()) {
        throw std::invalid_argument("attach_inputs: cluster register does not match graph");
    }
    std::set<std::size_t> used_data;
    std::set<std::string> used_nodes;
    for (const auto& b : bonds) {
        if (b.data_qubit >= k) {
            throw std::out_of_range("attach_inputs: data qubit " + std::to_string(b.data_qubit) + " out of range");
        }
        (void)g.index_of(b.node);
        if (!used_data.insert(b.data_qubit).second || !used_nodes.insert(b.node).second) {
            throw std::invalid_argument("attach_inputs: bond endpoint used twice");
        }
    }
    StateVector s = tensor(data, cluster);
    for (const auto& b : bonds) {
        s = apply_cz(std::move(s), b.data_qubit, k + g.index_of(b.node));
    }
    return s;
}

struct ContractResult {
    StateVector residual;
    std::vector<std::string> residual_labels;
    /// The scalar when everything was projected; otherwise the residual norm.
    cplx amplitude;
};

/// Projects every qubit of `state` (labelled by qubit_labels) that has an
/// assignment, in ascending label order, except those listed in `keep`.
/// Unassigned qubits must be kept.
inline ContractResult contract(const StateVector& state, const std::vector<std::string>& qubit_labels,
                               const MeasurementPattern& pattern, std::span<const double> params,
                               const std::vector<std::string>& keep = {}) {
    if (qubit_labels.size() != state.n_qubits()) {
        throw std::invalid_argument("contract: label count does not match register");
    }
    if (params.size() != pattern.total_params) {
        throw std::invalid_argument("contract: expected " + std::to_string(pattern.total_params) +
                                    " parameters, got " + std::to_string(params.size()));
    }
    const std::set<std::string> keep_set(keep.begin(), keep.end());
    for (const auto& label : qubit_labels) {
        if (!pattern.measures(label) && !keep_set.count(label)) {
            throw std::invalid_argument("contract: qubit '" + label + "' has no projector and is not kept");
        }
    }
    StateVector s = state;
    std::vector<std::string> live = qubit_labels;
    for (const auto& [label, spec] : pattern.assignments) {
        if (keep_set.count(label)) {
            continue;
        }
        auto it = std::find(live.begin(), live.end(), label);
        if (it == live.end()) {
            continue;
        }
        const auto q = static_cast<std::size_t>(it - live.begin());
        s = project_out(s, q, spec.instantiate(params)).residual;
        live.erase(it);
    }
    const cplx amp = s.n_qubits() == 0 ? s.scalar() : cplx{std::sqrt(s.norm_sq()), 0.0};
    return {std::move(s), std::move(live), amp};
}

/// Contracts the pattern while building the graph: nodes are added in
/// node_labels order, each CZ is applied once both endpoints exist, and a
/// measured node is projected as soon as all its neighbours exist. The peak
/// register width is the graph's streaming frontier rather than its size.
/// Returns the residual over `out_nodes`, in that order.
inline StateVector stream_contract(const GraphSpec& g, const MeasurementPattern& pattern, std::span<const double> params,
                                   const std::vector<StateVector>& port_states,
                                   const std::vector<std::string>& out_nodes) {
    g.validate();
    pattern.validate_against(g);
    if (params.size() != pattern.total_params) {
        throw std::invalid_argument("stream_contract: parameter length mismatch");
    }
    if (port_states.size() != g.input_ports.size()) {
        throw std::invalid_argument("stream_contract: port/state count mismatch");
    }
    for (const auto& label : g.node_labels) {
        const bool is_out = std::find(out_nodes.begin(), out_nodes.end(), label) != out_nodes.end();
        if (is_out && pattern.measures(label)) {
            throw std::invalid_argument("stream_contract: output node '" + label + "' carries a projector");
        }
        if (!is_out && !pattern.measures(label)) {
            throw std::invalid_argument("stream_contract: node '" + label + "' is neither measured nor an output");
        }
    }

    std::unordered_map<std::string, std::vector<std::string>> nbrs;
    for (const auto& [a, b] : g.edges) {
        nbrs[a].push_back(b);
        nbrs[b].push_back(a);
    }
    std::set<std::string> present;
    std::vector<std::string> live;
    StateVector s;
    const StateVector plus = make_plus_state(1);
    auto pos = [&](const std::string& l) {
        return static_cast<std::size_t>(std::find(live.begin(), live.end(), l) - live.begin());
    };

    for (const auto& label : g.node_labels) {
        auto port_it = std::find(g.input_ports.begin(), g.input_ports.end(), label);
        const StateVector& factor =
            port_it == g.input_ports.end() ? plus : port_states[static_cast<std::size_t>(port_it - g.input_ports.begin())];
        s = tensor(s, factor);
        live.push_back(label);
        present.insert(label);
        for (const auto& u : nbrs[label]) {
            if (present.count(u)) {
                s = apply_cz(std::move(s), pos(u), pos(label));
            }
        }
        for (std::size_t i = 0; i < live.size();) {
            const auto& v = live[i];
            const bool ready = pattern.measures(v) && std::all_of(nbrs[v].begin(), nbrs[v].end(),
                                                                  [&](const std::string& u) { return present.count(u) > 0; });
            if (ready) {
                s = project_out(s, i, pattern.assignments.at(v).instantiate(params)).residual;
                live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
            } else {
                ++i;
            }
        }
    }
    std::vector<std::size_t> order;
    for (const auto& o : out_nodes) {
        order.push_back(pos(o));
    }
    return permute_qubits(s, order);
}

/// Column j is the residual over out_nodes when port i is fed the
/// computational basis state given by bit (k-1-i) of j.
inline Eigen::MatrixXcd induced_map(const GraphSpec& g, const MeasurementPattern& pattern, std::span<const double> params,
                                    const std::vector<std::string>& out_nodes) {
    const std::size_t k = g.input_ports.size();
    const std::size_t rows = std::size_t{1} << out_nodes.size();
    Eigen::MatrixXcd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(std::size_t{1} << k));
    for (std::size_t j = 0; j < (std::size_t{1} << k); ++j) {
        std::vector<StateVector> ins;
        for (std::size_t i = 0; i < k; ++i) {
            ins.push_back(StateVector::basis(1, (j >> (k - 1 - i)) & 1U));
        }
        m.col(static_cast<Eigen::Index>(j)) = stream_contract(g, pattern, params, ins, out_nodes).to_eigen();
    }
    return m;
}

/// Same map computed by building the whole register and contracting it in
/// one pass; limited to graphs within the dense capacity.
inline Eigen::MatrixXcd induced_map_dense(const GraphSpec& g, const MeasurementPattern& pattern,
                                          std::span<const double> params, const std::vector<std::string>& out_nodes) {
    const std::size_t k = g.input_ports.size();
    Eigen::MatrixXcd m(static_cast<Eigen::Index>(std::size_t{1} << out_nodes.size()),
                       static_cast<Eigen::Index>(std::size_t{1} << k));
    for (std::size_t j = 0; j < (std::size_t{1} << k); ++j) {
        std::vector<StateVector> ins;
        for (std::size_t i = 0; i < k; ++i) {
            ins.push_back(StateVector::basis(1, (j >> (k - 1 - i)) & 1U));
        }
        auto r = contract(build_cluster(g, ins), g.node_labels, pattern, params, out_nodes);
        std::vector<std::size_t> order;
        for (const auto& o : out_nodes) {
            order.push_back(static_cast<std::size_t>(
                std::find(r.residual_labels.begin(), r.residual_labels.end(), o) - r.residual_labels.begin()));
        }
        m.col(static_cast<Eigen::Index>(j)) = permute_qubits(r.residual, order).to_eigen();
    }
    return m;
}

}  // namespace mbqcnn
