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

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

/// Dense statevector layer.
///
/// Ordering convention used everywhere in the library: qubit 0 is the most
/// significant bit of the amplitude index. For n qubits, qubit q corresponds
/// to bit (n - 1 - q) of the index.
namespace mbqcnn {

using cplx = std::complex<double>;
using Unitary2 = Eigen::Matrix2cd;
using Unitary4 = Eigen::Matrix4cd;

inline constexpr std::size_t kMaxQubits = 20;

/// Thrown when a register would exceed kMaxQubits.
class CapacityError : public std::length_error {
   public:
    using std::length_error::length_error;
};

class StateVector {
   public:
    StateVector() : amps_{cplx{1.0, 0.0}} {}

    StateVector(std::size_t n_qubits, std::vector<cplx> amplitudes) : n_(n_qubits), amps_(std::move(amplitudes)) {
        check_capacity(n_);
        if (amps_.size() != (std::size_t{1} << n_)) {
            throw std::invalid_argument("StateVector: amplitude count " + std::to_string(amps_.size()) +
                                        " does not match 2^" + std::to_string(n_));
        }
    }

    /// Computational basis state |index> on n qubits.
    static StateVector basis(std::size_t n_qubits, std::size_t index) {
        check_capacity(n_qubits);
        std::vector<cplx> a(std::size_t{1} << n_qubits);
        if (index >= a.size()) {
            throw std::out_of_range("StateVector::basis: index out of range");
        }
        a[index] = 1.0;
        return {n_qubits, std::move(a)};
    }

    /// Single-qubit state a|0> + b|1>.
    static StateVector qubit(cplx a, cplx b) { return {1, {a, b}}; }

    static void check_capacity(std::size_t n) {
        if (n > kMaxQubits) {
            throw CapacityError("register of " + std::to_string(n) + " qubits exceeds the dense limit of " +
                                std::to_string(kMaxQubits));
        }
    }

    [[nodiscard]] std::size_t n_qubits() const { return n_; }
    [[nodiscard]] std::size_t dim() const { return amps_.size(); }
    [[nodiscard]] std::span<const cplx> amplitudes() const { return amps_; }
    [[nodiscard]] std::span<cplx> amplitudes() { return amps_; }
    [[nodiscard]] const cplx& operator[](std::size_t i) const { return amps_[i]; }
    [[nodiscard]] cplx& operator[](std::size_t i) { return amps_[i]; }

    [[nodiscard]] double norm_sq() const {
        double s = 0.0;
        for (const auto& a : amps_) {
            s += std::norm(a);
        }
        return s;
    }

    /// The scalar of a 0-qubit register (fully contracted state).
    [[nodiscard]] cplx scalar() const {
        if (n_ != 0) {
            throw std::logic_error("StateVector::scalar on a register with qubits");
        }
        return amps_[0];
    }

    [[nodiscard]] Eigen::VectorXcd to_eigen() const {
        return Eigen::Map<const Eigen::VectorXcd>(amps_.data(), static_cast<Eigen::Index>(amps_.size()));
    }

    static StateVector from_eigen(const Eigen::VectorXcd& v) {
        std::size_t n = 0;
        while ((std::size_t{1} << n) < static_cast<std::size_t>(v.size())) {
            ++n;
        }
        return {n, std::vector<cplx>(v.data(), v.data() + v.size())};
    }

    StateVector& operator*=(cplx c) {
        for (auto& a : amps_) {
            a *= c;
        }
        return *this;
    }

   private:
    std::size_t n_ = 0;
    std::vector<cplx> amps_;
};

/// |+>^n.
inline StateVector make_plus_state(std::size_t n) {
    if (n < 1) {
        throw std::invalid_argument("make_plus_state: n must be at least 1");
    }
    StateVector::check_capacity(n);
    const double amp = std::pow(2.0, -0.5 * static_cast<double>(n));
    return {n, std::vector<cplx>(std::size_t{1} << n, cplx{amp, 0.0})};
}

/// a ⊗ b, with a's qubits first (most significant).
inline StateVector tensor(const StateVector& a, const StateVector& b) {
    StateVector::check_capacity(a.n_qubits() + b.n_qubits());
    std::vector<cplx> out(a.dim() * b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const cplx ai = a[i];
        for (std::size_t j = 0; j < b.dim(); ++j) {
            out[i * b.dim() + j] = ai * b[j];
        }
    }
    return {a.n_qubits() + b.n_qubits(), std::move(out)};
}

inline cplx inner(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("inner: dimension mismatch");
    }
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        s += std::conj(a[i]) * b[i];
    }
    return s;
}

// ---------------------------------------------------------------------------
// Gates

enum class Axis { X, Y, Z };

inline Unitary2 pauli(Axis axis) {
    Unitary2 m;
    switch (axis) {
        case Axis::X:
            m << 0, 1, 1, 0;
            break;
        case Axis::Y:
            m << 0, cplx{0, -1}, cplx{0, 1}, 0;
            break;
        case Axis::Z:
            m << 1, 0, 0, -1;
            break;
    }
    return m;
}

/// exp(-i angle P / 2); R_z(t) = diag(e^{-it/2}, e^{it/2}).
inline Unitary2 rotation_gate(Axis axis, double angle) {
    if (!std::isfinite(angle)) {
        throw std::invalid_argument("rotation_gate: non-finite angle");
    }
    return std::cos(angle / 2) * Unitary2::Identity() - cplx{0, 1} * std::sin(angle / 2) * pauli(axis);
}

inline Unitary2 rx(double t) { return rotation_gate(Axis::X, t); }
inline Unitary2 ry(double t) { return rotation_gate(Axis::Y, t); }
inline Unitary2 rz(double t) { return rotation_gate(Axis::Z, t); }

/// (X + Z) / sqrt(2).
inline Unitary2 hadamard() { return (pauli(Axis::X) + pauli(Axis::Z)) / std::numbers::sqrt2; }

/// CNOT with control on the first (most significant) qubit.
inline Unitary4 cnot() {
    Unitary4 m = Unitary4::Zero();
    m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
    return m;
}

/// CNOT with control on the second qubit.
inline Unitary4 cnot_reversed() {
    Unitary4 m = Unitary4::Zero();
    m(0, 0) = m(3, 1) = m(2, 2) = m(1, 3) = 1;
    return m;
}

inline Unitary4 cz_matrix() {
    Unitary4 m = Unitary4::Identity();
    m(3, 3) = -1;
    return m;
}

inline Unitary4 kron(const Unitary2& a, const Unitary2& b) {
    Unitary4 m;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
        }
    }
    return m;
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd m(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            m.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return m;
}

namespace detail {

inline void check_qubit(const StateVector& s, std::size_t q) {
    if (q >= s.n_qubits()) {
        throw std::out_of_range("qubit index " + std::to_string(q) + " out of range for " +
                                std::to_string(s.n_qubits()) + "-qubit register");
    }
}

inline std::size_t bit_of(const StateVector& s, std::size_t q) { return std::size_t{1} << (s.n_qubits() - 1 - q); }

}  // namespace detail

inline StateVector apply_1q(StateVector state, std::size_t q, const Unitary2& u) {
    detail::check_qubit(state, q);
    const std::size_t bit = detail::bit_of(state, q);
    auto a = state.amplitudes();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i & bit) {
            continue;
        }
        const cplx a0 = a[i];
        const cplx a1 = a[i | bit];
        a[i] = u(0, 0) * a0 + u(0, 1) * a1;
        a[i | bit] = u(1, 0) * a0 + u(1, 1) * a1;
    }
    return state;
}

/// Applies u to qubits (p, q), with p taking the role of the first tensor factor.
inline StateVector apply_2q(StateVector state, std::size_t p, std::size_t q, const Unitary4& u) {
    detail::check_qubit(state, p);
    detail::check_qubit(state, q);
    if (p == q) {
        throw std::invalid_argument("apply_2q: qubits must differ");
    }
    const std::size_t bp = detail::bit_of(state, p);
    const std::size_t bq = detail::bit_of(state, q);
    auto a = state.amplitudes();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((i & bp) || (i & bq)) {
            continue;
        }
        const std::size_t idx[4] = {i, i | bq, i | bp, i | bp | bq};
        cplx in[4];
        for (int k = 0; k < 4; ++k) {
            in[k] = a[idx[k]];
        }
        for (int r = 0; r < 4; ++r) {
            cplx acc = 0.0;
            for (int k = 0; k < 4; ++k) {
                acc += u(r, k) * in[k];
            }
            a[idx[r]] = acc;
        }
    }
    return state;
}

inline StateVector apply_cz(StateVector state, std::size_t p, std::size_t q) {
    detail::check_qubit(state, p);
    detail::check_qubit(state, q);
    if (p == q) {
        throw std::invalid_argument("apply_cz: control and target must differ");
    }
    const std::size_t mask = detail::bit_of(state, p) | detail::bit_of(state, q);
    auto a = state.amplitudes();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((i & mask) == mask) {
            a[i] = -a[i];
        }
    }
    return state;
}

// ---------------------------------------------------------------------------
// Projection

/// Bra side of a rank-1 single-qubit projector.
class Projector1 {
   public:
    /// Validates that the bra has unit norm.
    explicit Projector1(const Eigen::RowVector2cd& bra) : bra_(bra) {
        if (std::abs(bra_.squaredNorm() - 1.0) > 1e-12) {
            throw std::invalid_argument("Projector1: bra must have unit norm");
        }
    }

    /// No normalization check; used by oracles and linearity tests.
    static Projector1 unnormalized(const Eigen::RowVector2cd& bra) {
        Projector1 p;
        p.bra_ = bra;
        return p;
    }

    /// The bra dual to a ket (conjugate transpose).
    static Projector1 from_ket(const Eigen::Vector2cd& ket) { return unnormalized(ket.adjoint()); }

    static Projector1 zero() { return Projector1(Eigen::RowVector2cd(1.0, 0.0)); }
    static Projector1 plus() {
        const double s = 1.0 / std::numbers::sqrt2;
        return Projector1(Eigen::RowVector2cd(s, s));
    }
    /// <+| R_z(theta).
    static Projector1 plus_rz(double theta) {
        const double s = 1.0 / std::numbers::sqrt2;
        return Projector1(Eigen::RowVector2cd(s, s) * rz(theta));
    }
    /// <0| R_y(alpha) R_z(beta).
    static Projector1 zero_ry_rz(double alpha, double beta) {
        return Projector1(Eigen::RowVector2cd(1.0, 0.0) * ry(alpha) * rz(beta));
    }

    [[nodiscard]] const Eigen::RowVector2cd& bra() const { return bra_; }

   private:
    Projector1() = default;
    Eigen::RowVector2cd bra_;
};

/// Result of contracting a bra against one qubit. The residual is unnormalized;
/// its squared norm is the outcome probability when the input was normalized.
struct Projected {
    StateVector residual;
    double probability = 0.0;
};

/// Contracts proj against qubit q and removes it; higher qubit indices shift down by one.
inline Projected project_out(const StateVector& state, std::size_t q, const Projector1& proj) {
    detail::check_qubit(state, q);
    const std::size_t n = state.n_qubits();
    const std::size_t low_bits = n - 1 - q;
    const std::size_t low = std::size_t{1} << low_bits;
    const std::size_t high = std::size_t{1} << q;
    const cplx b0 = proj.bra()(0);
    const cplx b1 = proj.bra()(1);
    std::vector<cplx> out(high * low);
    for (std::size_t h = 0; h < high; ++h) {
        const std::size_t base = h << (low_bits + 1);
        for (std::size_t l = 0; l < low; ++l) {
            out[h * low + l] = b0 * state[base | l] + b1 * state[base | low | l];
        }
    }
    StateVector residual(n - 1, std::move(out));
    const double p = residual.norm_sq();
    return {std::move(residual), p};
}

/// Reorders qubits: new qubit k is old qubit order[k].
inline StateVector permute_qubits(const StateVector& state, std::span<const std::size_t> order) {
    const std::size_t n = state.n_qubits();
    if (order.size() != n) {
        throw std::invalid_argument("permute_qubits: order length mismatch");
    }
    std::vector<bool> seen(n, false);
    for (auto o : order) {
        if (o >= n || seen[o]) {
            throw std::invalid_argument("permute_qubits: order is not a permutation");
        }
        seen[o] = true;
    }
    std::vector<cplx> out(state.dim());
    for (std::size_t i = 0; i < state.dim(); ++i) {
        std::size_t j = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t bit = (i >> (n - 1 - order[k])) & 1U;
            j |= bit << (n - 1 - k);
        }
        out[j] = state[i];
    }
    return {n, std::move(out)};
}

// ---------------------------------------------------------------------------
// Equivalence metric

/// min over unit-modulus phase of || a/|a| - phase * b/|b| ||. Works on any
/// equally-shaped vectors or matrices (compared entrywise).
template <class DerivedA, class DerivedB>
double distance_up_to_phase(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("distance_up_to_phase: shape mismatch");
    }
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 && nb == 0.0) {
        throw std::domain_error("distance_up_to_phase: both arguments are zero");
    }
    if (na == 0.0 || nb == 0.0) {
        return 1.0;
    }
    const Eigen::MatrixXcd ua = a.template cast<cplx>() / na;
    const Eigen::MatrixXcd ub = b.template cast<cplx>() / nb;
    const cplx overlap = (ub.array().conjugate() * ua.array()).sum();
    const cplx phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : cplx{1.0, 0.0};
    return (ua - phase * ub).norm();
}

inline double distance_up_to_phase(const StateVector& a, const StateVector& b) {
    return distance_up_to_phase(a.to_eigen(), b.to_eigen());
}

}  // namespace mbqcnn
