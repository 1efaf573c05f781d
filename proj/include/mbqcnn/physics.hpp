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
#include "mbqcnn/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>

namespace mbqcnn {

/// H = -J Σ Z_i X_{i+1} Z_{i+2} - h1 Σ X_i - h2 Σ X_i Z_{i+1}, open chain.
struct HaldaneParams {
    std::size_t n_sites = 3;
    double j = 1.0;
    double h1 = 0.0;
    double h2 = 0.0;
};

inline constexpr std::size_t kMinSites = 3;
inline constexpr std::size_t kMaxSites = 12;

namespace detail {

/// Sign of Z on `site` for basis index s (site 0 = most significant bit).
inline double zsign(std::size_t s, std::size_t site, std::size_t n) {
    return ((s >> (n - 1 - site)) & 1U) ? -1.0 : 1.0;
}

inline std::size_t xflip(std::size_t site, std::size_t n) { return std::size_t{1} << (n - 1 - site); }

}  // namespace detail

/// Dense real symmetric matrix; every term is a real Pauli string.
inline Eigen::MatrixXd haldane_hamiltonian(const HaldaneParams& p) {
    const std::size_t n = p.n_sites;
    if (n < kMinSites || n > kMaxSites) {
        throw std::invalid_argument("haldane_hamiltonian: n_sites must lie in [3, 12], got " + std::to_string(n));
    }
    if (!std::isfinite(p.j) || !std::isfinite(p.h1) || !std::isfinite(p.h2)) {
        throw std::invalid_argument("haldane_hamiltonian: non-finite coupling");
    }
    const std::size_t dim = std::size_t{1} << n;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t s = 0; s < dim; ++s) {
        const auto col = static_cast<Eigen::Index>(s);
        for (std::size_t i = 0; i + 2 < n; ++i) {
            const auto row = static_cast<Eigen::Index>(s ^ detail::xflip(i + 1, n));
            h(row, col) -= p.j * detail::zsign(s, i, n) * detail::zsign(s, i + 2, n);
        }
        for (std::size_t i = 0; i < n; ++i) {
            h(static_cast<Eigen::Index>(s ^ detail::xflip(i, n)), col) -= p.h1;
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const auto row = static_cast<Eigen::Index>(s ^ detail::xflip(i, n));
            h(row, col) -= p.h2 * detail::zsign(s, i + 1, n);
        }
    }
    return h;
}

struct GroundState {
    StateVector state;
    double energy = 0.0;
    bool tilted = false;
};

/// Lowest eigenvector. If the two lowest levels are closer than 1e-10 the
/// problem is re-solved with h1 + 1e-9. The first amplitude above 1e-12 in
/// magnitude is made positive.
inline GroundState ground_state(const HaldaneParams& p) {
    auto solve = [](const HaldaneParams& q) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(haldane_hamiltonian(q));
        if (es.info() != Eigen::Success) {
            throw std::runtime_error("ground_state: eigensolver did not converge");
        }
        return es;
    };
    auto es = solve(p);
    bool tilted = false;
    if (es.eigenvalues()(1) - es.eigenvalues()(0) < 1e-10) {
        HaldaneParams q = p;
        q.h1 += 1e-9;
        es = solve(q);
        tilted = true;
    }
    Eigen::VectorXd g = es.eigenvectors().col(0);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        if (std::abs(g(i)) > 1e-12) {
            if (g(i) < 0) {
                g = -g;
            }
            break;
        }
    }
    g /= g.norm();
    std::vector<cplx> amps(g.data(), g.data() + g.size());
    return {StateVector(p.n_sites, std::move(amps)), es.eigenvalues()(0), tilted};
}

inline double energy_of(const Eigen::MatrixXd& h, const StateVector& s) {
    const Eigen::VectorXcd v = s.to_eigen();
    return (v.adjoint() * h.cast<cplx>() * v)(0, 0).real();
}

/// <Z_m X_{m+1} ... X_{n-1} Z_n>, sites 1-based.
inline double sop_expectation(const StateVector& state, std::size_t m, std::size_t n) {
    const std::size_t nq = state.n_qubits();
    if (!(1 <= m && m < n && n <= nq)) {
        throw std::invalid_argument("sop_expectation: need 1 <= m < n <= n_sites");
    }
    std::size_t flip = 0;
    for (std::size_t site = m + 1; site < n; ++site) {
        flip |= detail::xflip(site - 1, nq);
    }
    cplx acc = 0.0;
    for (std::size_t s = 0; s < state.dim(); ++s) {
        const double sign = detail::zsign(s, m - 1, nq) * detail::zsign(s, n - 1, nq);
        acc += std::conj(state[s ^ flip]) * sign * state[s];
    }
    if (std::abs(acc.imag()) > 1e-10) {
        throw std::logic_error("sop_expectation: imaginary part exceeds 1e-10");
    }
    return acc.real();
}

struct HaldaneSample {
    HaldaneParams params;
    StateVector ground_state;
    double sop = 0.0;
    int label = 0;

    [[nodiscard]] double h1_over_j() const { return params.h1 / params.j; }
    [[nodiscard]] double h2_over_j() const { return params.h2 / params.j; }
    [[nodiscard]] EncodedSample encoded() const { return {ground_state, static_cast<double>(label)}; }
};

inline int sop_label(double sop) { return std::abs(sop) > 0.5 ? 1 : 0; }

inline HaldaneSample make_sample(std::size_t n_sites, double j, double h1_over_j, double h2_over_j) {
    if (j == 0.0) {
        throw std::invalid_argument("make_sample: J must be nonzero");
    }
    HaldaneParams p{n_sites, j, h1_over_j * j, h2_over_j * j};
    auto g = ground_state(p);
    const double s = sop_expectation(g.state, 1, n_sites);
    return {p, std::move(g.state), s, sop_label(s)};
}

/// `side` equally spaced values over [lo, hi], endpoints included.
inline std::vector<double> linspace(double lo, double hi, std::size_t side) {
    if (side < 2) {
        throw std::invalid_argument("linspace: need at least 2 points");
    }
    std::vector<double> v(side);
    for (std::size_t i = 0; i < side; ++i) {
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(side - 1);
    }
    return v;
}

inline constexpr double kH1Lo = 0.0;
inline constexpr double kH1Hi = 2.0;
inline constexpr double kH2Lo = -2.0;
inline constexpr double kH2Hi = 2.0;

/// Row-major over h1 (outer) then h2 (inner).
inline std::vector<HaldaneSample> make_grid_dataset(std::size_t n_sites, std::size_t side, double j = 1.0) {
    std::vector<HaldaneSample> out;
    for (double a : linspace(kH1Lo, kH1Hi, side)) {
        for (double b : linspace(kH2Lo, kH2Hi, side)) {
            out.push_back(make_sample(n_sites, j, a, b));
        }
    }
    return out;
}

/// ceil(side²/10) cell midpoints of the training grid, drawn without
/// replacement by a seeded shuffle and returned in grid order.
inline std::vector<HaldaneSample> make_test_grid(std::size_t n_sites, std::size_t train_side, double j,
                                                 std::uint64_t seed) {
    const auto h1 = linspace(kH1Lo, kH1Hi, train_side);
    const auto h2 = linspace(kH2Lo, kH2Hi, train_side);
    std::vector<std::pair<double, double>> mids;
    for (std::size_t a = 0; a + 1 < train_side; ++a) {
        for (std::size_t b = 0; b + 1 < train_side; ++b) {
            mids.emplace_back((h1[a] + h1[a + 1]) / 2, (h2[b] + h2[b + 1]) / 2);
        }
    }
    const std::size_t want = (train_side * train_side + 9) / 10;
    if (want > mids.size()) {
        throw std::invalid_argument("make_test_grid: grid too small for the requested test count");
    }
    auto idx = seeded_permutation(mids.size(), seed, want);
    std::sort(idx.begin(), idx.end());
    std::vector<HaldaneSample> out;
    for (auto i : idx) {
        out.push_back(make_sample(n_sites, j, mids[i].first, mids[i].second));
    }
    return out;
}

/// values(a, b) at h1_over_j[a], h2_over_j[b].
struct PhaseGrid {
    std::vector<double> h1_over_j;
    std::vector<double> h2_over_j;
    Eigen::MatrixXd values;

    void validate() const {
        if (static_cast<std::size_t>(values.rows()) != h1_over_j.size() ||
            static_cast<std::size_t>(values.cols()) != h2_over_j.size()) {
            throw std::invalid_argument("PhaseGrid: value matrix shape does not match axes");
        }
    }
};

inline PhaseGrid sop_grid(std::size_t n_sites, std::size_t side, double j = 1.0) {
    PhaseGrid g{linspace(kH1Lo, kH1Hi, side), linspace(kH2Lo, kH2Hi, side), {}};
    g.values.resize(static_cast<Eigen::Index>(side), static_cast<Eigen::Index>(side));
    for (std::size_t a = 0; a < side; ++a) {
        for (std::size_t b = 0; b < side; ++b) {
            g.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                make_sample(n_sites, j, g.h1_over_j[a], g.h2_over_j[b]).sop;
        }
    }
    return g;
}

struct BoundaryPoint {
    double h1_over_j = 0.0;
    double h2_over_j = 0.0;
};

/// Per h1 column: d2[b] = v[b-1] - 2 v[b] + v[b+1] for interior b; a point is
/// kept where |d2| is a local maximum (ties allowed on the left neighbour
/// only) and exceeds rel_threshold times the column's largest |d2|.
inline std::vector<BoundaryPoint> phase_boundary(const PhaseGrid& grid, double rel_threshold = 0.5) {
    grid.validate();
    const auto rows = grid.values.rows();
    const auto cols = grid.values.cols();
    if (rows < 3 || cols < 3) {
        throw std::invalid_argument("phase_boundary: grid must be at least 3×3");
    }
    std::vector<BoundaryPoint> out;
    for (Eigen::Index a = 0; a < rows; ++a) {
        std::vector<double> d2(static_cast<std::size_t>(cols), 0.0);
        double peak = 0.0;
        for (Eigen::Index b = 1; b + 1 < cols; ++b) {
            const double v = grid.values(a, b - 1) - 2.0 * grid.values(a, b) + grid.values(a, b + 1);
            d2[static_cast<std::size_t>(b)] = std::abs(v);
            peak = std::max(peak, std::abs(v));
        }
        if (peak <= 1e-12) {
            continue;
        }
        for (std::size_t b = 1; b + 1 < d2.size(); ++b) {
            const bool left_ok = d2[b] >= d2[b - 1];
            const bool right_ok = d2[b] > d2[b + 1];
            if (left_ok && right_ok && d2[b] > rel_threshold * peak) {
                out.push_back({grid.h1_over_j[static_cast<std::size_t>(a)], grid.h2_over_j[b]});
            }
        }
    }
    return out;
}

/// Fraction of points in `a` within `tol` (per axis) of some point of `b`
/// sharing its h1 column.
inline double boundary_match_fraction(const std::vector<BoundaryPoint>& a, const std::vector<BoundaryPoint>& b,
                                      double tol) {
    if (a.empty()) {
        return 0.0;
    }
    std::size_t hit = 0;
    for (const auto& p : a) {
        for (const auto& q : b) {
            if (std::abs(p.h1_over_j - q.h1_over_j) <= tol + 1e-12 && std::abs(p.h2_over_j - q.h2_over_j) <= tol + 1e-12) {
                ++hit;
                break;
            }
        }
    }
    return static_cast<double>(hit) / static_cast<double>(a.size());
}

}  // namespace mbqcnn
