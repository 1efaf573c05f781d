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

#include "mbqcnn/physics.hpp"

#include <gtest/gtest.h>

using namespace mbqcnn;

namespace {

// Lowest eigenvalue at N=3, J=1, h1=0.5, h2=0 from an independent dense solver.
constexpr double kEnergyOracle = -1.9142135623730949;

GraphSpec path3() {
    GraphSpec g;
    g.node_labels = {"a", "b", "c"};
    g.edges = {{"a", "b"}, {"b", "c"}};
    return g;
}

PhaseGrid step_grid(std::size_t side, std::size_t step_at) {
    PhaseGrid g{linspace(0, 2, side), linspace(-2, 2, side), Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(side),
                                                                                   static_cast<Eigen::Index>(side))};
    for (std::size_t a = 0; a < side; ++a) {
        for (std::size_t b = step_at; b < side; ++b) {
            g.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = 1.0;
        }
    }
    return g;
}

}  // namespace

TEST(Physics, HamiltonianEntries) {
    const auto h = haldane_hamiltonian({3, 1.0, 0.0, 0.0});
    // -Z X Z maps |000> to -|010>.
    EXPECT_EQ(h(0b010, 0b000), -1.0);
    EXPECT_EQ(h(0b011, 0b001), 1.0);
    EXPECT_EQ(h(0b000, 0b000), 0.0);
    const auto x = haldane_hamiltonian({3, 0.0, 1.0, 0.0});
    EXPECT_EQ(x(0b100, 0b000), -1.0);
    EXPECT_EQ(x(0b011, 0b000), 0.0);
    const auto xz = haldane_hamiltonian({3, 0.0, 0.0, 1.0});
    // -X_1 Z_2 on |010>: Z_2 gives -1, X_1 flips the first bit.
    EXPECT_EQ(xz(0b110, 0b010), 1.0);
}

TEST(Physics, HamiltonianIsSymmetric) {
    for (std::size_t n : {3u, 5u, 8u}) {
        const auto h = haldane_hamiltonian({n, 0.7, -1.2, 0.4});
        EXPECT_LE((h - h.transpose()).norm(), 0.0);
    }
}

TEST(Physics, HamiltonianRejectsBadInput) {
    EXPECT_THROW(haldane_hamiltonian({2, 1, 0, 0}), std::invalid_argument);
    EXPECT_THROW(haldane_hamiltonian({13, 1, 0, 0}), std::invalid_argument);
    EXPECT_THROW(haldane_hamiltonian({3, std::nan(""), 0, 0}), std::invalid_argument);
    EXPECT_THROW(make_sample(3, 0.0, 0.1, 0.1), std::invalid_argument);
}

TEST(Physics, GroundEnergyMatchesOracle) {
    const HaldaneParams p{3, 1.0, 0.5, 0.0};
    const auto g = ground_state(p);
    EXPECT_NEAR(g.energy, kEnergyOracle, 1e-12);
    EXPECT_NEAR(energy_of(haldane_hamiltonian(p), g.state), kEnergyOracle, 1e-12);
    EXPECT_FALSE(g.tilted);
    EXPECT_NEAR(g.state.norm_sq(), 1.0, 1e-12);
}

TEST(Physics, TransverseFieldGroundState) {
    const auto g = ground_state({4, 0.0, 1.0, 0.0});
    EXPECT_NEAR(g.energy, -4.0, 1e-12);
    EXPECT_LE(distance_up_to_phase(g.state, make_plus_state(4)), 1e-10);
    EXPECT_GT(g.state[0].real(), 0.0);
    EXPECT_NEAR(sop_expectation(g.state, 1, 4), 0.0, 1e-10);
}

TEST(Physics, DegenerateGroundStateIsDeterministic) {
    const auto a = make_sample(3, 1.0, 0.0, 0.0);
    const auto b = make_sample(3, 1.0, 0.0, 0.0);
    EXPECT_TRUE(ground_state(a.params).tilted);
    for (std::size_t i = 0; i < a.ground_state.dim(); ++i) {
        EXPECT_EQ(a.ground_state[i], b.ground_state[i]);
    }
    EXPECT_NEAR(a.sop, 1.0, 1e-6);
    EXPECT_EQ(a.label, 1);
}

TEST(Physics, StringOrderExamples) {
    EXPECT_NEAR(sop_expectation(make_plus_state(3), 1, 3), 0.0, 1e-15);
    EXPECT_NEAR(sop_expectation(StateVector::basis(3, 0), 1, 2), 1.0, 1e-15);
    EXPECT_NEAR(sop_expectation(StateVector::basis(3, 0b010), 1, 2), -1.0, 1e-15);
    EXPECT_NEAR(sop_expectation(StateVector::basis(3, 0b010), 1, 3), 0.0, 1e-15);
    // The 3-node line cluster is stabilized by Z X Z.
    EXPECT_NEAR(sop_expectation(build_cluster(path3()), 1, 3), 1.0, 1e-12);
    EXPECT_THROW(sop_expectation(make_plus_state(3), 2, 2), std::invalid_argument);
    EXPECT_THROW(sop_expectation(make_plus_state(3), 1, 4), std::invalid_argument);
    EXPECT_THROW(sop_expectation(make_plus_state(3), 0, 2), std::invalid_argument);
}

TEST(Physics, LabelsThresholdAtOneHalf) {
    EXPECT_EQ(sop_label(0.5), 0);
    EXPECT_EQ(sop_label(0.51), 1);
    EXPECT_EQ(sop_label(-0.9), 1);
}

TEST(Physics, TrainingGridOrder) {
    const auto d = make_grid_dataset(3, 4);
    ASSERT_EQ(d.size(), 16u);
    EXPECT_DOUBLE_EQ(d[0].h1_over_j(), 0.0);
    EXPECT_DOUBLE_EQ(d[0].h2_over_j(), -2.0);
    EXPECT_DOUBLE_EQ(d[1].h2_over_j(), -2.0 + 4.0 / 3.0);
    EXPECT_DOUBLE_EQ(d[4].h1_over_j(), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(d[15].h1_over_j(), 2.0);
    EXPECT_DOUBLE_EQ(d[15].h2_over_j(), 2.0);
    for (const auto& s : d) {
        EXPECT_EQ(s.label, sop_label(s.sop));
        EXPECT_EQ(s.encoded().label, static_cast<double>(s.label));
    }
}

TEST(Physics, CouplingScaleLeavesTheStateUnchanged) {
    const auto a = make_sample(3, 1.0, 0.8, -0.4);
    const auto b = make_sample(3, 2.5, 0.8, -0.4);
    EXPECT_LE(distance_up_to_phase(a.ground_state, b.ground_state), 1e-10);
    EXPECT_DOUBLE_EQ(b.params.h1, 2.0);
}

TEST(Physics, TestGridUsesSeededMidpoints) {
    const auto t = make_test_grid(3, 12, 1.0, 3);
    ASSERT_EQ(t.size(), 15u);
    const double dh1 = 2.0 / 11.0;
    const double dh2 = 4.0 / 11.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double a = t[i].h1_over_j() / dh1 - 0.5;
        const double b = (t[i].h2_over_j() + 2.0) / dh2 - 0.5;
        EXPECT_NEAR(a, std::round(a), 1e-9);
        EXPECT_NEAR(b, std::round(b), 1e-9);
        if (i > 0) {
            const bool ordered = t[i - 1].h1_over_j() < t[i].h1_over_j() ||
                                 (t[i - 1].h1_over_j() == t[i].h1_over_j() && t[i - 1].h2_over_j() < t[i].h2_over_j());
            EXPECT_TRUE(ordered);
        }
    }
    const auto again = make_test_grid(3, 12, 1.0, 3);
    const auto other = make_test_grid(3, 12, 1.0, 4);
    bool same = true;
    bool differs = false;
    for (std::size_t i = 0; i < t.size(); ++i) {
        same = same && t[i].h1_over_j() == again[i].h1_over_j() && t[i].h2_over_j() == again[i].h2_over_j();
        differs = differs || t[i].h1_over_j() != other[i].h1_over_j() || t[i].h2_over_j() != other[i].h2_over_j();
    }
    EXPECT_TRUE(same);
    EXPECT_TRUE(differs);
    EXPECT_EQ(make_test_grid(3, 4, 1.0, 0).size(), 2u);
}

TEST(Physics, SeededPermutationIsAPrefixOfAShuffle) {
    const auto full = seeded_permutation(10, 5);
    auto sorted = full;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 10; ++i) {
        EXPECT_EQ(sorted[i], i);
    }
    const auto part = seeded_permutation(10, 5, 4);
    ASSERT_EQ(part.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(part[i], full[i]);
    }
}

TEST(Physics, BoundaryOfAStep) {
    const auto g = step_grid(6, 3);
    const auto pts = phase_boundary(g);
    ASSERT_EQ(pts.size(), 6u);
    for (std::size_t a = 0; a < 6; ++a) {
        EXPECT_DOUBLE_EQ(pts[a].h1_over_j, g.h1_over_j[a]);
        EXPECT_DOUBLE_EQ(pts[a].h2_over_j, g.h2_over_j[3]);
    }
}

TEST(Physics, BoundaryIsScaleInvariant) {
    auto g = step_grid(8, 5);
    const auto a = phase_boundary(g);
    g.values *= 0.01;
    const auto b = phase_boundary(g);
    ASSERT_EQ(a.size(), b.size());
    EXPECT_DOUBLE_EQ(boundary_match_fraction(a, b, 0.0), 1.0);
}

TEST(Physics, FlatGridHasNoBoundary) {
    PhaseGrid g{linspace(0, 2, 5), linspace(-2, 2, 5), Eigen::MatrixXd::Constant(5, 5, 0.3)};
    EXPECT_TRUE(phase_boundary(g).empty());
    PhaseGrid small{linspace(0, 2, 2), linspace(-2, 2, 5), Eigen::MatrixXd::Zero(2, 5)};
    EXPECT_THROW(phase_boundary(small), std::invalid_argument);
    PhaseGrid bad{linspace(0, 2, 3), linspace(-2, 2, 5), Eigen::MatrixXd::Zero(5, 3)};
    EXPECT_THROW(phase_boundary(bad), std::invalid_argument);
}

TEST(Physics, BoundaryMatchFraction) {
    const auto a = phase_boundary(step_grid(6, 3));
    const auto shifted = phase_boundary(step_grid(6, 4));
    const double spacing = 4.0 / 5.0;
    EXPECT_DOUBLE_EQ(boundary_match_fraction(a, a, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(boundary_match_fraction(a, shifted, spacing), 1.0);
    EXPECT_DOUBLE_EQ(boundary_match_fraction(a, shifted, spacing / 2), 0.0);
    EXPECT_DOUBLE_EQ(boundary_match_fraction({}, a, 1.0), 0.0);
}

TEST(Physics, SopGridShape) {
    const auto g = sop_grid(3, 4);
    EXPECT_EQ(g.values.rows(), 4);
    EXPECT_EQ(g.values.cols(), 4);
    EXPECT_DOUBLE_EQ(g.values(1, 2), make_sample(3, 1.0, g.h1_over_j[1], g.h2_over_j[2]).sop);
}
