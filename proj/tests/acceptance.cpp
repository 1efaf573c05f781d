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

// Acceptance checks. `acceptance --criterion N` runs one check; with no
// arguments every check runs in order. Each prints one line
//   Criterion N: PASS|FAIL <measurements>
// and the exit status is nonzero if any check failed.

#include "mbqcnn/cli.hpp"

#include <unistd.h>

#include <chrono>
#include <cstring>
#include <functional>
#include <sstream>

using namespace mbqcnn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Stopwatch {
   public:
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

   private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string g(double v) { return fmt(v); }

fs::path workdir(int n) {
    const auto p = fs::temp_directory_path() / ("mbqcnn_acceptance_" + std::to_string(::getpid())) /
                   ("c" + std::to_string(n));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

json run_and_read(const std::string& command, json overrides, const fs::path& out) {
    overrides["out"] = out.string();
    const auto cfg = make_config(command, nullptr, overrides);
    std::ostringstream log;
    std::ostringstream err;
    const int code = run_guarded(cfg, log, err);
    if (code != kExitOk) {
        throw std::runtime_error(command + " exited with " + std::to_string(code) + ": " + err.str());
    }
    return json::parse(read_file(out / "summary.json"));
}

Outcome criterion_1() {
    const Stopwatch sw;
    const auto s = verify_gadget(GadgetKind::L4, 100, 1);
    const double t = sw.seconds();
    return {s.max_distance <= 1e-9 && t < 1.0,
            "L4 max distance " + g(s.max_distance) + " over 100 draws with random inputs, " + g(t) + " s"};
}

Outcome criterion_2() {
    const Stopwatch sw;
    const Gadget e8 = e8_gadget();
    const Eigen::MatrixXcd m = e8.map();
    const auto s = verify_gadget(GadgetKind::E8, 1, 2);
    const Eigen::MatrixXcd target = dressing_matrix(s.dressing) * cnot();
    double worst = 0.0;
    for (Eigen::Index j = 0; j < 4; ++j) {
        worst = std::max(worst, distance_up_to_phase(Eigen::VectorXcd(m.col(j)), Eigen::VectorXcd(target.col(j))));
    }
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
        const Eigen::MatrixXcd a = random_state(rng, 1);
        const Eigen::MatrixXcd b = random_state(rng, 1);
        const Eigen::VectorXcd in = kron(a, b);
        worst = std::max(worst, distance_up_to_phase(Eigen::VectorXcd(m * in), Eigen::VectorXcd(target * in)));
    }
    const double t = sw.seconds();
    return {worst <= 1e-9 && t < 1.0, "E8 max distance " + g(worst) + " over 4 basis and 20 product inputs (dressing " +
                                          s.dressing + "), " + g(t) + " s"};
}

Outcome criterion_3() {
    const Stopwatch sw;
    const auto u = verify_gadget(GadgetKind::Uij, 50, 3);
    const auto v = verify_gadget(GadgetKind::Vij, 50, 3);
    const double t = sw.seconds();
    return {u.max_distance <= 1e-9 && v.max_distance <= 1e-9 && t < 30.0,
            "Uij max distance " + g(u.max_distance) + " (" + std::to_string(u.nodes) + " nodes), Vij max distance " +
                g(v.max_distance) + " (" + std::to_string(v.nodes) + " nodes, output frame " + v.dressing + "), " +
                g(t) + " s"};
}

Outcome criterion_4() {
    const auto iris = iris_lattice().param_count();
    const auto qcnn = QcnnModel().param_count();
    const auto haldane = haldane_lattice().param_count();
    const CnnModel cnn;
    const bool pass = iris == 28 && qcnn == 28 && haldane == 26 && cnn.param_count() == CnnModel::kParams &&
                      cnn.count_discrepancy();
    return {pass, "iris lattice " + std::to_string(iris) + ", QCNN " + std::to_string(qcnn) + ", spin-chain lattice " +
                      std::to_string(haldane) + ", CNN " + std::to_string(cnn.param_count()) + " (claimed " +
                      std::to_string(CnnModel::kClaimedParams) + ", discrepancy flag " +
                      (cnn.count_discrepancy() ? "set" : "clear") + ")"};
}

json haldane_summary(int n) {
    return run_and_read("haldane-train", {{"n_sites", 3}, {"grid_side", 6}, {"epochs", 500}, {"eval_side", 12}},
                        workdir(n));
}

Outcome criterion_5() {
    const Stopwatch sw;
    const auto s = haldane_summary(5);
    const double loss = s["final_train_loss"].get<double>();
    const double acc = s["final_test_accuracy"].get<double>();
    const double t = sw.seconds();
    return {loss <= 0.05 && acc >= 0.9,
            "final train MSE " + g(loss) + " (need <= 0.05), test accuracy " + g(acc) + " (need >= 0.9), 500 epochs, " +
                g(t) + " s"};
}

Outcome criterion_6() {
    const auto s = haldane_summary(6);
    const double frac = s["boundary_match_fraction"].is_null() ? 0.0 : s["boundary_match_fraction"].get<double>();
    const auto nm = s["boundary_points_model"].get<std::size_t>();
    const auto ns = s["boundary_points_sop"].get<std::size_t>();
    return {nm > 0 && frac >= 0.9, "match fraction " + g(frac) + " of " + std::to_string(nm) +
                                       " model boundary points against " + std::to_string(ns) +
                                       " string-order points, tolerance one spacing " +
                                       g(s["grid_spacing"].get<double>())};
}

double mean_of(const json& arr) {
    double s = 0.0;
    for (const auto& v : arr) {
        s += v.is_null() ? 0.0 : v.get<double>();
    }
    return s / static_cast<double>(arr.size());
}

/// Mean epochs to reach the loss target; a repeat that never reaches it
/// counts as epochs + 1. Also reports whether every repeat reached it.
std::pair<double, bool> mean_epochs(const json& arr, std::size_t epochs) {
    double s = 0.0;
    bool all = true;
    for (const auto& v : arr) {
        if (v.is_null()) {
            all = false;
            s += static_cast<double>(epochs + 1);
        } else {
            s += v.get<double>();
        }
    }
    return {s / static_cast<double>(arr.size()), all};
}

Outcome criterion_7() {
    const Stopwatch sw;
    const auto s = run_and_read("iris-train", {{"model", "all"}, {"repeats", 5}}, workdir(7));
    const auto epochs = s["epochs"].get<std::size_t>();
    const auto& m = s["models"];
    const double acc_m = mean_of(m["mbqcnn"]["final_accuracies"]);
    const double acc_q = mean_of(m["qcnn"]["final_accuracies"]);
    const bool a = acc_m >= acc_q - 0.02 && acc_m >= 0.80 && acc_q >= 0.80;
    const auto [ep_m, all_m] = mean_epochs(m["mbqcnn"]["epochs_to_loss_0.05"], epochs);
    const auto [ep_c, all_c] = mean_epochs(m["cnn"]["epochs_to_loss_0.05"], epochs);
    const bool b = all_m && ep_m <= ep_c;
    auto reach = [&](double e, bool all) { return all ? g(e) : g(e) + " (not reached in every repeat)"; };
    const double t = sw.seconds();
    return {a && b, std::string("(a) ") + (a ? "pass" : "fail") + ": mean test accuracy MBQCNN " + g(acc_m) +
                        ", QCNN " + g(acc_q) + ", CNN " + g(mean_of(m["cnn"]["final_accuracies"])) + "; (b) " +
                        (b ? "pass" : "fail") + ": mean epochs to loss 0.05 MBQCNN " + reach(ep_m, all_m) + ", CNN " +
                        reach(ep_c, all_c) + "; " + std::to_string(epochs) + " epochs x 5 repeats, " + g(t) + " s"};
}

Outcome criterion_8() {
    const Stopwatch sw;
    const auto s = run_and_read("grad-study", json::object(), workdir(8));
    const auto& f = s["families"];
    bool converged = true;
    std::string detail;
    for (const char* k : {"mbqcnn", "qcnn", "cnn"}) {
        const auto& c = f[k]["last_doubling_change"];
        const double change = c.is_null() ? std::numeric_limits<double>::infinity() : c.get<double>();
        converged = converged && change < 0.05;
        detail += std::string(k) + " tail " + g(f[k]["tail_log10_avg_grad"].get<double>()) + " (last change " +
                  g(change) + "), ";
    }
    const bool ordered = s.value("tail_ordering_pass", false);
    const double t = sw.seconds();
    return {converged && ordered, detail + "converged " + (converged ? "yes" : "no") + ", ordering " +
                                      (ordered ? "yes" : "no") + ", " + g(t) + " s"};
}

Outcome criterion_9() {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> h1(kH1Lo, kH1Hi);
    std::uniform_real_distribution<double> h2(kH2Lo, kH2Hi);
    std::vector<std::string> failures;

    // Output range.
    auto model = haldane_lattice();
    double lo = 1.0;
    double hi = 0.0;
    for (int t = 0; t < 1000; ++t) {
        model.set_params(draw_uniform(rng, 26, kAngleInit));
        const double y = model.predict(make_sample(3, 1.0, h1(rng), h2(rng)).ground_state);
        lo = std::min(lo, y);
        hi = std::max(hi, y);
    }
    if (lo < 0.0 || hi > 1.0) {
        failures.push_back("range");
    }

    // Azimuth independence at zero polar angle, for every measured qubit.
    const auto x = make_sample(3, 1.0, 0.7, 0.3).ground_state;
    auto p = draw_uniform(rng, 26, kAngleInit);
    double beta_dev = 0.0;
    for (std::size_t q = 0; q < 13; ++q) {
        auto a = p;
        a[2 * q] = 0.0;
        a[2 * q + 1] = 0.0;
        model.set_params(a);
        const double y0 = model.predict(x);
        a[2 * q + 1] = 5.0;
        model.set_params(a);
        beta_dev = std::max(beta_dev, std::abs(model.predict(x) - y0));
    }
    if (beta_dev > 1e-12) {
        failures.push_back("azimuth");
    }

    // Contraction order: dense reference, factorized path and a reversed projection order.
    model.set_params(p);
    const auto joint = model.joint_state(x);
    const auto& labels = model.qubit_labels();
    StateVector r = joint;
    std::vector<std::string> live = labels;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        const std::size_t q = live.size() - 1 - (k % live.size());
        r = project_out(r, q, model.pattern().assignments.at(live[q]).instantiate(p)).residual;
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(q));
    }
    const cplx fwd = contract(joint, labels, model.pattern(), p).amplitude;
    const double order_dev =
        std::max({std::abs(r.scalar() - fwd), std::abs(std::norm(fwd) - model.predict(x)),
                  std::abs(model.predict_reference(x) - model.predict(x))});
    if (order_dev > 1e-12) {
        failures.push_back("order");
    }

    // Finite-difference step halving.
    const auto data = make_grid_dataset(3, 6);
    std::vector<EncodedSample> enc;
    for (const auto& s : data) {
        enc.push_back(s.encoded());
    }
    const auto ga = fd_gradient(model, std::span<const EncodedSample>(enc), 1e-3);
    const auto gb = fd_gradient(model, std::span<const EncodedSample>(enc), 5e-4);
    std::vector<double> diff(ga.size());
    for (std::size_t i = 0; i < ga.size(); ++i) {
        diff[i] = ga[i] - gb[i];
    }
    const double rel = l2_norm(diff) / l2_norm(gb);
    if (!(rel <= 1e-4)) {
        failures.push_back("fd-halving");
    }

    // Trace determinism.
    TrainingConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 9;
    auto m1 = iris_lattice();
    auto m2 = iris_lattice();
    init_params(m1, 9, kAngleInit);
    init_params(m2, 9, kAngleInit);
    std::vector<EncodedSample> iris;
    for (const auto& f : {std::array<double, 4>{5.1, 3.5, 1.4, 0.2}, {7.0, 3.2, 4.7, 1.4}, {6.3, 3.3, 6.0, 2.5}}) {
        iris.push_back(encode_iris(f, iris.size() * 0.5));
    }
    const auto t1 = train(m1, std::span<const EncodedSample>(iris), std::span<const EncodedSample>(iris), cfg);
    const auto t2 = train(m2, std::span<const EncodedSample>(iris), std::span<const EncodedSample>(iris), cfg);
    bool same = t1.final_params == t2.final_params;
    for (std::size_t e = 0; e < t1.records.size(); ++e) {
        same = same && t1.records[e].train_loss == t2.records[e].train_loss &&
               t1.records[e].test_accuracy == t2.records[e].test_accuracy && t1.records[e].lr == t2.records[e].lr;
    }
    if (!same) {
        failures.push_back("determinism");
    }

    std::string joined;
    for (const auto& f : failures) {
        joined += (joined.empty() ? "" : ",") + f;
    }
    return {failures.empty(), "output range [" + g(lo) + ", " + g(hi) + "] over 1000 draws, azimuth deviation " +
                                  g(beta_dev) + ", order deviation " + g(order_dev) + ", fd halving relative change " +
                                  g(rel) + ", traces " + (same ? "identical" : "differ") +
                                  (joined.empty() ? "" : "; failed: " + joined)};
}

Outcome criterion_10() {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double herm = 0.0;
    double energy = 0.0;
    for (int t = 0; t < 100; ++t) {
        const HaldaneParams p{3 + static_cast<std::size_t>(t % 4), u(rng), u(rng), u(rng)};
        const auto h = haldane_hamiltonian(p);
        herm = std::max(herm, (h - h.transpose()).cwiseAbs().maxCoeff());
        const auto gs = ground_state(p);
        const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h, Eigen::EigenvaluesOnly).eigenvalues()(0);
        const double e = energy_of(h, gs.state);
        energy = std::max(energy, std::abs(e - lmin));
    }
    GraphSpec line;
    line.node_labels = {"1", "2", "3"};
    line.edges = {{"1", "2"}, {"2", "3"}};
    const double cluster = sop_expectation(build_cluster(line), 1, 3);
    const double plus = sop_expectation(make_plus_state(3), 1, 3);
    const double zero = sop_expectation(StateVector::basis(3, 0), 1, 3);
    const bool pass = herm <= 1e-12 && energy <= 1e-10 && std::abs(cluster - 1.0) <= 1e-12 &&
                      std::abs(plus) <= 1e-12 && std::abs(zero) <= 1e-12;
    return {pass, "hermiticity " + g(herm) + ", ground energy deviation " + g(energy) + " over 100 draws, SOP cluster " +
                      g(cluster) + ", |+++> " + g(plus) + ", |000> " + g(zero)};
}

const std::vector<std::function<Outcome()>>& criteria() {
    static const std::vector<std::function<Outcome()>> c = {criterion_1, criterion_2, criterion_3, criterion_4,
                                                            criterion_5, criterion_6, criterion_7, criterion_8,
                                                            criterion_9, criterion_10};
    return c;
}

bool run_one(int n) {
    Outcome o;
    try {
        o = criteria().at(static_cast<std::size_t>(n - 1))();
    } catch (const std::exception& e) {
        o = {false, std::string("error: ") + e.what()};
    }
    std::cout << "Criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << " " << o.detail << std::endl;
    return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc == 3 && std::strcmp(argv[1], "--criterion") == 0) {
        const int n = std::atoi(argv[2]);
        if (n < 1 || n > static_cast<int>(criteria().size())) {
            std::cerr << "criterion must be 1.." << criteria().size() << "\n";
            return 2;
        }
        return run_one(n) ? 0 : 1;
    }
    if (argc != 1) {
        std::cerr << "usage: acceptance [--criterion N]\n";
        return 2;
    }
    bool all = true;
    for (int n = 1; n <= static_cast<int>(criteria().size()); ++n) {
        all = run_one(n) && all;
    }
    return all ? 0 : 1;
}
