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

#include "CLI11.hpp"
#include "mbqcnn/cli.hpp"

#include <iostream>
#include <optional>

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> epochs;
    std::optional<double> fd_step;
    std::optional<std::size_t> repeats;
    std::optional<std::string> model;
    std::optional<std::string> data;
    std::optional<std::size_t> grid_side;
    std::optional<std::size_t> n_sites;
    std::optional<std::string> params;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON configuration file");
    sub->add_option("--seed", f.seed, "Random seed");
    sub->add_option("--out", f.out, "Output directory");
    sub->add_option("--epochs", f.epochs, "Training epochs");
    sub->add_option("--fd-step", f.fd_step, "Finite-difference step");
    sub->add_option("--repeats", f.repeats, "Training repeats");
}

mbqcnn::json flag_overrides(const Flags& f) {
    mbqcnn::json j = mbqcnn::json::object();
    if (f.seed) j["seed"] = *f.seed;
    if (f.out) j["out"] = *f.out;
    if (f.epochs) j["epochs"] = *f.epochs;
    if (f.fd_step) j["fd_step"] = *f.fd_step;
    if (f.repeats) j["repeats"] = *f.repeats;
    if (f.model) j["model"] = *f.model;
    if (f.data) j["data"] = *f.data;
    if (f.grid_side) j["grid_side"] = *f.grid_side;
    if (f.n_sites) j["n_sites"] = *f.n_sites;
    if (f.params) j["params"] = *f.params;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Measurement-based quantum CNN simulator and trainer"};
    app.require_subcommand(1);
    Flags f;

    auto* verify = app.add_subcommand("verify-gadgets", "Check every cluster gadget against its circuit");
    auto* gen = app.add_subcommand("haldane-gen", "Write a spin-chain ground-state dataset");
    auto* htrain = app.add_subcommand("haldane-train", "Train the 2x5 lattice on the spin-chain phases");
    auto* pmap = app.add_subcommand("phase-map", "String-order map, boundaries and optional model map");
    auto* iris = app.add_subcommand("iris-train", "Train the iris models with repeats");
    auto* grad = app.add_subcommand("grad-study", "Average gradient magnitude against sample count");
    for (auto* s : {verify, gen, htrain, pmap, iris, grad}) {
        add_common(s, f);
    }
    for (auto* s : {gen, htrain}) {
        s->add_option("--grid-side", f.grid_side, "Training grid side");
    }
    for (auto* s : {gen, htrain, pmap}) {
        s->add_option("--n-sites", f.n_sites, "Chain length");
    }
    pmap->add_option("--params", f.params, "Trained lattice parameters (JSON)");
    iris->add_option("--model", f.model, "mbqcnn, qcnn, cnn or all");
    for (auto* s : {iris, grad}) {
        s->add_option("--data", f.data, "Iris CSV (default: bundled copy)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? mbqcnn::kExitOk : mbqcnn::kExitValidation;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    mbqcnn::ExperimentConfig cfg;
    try {
        cfg = mbqcnn::make_config(command, mbqcnn::load_config_file(f.config), flag_overrides(f));
    } catch (const mbqcnn::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return mbqcnn::kExitValidation;
    }
    return mbqcnn::run_guarded(cfg);
}
