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

#include "json.hpp"
#include "mbqcnn/gadgets.hpp"
#include "mbqcnn/physics.hpp"
#include "mbqcnn/random.hpp"
#include "mbqcnn/train.hpp"

#include <bit>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace mbqcnn {

using json = nlohmann::json;

/// Bad input or a failed check; maps to exit status 1.
class ValidationError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// ---------------------------------------------------------------------------
// Hashing and formatting

inline std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot read '" + p.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// 12 significant digits; infinities print as inf / -inf.
inline std::string fmt(double v) {
    if (std::isinf(v)) {
        return v < 0 ? "-inf" : "inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline json json_number(double v) {
    if (!std::isfinite(v)) {
        return fmt(v);
    }
    return std::stod(fmt(v));
}

// ---------------------------------------------------------------------------
// Configuration

/// The merged configuration of one command. Values come from defaults, then
/// a JSON document, then flags.
struct ExperimentConfig {
    std::string command;
    json values = json::object();

    [[nodiscard]] std::string hash() const { return hex64(fnv1a(command + values.dump())); }

    template <class T>
    [[nodiscard]] T get(const std::string& key) const {
        if (!values.contains(key)) {
            throw ValidationError("config key '" + key + "' is missing");
        }
        try {
            return values.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ValidationError("config key '" + key + "': " + e.what());
        }
    }
};

inline json command_defaults(const std::string& command) {
    json common = {{"seed", 0}, {"out", "out"}, {"fd_step", 1e-3}};
    json d;
    if (command == "verify-gadgets") {
        d = {{"trials_l4", 100}, {"trials_e8", 20}, {"trials_uij", 50}, {"trials_vij", 50}, {"tolerance", 1e-9}};
    } else if (command == "haldane-gen") {
        d = {{"n_sites", 3}, {"grid_side", 6}, {"j", 1.0}};
    } else if (command == "haldane-train") {
        d = {{"n_sites", 3}, {"grid_side", 6}, {"j", 1.0}, {"epochs", 500}, {"eval_side", 12}};
    } else if (command == "phase-map") {
        d = {{"n_sites", 3}, {"side", 12}, {"j", 1.0}, {"params", ""}};
    } else if (command == "iris-train") {
        d = {{"data", ""}, {"model", "all"}, {"epochs", 300}, {"repeats", 5}, {"minmax", false}, {"cnn_init", "weights"}};
    } else if (command == "grad-study") {
        d = {{"data", ""}, {"counts", doubling_counts()}, {"models", {"mbqcnn", "qcnn", "cnn"}}};
    } else {
        throw ValidationError("unknown command '" + command + "'");
    }
    d.update(common);
    return d;
}

/// Merges defaults, an optional JSON document and flag overrides. Keys that
/// the command does not know are rejected.
inline ExperimentConfig make_config(const std::string& command, const json& document, const json& flags) {
    ExperimentConfig cfg{command, command_defaults(command)};
    for (const json* layer : {&document, &flags}) {
        if (layer->is_null()) {
            continue;
        }
        if (!layer->is_object()) {
            throw ValidationError("config must be a JSON object");
        }
        for (const auto& [k, v] : layer->items()) {
            if (!cfg.values.contains(k)) {
                throw ValidationError("unknown config key '" + k + "' for " + command);
            }
            cfg.values[k] = v;
        }
    }
    return cfg;
}

inline json load_config_file(const std::string& path) {
    if (path.empty()) {
        return nullptr;
    }
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError("config '" + path + "': " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Output

class CsvWriter {
   public:
    CsvWriter(const std::filesystem::path& path, const std::string& config_hash, const std::string& header)
        : out_(path) {
        if (!out_) {
            throw std::runtime_error("cannot write '" + path.string() + "'");
        }
        out_ << "# config_hash=" << config_hash << "\n" << header << "\n";
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out_ << (i ? "," : "") << cells[i];
        }
        out_ << "\n";
    }

   private:
    std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path, json doc, const std::string& config_hash) {
    doc["config_hash"] = config_hash;
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    out << doc.dump(2) << "\n";
}

/// Amplitudes of each state back to back as little-endian (re, im) float64 pairs.
inline void write_amplitudes(const std::filesystem::path& path, const std::vector<StateVector>& states) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    auto put = [&](double v) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        char b[8];
        for (int i = 0; i < 8; ++i) {
            b[i] = static_cast<char>((bits >> (8 * i)) & 0xFFU);
        }
        out.write(b, 8);
    };
    for (const auto& s : states) {
        for (const auto& a : s.amplitudes()) {
            put(a.real());
            put(a.imag());
        }
    }
}

inline std::vector<cplx> read_amplitudes(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() % 16 != 0) {
        throw ValidationError("amplitude file length is not a multiple of 16");
    }
    std::vector<cplx> out;
    auto get = [&](std::size_t off) {
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) {
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[off + i])) << (8 * i);
        }
        return std::bit_cast<double>(bits);
    };
    for (std::size_t off = 0; off < bytes.size(); off += 16) {
        out.emplace_back(get(off), get(off + 8));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization of patterns and parameters

inline json graph_to_json(const GraphSpec& g, const MeasurementPattern& p) {
    json edges = json::array();
    for (const auto& [a, b] : g.edges) {
        edges.push_back({a, b});
    }
    json proj = json::object();
    for (const auto& [label, spec] : p.assignments) {
        proj[label] = {{"kind", kind_name(spec.kind)}, {"slots", spec.slots}};
    }
    return {{"nodes", g.node_labels}, {"edges", edges}, {"ports", g.input_ports}, {"projectors", proj},
            {"total_params", p.total_params}};
}

inline std::pair<GraphSpec, MeasurementPattern> graph_from_json(const json& j) {
    try {
        GraphSpec g;
        g.node_labels = j.at("nodes").get<std::vector<std::string>>();
        for (const auto& e : j.at("edges")) {
            g.edges.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
        }
        g.input_ports = j.at("ports").get<std::vector<std::string>>();
        MeasurementPattern p;
        for (const auto& [label, spec] : j.at("projectors").items()) {
            p.assignments[label] = {kind_from_name(spec.at("kind").get<std::string>()),
                                    spec.at("slots").get<std::vector<std::size_t>>()};
        }
        p.total_params = j.at("total_params").get<std::size_t>();
        g.validate();
        p.validate_against(g);
        return {g, p};
    } catch (const json::exception& e) {
        throw ValidationError(std::string("graph document: ") + e.what());
    }
}

inline json params_to_json(const std::string& topology, const std::vector<double>& params) {
    json arr = json::array();
    for (double v : params) {
        arr.push_back(v);
    }
    return {{"topology", topology}, {"params", arr}};
}

inline std::pair<std::string, std::vector<double>> params_from_json(const json& j) {
    try {
        return {j.at("topology").get<std::string>(), j.at("params").get<std::vector<double>>()};
    } catch (const json::exception& e) {
        throw ValidationError(std::string("parameter document: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Iris

struct IrisRecord {
    std::array<double, 4> features{};
    std::string species;
    double label = 0.0;
};

inline constexpr std::uint64_t kIrisChecksum = 0xf743bbb242040baeULL;
inline constexpr std::size_t kIrisRecords = 150;
inline constexpr std::size_t kIrisPerClass = 50;

inline double species_label(const std::string& s) {
    if (s == "setosa" || s == "Iris-setosa") {
        return 0.0;
    }
    if (s == "versicolor" || s == "Iris-versicolor") {
        return 0.5;
    }
    if (s == "virginica" || s == "Iris-virginica") {
        return 1.0;
    }
    throw std::invalid_argument("unknown species '" + s + "'");
}

inline std::string default_iris_path() {
#ifdef MBQCNN_DATA_DIR
    return std::string(MBQCNN_DATA_DIR) + "/iris.csv";
#else
    return "data/iris.csv";
#endif
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) {
            cell.pop_back();
        }
        while (!cell.empty() && cell.front() == ' ') {
            cell.erase(cell.begin());
        }
        cells.push_back(cell);
    }
    return cells;
}

/// Five columns (four features and the species); a first line whose first
/// cell is not numeric is treated as a header.
inline std::vector<IrisRecord> parse_iris(std::istream& in) {
    std::vector<IrisRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r" || line[0] == '#') {
            continue;
        }
        auto cells = split_csv_line(line);
        if (cells.size() != 5) {
            throw ValidationError("iris line " + std::to_string(lineno) + ": expected 5 columns, got " +
                                  std::to_string(cells.size()));
        }
        IrisRecord r;
        bool numeric = true;
        for (std::size_t i = 0; i < 4; ++i) {
            try {
                std::size_t used = 0;
                r.features[i] = std::stod(cells[i], &used);
                numeric = numeric && used == cells[i].size();
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (!numeric) {
            if (out.empty() && lineno == 1) {
                continue;
            }
            throw ValidationError("iris line " + std::to_string(lineno) + ": malformed feature value");
        }
        for (double f : r.features) {
            if (!std::isfinite(f) || f <= 0.0) {
                throw ValidationError("iris line " + std::to_string(lineno) + ": features must be finite and positive");
            }
        }
        try {
            r.label = species_label(cells[4]);
        } catch (const std::invalid_argument& e) {
            throw ValidationError("iris line " + std::to_string(lineno) + ": " + e.what());
        }
        r.species = cells[4];
        out.push_back(r);
    }
    if (out.size() != kIrisRecords) {
        throw ValidationError("iris: expected 150 records, got " + std::to_string(out.size()));
    }
    for (double l : {0.0, 0.5, 1.0}) {
        const auto n = std::count_if(out.begin(), out.end(), [&](const IrisRecord& r) { return r.label == l; });
        if (static_cast<std::size_t>(n) != kIrisPerClass) {
            throw ValidationError("iris: expected 50 records per species, got " + std::to_string(n));
        }
    }
    return out;
}

inline std::vector<IrisRecord> load_iris(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot read iris file '" + path + "'");
    }
    return parse_iris(in);
}

struct IrisSplit {
    std::vector<IrisRecord> train;
    std::vector<IrisRecord> test;
};

/// 40 train / 10 test per species; within each species the records are
/// shuffled with seed (seed, species index) and the first 40 train.
inline IrisSplit split_iris(const std::vector<IrisRecord>& records, std::uint64_t seed) {
    IrisSplit s;
    const std::array<double, 3> labels{0.0, 0.5, 1.0};
    for (std::size_t c = 0; c < labels.size(); ++c) {
        std::vector<IrisRecord> cls;
        for (const auto& r : records) {
            if (r.label == labels[c]) {
                cls.push_back(r);
            }
        }
        if (cls.size() != kIrisPerClass) {
            throw ValidationError("split_iris: expected 50 records per species");
        }
        const auto perm = seeded_permutation(cls.size(), seed * 3 + c);
        for (std::size_t i = 0; i < perm.size(); ++i) {
            (i < 40 ? s.train : s.test).push_back(cls[perm[i]]);
        }
    }
    return s;
}

inline std::vector<EncodedSample> encode_records(const std::vector<IrisRecord>& rs,
                                                 const std::optional<FeatureScaling>& scaling) {
    std::vector<EncodedSample> out;
    for (const auto& r : rs) {
        out.push_back(encode_iris(scaling ? scaling->apply(r.features) : r.features, r.label));
    }
    return out;
}

struct IrisData {
    std::vector<EncodedSample> train;
    std::vector<EncodedSample> test;
    std::string checksum;
    bool checksum_ok = true;
};

/// Loads, checks and splits the iris file named by the config (the
/// bundled copy when empty). The bundled copy must match its checksum.
inline IrisData prepare_iris(const ExperimentConfig& cfg, bool minmax) {
    std::string path = cfg.get<std::string>("data");
    const bool bundled = path.empty();
    if (bundled) {
        path = default_iris_path();
    }
    IrisData d;
    const auto sum = fnv1a(read_file(path));
    d.checksum = hex64(sum);
    d.checksum_ok = sum == kIrisChecksum;
    if (bundled && !d.checksum_ok) {
        throw ValidationError("bundled iris file checksum mismatch: " + d.checksum);
    }
    const auto split = split_iris(load_iris(path), cfg.get<std::uint64_t>("seed"));
    std::optional<FeatureScaling> scaling;
    if (minmax) {
        std::vector<std::array<double, 4>> rows;
        for (const auto& r : split.train) {
            rows.push_back(r.features);
        }
        scaling = FeatureScaling::fit(rows);
    }
    d.train = encode_records(split.train, scaling);
    d.test = encode_records(split.test, scaling);
    return d;
}

// ---------------------------------------------------------------------------
// Commands

inline std::filesystem::path prepare_out(const ExperimentConfig& cfg) {
    std::filesystem::path out = cfg.get<std::string>("out");
    std::filesystem::create_directories(out);
    return out;
}

inline TrainingConfig training_config(const ExperimentConfig& cfg, Task task) {
    TrainingConfig t;
    t.epochs = cfg.get<std::size_t>("epochs");
    t.fd_step = cfg.get<double>("fd_step");
    t.seed = cfg.get<std::uint64_t>("seed");
    t.task = task;
    if (!(t.fd_step > 0.0)) {
        throw ValidationError("fd_step must be positive");
    }
    return t;
}

inline json summary_to_json(const VerifySummary& s, double tol) {
    return {{"gadget", gadget_name(s.kind)},
            {"trials", s.trials},
            {"seed", s.seed},
            {"nodes", s.nodes},
            {"max_distance", json_number(s.max_distance)},
            {"min_scale", json_number(s.min_scale)},
            {"max_scale", json_number(s.max_scale)},
            {"dressing", s.dressing},
            {"pass", s.max_distance <= tol}};
}

inline int cmd_verify_gadgets(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    const auto out = prepare_out(cfg);
    const auto seed = cfg.get<std::uint64_t>("seed");
    const double tol = cfg.get<double>("tolerance");
    const std::vector<std::pair<GadgetKind, const char*>> kinds = {{GadgetKind::L4, "trials_l4"},
                                                                   {GadgetKind::E8, "trials_e8"},
                                                                   {GadgetKind::Uij, "trials_uij"},
                                                                   {GadgetKind::Vij, "trials_vij"}};
    json report = {{"seed", seed}, {"tolerance", tol}, {"gadgets", json::array()}};
    bool ok = true;
    for (const auto& [kind, key] : kinds) {
        const auto trials = cfg.get<std::size_t>(key);
        if (trials < 1) {
            throw ValidationError(std::string(key) + " must be at least 1");
        }
        const auto s = verify_gadget(kind, trials, seed);
        ok = ok && s.max_distance <= tol;
        report["gadgets"].push_back(summary_to_json(s, tol));
        log << gadget_name(kind) << ": max distance " << fmt(s.max_distance) << " over " << trials << " trials"
            << (s.dressing != "I,I" ? " (output frame " + s.dressing + ")" : "") << "\n";
    }
    const Gadget samples[] = {l4_gadget({}), e8_gadget(), uij_cluster({}), vij_cluster(VijParams{})};
    const char* names[] = {"L4", "E8", "Uij", "Vij"};
    json graphs = json::object();
    for (std::size_t i = 0; i < 4; ++i) {
        graphs[names[i]] = graph_to_json(samples[i].graph, samples[i].pattern);
        graphs[names[i]]["outputs"] = samples[i].outputs;
    }
    report["all_pass"] = ok;
    write_json(out / "gadgets.json", report, cfg.hash());
    write_json(out / "gadget_graphs.json", graphs, cfg.hash());
    return ok ? kExitOk : kExitValidation;
}

inline void write_haldane_dataset(const std::filesystem::path& csv, const std::filesystem::path& bin,
                                  const std::vector<HaldaneSample>& samples, const std::string& hash) {
    CsvWriter w(csv, hash, "h1_over_j,h2_over_j,sop,label");
    std::vector<StateVector> states;
    for (const auto& s : samples) {
        w.row({fmt(s.h1_over_j()), fmt(s.h2_over_j()), fmt(s.sop), std::to_string(s.label)});
        states.push_back(s.ground_state);
    }
    write_amplitudes(bin, states);
}

struct HaldaneInputs {
    std::size_t n_sites;
    std::size_t side;
    double j;
};

inline HaldaneInputs haldane_inputs(const ExperimentConfig& cfg, const std::string& side_key, std::ostream& log) {
    HaldaneInputs h{cfg.get<std::size_t>("n_sites"), cfg.get<std::size_t>(side_key), cfg.get<double>("j")};
    if (h.n_sites < kMinSites || h.n_sites > kMaxSites) {
        throw ValidationError("n_sites must lie in [3, 12]");
    }
    if (h.side < 3) {
        throw ValidationError(side_key + " must be at least 3");
    }
    if (h.j == 0.0 || !std::isfinite(h.j)) {
        throw ValidationError("j must be finite and nonzero");
    }
    if (side_key == "grid_side" && h.side != 6 && h.side != 9 && h.side != 12) {
        log << "warning: grid_side " << h.side << " is outside {6, 9, 12}\n";
    }
    return h;
}

inline int cmd_haldane_gen(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    const auto out = prepare_out(cfg);
    const auto h = haldane_inputs(cfg, "grid_side", log);
    const auto train = make_grid_dataset(h.n_sites, h.side, h.j);
    const auto test = make_test_grid(h.n_sites, h.side, h.j, cfg.get<std::uint64_t>("seed"));
    write_haldane_dataset(out / "dataset.csv", out / "amplitudes.bin", train, cfg.hash());
    write_haldane_dataset(out / "test_dataset.csv", out / "test_amplitudes.bin", test, cfg.hash());
    log << "wrote " << train.size() << " training and " << test.size() << " test samples\n";
    return kExitOk;
}

inline void write_trace(const std::filesystem::path& path, const TrainingTrace& t, const std::string& hash) {
    CsvWriter w(path, hash, "epoch,train_loss,test_accuracy,grad_norm,lr");
    for (const auto& r : t.records) {
        w.row({std::to_string(r.epoch), fmt(r.train_loss), fmt(r.test_accuracy), fmt(r.grad_norm), fmt(r.lr)});
    }
}

inline void write_boundary(const std::filesystem::path& path, const std::vector<BoundaryPoint>& pts,
                           const std::string& hash) {
    CsvWriter w(path, hash, "h1_over_j,h2_over_j");
    for (const auto& p : pts) {
        w.row({fmt(p.h1_over_j), fmt(p.h2_over_j)});
    }
}

/// Largest distance from a point of `a` to the nearest point of `b`.
inline double max_pointwise_deviation(const std::vector<BoundaryPoint>& a, const std::vector<BoundaryPoint>& b) {
    if (a.empty() || b.empty()) {
        return std::numeric_limits<double>::infinity();
    }
    double worst = 0.0;
    for (const auto& p : a) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : b) {
            best = std::min(best, std::hypot(p.h1_over_j - q.h1_over_j, p.h2_over_j - q.h2_over_j));
        }
        worst = std::max(worst, best);
    }
    return worst;
}

/// Model output on the same axes as `sop`.
inline PhaseGrid model_grid(const ClusterModel& m, const PhaseGrid& sop, std::size_t n_sites, double j) {
    PhaseGrid g{sop.h1_over_j, sop.h2_over_j, Eigen::MatrixXd(sop.values.rows(), sop.values.cols())};
    std::vector<EncodedSample> cells;
    for (double a : g.h1_over_j) {
        for (double b : g.h2_over_j) {
            cells.push_back(make_sample(n_sites, j, a, b).encoded());
        }
    }
    const auto pred = m.predict_batch(cells);
    for (Eigen::Index a = 0; a < g.values.rows(); ++a) {
        for (Eigen::Index b = 0; b < g.values.cols(); ++b) {
            g.values(a, b) = pred[static_cast<std::size_t>(a * g.values.cols() + b)];
        }
    }
    return g;
}

inline void write_phase_map(const std::filesystem::path& path, const PhaseGrid& sop, const PhaseGrid* omega,
                            const std::string& hash) {
    CsvWriter w(path, hash, omega ? "h1_over_j,h2_over_j,sop,omega" : "h1_over_j,h2_over_j,sop");
    for (Eigen::Index a = 0; a < sop.values.rows(); ++a) {
        for (Eigen::Index b = 0; b < sop.values.cols(); ++b) {
            std::vector<std::string> row{fmt(sop.h1_over_j[static_cast<std::size_t>(a)]),
                                         fmt(sop.h2_over_j[static_cast<std::size_t>(b)]), fmt(sop.values(a, b))};
            if (omega) {
                row.push_back(fmt(omega->values(a, b)));
            }
            w.row(row);
        }
    }
}

struct BoundaryComparison {
    std::vector<BoundaryPoint> model;
    std::vector<BoundaryPoint> sop;
    double spacing = 0.0;
    double match_fraction = 0.0;
    double max_deviation = 0.0;
};

inline BoundaryComparison compare_boundaries(const PhaseGrid& sop, const PhaseGrid& omega) {
    BoundaryComparison c;
    c.sop = phase_boundary(sop);
    c.model = phase_boundary(omega);
    c.spacing = std::max(sop.h1_over_j[1] - sop.h1_over_j[0], sop.h2_over_j[1] - sop.h2_over_j[0]);
    c.match_fraction = boundary_match_fraction(c.model, c.sop, c.spacing);
    c.max_deviation = max_pointwise_deviation(c.model, c.sop);
    return c;
}

inline int cmd_haldane_train(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    const auto out = prepare_out(cfg);
    const auto h = haldane_inputs(cfg, "grid_side", log);
    const auto eval_side = cfg.get<std::size_t>("eval_side");
    if (h.n_sites != 3) {
        throw ValidationError("haldane-train needs n_sites = 3 (the lattice has three input bonds)");
    }
    if (eval_side < 3) {
        throw ValidationError("eval_side must be at least 3");
    }
    const auto tcfg = training_config(cfg, Task::Binary);
    const auto train_s = make_grid_dataset(h.n_sites, h.side, h.j);
    const auto test_s = make_test_grid(h.n_sites, h.side, h.j, tcfg.seed);
    write_haldane_dataset(out / "dataset.csv", out / "amplitudes.bin", train_s, cfg.hash());
    write_haldane_dataset(out / "test_dataset.csv", out / "test_amplitudes.bin", test_s, cfg.hash());
    std::vector<EncodedSample> tr;
    std::vector<EncodedSample> te;
    for (const auto& s : train_s) {
        tr.push_back(s.encoded());
    }
    for (const auto& s : test_s) {
        te.push_back(s.encoded());
    }
    auto model = haldane_lattice();
    init_params(model, tcfg.seed, kAngleInit);
    const auto trace = train(model, tr, te, tcfg);
    write_trace(out / "trace.csv", trace, cfg.hash());
    write_json(out / "params.json", params_to_json(model.topology(), model.get_params()), cfg.hash());

    const auto sop = sop_grid(h.n_sites, eval_side, h.j);
    const auto omega = model_grid(model, sop, h.n_sites, h.j);
    write_phase_map(out / "phase_map.csv", sop, &omega, cfg.hash());
    const auto cmp = compare_boundaries(sop, omega);
    write_boundary(out / "boundary_model.csv", cmp.model, cfg.hash());
    write_boundary(out / "boundary_sop.csv", cmp.sop, cfg.hash());

    const auto& last = trace.records.back();
    json summary = {{"seed", tcfg.seed},
                    {"epochs", tcfg.epochs},
                    {"fd_step", tcfg.fd_step},
                    {"param_count", model.param_count()},
                    {"final_train_loss", json_number(last.train_loss)},
                    {"final_test_accuracy", json_number(last.test_accuracy)},
                    {"boundary_points_model", cmp.model.size()},
                    {"boundary_points_sop", cmp.sop.size()},
                    {"boundary_match_fraction", json_number(cmp.match_fraction)},
                    {"boundary_max_deviation", json_number(cmp.max_deviation)},
                    {"grid_spacing", json_number(cmp.spacing)}};
    write_json(out / "summary.json", summary, cfg.hash());
    log << "final loss " << fmt(last.train_loss) << ", test accuracy " << fmt(last.test_accuracy)
        << ", boundary match " << fmt(cmp.match_fraction) << "\n";
    return kExitOk;
}

inline int cmd_phase_map(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    const auto out = prepare_out(cfg);
    const auto h = haldane_inputs(cfg, "side", log);
    const auto sop = sop_grid(h.n_sites, h.side, h.j);
    write_boundary(out / "boundary_sop.csv", phase_boundary(sop), cfg.hash());
    const auto params_path = cfg.get<std::string>("params");
    if (params_path.empty()) {
        write_phase_map(out / "phase_map.csv", sop, nullptr, cfg.hash());
        log << "wrote " << h.side * h.side << " grid cells\n";
        return kExitOk;
    }
    if (h.n_sites != 3) {
        throw ValidationError("a model map needs n_sites = 3");
    }
    json doc;
    try {
        doc = json::parse(read_file(params_path));
    } catch (const json::parse_error& e) {
        throw ValidationError("params '" + params_path + "': " + e.what());
    }
    auto [topology, values] = params_from_json(doc);
    auto model = haldane_lattice();
    if (topology != model.topology()) {
        throw ValidationError("params topology '" + topology + "' is not " + model.topology());
    }
    try {
        model.set_params(values);
    } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
    }
    const auto omega = model_grid(model, sop, h.n_sites, h.j);
    write_phase_map(out / "phase_map.csv", sop, &omega, cfg.hash());
    const auto cmp = compare_boundaries(sop, omega);
    write_boundary(out / "boundary_model.csv", cmp.model, cfg.hash());
    write_json(out / "boundary_summary.json",
               {{"match_fraction", json_number(cmp.match_fraction)},
                {"max_deviation", json_number(cmp.max_deviation)},
                {"grid_spacing", json_number(cmp.spacing)}},
               cfg.hash());
    log << "boundary match " << fmt(cmp.match_fraction) << "\n";
    return kExitOk;
}

inline std::vector<std::string> iris_model_list(const std::string& m) {
    if (m == "all") {
        return {"mbqcnn", "qcnn", "cnn"};
    }
    if (m == "mbqcnn" || m == "qcnn" || m == "cnn") {
        return {m};
    }
    throw ValidationError("model must be one of mbqcnn, qcnn, cnn, all");
}

struct RepeatOutcome {
    std::vector<TrainingTrace> traces;
    std::size_t param_count = 0;
    std::string topology;
};

/// Trains `repeats` fresh copies of one model family; repeat r uses seed + r
/// for both the initial parameters and the learning-rate draws.
inline RepeatOutcome run_iris_repeats(const std::string& family, const IrisData& data, TrainingConfig tcfg,
                                      std::size_t repeats, Range cnn_init) {
    RepeatOutcome o;
    const auto base = tcfg.seed;
    for (std::size_t r = 0; r < repeats; ++r) {
        tcfg.seed = base + r;
        auto run = [&](auto model, Range init) {
            init_params(model, tcfg.seed, init);
            o.param_count = model.param_count();
            o.topology = model.topology();
            o.traces.push_back(train(model, data.train, data.test, tcfg));
        };
        if (family == "mbqcnn") {
            run(iris_lattice(), kAngleInit);
        } else if (family == "qcnn") {
            run(QcnnModel{}, kAngleInit);
        } else {
            run(CnnModel{}, cnn_init);
        }
    }
    return o;
}

inline Range cnn_init_range(const std::string& s) {
    if (s == "weights") {
        return kWeightInit;
    }
    if (s == "angles") {
        return kAngleInit;
    }
    throw ValidationError("cnn_init must be 'weights' or 'angles'");
}

inline int cmd_iris(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    const auto out = prepare_out(cfg);
    const auto models = iris_model_list(cfg.get<std::string>("model"));
    const auto repeats = cfg.get<std::size_t>("repeats");
    if (repeats < 1) {
        throw ValidationError("repeats must be at least 1");
    }
    const auto tcfg = training_config(cfg, Task::ThreeClass);
    const auto cnn_init = cnn_init_range(cfg.get<std::string>("cnn_init"));
    const auto data = prepare_iris(cfg, cfg.get<bool>("minmax"));
    json summary = {{"seed", tcfg.seed},  {"fd_step", tcfg.fd_step}, {"epochs", tcfg.epochs},
                    {"repeats", repeats}, {"iris_checksum", data.checksum}, {"models", json::object()}};
    for (const auto& family : models) {
        const auto o = run_iris_repeats(family, data, tcfg, repeats, cnn_init);
        for (std::size_t r = 0; r < o.traces.size(); ++r) {
            write_trace(out / ("trace_" + family + "_r" + std::to_string(r) + ".csv"), o.traces[r], cfg.hash());
        }
        const auto agg = aggregate(o.traces);
        CsvWriter w(out / ("aggregate_" + family + ".csv"), cfg.hash(), "epoch,mean_loss,var_loss,mean_acc,var_acc");
        for (const auto& a : agg) {
            w.row({std::to_string(a.epoch), fmt(a.mean_loss), fmt(a.var_loss), fmt(a.mean_acc), fmt(a.var_acc)});
        }
        json reach = json::array();
        json finals = json::array();
        for (const auto& t : o.traces) {
            const auto e = t.epochs_to_reach(0.05);
            reach.push_back(e ? json(*e) : json(nullptr));
            finals.push_back(json_number(t.records.back().test_accuracy));
        }
        json entry = {{"topology", o.topology},
                      {"param_count", o.param_count},
                      {"claimed_param_count", 28},
                      {"param_count_discrepancy", o.param_count != 28},
                      {"final_mean_loss", json_number(agg.back().mean_loss)},
                      {"final_mean_accuracy", json_number(agg.back().mean_acc)},
                      {"final_accuracies", finals},
                      {"epochs_to_loss_0.05", reach}};
        summary["models"][family] = entry;
        log << family << ": mean final accuracy " << fmt(agg.back().mean_acc) << ", mean final loss "
            << fmt(agg.back().mean_loss) << "\n";
    }
    write_json(out / "summary.json", summary, cfg.hash());
    return kExitOk;
}

/// Relative ordering of tail averages: mbqcnn >= qcnn >= cnn with mbqcnn > cnn.
inline bool grad_tail_ordering(double mbqcnn, double qcnn, double cnn) {
    return mbqcnn >= qcnn && qcnn >= cnn && mbqcnn > cnn;
}

inline GradStudyResult grad_study_family(const std::string& family, std::span<const EncodedSample> data,
                                         const std::vector<std::size_t>& counts, std::uint64_t seed, double fd_step) {
    if (family == "mbqcnn") {
        return avg_gradient_magnitude(iris_lattice(), data, counts, seed, kAngleInit, fd_step);
    }
    if (family == "qcnn") {
        return avg_gradient_magnitude(QcnnModel{}, data, counts, seed, kAngleInit, fd_step);
    }
    if (family == "cnn") {
        return avg_gradient_magnitude(CnnModel{}, data, counts, seed, kAngleInit, fd_step);
    }
    throw ValidationError("unknown model family '" + family + "'");
}

inline int cmd_grad_study(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    const auto out = prepare_out(cfg);
    const auto counts = cfg.get<std::vector<std::size_t>>("counts");
    const auto families = cfg.get<std::vector<std::string>>("models");
    if (counts.empty()) {
        throw ValidationError("counts must not be empty");
    }
    for (std::size_t i = 1; i < counts.size(); ++i) {
        if (counts[i] <= counts[i - 1]) {
            throw ValidationError("counts must increase");
        }
    }
    const auto data = prepare_iris(cfg, false);
    const auto seed = cfg.get<std::uint64_t>("seed");
    const double h = cfg.get<double>("fd_step");
    json summary = {{"seed", seed}, {"fd_step", h}, {"counts", counts}, {"families", json::object()}};
    std::map<std::string, double> tail;
    for (const auto& f : families) {
        const auto r = grad_study_family(f, data.train, counts, seed, h);
        CsvWriter w(out / ("grad_" + f + ".csv"), cfg.hash(), "n_points,log10_avg_grad");
        for (std::size_t i = 0; i < r.counts.size(); ++i) {
            w.row({std::to_string(r.counts[i]), fmt(r.log10_avg_grad[i])});
        }
        const double last = r.log10_avg_grad.back();
        const double change = r.log10_avg_grad.size() > 1 ? std::abs(last - r.log10_avg_grad[r.log10_avg_grad.size() - 2])
                                                           : std::numeric_limits<double>::infinity();
        tail[f] = last;
        summary["families"][f] = {{"tail_log10_avg_grad", json_number(last)},
                                  {"last_doubling_change", json_number(change)}};
        log << f << ": tail log10 average gradient " << fmt(last) << "\n";
    }
    if (tail.count("mbqcnn") && tail.count("qcnn") && tail.count("cnn")) {
        summary["tail_ordering_pass"] = grad_tail_ordering(tail["mbqcnn"], tail["qcnn"], tail["cnn"]);
    }
    write_json(out / "summary.json", summary, cfg.hash());
    return kExitOk;
}

inline int run_command(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    if (cfg.command == "verify-gadgets") {
        return cmd_verify_gadgets(cfg, log);
    }
    if (cfg.command == "haldane-gen") {
        return cmd_haldane_gen(cfg, log);
    }
    if (cfg.command == "haldane-train") {
        return cmd_haldane_train(cfg, log);
    }
    if (cfg.command == "phase-map") {
        return cmd_phase_map(cfg, log);
    }
    if (cfg.command == "iris-train") {
        return cmd_iris(cfg, log);
    }
    if (cfg.command == "grad-study") {
        return cmd_grad_study(cfg, log);
    }
    throw ValidationError("unknown command '" + cfg.command + "'");
}

/// Runs a command and maps failures onto exit statuses.
inline int run_guarded(const ExperimentConfig& cfg, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    try {
        return run_command(cfg, log);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "runtime failure: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace mbqcnn
