#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "fcprune/csv.hpp"
#include "fcprune/experiment.hpp"
#include "fcprune/hash.hpp"
#include "fcprune/model_io.hpp"
#include "fcprune/synth.hpp"
#include "fcprune/trainer.hpp"

using namespace fcprune;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const char* name) {
    const fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

} // namespace

TEST_CASE("canonical bytes zero wall_time in json artifacts") {
    const std::string dir = temp_dir("fcprune_canon");
    const std::string path = (fs::path(dir) / "result.json").string();
    write_text_file(path, "{\"sparsity\": 0.9, \"wall_time\": 1.234}\n");
    const std::string canon = canonical_artifact_bytes(path);
    const json j = json::parse(canon);
    CHECK(j["wall_time"] == 0.0);
    CHECK(j["sparsity"] == 0.9);

    // Two files differing only in wall_time hash identically.
    const std::string path2 = (fs::path(dir) / "result2.json").string();
    write_text_file(path2, "{\"sparsity\": 0.9, \"wall_time\": 9.876}\n");
    const std::string canon2 = canonical_artifact_bytes(path2);
    CHECK(fnv1a64_str(canon) == fnv1a64_str(canon2));
    fs::remove_all(dir);
}

TEST_CASE("canonical bytes zero the wall_time column of csv artifacts") {
    const std::string dir = temp_dir("fcprune_canon_csv");
    const std::string path = (fs::path(dir) / "sweep.csv").string();
    write_text_file(path, "method,sparsity,accuracy,layer_error,wall_time\n"
                          "threshold,0.9,0.8,1.5,0.123\n");
    const std::string canon = canonical_artifact_bytes(path);
    CHECK(canon == "method,sparsity,accuracy,layer_error,wall_time\n"
                   "threshold,0.9,0.8,1.5,0\n");
    fs::remove_all(dir);
}

TEST_CASE("non-timing artifacts pass through canonicalization unchanged") {
    const std::string dir = temp_dir("fcprune_canon_raw");
    const std::string path = (fs::path(dir) / "data.bin").string();
    write_text_file(path, "\x01\x02\x03 raw");
    CHECK(canonical_artifact_bytes(path) == "\x01\x02\x03 raw");
    fs::remove_all(dir);
}

TEST_CASE("config parsers apply defaults and validate") {
    const json empty = json::object();
    const TrainConfig tc = train_config_from_json(empty);
    CHECK(tc.lr == 0.01);
    CHECK(tc.momentum == 0.9);
    CHECK(tc.decay == 0.95);
    CHECK(tc.batch == 32);
    CHECK(tc.epochs == 30);

    const FetaConfig fc = feta_config_from_json(empty);
    CHECK(fc.theta == 20.0);
    CHECK(fc.outer_iters == 8);
    CHECK(fc.stages == 3);
    CHECK(fc.batch == 200);
    CHECK(fc.eta == 0.001);
    CHECK(fc.beta == 0.95);
    CHECK_FALSE(fc.target_sparsity.has_value());

    CHECK_THROWS_AS(train_config_from_json(json{{"lr", -1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(feta_config_from_json(json{{"beta", 1.5}}), std::invalid_argument);
    CHECK_THROWS_AS(threshold_spec_from_json(json{{"mode", "nope"}, {"value", 0.5}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(manifold_params_from_json(json{{"delta", 2.0}}), std::invalid_argument);
}

TEST_CASE("training trace csv has the documented columns") {
    std::vector<EpochStats> trace = {{0, 0.01, 1.5, 0.5}, {1, 0.0095, 1.2, 0.75}};
    const std::string csv = training_trace_csv(trace);
    CHECK(csv == "epoch,lr,mean_loss,train_acc\n0,0.01,1.5,0.5\n1,0.0095,1.2,0.75\n");
}

TEST_CASE("run rejects unknown kinds and missing out dir") {
    ExperimentSpec spec;
    spec.kind = "frobnicate";
    spec.out_dir = temp_dir("fcprune_badkind");
    CHECK_THROWS_AS(run(spec), std::invalid_argument);
    spec.kind = "synth";
    spec.out_dir = "";
    CHECK_THROWS_AS(run(spec), std::invalid_argument);
    fs::remove_all(temp_dir("fcprune_badkind"));
}

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

// One small trained model on synthetic data, saved to disk for the sweeps.
struct SweepFixture {
    std::string dir;
    json data_ref;
    json test_ref;
    double baseline_accuracy = 0.0;
};

SweepFixture make_sweep_fixture(const char* name) {
    SweepFixture fx;
    fx.dir = temp_dir(name);

    ExperimentSpec synth;
    synth.kind = "synth";
    synth.out_dir = fx.dir + "/train_data";
    synth.config = {{"n_ambient", 16}, {"k_intrinsic", 4}, {"n_classes", 3},
                    {"m", 300},        {"noise", 0.15},    {"seed", 31}};
    run(synth);
    ExperimentSpec synth_test = synth;
    synth_test.out_dir = fx.dir + "/test_data";
    synth_test.config["seed"] = 32;
    run(synth_test);
    fx.data_ref = {{"x", fx.dir + "/train_data/X.fta1"}, {"y", fx.dir + "/train_data/y.fta1"}};
    fx.test_ref = {{"x", fx.dir + "/test_data/X.fta1"}, {"y", fx.dir + "/test_data/y.fta1"}};

    ExperimentSpec tr;
    tr.kind = "train";
    tr.out_dir = fx.dir + "/model";
    tr.config = {{"data", fx.data_ref},
                 {"arch", {{"hidden", {10, 8}}, {"bias", true}, {"n_classes", 3}}},
                 {"train", {{"epochs", 10}, {"seed", 4}}}};
    run(tr);

    ExperimentSpec ev;
    ev.kind = "eval";
    ev.out_dir = fx.dir + "/eval";
    ev.config = {{"model", fx.dir + "/model/model.json"}, {"data", fx.test_ref}};
    run(ev);
    fx.baseline_accuracy =
        json::parse(read_text_file(fx.dir + "/eval/eval.json"))["accuracy"].get<double>();
    return fx;
}

} // namespace

TEST_CASE("sweep-sparsity: row shape, baseline row, and csv columns") {
    const SweepFixture fx = make_sweep_fixture("fcprune_sweep_sp");
    ExperimentSpec spec;
    spec.kind = "sweep-sparsity";
    spec.out_dir = fx.dir + "/sweep";
    spec.config = {{"model", fx.dir + "/model/model.json"},
                   {"data", fx.data_ref},
                   {"test", fx.test_ref},
                   {"layer", 0},
                   {"methods", {"threshold", "feta"}},
                   {"sparsities", {0.0, 0.5, 0.9}},
                   {"feta", {{"outer_iters", 3}, {"batch", 100}, {"seed", 8}}}};
    run(spec);

    const auto rows = parse_csv(read_text_file(fx.dir + "/sweep/sweep_sparsity.csv"));
    REQUIRE(rows.size() == 1 + 2 * 3); // header + methods x sparsities
    CHECK(rows[0] == std::vector<std::string>{"method", "sparsity", "accuracy", "layer_error",
                                              "wall_time"});
    // Sparsity-0 rows reproduce the baseline accuracy for both methods.
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r][1] == "0") {
            CHECK(std::stod(rows[r][2]) == fx.baseline_accuracy);
            CHECK(std::stod(rows[r][3]) == 0.0);
        }
    }
    fs::remove_all(fx.dir);
}

TEST_CASE("sweep-layer: figure-3 style table shape and headers") {
    const SweepFixture fx = make_sweep_fixture("fcprune_sweep_ly");
    ExperimentSpec spec;
    spec.kind = "sweep-layer";
    spec.out_dir = fx.dir + "/sweep";
    spec.config = {{"model", fx.dir + "/model/model.json"},
                   {"data", fx.data_ref},
                   {"test", fx.test_ref},
                   {"sparsities", {0.0, 0.8}},
                   {"method", "threshold"},
                   {"manifold", {{"c_m", 1.0}, {"k", 4}, {"delta", 0.05}, {"m", 300}, {"n_y", 3}}}};
    run(spec);

    const auto rows = parse_csv(read_text_file(fx.dir + "/sweep/sweep_layer.csv"));
    REQUIRE(rows.size() == 1 + 2 * 2); // header + relu layers x sparsities
    CHECK(rows[0] == std::vector<std::string>{"layer", "sparsity", "method", "accuracy", "margin",
                                              "penalty", "ge_bound", "flags"});
    CHECK(rows[1][0] == "0");
    CHECK(rows[3][0] == "1");
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r][1] == "0") {
            CHECK(std::stod(rows[r][3]) == fx.baseline_accuracy);
            CHECK(std::stod(rows[r][5]) == 0.0); // no perturbation, no penalty
        }
        CHECK(!rows[r][7].empty()); // hypothesis flag is always reported
    }
    fs::remove_all(fx.dir);
}

TEST_CASE("sweep-pca: repeats=1 gives zero std; full-rank matches the raw baseline") {
    const std::string dir = temp_dir("fcprune_sweep_pca1");
    ExperimentSpec spec;
    spec.kind = "sweep-pca";
    spec.out_dir = dir + "/sweep";
    spec.config = {{"synth", {{"n_ambient", 12}, {"k_intrinsic", 3}, {"n_classes", 3},
                              {"m", 400}, {"noise", 0.2}, {"seed", 21}}},
                   {"test_fraction", 0.25},
                   {"k_values", {12}},
                   {"sparsities", {0.0, 0.9}},
                   {"repeats", 1},
                   {"prune_layer", 0},
                   {"arch", {{"hidden", {10}}, {"bias", true}, {"n_classes", 3}}},
                   {"train", {{"epochs", 10}}},
                   {"seed", 13}};
    run(spec);
    const auto rows = parse_csv(read_text_file(dir + "/sweep/sweep_pca.csv"));
    REQUIRE(rows.size() == 1 + 2);
    CHECK(rows[0] == std::vector<std::string>{"k", "sparsity", "mean_accuracy", "std_accuracy"});
    for (std::size_t r = 1; r < rows.size(); ++r) CHECK(rows[r][3] == "0"); // repeats=1

    // k = ambient dimension is an identity projection: the sparsity-0 cell
    // must sit within seed noise of training on the raw split.
    const SynthSpec ss{12, 3, 3, 400, 0.2, 21};
    const LabeledSet full = make_synthetic(ss);
    std::vector<std::size_t> tr(300), te(100);
    for (std::size_t i = 0; i < 300; ++i) tr[i] = i;
    for (std::size_t i = 0; i < 100; ++i) te[i] = 300 + i;
    LabeledSet train_set{gather_cols(full.X, tr), {full.y.begin(), full.y.begin() + 300}};
    LabeledSet test_set{gather_cols(full.X, te), {full.y.begin() + 300, full.y.end()}};
    TrainConfig tc = train_config_from_json(json{{"epochs", 10}});
    tc.seed = 13;
    const DenseNet raw = train(init_net(12, {10}, 3, true, tc.seed), train_set, tc).net;
    const double raw_acc = accuracy(raw, test_set);
    CHECK(std::abs(std::stod(rows[1][2]) - raw_acc) <= 0.05);
    fs::remove_all(dir);
}

TEST_CASE("sweep-pca: lower projection rank keeps more accuracy at 90% sparsity") {
    // Ten repeats per cell; data of true intrinsic dimension 2 projected to
    // k=2 vs k=ambient. The drop under first-layer pruning must be smaller
    // for the low-rank projection, on average.
    const std::string dir = temp_dir("fcprune_sweep_pca2");
    ExperimentSpec spec;
    spec.kind = "sweep-pca";
    spec.out_dir = dir + "/sweep";
    spec.config = {{"synth", {{"n_ambient", 32}, {"k_intrinsic", 2}, {"n_classes", 6},
                              {"m", 1800}, {"noise", 0.6}, {"seed", 40}}},
                   {"test_fraction", 0.3333},
                   {"k_values", {2, 32}},
                   {"sparsities", {0.0, 0.9}},
                   {"repeats", 10},
                   {"prune_layer", 0},
                   {"arch", {{"hidden", {48, 24}}, {"bias", true}, {"n_classes", 6}}},
                   {"train", {{"epochs", 25}}},
                   {"seed", 70}};
    run(spec);
    const auto rows = parse_csv(read_text_file(dir + "/sweep/sweep_pca.csv"));
    REQUIRE(rows.size() == 1 + 4);
    const double drop_low = std::stod(rows[1][2]) - std::stod(rows[2][2]);
    const double drop_high = std::stod(rows[3][2]) - std::stod(rows[4][2]);
    CHECK(drop_low < drop_high);
    fs::remove_all(dir);
}
