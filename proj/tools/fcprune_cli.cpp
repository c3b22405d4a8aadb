// fcprune: train / capture / prune / evaluate / bound pipeline driver.
//
// Every subcommand reads a JSON config (--config), writes its artifacts into
// --out and drops a run_manifest.json beside them. Exit codes: 0 success,
// 2 usage or schema error, 3 numerical abort, 4 I/O error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fcprune/csv.hpp"
#include "fcprune/errors.hpp"
#include "fcprune/experiment.hpp"

namespace {

using nlohmann::json;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> method;
    std::optional<double> sparsity;
    std::optional<std::size_t> layer;
    std::optional<std::string> model;
    std::optional<std::string> data_x;
    std::optional<std::string> data_y;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
    auto* c = cmd->add_option("--config", args.config_path, "JSON config file");
    if (config_required) c->required();
    cmd->add_option("--out", args.out_dir, "output directory")->required();
    cmd->add_option("--seed", args.seed, "seed override");
    cmd->add_option("--method", args.method, "prune method: threshold | feta");
    cmd->add_option("--sparsity", args.sparsity, "target sparsity in [0,1)");
    cmd->add_option("--layer", args.layer, "layer index");
    cmd->add_option("--model", args.model, "model manifest path");
    cmd->add_option("--data", args.data_x, "dataset features (FTA1) or CSV");
    cmd->add_option("--labels", args.data_y, "dataset labels (FTA1)");
}

fcprune::ExperimentSpec build_spec(const std::string& kind, const CommonArgs& args) {
    fcprune::ExperimentSpec spec;
    spec.kind = kind;
    spec.out_dir = args.out_dir;
    spec.seed_override = args.seed;
    if (!args.config_path.empty()) {
        try {
            spec.config = json::parse(fcprune::read_text_file(args.config_path));
        } catch (const json::exception& e) {
            throw std::invalid_argument("config: parse error in " + args.config_path + ": " + e.what());
        }
        spec.base_dir = std::filesystem::path(args.config_path).parent_path().string();
    } else {
        spec.config = json::object();
    }
    // Flag overrides beat config fields.
    if (args.method) spec.config["method"] = *args.method;
    if (args.layer) spec.config["layer"] = *args.layer;
    if (args.sparsity) {
        if (kind == "prune") spec.config["threshold"] = {{"mode", "sparsity"}, {"value", *args.sparsity}};
        else spec.config["sparsity"] = *args.sparsity;
    }
    if (args.model) {
        spec.config["model"] = std::filesystem::absolute(*args.model).string();
    }
    if (args.data_x) {
        json data;
        const std::string x = std::filesystem::absolute(*args.data_x).string();
        if (x.size() > 4 && x.substr(x.size() - 4) == ".csv") data["csv"] = x;
        else data["x"] = x;
        if (args.data_y) data["y"] = std::filesystem::absolute(*args.data_y).string();
        spec.config["data"] = data;
    }
    return spec;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fully connected layer pruning toolkit"};
    app.require_subcommand(1);

    const std::vector<std::string> kinds = {"train",  "synth", "capture",        "prune",
                                            "eval",   "retrain", "bound",        "sweep-sparsity",
                                            "sweep-layer", "sweep-pca"};
    std::map<std::string, CommonArgs> args_by_kind;
    for (const std::string& kind : kinds) {
        auto* cmd = app.add_subcommand(kind);
        add_common(cmd, args_by_kind[kind], kind != "eval" && kind != "capture");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(fcprune::ExitCode::usage);
    }

    const std::string kind = app.get_subcommands().front()->get_name();
    try {
        fcprune::run(build_spec(kind, args_by_kind[kind]));
        return static_cast<int>(fcprune::ExitCode::ok);
    } catch (const fcprune::io_error& e) {
        std::cerr << "error: E_IO: " << e.what() << "\n";
        return static_cast<int>(fcprune::ExitCode::io);
    } catch (const fcprune::numeric_error& e) {
        std::cerr << "error: E_NUMERIC: " << e.what() << "\n";
        return static_cast<int>(fcprune::ExitCode::numeric);
    } catch (const json::exception& e) {
        std::cerr << "error: E_SCHEMA: " << e.what() << "\n";
        return static_cast<int>(fcprune::ExitCode::usage);
    } catch (const std::logic_error& e) { // invalid_argument, out_of_range
        std::cerr << "error: E_SCHEMA: " << e.what() << "\n";
        return static_cast<int>(fcprune::ExitCode::usage);
    } catch (const std::exception& e) {
        std::cerr << "error: E_NUMERIC: " << e.what() << "\n";
        return static_cast<int>(fcprune::ExitCode::numeric);
    }
}
