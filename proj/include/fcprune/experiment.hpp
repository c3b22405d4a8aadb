#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "fcprune/bounds.hpp"
#include "fcprune/net.hpp"
#include "fcprune/pruner.hpp"
#include "fcprune/trainer.hpp"

namespace fcprune {

/// CLI exit codes: 0 success, 2 usage/schema, 3 numerical abort, 4 I/O.
enum class ExitCode : int { ok = 0, usage = 2, numeric = 3, io = 4 };

/// Experiment kinds dispatched by `run`. Each writes its artifacts plus a
/// run manifest (config, seed, input content hashes, canonical output
/// hashes, version) into the output directory, so a finished run is
/// reproducible byte-for-byte from the manifest.
struct ExperimentSpec {
    std::string kind; // train | synth | capture | prune | eval | retrain |
                      // bound | sweep-sparsity | sweep-layer | sweep-pca
    nlohmann::json config;
    std::string out_dir;
    std::string base_dir; // relative paths inside config resolve against this
    std::optional<std::uint64_t> seed_override;
};

void run(const ExperimentSpec& spec);

// --- serialization helpers shared by the CLI and the tests ---------------

nlohmann::ordered_json prune_result_json(const PruneResult& result, const std::string& method,
                                         std::size_t layer);
nlohmann::ordered_json bound_report_json(const BoundReport& rep);

/// Re-derives the bound value A * effective_margin^(-k/2) + B from a
/// serialized report's ingredients alone.
std::optional<double> ge_bound_from_ingredients(const nlohmann::json& report);

std::string training_trace_csv(const std::vector<EpochStats>& trace);

/// Bytes of an artifact with volatile fields (wall-time measurements)
/// canonicalized to zero, so determinism checks and manifest hashes are
/// stable across reruns. Non-timing artifacts pass through unchanged.
std::string canonical_artifact_bytes(const std::string& path);

// --- config parsing helpers ----------------------------------------------

TrainConfig train_config_from_json(const nlohmann::json& j);
FetaConfig feta_config_from_json(const nlohmann::json& j);
ThresholdSpec threshold_spec_from_json(const nlohmann::json& j);
ManifoldParams manifold_params_from_json(const nlohmann::json& j);

/// Loads `{"x": ..., "y": ...}` FTA1 pairs or `{"csv": ...}` label-first CSV.
LabeledSet dataset_from_json(const nlohmann::json& j, const std::string& base_dir);

} // namespace fcprune
