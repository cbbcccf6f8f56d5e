#pragma once

// JSON experiment configs and the CSV / JSON / JSON-lines outputs.
//
// {
//   "schema_version": 1,
//   "name": "alg1_pareto",
//   "policy": {"id": "alg1", "alpha": 0.7, "clip_scale": 1.0},
//   "heavy_tail": {"epsilon": 1.5, "sigma": 1.0},
//   "environment": {
//     "regime": "stochastic_mab" | "stochastic_linear" | "adversarial_script",
//     "means": [...],                                  stochastic_mab
//     "features": [[...], ...] | "features_csv": path, any regime
//     "features_header": false,
//     "theta": [...],                                  stochastic_linear
//     "script": [[...], ...] | path,                   adversarial_script
//     "generator": {"kind": "alternating", "arms": 5, "base": 0.3,
//                   "kappa": 1.0, "block": 64},
//     "corruption": path | [{"t":..,"arm":..,"shift":..}, ...]
//                   | {"generator": "front_loaded", "arm": 0, "shift": 0.4},
//     "budget": 50,
//     "noise": {"kind": "pareto" | "student_t" | "bounded", "shape": 3.0, "scale": 0.2}
//   },
//   "horizon": 10000, "repetitions": 5, "seed": 1, "checkpoints": [...],
//   "monitors": {"invariants": true, "entropy": true}
// }
//
// Relative paths resolve against the config file's directory.

#include "htb/harness.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace htb {

inline constexpr int kSchemaVersion = 1;

struct LoadedConfig {
    ExperimentConfig config;
    /// The document as written.
    nlohmann::json source;
};

/// Throws Error(Config) with the offending field path or the line and column
/// of a syntax error; Io when the file cannot be read.
LoadedConfig load_config(const std::string& path);
LoadedConfig parse_config_text(const std::string& text, const std::string& base_dir, const std::string& origin);
ExperimentConfig parse_config(const nlohmann::json& doc, const std::string& base_dir);

/// Self-contained form: file-based inputs inlined. parse_config inverts it.
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Shortest round-trip decimal form.
std::string format_double(double x);

/// run_id,policy,regime,epsilon,sigma,T_checkpoint,mean_regret,stderr,violations_total
void write_curve_csv(std::ostream& out, const ExperimentConfig& config, const RegretCurve& curve);
/// Same columns with a leading T column and the two ratio columns appended.
void write_sweep_csv(std::ostream& out, const ExperimentConfig& config, std::span<const ScalingRow> rows);

nlohmann::json invariant_summary_json(const InvariantSummary& s);
nlohmann::json curve_summary_json(const LoadedConfig& loaded, const RegretCurve& curve);
nlohmann::json sweep_summary_json(const LoadedConfig& loaded, std::span<const ScalingRow> rows);

/// One trace line per round.
nlohmann::json round_record_json(const RoundRecord& rec, const Vector& means);

}  // namespace htb
