#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hdpmpm/analysis.hpp"
#include "hdpmpm/geweke.hpp"
#include "hdpmpm/lab.hpp"
#include "hdpmpm/sampler.hpp"

namespace hdpmpm {

std::string software_version();

/// ISO-8601 UTC timestamp for manifests.
std::string current_timestamp();

// ---------------------------------------------------------------------------
// Data dictionary and CSV data files. Formats are documented in FORMATS.md.

struct VariableSpec {
  std::string name;
  int levels = 0;
  std::vector<std::string> labels;          // optional; size == levels when present
  std::vector<std::string> missing_tokens;  // per-variable additions
};

struct DataDictionary {
  std::vector<VariableSpec> variables;
  std::vector<std::string> missing_tokens{"", "NA", "."};
};

DataDictionary load_dictionary(const std::string& path);
void save_dictionary(const DataDictionary& dict, const std::string& path);

/// Dictionary derived from a CSV alone: names from the header, level counts
/// from the largest observed code, default missing tokens.
DataDictionary infer_dictionary(const std::string& csv_path);

Dataset load_csv(const std::string& path, const DataDictionary& dict);
void save_csv(const Dataset& ds, const std::string& path);

// ---------------------------------------------------------------------------
// Chain configuration and run manifest.

struct StoreFlags {
  bool pi = false;
  bool z = false;
};

struct FitConfig {
  Hyperparameters hp;
  ChainConfig chain;
  StoreFlags store;
};

FitConfig load_fit_config(const std::string& path);

struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
  std::string started_at;
  std::string finished_at;
  std::string dataset_fingerprint;
  std::vector<long> saturation_events;
  int k_used = 0;
  int restarts = 0;
};

std::string fingerprint_dataset(const Dataset& ds);
std::string hash_config(const Hyperparameters& hp, const ChainConfig& cfg);

/// Identity hash over (config, seed, dataset); timestamps and outcomes do not
/// enter it.
std::string manifest_hash(const RunManifest& manifest);

void save_manifest(const RunManifest& manifest, const std::string& path);
RunManifest load_manifest(const std::string& path);

// ---------------------------------------------------------------------------
// Posterior draw persistence: newline-delimited JSON, one record per stored
// draw, preceded by a header record. Doubles round-trip exactly.

void save_draws(const PosteriorDraws& draws, const std::string& path, StoreFlags flags,
                const std::string& manifest_hash);
PosteriorDraws load_draws(const std::string& path);

// ---------------------------------------------------------------------------
// Simulation and masking specs plus their sidecars.

GenSpec load_genspec(const std::string& path);
MarSpec load_marspec(const std::string& path);

void save_truth(const SyntheticTruth& truth, const std::string& path);

struct LoadedTruth {
  std::vector<std::vector<VectorXd>> profiles;
  VectorXd beta;
};
LoadedTruth load_truth(const std::string& path);

/// Records the pre-mask values of every newly masked cell so the original
/// dataset can be reproduced bit-exactly.
void save_mask_sidecar(const Dataset& original, const Dataset& masked, const std::string& path);
Dataset unmask_with_sidecar(const Dataset& masked, const std::string& path);

// ---------------------------------------------------------------------------
// Report writers used by the summarize/validate subcommands.

void write_profiles_csv(const ProfileSummary& summary, const std::vector<int>& profiles,
                        const std::vector<std::string>& variable_names, const std::string& path);
void write_functionals_csv(const FunctionalReport& report,
                           const std::vector<std::string>& variable_names,
                           const std::string& path);
void write_membership_csv(const MembershipReport& report, const std::string& path);
void write_summary_json(const ProfileSummary& summary, const std::vector<int>& dominant,
                        const FunctionalReport& functionals, const MembershipReport* membership,
                        const std::string& path);
void write_trace_csvs(const PosteriorDraws& draws, const std::string& directory,
                      const std::vector<std::pair<int, int>>& marginals);
void write_joint_report_json(const JointTestReport& report, const std::string& path);

/// Write-temp-then-rename; a crashed writer never leaves a half-written file
/// at `path`.
void atomic_write(const std::string& path, const std::string& contents);

}  // namespace hdpmpm
