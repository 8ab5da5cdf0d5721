// Copyright 2026 The orbit_tomo Authors
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

#ifndef ORBIT_TOMO_EXPERIMENTS_H
#define ORBIT_TOMO_EXPERIMENTS_H

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "orbit_tomo/kicked_top.h"
#include "orbit_tomo/operator_core.h"
#include "orbit_tomo/reconstruction.h"

namespace orbit_tomo {

inline constexpr std::string_view kLibraryVersion = "0.1.0";

enum class ExperimentKind { pure_fidelity_vs_n, mixed_fidelity_vs_d, qkt_states, dkt_states, span_check, reconstruct };
enum class UnitarySource { automatic, haar, qkt, dkt, file };
enum class ObservableKind { automatic, jz, jx, file };
enum class StateMeasure { fubini_study, bures, hilbert_schmidt, file };
enum class PrefixGrid { automatic, every, log, final_only };

std::string_view to_string(ExperimentKind v);
std::string_view to_string(UnitarySource v);
std::string_view to_string(ObservableKind v);
std::string_view to_string(StateMeasure v);
std::string_view to_string(PrefixGrid v);
ExperimentKind parse_experiment_kind(std::string_view s);
UnitarySource parse_unitary_source(std::string_view s);
ObservableKind parse_observable_kind(std::string_view s);
StateMeasure parse_state_measure(std::string_view s);
PrefixGrid parse_prefix_grid(std::string_view s);

/// Thrown for malformed or inconsistent experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::pure_fidelity_vs_n;
  int d = 4;
  UnitarySource unitary = UnitarySource::automatic;
  ObservableKind observable = ObservableKind::automatic;
  StateMeasure measure = StateMeasure::fubini_study;
  int n_states = 50;
  int n_unitaries = 5;
  /// 0 selects the experiment default.
  int record_length = 0;
  double ensemble_size = 1.0;
  double sigma = 0.0;
  uint64_t base_seed = 1;
  std::string output_path;
  PrefixGrid prefix_grid = PrefixGrid::automatic;
  KickedTopParams qkt;
  DoubleKickedTopParams dkt;
  std::string unitary_file;
  std::string observable_file;
  std::string state_file;
  std::string record_file;
  FitOptions fit;
  /// 0 means std::thread::hardware_concurrency().
  int threads = 0;

  double spin() const { return 0.5 * (d - 1); }
};

/// Replaces the desk-scale sample counts with the larger published ones
/// (100 pure states x 10 unitaries, 200 mixed states x 20 unitaries).
void apply_full_scale(ExperimentConfig &config);

/// Throws ConfigError describing the first problem found.
void validate(const ExperimentConfig &config);

void to_json(nlohmann::json &j, const ExperimentConfig &config);
/// Strict: unknown keys are rejected. Missing keys keep their defaults.
ExperimentConfig config_from_json(const nlohmann::json &j, ExperimentConfig base = {});
/// FNV-1a over the canonical JSON dump.
uint64_t config_hash(const ExperimentConfig &config);

UnitarySource resolved_unitary(const ExperimentConfig &config);
ObservableKind resolved_observable(const ExperimentConfig &config);
int resolved_record_length(const ExperimentConfig &config);
std::vector<int> prefix_lengths(const ExperimentConfig &config);
/// Name of the grid actually used ("every", "log" or "final").
std::string_view resolved_grid_name(const ExperimentConfig &config);

ComplexMatrix load_matrix_json(const std::string &path);
ComplexMatrix make_unitary(const ExperimentConfig &config, int unitary_index);
HermitianOperator make_observable(const ExperimentConfig &config);

uint64_t unitary_seed(const ExperimentConfig &config, int unitary_index);
uint64_t state_seed(const ExperimentConfig &config, int trial_index);

struct ExperimentRow {
  std::string experiment;
  std::string family;
  int d = 0;
  int n = 0;
  int unitary_index = 0;
  int state_index = 0;
  double fidelity = 0.0;
  int covariance_rank = 0;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
  uint64_t unitary_seed = 0;
  uint64_t state_seed = 0;
  uint64_t config_hash = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<int> prefix_lengths;
  std::vector<ExperimentRow> rows;
};

ExperimentResult run_pure_experiment(const ExperimentConfig &config);
ExperimentResult run_mixed_experiment(const ExperimentConfig &config);
ExperimentResult run_qkt_experiment(const ExperimentConfig &config);
ExperimentResult run_dkt_experiment(const ExperimentConfig &config);
ExperimentResult run_experiment(const ExperimentConfig &config);

void write_rows_csv(std::ostream &out, const std::vector<ExperimentRow> &rows);
nlohmann::json experiment_metadata(const ExperimentResult &result, double wall_time_seconds);

/// Two-level average: mean over states for each unitary, then mean over
/// unitaries. Rows with a NaN fidelity (failed fit) are skipped. An empty
/// family matches every row.
double mean_fidelity(const std::vector<ExperimentRow> &rows, int n, std::string_view family = {});
std::map<int, double> per_unitary_mean_fidelity(const std::vector<ExperimentRow> &rows, int n,
                                                std::string_view family = {});
std::map<int, double> mean_fidelity_curve(const std::vector<ExperimentRow> &rows, std::string_view family = {});
std::vector<std::string> families(const std::vector<ExperimentRow> &rows);

/// Single simulated (or file-driven) reconstruction, as used by the CLI.
struct ReconstructionReport {
  FitResult fit;
  int covariance_rank = 0;
  int record_length = 0;
  std::optional<double> fidelity;
  std::optional<DensityMatrix> truth;
  MeasurementRecord record;
};

ReconstructionReport run_reconstruction(const ExperimentConfig &config);
void to_json(nlohmann::json &j, const FitResult &fit);
nlohmann::json matrix_to_json(const ComplexMatrix &m);

}  // namespace orbit_tomo

#endif  // ORBIT_TOMO_EXPERIMENTS_H
