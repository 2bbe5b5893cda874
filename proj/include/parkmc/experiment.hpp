#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "parkmc/errors.hpp"
#include "parkmc/estimators.hpp"
#include "parkmc/lattice.hpp"
#include "parkmc/models.hpp"
#include "parkmc/splitting.hpp"

namespace parkmc {

enum class RunMode { Sample, Oracle, Both };

std::string to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& name);

/// One experiment, read from a flat `key = value` file. List values are
/// comma separated; `#` starts a comment.
struct ExperimentConfig {
  ModelKind model = ModelKind::AdsorptionDesorption;
  AdsorptionDesorptionParams adsorption;
  DiffusionParams diffusion;
  int particles = -1;  ///< diffusion only; -1 means half filling

  int N1 = 8;
  int N2 = 8;
  int interaction_range = 1;

  std::vector<DecompositionKind> decompositions{DecompositionKind::Blocks};
  int decomposition_width = 2;
  std::vector<SchemeKind> schemes{SchemeKind::Lie, SchemeKind::Strang};
  bool swap_groups = false;
  std::vector<double> dt{0.02, 0.04, 0.08, 0.16};

  long n_steps = 10000;
  long burn_in = -1;  ///< -1 selects ten percent of n_steps
  int batches = 32;
  std::uint64_t seed = 1;
  std::string initial = "full";  ///< full, empty or random
  RunMode mode = RunMode::Sample;
  std::string output = "results";
  int threads = 1;

  long effective_burn_in() const { return burn_in < 0 ? default_burn_in(n_steps) : burn_in; }
  int effective_particles() const { return particles < 0 ? N1 * N2 / 2 : particles; }
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
/// Canonical `key = value` text; parsing it yields the same configuration.
std::string serialize_config(const ExperimentConfig& config);
void validate(const ExperimentConfig& config);

std::uint64_t fnv1a(const std::string& text);

RateModel make_model(const ExperimentConfig& config);
SpinConfiguration make_initial(const ExperimentConfig& config);

/// One CSV row: a (scheme, decomposition, dt) cell.
struct ResultRow {
  SchemeKind scheme = SchemeKind::Lie;
  DecompositionKind decomposition = DecompositionKind::Blocks;
  int width = 0;
  int N1 = 0;
  int N2 = 0;
  double dt = 0.0;
  int p = 0;
  std::optional<EprReport> sampled;  ///< per-site normalized
  std::optional<double> epr_oracle;
  std::optional<double> rer_oracle;
  std::optional<double> disc_oracle;
  long n_samples = 0;
  std::uint64_t seed = 0;
};

std::string csv_header();
std::string format_row(const ResultRow& row);

struct FitRecord {
  SchemeKind scheme;
  DecompositionKind decomposition;
  bool fitted = false;
  double slope = 0.0;
};

/// Raised when a cell fails; rows of the cells before it are kept.
class CellFailure : public Error {
 public:
  CellFailure(std::string inner_kind, std::string cell, const std::string& message)
      : Error(std::move(inner_kind), message), cell_(std::move(cell)) {}
  const std::string& cell() const noexcept { return cell_; }

 private:
  std::string cell_;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<FitRecord> fits;
  std::optional<CellFailure> failure;
};

/// Runs every cell, `threads` at a time; rows come back in grid order
/// (scheme, decomposition, dt) whatever the thread count.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct RunOutput {
  std::string csv_path;
  std::string manifest_path;
  ExperimentResult result;
};

/// Runs the experiment and writes results.csv and manifest.json into
/// `out_dir`. Rows finished before a failure are written before the
/// CellFailure is rethrown.
RunOutput run_and_write(const ExperimentConfig& config, const std::string& out_dir);

}  // namespace parkmc
