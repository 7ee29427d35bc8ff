#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rglue/dp_init.hpp"
#include "rglue/metrics.hpp"
#include "rglue/phantom.hpp"
#include "rglue/solver.hpp"
#include "rglue/strain.hpp"

namespace rglue::pipeline {

struct EstimateResult {
  DisplacementField initial;  // DP output
  solver::RefineResult refined;
  StrainImage strain;
};

/// DP initialization, refinement, then least-squares strain.
EstimateResult estimate(const RFFrame& I1, const RFFrame& I2, const dp::DPParams& init,
                        const solver::SolverParams& params, int strain_window = 3,
                        strain::Axis axis = strain::Axis::axial);

// ---------------------------------------------------------------------------
// Batch driver

enum ExitCode : int {
  kSuccess = 0,
  kHardFailure = 1,
  kConfigError = 2,
  kNonConvergence = 3,
  kIoError = 4,
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "[section]" headers followed by "key = value" lines; '#' starts a comment.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  /// Throws io::IoError when the file cannot be read.
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has_section(const std::string& section) const;
  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

struct Corruption {
  std::optional<double> psnr_db;  // Gaussian noise on both frames
  std::optional<phantom::OutlierRegion> outlier_region;
  double outlier_factor = 3.0;
  std::vector<int> outlier_lines;
  double line_fraction = 0.3;
  std::optional<std::uint64_t> noise_seed;

  bool any() const { return psnr_db || outlier_region || !outlier_lines.empty(); }
};

struct InitConfig {
  std::optional<int> axial_range;
  std::optional<int> lateral_range;
  std::optional<double> smoothness_weight;

  dp::DPParams resolve(const Grid& I1) const;
};

struct StrainConfig {
  int window = 3;
  strain::Axis axis = strain::Axis::axial;
  double pgm_lo = 0.0;
  double pgm_hi = 0.1;
};

struct EvalConfig {
  std::optional<std::filesystem::path> truth;     // strain CSV
  std::optional<std::filesystem::path> estimate;  // defaults to <output>/strain.csv
  std::optional<metrics::Window> background;
  std::optional<metrics::Window> target;
  std::vector<metrics::Window> targets;
  std::vector<metrics::Window> backgrounds;
  int bins = 20;
  double hist_lo = 0.0;
  double hist_hi = 0.0;
};

struct RunConfig {
  std::optional<phantom::PhantomSpec> phantom;
  std::optional<std::pair<std::filesystem::path, std::filesystem::path>> frames;
  Corruption corruption;
  InitConfig init;
  solver::SolverParams solver;
  bool dp_only = false;  // method "dp": integer DP field, no refinement
  StrainConfig strain;
  EvalConfig eval;
  std::filesystem::path output_dir = "rglue_out";
  std::uint64_t seed = 1;
  std::string source_text;  // config as loaded, echoed into manifests

  /// Relative paths resolve against `base_dir`.
  static RunConfig parse(const std::string& text, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);

  void set_seed(std::uint64_t s);
  /// "glue", "rglue" or "dp".
  void set_method(const std::string& method);
};

struct Inputs {
  RFFrame pre;
  RFFrame post;
  std::optional<phantom::GroundTruth> truth;
};

/// Frames from disk or from the phantom spec, with corruption applied to the
/// post-deformation frame (noise goes on both).
Inputs prepare_inputs(const RunConfig& config);

int cmd_synth(const RunConfig& config);
int cmd_estimate(const RunConfig& config);
int cmd_eval(const RunConfig& config);
int cmd_compare(const RunConfig& config);

/// Runs `fn`, mapping exceptions onto exit codes with a diagnostic on stderr.
int guarded(const std::string& what, int (*fn)(const RunConfig&), const RunConfig& config);

}  // namespace rglue::pipeline
