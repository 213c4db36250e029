#pragma once

// Monte Carlo convergence studies: configuration, orchestration and
// persisted results (CSV rows plus a JSON summary).

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fracsim/error.hpp"
#include "fracsim/fem.hpp"
#include "fracsim/norms.hpp"

namespace fracsim {

inline constexpr int kResultsSchema = 1;
inline constexpr std::string_view kCsvColumns =
    "schema,method,alpha,gamma,p,dim,samples,seed,error,empirical_rate,theoretical_rate,wall_ms";

/// Configuration document error; the message starts with the offending key path.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct StudyConfig {
  Method method = Method::spectral;
  double alpha = 0.35;
  std::vector<double> gammas;
  double p = 2.0;
  double T = 1.0;
  double dt = 0.002;
  std::vector<std::size_t> dims;
  std::size_t ref_dim = 1024;
  std::size_t samples = 64;
  std::uint64_t seed = 0;
  std::size_t measurement_stride = 1;
  std::string output_path;

  bool record_wall_time = false;  // wall_ms is 0 otherwise, keeping reruns byte-identical
  std::string cache_dir;          // spectral covariance factor cache; empty disables
  std::string trace_dir;          // FEM reference nodal traces; empty disables
  InitialDatum initial = InitialDatum::sine_projection;  // FEM only
  double covariance_rel_tol = 1e-8;
  std::size_t memory_budget_mb = 1024;

  void validate() const;
  TimeGrid grid() const;
};

/// Desk-scale defaults for a method.
StudyConfig default_config(Method method);

/// Parses a JSON document. Missing keys take the desk defaults of the method;
/// unknown keys are rejected. The method comes from the document, else from
/// `fallback`; a conflict between the two is an error.
StudyConfig parse_config(std::string_view text, std::optional<Method> fallback = std::nullopt);
StudyConfig load_config(const std::filesystem::path& path,
                        std::optional<Method> fallback = std::nullopt);

struct RunOptions {
  std::size_t threads = 0;  // 0 = hardware concurrency
  std::filesystem::path out_dir;  // overrides the directory of output_path when set
  std::ostream* log = nullptr;
};

struct StudyResult {
  StudyConfig config;
  std::vector<std::vector<double>> errors;  // [gamma][dim]
  std::vector<double> empirical_rates;      // per gamma
  std::vector<double> theoretical_rates;    // per gamma
  std::vector<std::string> warnings;
  std::filesystem::path csv_path;
  std::filesystem::path summary_path;
  double wall_seconds = 0.0;
};

/// Per-sample norms [sample][gamma][dim] of the coupled error paths.
using SampleNorms = std::vector<std::vector<std::vector<double>>>;

SampleNorms spectral_sample_norms(const StudyConfig& cfg, std::size_t threads);
SampleNorms fem_sample_norms(const StudyConfig& cfg, std::size_t threads);

StudyResult run_study(const StudyConfig& cfg, const RunOptions& opts = {});

/// Raised for failures inside a study; carries the (sample, dim, mode) context.
class StudyError : public std::runtime_error {
 public:
  StudyError(const std::string& what, bool numerical)
      : std::runtime_error(what), numerical_(numerical) {}
  bool numerical() const noexcept { return numerical_; }

 private:
  bool numerical_;
};

}  // namespace fracsim
