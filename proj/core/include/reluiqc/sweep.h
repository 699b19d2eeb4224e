#pragma once

/// @file
/// Parameter sweeps over the (a, b) plane: configuration loading, parallel
/// execution of the stability tests, region comparison and file output.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "reluiqc/certify.h"
#include "reluiqc/dynamics.h"

namespace reluiqc {

/// Configuration problems: parse errors carry the line, validation errors
/// name the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Base matrices plus optional (a, b) injection points on Win (0-based
/// row/col; a and b are added to the base entry).
struct ModelSpec {
  Eigen::MatrixXd lambda;
  Eigen::MatrixXd win;
  Eigen::MatrixXd wout;
  std::optional<std::pair<int, int>> a_at;
  std::optional<std::pair<int, int>> b_at;

  /// The built-in six-neuron example (a at row 1 col 3, b at row 3 col 2).
  static ModelSpec Example();
  RnnModel At(double a, double b) const;
};

struct GridSpec {
  double a_min = -2.0, a_max = 2.0;
  int a_steps = 41;
  double b_min = -10.0, b_max = 10.0;
  int b_steps = 41;

  /// Evenly spaced values; a single step yields the minimum.
  std::vector<double> AValues() const;
  std::vector<double> BValues() const;
};

struct OutputSpec {
  std::filesystem::path records_path = "records.csv";
  std::filesystem::path regions_path = "regions.csv";
  std::optional<std::filesystem::path> image_path;
  std::optional<std::filesystem::path> certificates_dir;
};

struct SweepConfig {
  ModelSpec model = ModelSpec::Example();
  GridSpec grid;
  std::vector<TestId> tests;
  CertifyOptions solver;
  OutputSpec output;
  int parallelism = 1;
  std::uint64_t seed = 0;
  /// Fraction of SolverFailure records above which the sweep fails.
  double failure_threshold = 0.05;

  /// Throws ConfigError naming the first invalid key.
  void Validate() const;
};

SweepConfig LoadConfig(const std::filesystem::path& path);
SweepConfig ParseConfig(const std::string& text);

struct SweepRecord {
  double a = 0.0;
  double b = 0.0;
  TestId test = TestId::kSSG;
  OutcomeKind status = OutcomeKind::kSolverFailure;
  bool verified = false;
  std::optional<double> margin;  ///< set iff Feasible
  double solve_ms = 0.0;
  std::string detail;
};

/// Sorts by (a, b, test).
void NormalizeOrder(std::vector<SweepRecord>* records);

/// Runs every configured test at every grid point on `parallelism` workers.
/// Records are appended to config.output.records_path as they complete;
/// the returned list is order-normalized. Feasible certificates are written
/// to certificates_dir when set.
std::vector<SweepRecord> RunSweep(const SweepConfig& config);

enum class RegionClass { kBoth, kOnlyA, kOnlyB, kNeither, kFailure };
std::string to_string(RegionClass cls);

struct RegionPoint {
  double a = 0.0;
  double b = 0.0;
  RegionClass cls = RegionClass::kFailure;
};

struct RegionMap {
  TestId test_a = TestId::kSSG;
  TestId test_b = TestId::kSSG;
  std::vector<RegionPoint> points;

  std::size_t Count(RegionClass cls) const;
};

RegionMap CompareRegions(const std::vector<SweepRecord>& records, TestId test_a, TestId test_b);

/// Test pairs (weaker, stronger) where Feasible(weaker) implies
/// Feasible(stronger).
std::vector<std::pair<TestId, TestId>> GuaranteedInclusions();

struct InclusionAudit {
  std::size_t violations = 0;
  std::size_t excluded_failures = 0;
  std::vector<std::string> messages;
};

/// Checks every guaranteed inclusion pair present in the records.
InclusionAudit AuditInclusions(const std::vector<SweepRecord>& records);

std::string RecordsCsv(const std::vector<SweepRecord>& records);
std::string RegionsCsv(const RegionMap& map);
/// Scatter plot of one or two region maps side by side.
std::string RegionsSvg(const std::vector<RegionMap>& maps);

/// regions.csv -> regions_<A>_vs_<B>.csv
std::filesystem::path RegionPath(const std::filesystem::path& base, const RegionMap& map);

/// Writes records, region maps and (optionally) the SVG. Throws
/// std::runtime_error naming the path on I/O failure.
void EmitOutputs(const std::vector<SweepRecord>& records, const std::vector<RegionMap>& maps,
                 const SweepConfig& config);

}  // namespace reluiqc
