// Command-line front end: certify, sweep, norm, check-cert.
//
// Exit codes: 0 success, 1 config/usage error, 2 failure fraction exceeded,
// 3 inclusion-audit violation, 4 certificate rejected by check-cert.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "reluiqc/certify.h"
#include "reluiqc/dynamics.h"
#include "reluiqc/io.h"
#include "reluiqc/sweep.h"

namespace {

using namespace reluiqc;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kTooManyFailures = 2;
constexpr int kAuditViolation = 3;
constexpr int kRejected = 4;

std::vector<TestId> ParseTests(const std::string& list) {
  std::vector<TestId> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto id = ParseTestId(item);
    if (!id) throw ConfigError("unknown test '" + item + "' (expected SG, I, II, III, IV)");
    out.push_back(*id);
  }
  if (out.empty()) throw ConfigError("--tests: empty test list");
  return out;
}

// Used when no --config is given.
SweepConfig DefaultConfig() {
  SweepConfig cfg;
  cfg.tests = {TestId::kSSG, TestId::kL2pSSG, TestId::kSsgZfPol, TestId::kSsgZfPolCop};
  return cfg;
}

struct Common {
  std::string config;
  std::string tests;
  double a = 0.0;
  double b = 0.0;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;

  SweepConfig Load() const {
    SweepConfig cfg = config.empty() ? DefaultConfig() : LoadConfig(config);
    if (!tests.empty()) cfg.tests = ParseTests(tests);
    if (workers) cfg.parallelism = *workers;
    if (seed) cfg.seed = *seed;
    cfg.Validate();
    return cfg;
  }
};

void AddCommon(CLI::App* cmd, Common* c, bool point) {
  cmd->add_option("--config", c->config, "YAML configuration file");
  cmd->add_option("--tests", c->tests, "comma-separated tests, e.g. I,II,III,IV");
  if (point) {
    cmd->add_option("--a", c->a, "value of a");
    cmd->add_option("--b", c->b, "value of b");
  }
  cmd->add_option("--workers", c->workers, "worker threads");
  cmd->add_option("--seed", c->seed, "random seed");
}

int RunCertify(const Common& common, const std::string& dump_dir, int trials, int horizon) {
  const SweepConfig cfg = common.Load();
  const RnnModel model = cfg.model.At(common.a, common.b);
  for (TestId test : cfg.tests) {
    const TestResult res = RunTest(model, test, cfg.solver);
    json line = {{"a", common.a},
                 {"b", common.b},
                 {"test", to_string(test)},
                 {"outcome", to_string(res.outcome)},
                 {"verified", res.verified},
                 {"margin", res.outcome == OutcomeKind::kFeasible ? json(res.margin) : json(nullptr)},
                 {"solve_ms", res.solve_ms},
                 {"detail", res.detail}};
    if (res.certificate) {
      line["lmi_max_eig"] = res.report.lmi_max_eig;
      if (res.verified) {
        try {
          line["gain_bound"] = CertificateGainBound(*res.certificate, model);
        } catch (const std::invalid_argument&) {
        }
      }
      if (!dump_dir.empty()) {
        std::filesystem::create_directories(dump_dir);
        const auto path = std::filesystem::path(dump_dir) / ("cert_" + to_string(test) + ".json");
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
        out << CertificateToJson({model, test, *res.certificate, common.a, common.b});
        line["certificate_path"] = path.string();
      }
    }
    std::cout << line.dump() << "\n";
  }
  if (trials > 0) {
    json line = {{"a", common.a},
                 {"b", common.b},
                 {"empirical_gain", EmpiricalGainLowerBound(model, trials, horizon, cfg.seed)},
                 {"trials", trials},
                 {"horizon", horizon},
                 {"seed", cfg.seed}};
    std::cout << line.dump() << "\n";
  }
  return kOk;
}

int RunSweepCommand(const Common& common) {
  if (common.config.empty()) throw ConfigError("sweep: --config is required");
  const SweepConfig cfg = common.Load();
  const std::vector<SweepRecord> records = RunSweep(cfg);

  const auto has = [&](TestId t) { return std::find(cfg.tests.begin(), cfg.tests.end(), t) != cfg.tests.end(); };
  std::vector<RegionMap> maps;
  if (has(TestId::kSSG) && has(TestId::kL2pSSG)) maps.push_back(CompareRegions(records, TestId::kSSG, TestId::kL2pSSG));
  if (has(TestId::kSsgZfPol) && has(TestId::kSsgZfPolCop)) {
    maps.push_back(CompareRegions(records, TestId::kSsgZfPol, TestId::kSsgZfPolCop));
  }
  EmitOutputs(records, maps, cfg);

  std::size_t failures = 0;
  for (const auto& r : records) failures += r.status == OutcomeKind::kSolverFailure;
  std::cerr << "records: " << records.size() << " (" << failures << " solver failures)\n";
  for (const auto& map : maps) {
    std::cerr << to_string(map.test_a) << " vs " << to_string(map.test_b) << ":";
    for (RegionClass cls : {RegionClass::kBoth, RegionClass::kOnlyA, RegionClass::kOnlyB, RegionClass::kNeither,
                            RegionClass::kFailure}) {
      std::cerr << " " << to_string(cls) << "=" << map.Count(cls);
    }
    std::cerr << "\n";
  }
  const InclusionAudit audit = AuditInclusions(records);
  std::cerr << "inclusion audit: " << audit.violations << " violations, " << audit.excluded_failures
            << " checks skipped for solver failures\n";
  for (const auto& msg : audit.messages) std::cerr << "error: " << msg << "\n";
  if (audit.violations > 0) return kAuditViolation;
  const double fraction = records.empty() ? 0.0 : static_cast<double>(failures) / records.size();
  if (fraction > cfg.failure_threshold) {
    std::cerr << "error: solver failure fraction " << fraction << " exceeds threshold " << cfg.failure_threshold
              << "\n";
    return kTooManyFailures;
  }
  return kOk;
}

int RunNorm(const Common& common, double tol) {
  const SweepConfig cfg = common.config.empty() ? DefaultConfig() : LoadConfig(common.config);
  const double norm = HinfNorm(cfg.model.At(common.a, common.b), tol);
  std::printf("%.6f\n", norm);
  return kOk;
}

int RunCheckCert(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open certificate '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const StoredCertificate stored = CertificateFromJson(buf.str());
  const MultiplierFamily family = FamilyFor(stored.test, stored.model.m());
  const VerificationReport report = VerifyCertificate(stored.model, family, stored.certificate);
  json line = {{"test", to_string(stored.test)},
               {"verified", report.verified},
               {"lmi_max_eig", report.lmi_max_eig},
               {"worst_constraint_violation", report.worst_constraint_violation},
               {"reason", report.reason}};
  std::cout << line.dump() << "\n";
  return report.verified ? kOk : kRejected;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability certificates for ReLU recurrent networks"};
  app.require_subcommand(1);

  Common certify_opts, sweep_opts, norm_opts;
  std::string dump_dir, cert_path;
  int trials = 0, horizon = 200;
  double norm_tol = 1e-6;

  CLI::App* certify = app.add_subcommand("certify", "run tests at one (a, b) point, print JSON lines");
  AddCommon(certify, &certify_opts, true);
  certify->add_option("--dump", dump_dir, "directory for certificate JSON files");
  certify->add_option("--simulate", trials, "random simulation trials for an empirical gain estimate");
  certify->add_option("--horizon", horizon, "simulation horizon");

  CLI::App* sweep = app.add_subcommand("sweep", "run the configured (a, b) grid");
  AddCommon(sweep, &sweep_opts, false);

  CLI::App* norm = app.add_subcommand("norm", "print the l2-induced norm of the linear part");
  AddCommon(norm, &norm_opts, true);
  norm->add_option("--tol", norm_tol, "absolute accuracy");

  CLI::App* check = app.add_subcommand("check-cert", "re-verify a stored certificate");
  check->add_option("certificate", cert_path, "certificate JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (certify->parsed()) return RunCertify(certify_opts, dump_dir, trials, horizon);
    if (sweep->parsed()) return RunSweepCommand(sweep_opts);
    if (norm->parsed()) return RunNorm(norm_opts, norm_tol);
    if (check->parsed()) return RunCheckCert(cert_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
