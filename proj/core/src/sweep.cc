#include "reluiqc/sweep.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include <yaml-cpp/yaml.h>

#include "reluiqc/io.h"

namespace reluiqc {

using Eigen::MatrixXd;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Model and grid

ModelSpec ModelSpec::Example() {
  const RnnModel base = RnnModel::Example(0.0, 0.0);
  ModelSpec spec;
  spec.lambda = base.lambda();
  spec.win = base.win();
  spec.wout = base.wout();
  spec.a_at = std::make_pair(0, 2);
  spec.b_at = std::make_pair(2, 1);
  return spec;
}

RnnModel ModelSpec::At(double a, double b) const {
  MatrixXd w = win;
  if (a_at) w(a_at->first, a_at->second) += a;
  if (b_at) w(b_at->first, b_at->second) += b;
  return RnnModel(lambda, std::move(w), wout);
}

namespace {

std::vector<double> Linspace(double lo, double hi, int steps) {
  std::vector<double> out;
  if (steps <= 1) return {lo};
  out.reserve(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    out.push_back(i == steps - 1 ? hi : lo + (hi - lo) * i / (steps - 1));
  }
  return out;
}

}  // namespace

std::vector<double> GridSpec::AValues() const { return Linspace(a_min, a_max, a_steps); }
std::vector<double> GridSpec::BValues() const { return Linspace(b_min, b_max, b_steps); }

// ---------------------------------------------------------------------------
// Configuration

void SweepConfig::Validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw ConfigError("config: key '" + key + "': " + why);
  };
  if (grid.a_steps < 1) fail("grid.a_steps", "must be >= 1");
  if (grid.b_steps < 1) fail("grid.b_steps", "must be >= 1");
  if (!(grid.a_min <= grid.a_max)) fail("grid.a_min", "must not exceed grid.a_max");
  if (!(grid.b_min <= grid.b_max)) fail("grid.b_min", "must not exceed grid.b_max");
  if (tests.empty()) fail("tests", "must list at least one test");
  if (parallelism < 1) fail("parallelism", "must be >= 1");
  if (!(solver.s_min > 0.0)) fail("solver.s_min", "must be positive");
  if (!(solver.solver.backend.tolerance > 0.0)) fail("solver.tolerance", "must be positive");
  if (solver.solver.backend.max_iterations < 1) fail("solver.max_iter", "must be >= 1");
  if (!(failure_threshold >= 0.0 && failure_threshold <= 1.0)) fail("failure_threshold", "must lie in [0, 1]");
  const auto check_index = [&](const std::optional<std::pair<int, int>>& at, const char* key) {
    if (at && (at->first < 0 || at->first >= model.win.rows() || at->second < 0 || at->second >= model.win.cols())) {
      fail(key, "lies outside win");
    }
  };
  check_index(model.a_at, "model.inject_a");
  check_index(model.b_at, "model.inject_b");
  try {
    model.At(grid.a_min, grid.b_min);
  } catch (const std::invalid_argument& e) {
    fail("model", e.what());
  }
}

namespace {

class ConfigReader {
 public:
  explicit ConfigReader(fs::path base_dir) : base_dir_(std::move(base_dir)) {}

  SweepConfig Read(const YAML::Node& root) {
    if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");
    CheckKeys(root, "", {"model", "grid", "tests", "solver", "output", "parallelism", "seed", "failure_threshold"});
    SweepConfig cfg;
    if (root["model"]) cfg.model = ReadModel(root["model"]);
    if (const YAML::Node g = root["grid"]) {
      RequireMap(g, "grid");
      CheckKeys(g, "grid.", {"a_min", "a_max", "a_steps", "b_min", "b_max", "b_steps"});
      Assign(g, "a_min", "grid.", &cfg.grid.a_min);
      Assign(g, "a_max", "grid.", &cfg.grid.a_max);
      Assign(g, "a_steps", "grid.", &cfg.grid.a_steps);
      Assign(g, "b_min", "grid.", &cfg.grid.b_min);
      Assign(g, "b_max", "grid.", &cfg.grid.b_max);
      Assign(g, "b_steps", "grid.", &cfg.grid.b_steps);
    }
    const YAML::Node tests = root["tests"];
    if (!tests) throw ConfigError("config: key 'tests': missing (required)");
    if (!tests.IsSequence()) Fail(tests, "tests", "must be a list such as [I, II, III, IV]");
    for (const auto& item : tests) {
      const auto id = ParseTestId(Get<std::string>(item, "tests"));
      if (!id) Fail(item, "tests", "unknown test '" + item.as<std::string>() + "'");
      if (std::find(cfg.tests.begin(), cfg.tests.end(), *id) == cfg.tests.end()) cfg.tests.push_back(*id);
    }
    if (const YAML::Node s = root["solver"]) {
      RequireMap(s, "solver");
      CheckKeys(s, "solver.", {"eps", "s_min", "tolerance", "max_iter"});
      Assign(s, "eps", "solver.", &cfg.solver.eps);
      Assign(s, "s_min", "solver.", &cfg.solver.s_min);
      Assign(s, "tolerance", "solver.", &cfg.solver.solver.backend.tolerance);
      Assign(s, "max_iter", "solver.", &cfg.solver.solver.backend.max_iterations);
    }
    if (const YAML::Node o = root["output"]) {
      RequireMap(o, "output");
      CheckKeys(o, "output.", {"records_path", "regions_path", "image_path", "certificates_dir"});
      if (o["records_path"]) cfg.output.records_path = Get<std::string>(o["records_path"], "output.records_path");
      if (o["regions_path"]) cfg.output.regions_path = Get<std::string>(o["regions_path"], "output.regions_path");
      if (o["image_path"]) cfg.output.image_path = Get<std::string>(o["image_path"], "output.image_path");
      if (o["certificates_dir"]) {
        cfg.output.certificates_dir = Get<std::string>(o["certificates_dir"], "output.certificates_dir");
      }
    }
    Assign(root, "parallelism", "", &cfg.parallelism);
    Assign(root, "seed", "", &cfg.seed);
    Assign(root, "failure_threshold", "", &cfg.failure_threshold);
    cfg.Validate();
    return cfg;
  }

 private:
  [[noreturn]] static void Fail(const YAML::Node& node, const std::string& key, const std::string& why) {
    std::string where;
    if (!node.Mark().is_null()) where = "line " + std::to_string(node.Mark().line + 1) + ": ";
    throw ConfigError("config: " + where + "key '" + key + "': " + why);
  }

  static void RequireMap(const YAML::Node& node, const std::string& key) {
    if (!node.IsMap()) Fail(node, key, "must be a mapping");
  }

  static void CheckKeys(const YAML::Node& node, const std::string& prefix, std::set<std::string> allowed) {
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) Fail(kv.first, prefix + key, "unknown key");
    }
  }

  template <typename T>
  static T Get(const YAML::Node& node, const std::string& key) {
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      Fail(node, key, "has the wrong type");
    }
  }

  template <typename T>
  static void Assign(const YAML::Node& parent, const char* name, const std::string& prefix, T* out) {
    if (const YAML::Node node = parent[name]) *out = Get<T>(node, prefix + name);
  }

  MatrixXd ReadMatrix(const YAML::Node& parent, const std::string& name) {
    const std::string key = "model." + name;
    const YAML::Node inline_rows = parent[name];
    const YAML::Node csv = parent[name + "_csv"];
    if (inline_rows && csv) Fail(csv, key + "_csv", "conflicts with '" + key + "'");
    if (csv) {
      fs::path path = Get<std::string>(csv, key + "_csv");
      if (path.is_relative()) path = base_dir_ / path;
      try {
        return ReadMatrixCsv(path.string());
      } catch (const std::runtime_error& e) {
        Fail(csv, key + "_csv", e.what());
      }
    }
    if (!inline_rows) throw ConfigError("config: key '" + key + "': missing (give rows or " + name + "_csv)");
    if (!inline_rows.IsSequence() || inline_rows.size() == 0) Fail(inline_rows, key, "must be a list of rows");
    const auto rows = Get<std::vector<std::vector<double>>>(inline_rows, key);
    const std::size_t cols = rows.front().size();
    MatrixXd m(static_cast<long>(rows.size()), static_cast<long>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != cols) Fail(inline_rows, key, "rows have different lengths");
      for (std::size_t j = 0; j < cols; ++j) m(static_cast<long>(i), static_cast<long>(j)) = rows[i][j];
    }
    return m;
  }

  static std::optional<std::pair<int, int>> ReadEntry(const YAML::Node& parent, const char* name) {
    const YAML::Node node = parent[name];
    if (!node) return std::nullopt;
    const std::string key = std::string("model.") + name;
    const auto rc = Get<std::vector<int>>(node, key);
    if (rc.size() != 2 || rc[0] < 1 || rc[1] < 1) Fail(node, key, "must be [row, col] with 1-based indices");
    return std::make_pair(rc[0] - 1, rc[1] - 1);
  }

  ModelSpec ReadModel(const YAML::Node& node) {
    RequireMap(node, "model");
    if (node["builtin"]) {
      CheckKeys(node, "model.", {"builtin"});
      const auto name = Get<std::string>(node["builtin"], "model.builtin");
      if (name != "example") Fail(node["builtin"], "model.builtin", "unknown model '" + name + "' (expected 'example')");
      return ModelSpec::Example();
    }
    CheckKeys(node, "model.",
              {"lambda", "lambda_csv", "win", "win_csv", "wout", "wout_csv", "inject_a", "inject_b"});
    ModelSpec spec;
    spec.lambda = ReadMatrix(node, "lambda");
    spec.win = ReadMatrix(node, "win");
    spec.wout = ReadMatrix(node, "wout");
    spec.a_at = ReadEntry(node, "inject_a");
    spec.b_at = ReadEntry(node, "inject_b");
    return spec;
  }

  fs::path base_dir_;
};

SweepConfig ParseConfigIn(const std::string& text, const fs::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("config: line " + std::to_string(e.mark.line + 1) + ", column " +
                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  return ConfigReader(base_dir).Read(root);
}

}  // namespace

SweepConfig ParseConfig(const std::string& text) { return ParseConfigIn(text, fs::current_path()); }

SweepConfig LoadConfig(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseConfigIn(buf.str(), path.has_parent_path() ? path.parent_path() : fs::current_path());
}

// ---------------------------------------------------------------------------
// Sweep

void NormalizeOrder(std::vector<SweepRecord>* records) {
  std::sort(records->begin(), records->end(), [](const SweepRecord& l, const SweepRecord& r) {
    return std::tie(l.a, l.b, l.test) < std::tie(r.a, r.b, r.test);
  });
}

namespace {

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string RecordLine(const SweepRecord& r) {
  char ms[64];
  std::snprintf(ms, sizeof(ms), "%.3f", r.solve_ms);
  return Num(r.a) + "," + Num(r.b) + "," + to_string(r.test) + "," + to_string(r.status) + "," +
         (r.verified ? "true" : "false") + "," + (r.margin ? Num(*r.margin) : "") + "," + ms + "\n";
}

constexpr const char* kRecordsHeader = "a,b,test,status,verified,margin,solve_ms\n";

void WriteFile(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  out.close();
  if (!out) throw std::runtime_error("error while writing '" + path.string() + "'");
}

}  // namespace

std::vector<SweepRecord> RunSweep(const SweepConfig& config) {
  config.Validate();
  std::vector<std::pair<double, double>> points;
  for (double a : config.grid.AValues()) {
    for (double b : config.grid.BValues()) points.emplace_back(a, b);
  }

  std::ofstream stream;
  if (!config.output.records_path.empty()) {
    const fs::path& path = config.output.records_path;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    stream.open(path, std::ios::binary | std::ios::trunc);
    if (!stream) throw std::runtime_error("cannot write '" + path.string() + "'");
    stream << kRecordsHeader << std::flush;
  }
  if (config.output.certificates_dir) fs::create_directories(*config.output.certificates_dir);

  std::vector<SweepRecord> records;
  records.reserve(points.size() * config.tests.size());
  std::mutex sink;
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;

  auto worker = [&]() {
    try {
      for (std::size_t i = next++; i < points.size(); i = next++) {
        const auto [a, b] = points[i];
        const RnnModel model = config.model.At(a, b);
        std::vector<SweepRecord> local;
        for (TestId test : config.tests) {
          const TestResult res = RunTest(model, test, config.solver);
          SweepRecord rec;
          rec.a = a;
          rec.b = b;
          rec.test = test;
          rec.status = res.outcome;
          rec.verified = res.verified;
          if (res.outcome == OutcomeKind::kFeasible) rec.margin = res.margin;
          rec.solve_ms = res.solve_ms;
          rec.detail = res.detail;
          if (res.certificate && config.output.certificates_dir) {
            const fs::path file = *config.output.certificates_dir /
                                  ("cert_a" + Num(a) + "_b" + Num(b) + "_" + to_string(test) + ".json");
            WriteFile(file, CertificateToJson({model, test, *res.certificate, a, b}));
          }
          local.push_back(std::move(rec));
        }
        std::lock_guard<std::mutex> lock(sink);
        for (auto& rec : local) {
          if (stream.is_open()) stream << RecordLine(rec) << std::flush;
          records.push_back(std::move(rec));
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(sink);
      if (!error) error = std::current_exception();
      next = points.size();
    }
  };

  const int workers = std::max(1, std::min<int>(config.parallelism, static_cast<int>(points.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  NormalizeOrder(&records);
  return records;
}

// ---------------------------------------------------------------------------
// Regions and audits

std::string to_string(RegionClass cls) {
  switch (cls) {
    case RegionClass::kBoth:
      return "both";
    case RegionClass::kOnlyA:
      return "only_A";
    case RegionClass::kOnlyB:
      return "only_B";
    case RegionClass::kNeither:
      return "neither";
    case RegionClass::kFailure:
      return "failure";
  }
  return "failure";
}

std::size_t RegionMap::Count(RegionClass cls) const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [cls](const RegionPoint& p) { return p.cls == cls; }));
}

namespace {

using PointKey = std::pair<double, double>;

std::map<PointKey, std::map<TestId, OutcomeKind>> ByPoint(const std::vector<SweepRecord>& records) {
  std::map<PointKey, std::map<TestId, OutcomeKind>> out;
  for (const auto& r : records) out[{r.a, r.b}][r.test] = r.status;
  return out;
}

}  // namespace

RegionMap CompareRegions(const std::vector<SweepRecord>& records, TestId test_a, TestId test_b) {
  RegionMap map;
  map.test_a = test_a;
  map.test_b = test_b;
  for (const auto& [point, outcomes] : ByPoint(records)) {
    RegionPoint rp{point.first, point.second, RegionClass::kFailure};
    const auto ia = outcomes.find(test_a);
    const auto ib = outcomes.find(test_b);
    if (ia != outcomes.end() && ib != outcomes.end() && ia->second != OutcomeKind::kSolverFailure &&
        ib->second != OutcomeKind::kSolverFailure) {
      const bool fa = ia->second == OutcomeKind::kFeasible;
      const bool fb = ib->second == OutcomeKind::kFeasible;
      rp.cls = fa ? (fb ? RegionClass::kBoth : RegionClass::kOnlyA)
                  : (fb ? RegionClass::kOnlyB : RegionClass::kNeither);
    }
    map.points.push_back(rp);
  }
  return map;
}

std::vector<std::pair<TestId, TestId>> GuaranteedInclusions() {
  return {{TestId::kSSG, TestId::kL2pSSG}, {TestId::kSSG, TestId::kSsgZfPol}, {TestId::kSsgZfPol, TestId::kSsgZfPolCop}};
}

InclusionAudit AuditInclusions(const std::vector<SweepRecord>& records) {
  InclusionAudit audit;
  const auto points = ByPoint(records);
  for (const auto& [weak, strong] : GuaranteedInclusions()) {
    for (const auto& [point, outcomes] : points) {
      const auto iw = outcomes.find(weak);
      const auto is = outcomes.find(strong);
      if (iw == outcomes.end() || is == outcomes.end()) continue;
      if (iw->second != OutcomeKind::kFeasible) continue;
      if (is->second == OutcomeKind::kSolverFailure) {
        ++audit.excluded_failures;
        continue;
      }
      if (is->second == OutcomeKind::kInfeasible) {
        ++audit.violations;
        audit.messages.push_back("inclusion violated at a=" + Num(point.first) + " b=" + Num(point.second) + ": " +
                                 to_string(weak) + " Feasible but " + to_string(strong) + " Infeasible");
      }
    }
  }
  return audit;
}

// ---------------------------------------------------------------------------
// Output

std::string RecordsCsv(const std::vector<SweepRecord>& records) {
  std::string out = kRecordsHeader;
  for (const auto& r : records) out += RecordLine(r);
  return out;
}

std::string RegionsCsv(const RegionMap& map) {
  std::string out = "a,b,class\n";
  for (const auto& p : map.points) out += Num(p.a) + "," + Num(p.b) + "," + to_string(p.cls) + "\n";
  return out;
}

fs::path RegionPath(const fs::path& base, const RegionMap& map) {
  fs::path out = base;
  out.replace_filename(base.stem().string() + "_" + to_string(map.test_a) + "_vs_" + to_string(map.test_b) +
                       base.extension().string());
  return out;
}

namespace {

struct Palette {
  const char* both;
  const char* only_b;
};

// Green/magenta for comparisons against the copositive-0 class, red/blue for
// the Zames-Falb pairs.
Palette PaletteFor(const RegionMap& map) {
  if (map.test_a == TestId::kSsgZfPol || map.test_b == TestId::kSsgZfPolCop) return {"#d62728", "#1f3fd6"};
  return {"#2ca02c", "#d62cc8"};
}

}  // namespace

std::string RegionsSvg(const std::vector<RegionMap>& maps) {
  constexpr double kPanel = 360.0, kPad = 50.0;
  const double width = kPad + maps.size() * (kPanel + kPad);
  const double height = kPanel + 2.5 * kPad;
  std::ostringstream svg;
  svg.imbue(std::locale::classic());
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t k = 0; k < maps.size(); ++k) {
    const RegionMap& map = maps[k];
    const Palette pal = PaletteFor(map);
    const double x0 = kPad + k * (kPanel + kPad), y0 = kPad;
    double amin = 0, amax = 1, bmin = 0, bmax = 1;
    if (!map.points.empty()) {
      amin = amax = map.points.front().a;
      bmin = bmax = map.points.front().b;
      for (const auto& p : map.points) {
        amin = std::min(amin, p.a), amax = std::max(amax, p.a);
        bmin = std::min(bmin, p.b), bmax = std::max(bmax, p.b);
      }
    }
    const double sa = amax > amin ? (kPanel - 20) / (amax - amin) : 0.0;
    const double sb = bmax > bmin ? (kPanel - 20) / (bmax - bmin) : 0.0;
    svg << "<g>\n<text x=\"" << x0 + kPanel / 2 << "\" y=\"" << y0 - 15 << "\" text-anchor=\"middle\">"
        << to_string(map.test_a) << " vs " << to_string(map.test_b) << "</text>\n";
    svg << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << kPanel << "\" height=\"" << kPanel
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (const auto& p : map.points) {
      const char* fill = nullptr;
      switch (p.cls) {
        case RegionClass::kBoth:
          fill = pal.both;
          break;
        case RegionClass::kOnlyB:
          fill = pal.only_b;
          break;
        case RegionClass::kOnlyA:
          fill = "#000000";
          break;
        case RegionClass::kFailure:
          fill = "#999999";
          break;
        case RegionClass::kNeither:
          break;
      }
      if (!fill) continue;
      const double cx = x0 + 10 + (amax > amin ? (p.a - amin) * sa : (kPanel - 20) / 2);
      const double cy = y0 + kPanel - 10 - (bmax > bmin ? (p.b - bmin) * sb : (kPanel - 20) / 2);
      svg << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"3\" fill=\"" << fill << "\"><title>"
          << to_string(p.cls) << "</title></circle>\n";
    }
    svg << "<text x=\"" << x0 + kPanel / 2 << "\" y=\"" << y0 + kPanel + 20 << "\" text-anchor=\"middle\">a in ["
        << amin << ", " << amax << "]</text>\n";
    svg << "<text x=\"" << x0 - 10 << "\" y=\"" << y0 + kPanel / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 "
        << x0 - 10 << " " << y0 + kPanel / 2 << ")\">b in [" << bmin << ", " << bmax << "]</text>\n";
    const double ly = y0 + kPanel + 45;
    const std::pair<const char*, std::string> legend[] = {
        {pal.both, "both"},
        {pal.only_b, "only " + to_string(map.test_b)},
        {"#000000", "only " + to_string(map.test_a)},
        {"#999999", "solver failure"}};
    double lx = x0;
    for (const auto& [color, label] : legend) {
      svg << "<circle cx=\"" << lx + 4 << "\" cy=\"" << ly - 4 << "\" r=\"4\" fill=\"" << color << "\"/>"
          << "<text x=\"" << lx + 12 << "\" y=\"" << ly << "\">" << label << "</text>\n";
      lx += 12 + 7.0 * static_cast<double>(label.size()) + 14;
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void EmitOutputs(const std::vector<SweepRecord>& records, const std::vector<RegionMap>& maps,
                 const SweepConfig& config) {
  std::vector<SweepRecord> sorted = records;
  NormalizeOrder(&sorted);
  WriteFile(config.output.records_path, RecordsCsv(sorted));
  for (const auto& map : maps) WriteFile(RegionPath(config.output.regions_path, map), RegionsCsv(map));
  if (config.output.image_path) WriteFile(*config.output.image_path, RegionsSvg(maps));
}

}  // namespace reluiqc
