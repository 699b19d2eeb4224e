#include "reluiqc/io.h"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace reluiqc {

using Eigen::MatrixXd;
using nlohmann::json;

namespace {

json MatrixJson(const MatrixXd& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

MatrixXd MatrixFrom(const json& j, const char* what) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data")) {
    throw std::runtime_error(std::string("certificate: matrix '") + what + "' lacks rows/cols/data");
  }
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw std::runtime_error(std::string("certificate: matrix '") + what + "' has inconsistent dimensions");
  }
  MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j2 = 0; j2 < cols; ++j2) m(i, j2) = data[static_cast<std::size_t>(i * cols + j2)];
  }
  return m;
}

}  // namespace

std::string CertificateToJson(const StoredCertificate& stored) {
  const Certificate& c = stored.certificate;
  json multiplier = json::object();
  for (const auto& [name, value] : c.multiplier) multiplier[name] = MatrixJson(value);
  json out = {
      {"test", to_string(stored.test)},
      {"model",
       {{"lambda", MatrixJson(stored.model.lambda())},
        {"win", MatrixJson(stored.model.win())},
        {"wout", MatrixJson(stored.model.wout())}}},
      {"certificate",
       {{"p", MatrixJson(c.p)},
        {"s", MatrixJson(c.s)},
        {"pi", MatrixJson(c.pi)},
        {"multiplier", multiplier},
        {"margin", c.margin},
        {"eps", c.eps},
        {"s_min", c.s_min},
        {"s_frozen", c.s_frozen},
        {"solve_ms", c.solve_ms}}},
  };
  if (stored.a) out["a"] = *stored.a;
  if (stored.b) out["b"] = *stored.b;
  return out.dump(2) + "\n";
}

StoredCertificate CertificateFromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("certificate: ") + e.what());
  }
  try {
    const auto test = ParseTestId(j.at("test").get<std::string>());
    if (!test) throw std::runtime_error("certificate: unknown test '" + j.at("test").get<std::string>() + "'");
    const json& jm = j.at("model");
    const json& jc = j.at("certificate");
    Certificate c;
    c.p = MatrixFrom(jc.at("p"), "p");
    c.s = MatrixFrom(jc.at("s"), "s");
    c.pi = MatrixFrom(jc.at("pi"), "pi");
    for (const auto& [name, value] : jc.at("multiplier").items()) {
      c.multiplier.emplace_back(name, MatrixFrom(value, name.c_str()));
    }
    c.margin = jc.at("margin").get<double>();
    c.eps = jc.at("eps").get<double>();
    c.s_min = jc.at("s_min").get<double>();
    c.s_frozen = jc.at("s_frozen").get<bool>();
    c.solve_ms = jc.value("solve_ms", 0.0);
    StoredCertificate out{RnnModel(MatrixFrom(jm.at("lambda"), "lambda"), MatrixFrom(jm.at("win"), "win"),
                                   MatrixFrom(jm.at("wout"), "wout")),
                          *test, std::move(c), std::nullopt, std::nullopt};
    if (j.contains("a")) out.a = j.at("a").get<double>();
    if (j.contains("b")) out.b = j.at("b").get<double>();
    return out;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("certificate: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("certificate: ") + e.what());
  }
}

MatrixXd ReadMatrixCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": not a number: '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("matrix file '" + path + "' is empty");
  MatrixXd m(static_cast<long>(rows.size()), static_cast<long>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<long>(i), static_cast<long>(j)) = rows[i][j];
  }
  return m;
}

}  // namespace reluiqc
