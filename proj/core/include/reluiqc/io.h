#pragma once

/// @file
/// JSON dump and reload of certificates. Matrices are stored as
/// {"rows": r, "cols": c, "data": [row-major entries]}.

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "reluiqc/certify.h"
#include "reluiqc/dynamics.h"

namespace reluiqc {

struct StoredCertificate {
  RnnModel model;
  TestId test;
  Certificate certificate;
  std::optional<double> a;
  std::optional<double> b;
};

std::string CertificateToJson(const StoredCertificate& stored);

/// Throws std::runtime_error on malformed input.
StoredCertificate CertificateFromJson(const std::string& text);

/// Reads a headerless comma-separated numeric matrix. Throws
/// std::runtime_error naming the file on I/O or parse problems.
Eigen::MatrixXd ReadMatrixCsv(const std::string& path);

}  // namespace reluiqc
