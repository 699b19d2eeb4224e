#pragma once

/// @file
/// Affine matrix expressions over a flat vector of scalar decision variables,
/// plus the named variable blocks that produce them. Multiplier families and
/// the stability LMI are both written in these terms and lowered to
/// conic::Program for solving.

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace reluiqc {

/// E(x) = constant + sum_i x_i * terms[i].
class AffineMatrix {
 public:
  AffineMatrix() = default;
  AffineMatrix(int rows, int cols);
  explicit AffineMatrix(Eigen::MatrixXd constant);

  static AffineMatrix Zero(int rows, int cols) { return AffineMatrix(rows, cols); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const Eigen::MatrixXd& constant() const { return constant_; }
  const std::map<int, Eigen::MatrixXd>& terms() const { return terms_; }

  void AddTerm(int var, const Eigen::MatrixXd& coeff);

  Eigen::MatrixXd Evaluate(const Eigen::VectorXd& x) const;

  AffineMatrix Transpose() const;
  /// Renumbers every variable index by +offset.
  AffineMatrix Shifted(int offset) const;
  /// Returns lhs * E * rhs for fixed matrices.
  AffineMatrix Multiply(const Eigen::MatrixXd& lhs, const Eigen::MatrixXd& rhs) const;
  /// T' * E * T.
  AffineMatrix Congruence(const Eigen::MatrixXd& t) const;

  AffineMatrix& operator+=(const AffineMatrix& other);
  AffineMatrix& operator-=(const AffineMatrix& other);
  AffineMatrix& operator*=(double scale);

  /// [[a, b], [c, d]].
  static AffineMatrix Blocks(const AffineMatrix& a, const AffineMatrix& b,
                             const AffineMatrix& c, const AffineMatrix& d);

 private:
  int rows_ = 0;
  int cols_ = 0;
  Eigen::MatrixXd constant_;
  std::map<int, Eigen::MatrixXd> terms_;
};

AffineMatrix operator+(AffineMatrix lhs, const AffineMatrix& rhs);
AffineMatrix operator-(AffineMatrix lhs, const AffineMatrix& rhs);
AffineMatrix operator*(double scale, AffineMatrix rhs);

/// constant + sum_i x_i * terms[i]; used as "expression >= 0".
struct AffineScalar {
  double constant = 0.0;
  std::map<int, double> terms;

  double Evaluate(const Eigen::VectorXd& x) const;
  AffineScalar Shifted(int offset) const;
};

enum class BlockKind { kSymmetric, kSquare, kDiagonal };

enum class ConeTag {
  kFree,
  kPsd,
  kNonnegative,   ///< every entry >= 0
  kDiagPositive,  ///< diagonal entries > 0
};

std::string to_string(BlockKind kind);
std::string to_string(ConeTag cone);

struct VariableBlock {
  std::string name;
  BlockKind kind = BlockKind::kSymmetric;
  int dim = 0;
  ConeTag cone = ConeTag::kFree;
  int offset = 0;

  /// Number of scalar variables backing the block.
  int size() const;
  /// Matrix-valued expression of the block (dim x dim).
  AffineMatrix Expression() const;
  /// Extracts the block's matrix value from a flat assignment.
  Eigen::MatrixXd Value(const Eigen::VectorXd& x) const;
  /// Writes a matrix value into a flat assignment. Symmetric blocks read the
  /// upper triangle; diagonal blocks read the diagonal.
  void Assign(const Eigen::MatrixXd& value, Eigen::VectorXd* x) const;
};

/// Ordered set of named blocks over one flat scalar vector.
class VariableSet {
 public:
  const VariableBlock& Add(std::string name, BlockKind kind, int dim, ConeTag cone);
  /// Appends all of other's blocks with a name prefix; returns the offset
  /// applied to other's variable indices.
  int Append(const VariableSet& other, const std::string& prefix);

  int num_scalars() const { return num_scalars_; }
  const std::vector<VariableBlock>& blocks() const { return blocks_; }
  const VariableBlock& Find(const std::string& name) const;
  bool Contains(const std::string& name) const;

 private:
  std::vector<VariableBlock> blocks_;
  int num_scalars_ = 0;
};

}  // namespace reluiqc
