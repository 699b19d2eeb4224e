#include "reluiqc/affine.h"

#include <stdexcept>

namespace reluiqc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

AffineMatrix::AffineMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), constant_(MatrixXd::Zero(rows, cols)) {}

AffineMatrix::AffineMatrix(MatrixXd constant)
    : rows_(static_cast<int>(constant.rows())),
      cols_(static_cast<int>(constant.cols())),
      constant_(std::move(constant)) {}

void AffineMatrix::AddTerm(int var, const MatrixXd& coeff) {
  if (coeff.rows() != rows_ || coeff.cols() != cols_) {
    throw std::invalid_argument("AffineMatrix::AddTerm: shape mismatch");
  }
  auto [it, inserted] = terms_.try_emplace(var, coeff);
  if (!inserted) it->second += coeff;
}

MatrixXd AffineMatrix::Evaluate(const VectorXd& x) const {
  MatrixXd out = constant_;
  for (const auto& [var, coeff] : terms_) {
    if (var >= x.size()) throw std::out_of_range("AffineMatrix::Evaluate: short assignment");
    out += x(var) * coeff;
  }
  return out;
}

AffineMatrix AffineMatrix::Transpose() const {
  AffineMatrix out(constant_.transpose());
  for (const auto& [var, coeff] : terms_) out.terms_.emplace(var, coeff.transpose());
  return out;
}

AffineMatrix AffineMatrix::Shifted(int offset) const {
  AffineMatrix out(constant_);
  for (const auto& [var, coeff] : terms_) out.terms_.emplace(var + offset, coeff);
  return out;
}

AffineMatrix AffineMatrix::Multiply(const MatrixXd& lhs, const MatrixXd& rhs) const {
  if (lhs.cols() != rows_ || rhs.rows() != cols_) {
    throw std::invalid_argument("AffineMatrix::Multiply: shape mismatch");
  }
  AffineMatrix out(lhs * constant_ * rhs);
  for (const auto& [var, coeff] : terms_) {
    MatrixXd c = lhs * coeff * rhs;
    if (c.cwiseAbs().maxCoeff() > 0.0) out.terms_.emplace(var, std::move(c));
  }
  return out;
}

AffineMatrix AffineMatrix::Congruence(const MatrixXd& t) const {
  return Multiply(t.transpose(), t);
}

AffineMatrix& AffineMatrix::operator+=(const AffineMatrix& other) {
  if (other.rows_ != rows_ || other.cols_ != cols_) {
    throw std::invalid_argument("AffineMatrix: shape mismatch in sum");
  }
  constant_ += other.constant_;
  for (const auto& [var, coeff] : other.terms_) AddTerm(var, coeff);
  return *this;
}

AffineMatrix& AffineMatrix::operator-=(const AffineMatrix& other) {
  AffineMatrix neg = other;
  neg *= -1.0;
  return *this += neg;
}

AffineMatrix& AffineMatrix::operator*=(double scale) {
  constant_ *= scale;
  for (auto& [var, coeff] : terms_) coeff *= scale;
  return *this;
}

AffineMatrix AffineMatrix::Blocks(const AffineMatrix& a, const AffineMatrix& b,
                                  const AffineMatrix& c, const AffineMatrix& d) {
  if (a.rows_ != b.rows_ || c.rows_ != d.rows_ || a.cols_ != c.cols_ || b.cols_ != d.cols_) {
    throw std::invalid_argument("AffineMatrix::Blocks: inconsistent block shapes");
  }
  const int r0 = a.rows_, c0 = a.cols_;
  AffineMatrix out(r0 + c.rows_, c0 + b.cols_);
  auto place = [&](const AffineMatrix& part, int row, int col) {
    out.constant_.block(row, col, part.rows_, part.cols_) = part.constant_;
    for (const auto& [var, coeff] : part.terms_) {
      auto it = out.terms_.try_emplace(var, MatrixXd::Zero(out.rows_, out.cols_)).first;
      it->second.block(row, col, part.rows_, part.cols_) += coeff;
    }
  };
  place(a, 0, 0);
  place(b, 0, c0);
  place(c, r0, 0);
  place(d, r0, c0);
  return out;
}

AffineMatrix operator+(AffineMatrix lhs, const AffineMatrix& rhs) { return lhs += rhs; }
AffineMatrix operator-(AffineMatrix lhs, const AffineMatrix& rhs) { return lhs -= rhs; }
AffineMatrix operator*(double scale, AffineMatrix rhs) { return rhs *= scale; }

double AffineScalar::Evaluate(const VectorXd& x) const {
  double out = constant;
  for (const auto& [var, coeff] : terms) out += coeff * x(var);
  return out;
}

AffineScalar AffineScalar::Shifted(int offset) const {
  AffineScalar out{constant, {}};
  for (const auto& [var, coeff] : terms) out.terms.emplace(var + offset, coeff);
  return out;
}

std::string to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::kSymmetric:
      return "symmetric";
    case BlockKind::kSquare:
      return "square";
    case BlockKind::kDiagonal:
      return "diagonal";
  }
  return "?";
}

std::string to_string(ConeTag cone) {
  switch (cone) {
    case ConeTag::kFree:
      return "free";
    case ConeTag::kPsd:
      return "psd";
    case ConeTag::kNonnegative:
      return "nonnegative";
    case ConeTag::kDiagPositive:
      return "diag_positive";
  }
  return "?";
}

int VariableBlock::size() const {
  switch (kind) {
    case BlockKind::kSymmetric:
      return dim * (dim + 1) / 2;
    case BlockKind::kSquare:
      return dim * dim;
    case BlockKind::kDiagonal:
      return dim;
  }
  return 0;
}

AffineMatrix VariableBlock::Expression() const {
  AffineMatrix out(dim, dim);
  int var = offset;
  switch (kind) {
    case BlockKind::kSymmetric:
      for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
          MatrixXd e = MatrixXd::Zero(dim, dim);
          e(i, j) = 1.0;
          e(j, i) = 1.0;
          out.AddTerm(var++, e);
        }
      }
      break;
    case BlockKind::kSquare:
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
          MatrixXd e = MatrixXd::Zero(dim, dim);
          e(i, j) = 1.0;
          out.AddTerm(var++, e);
        }
      }
      break;
    case BlockKind::kDiagonal:
      for (int i = 0; i < dim; ++i) {
        MatrixXd e = MatrixXd::Zero(dim, dim);
        e(i, i) = 1.0;
        out.AddTerm(var++, e);
      }
      break;
  }
  return out;
}

MatrixXd VariableBlock::Value(const VectorXd& x) const {
  if (offset + size() > x.size()) throw std::out_of_range("VariableBlock::Value: short assignment");
  MatrixXd out = MatrixXd::Zero(dim, dim);
  int var = offset;
  switch (kind) {
    case BlockKind::kSymmetric:
      for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
          out(i, j) = out(j, i) = x(var++);
        }
      }
      break;
    case BlockKind::kSquare:
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) out(i, j) = x(var++);
      }
      break;
    case BlockKind::kDiagonal:
      for (int i = 0; i < dim; ++i) out(i, i) = x(var++);
      break;
  }
  return out;
}

void VariableBlock::Assign(const MatrixXd& value, VectorXd* x) const {
  if (value.rows() != dim || value.cols() != dim) {
    throw std::invalid_argument("VariableBlock::Assign: '" + name + "' expects " +
                                std::to_string(dim) + "x" + std::to_string(dim));
  }
  if (offset + size() > x->size()) throw std::out_of_range("VariableBlock::Assign: short assignment");
  int var = offset;
  switch (kind) {
    case BlockKind::kSymmetric:
      for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) (*x)(var++) = value(i, j);
      }
      break;
    case BlockKind::kSquare:
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) (*x)(var++) = value(i, j);
      }
      break;
    case BlockKind::kDiagonal:
      for (int i = 0; i < dim; ++i) (*x)(var++) = value(i, i);
      break;
  }
}

const VariableBlock& VariableSet::Add(std::string name, BlockKind kind, int dim, ConeTag cone) {
  if (Contains(name)) throw std::invalid_argument("VariableSet: duplicate block '" + name + "'");
  VariableBlock blk{std::move(name), kind, dim, cone, num_scalars_};
  num_scalars_ += blk.size();
  blocks_.push_back(std::move(blk));
  return blocks_.back();
}

int VariableSet::Append(const VariableSet& other, const std::string& prefix) {
  const int offset = num_scalars_;
  for (const auto& blk : other.blocks_) {
    Add(prefix + blk.name, blk.kind, blk.dim, blk.cone);
  }
  return offset;
}

const VariableBlock& VariableSet::Find(const std::string& name) const {
  for (const auto& blk : blocks_) {
    if (blk.name == name) return blk;
  }
  throw std::out_of_range("VariableSet: no block named '" + name + "'");
}

bool VariableSet::Contains(const std::string& name) const {
  for (const auto& blk : blocks_) {
    if (blk.name == name) return true;
  }
  return false;
}

}  // namespace reluiqc
