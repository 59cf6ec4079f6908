#include "hmdg/linsolve.hpp"

#include <algorithm>
#include <cctype>
#include <string>
#include <tuple>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "hmdg/errors.hpp"

namespace hmdg {

SparseMatrix::SparseMatrix(Index rows, Index cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw InvalidArgument("SparseMatrix: negative dimension");
}

void SparseMatrix::add(Index row, Index col, double value) {
  if (finalized_) throw InvalidArgument("SparseMatrix::add after finalize");
  if (row < 0 || row >= rows_ || col < 0 || col >= cols_) throw InvalidArgument("SparseMatrix::add: index out of range");
  entries_.push_back({row, col, value});
}

void SparseMatrix::add_block(const std::vector<Index>& rows, const std::vector<Index>& cols,
                             const Eigen::MatrixXd& block) {
  if (static_cast<Index>(rows.size()) != block.rows() || static_cast<Index>(cols.size()) != block.cols())
    throw InvalidArgument("SparseMatrix::add_block: block shape mismatch");
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      add(rows[i], cols[j], block(static_cast<Index>(i), static_cast<Index>(j)));
}

void SparseMatrix::finalize() {
  if (finalized_) return;
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.row, a.col, a.value) < std::tie(b.row, b.col, b.value);
  });
  std::vector<Eigen::Triplet<double>> merged;
  for (std::size_t i = 0; i < entries_.size();) {
    const Index r = entries_[i].row;
    const Index c = entries_[i].col;
    double sum = 0.0;
    for (; i < entries_.size() && entries_[i].row == r && entries_[i].col == c; ++i) sum += entries_[i].value;
    merged.emplace_back(r, c, sum);
  }
  matrix_.resize(rows_, cols_);
  matrix_.setFromTriplets(merged.begin(), merged.end());
  matrix_.makeCompressed();
  entries_.clear();
  entries_.shrink_to_fit();
  finalized_ = true;
}

const SparseMatrix::Compressed& SparseMatrix::matrix() const {
  if (!finalized_) throw InvalidArgument("SparseMatrix: not finalized");
  return matrix_;
}

double SparseMatrix::symmetry_defect() const {
  const Compressed& A = matrix();
  if (A.rows() != A.cols()) return 1.0;
  const double norm = A.norm();
  if (norm == 0.0) return 0.0;
  const Compressed At = A.transpose();
  return Compressed(A - At).norm() / norm;
}

double default_tolerance(MatrixKind kind) { return kind == MatrixKind::SymmetricPositiveDefinite ? 1e-12 : 1e-10; }

namespace {

Index trailing_index(const std::string& message) {
  std::size_t end = message.size();
  while (end > 0 && !std::isdigit(static_cast<unsigned char>(message[end - 1]))) --end;
  std::size_t begin = end;
  while (begin > 0 && std::isdigit(static_cast<unsigned char>(message[begin - 1]))) --begin;
  if (begin == end) return -1;
  return std::stoll(message.substr(begin, end - begin));
}

}  // namespace

SolveResult factor_solve(const SparseMatrix& A, const Eigen::VectorXd& b, MatrixKind kind, double tolerance) {
  const SparseMatrix::Compressed& M = A.matrix();
  if (M.rows() != M.cols()) throw InvalidArgument("factor_solve: matrix is not square");
  if (b.size() != M.rows()) throw InvalidArgument("factor_solve: right-hand side size mismatch");
  if (tolerance < 0.0) tolerance = default_tolerance(kind);

  SolveResult result;
  if (M.rows() == 0) return result;
  const Eigen::SparseMatrix<double> Mc = M;  // column-major copy for the factorizations
  if (kind == MatrixKind::SymmetricPositiveDefinite) {
    const double defect = A.symmetry_defect();
    if (defect > 1e-12) throw SolverError("factor_solve: matrix is not symmetric (defect " + std::to_string(defect) + ")");
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(Mc);
    // A zero pivot stops the factorization there; D is valid up to it.
    const Eigen::VectorXd D = ldlt.vectorD();
    double scale = 1e-300;
    for (Index i = 0; i < D.size(); ++i) {
      if (!(D[i] > 1e-14 * scale)) {
        const Index pivot = ldlt.permutationPinv().indices()[i];
        throw SolverError("factor_solve: matrix is not positive definite at pivot " + std::to_string(pivot), pivot);
      }
      scale = std::max(scale, D[i]);
    }
    if (ldlt.info() != Eigen::Success) throw SolverError("factor_solve: LDL^T factorization failed");
    result.x = ldlt.solve(b);
  } else {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(Mc);
    lu.factorize(Mc);
    if (lu.info() != Eigen::Success) {
      const std::string message = lu.lastErrorMessage();
      // Eigen reports the 1-based column of the permuted matrix.
      Index pivot = trailing_index(message) - 1;
      const auto& perm = lu.colsPermutation().indices();
      for (Index i = 0; pivot >= 0 && i < perm.size(); ++i)
        if (perm[i] == pivot) {
          pivot = i;
          break;
        }
      throw SolverError("factor_solve: singular matrix (" + message + ")", pivot);
    }
    result.x = lu.solve(b);
  }
  result.residual = (M * result.x - b).norm() / std::max(b.norm(), 1.0);
  if (!(result.residual <= tolerance))
    throw SolverError("factor_solve: residual " + std::to_string(result.residual) + " exceeds tolerance", -1,
                      result.residual);
  return result;
}

}  // namespace hmdg
