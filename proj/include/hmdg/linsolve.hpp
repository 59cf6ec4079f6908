#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace hmdg {

using Index = Eigen::Index;

/// Assembly-friendly sparse matrix. Entries are accumulated as triplets and
/// merged by `finalize()`, whose result depends only on the multiset of
/// inserted (row, col, value) triplets, not on their order.
class SparseMatrix {
 public:
  using Compressed = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  SparseMatrix() = default;
  SparseMatrix(Index rows, Index cols);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

  void add(Index row, Index col, double value);
  /// Adds block(i, j) at (rows[i], cols[j]).
  void add_block(const std::vector<Index>& rows, const std::vector<Index>& cols, const Eigen::MatrixXd& block);

  void finalize();
  bool finalized() const { return finalized_; }
  /// Finalized compressed matrix; throws InvalidArgument before finalize().
  const Compressed& matrix() const;

  /// ||A - A^T||_F / ||A||_F (0 for the zero matrix).
  double symmetry_defect() const;

 private:
  struct Entry {
    Index row;
    Index col;
    double value;
  };
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Entry> entries_;
  Compressed matrix_;
  bool finalized_ = false;
};

enum class MatrixKind { SymmetricPositiveDefinite, General };

struct SolveResult {
  Eigen::VectorXd x;
  /// ||A x - b|| / max(||b||, 1).
  double residual = 0.0;
};

/// Default relative residual tolerance: 1e-12 for SPD, 1e-10 for general.
double default_tolerance(MatrixKind kind);

/// Direct sparse solve. SPD: simplicial LDL^T with AMD ordering, after
/// rejecting symmetry defects above 1e-12; general: supernodal LU with COLAMD.
/// Throws SolverError (with the pivot index) on singularity and when the
/// residual exceeds `tolerance` (negative selects the default).
SolveResult factor_solve(const SparseMatrix& A, const Eigen::VectorXd& b, MatrixKind kind, double tolerance = -1.0);

}  // namespace hmdg
