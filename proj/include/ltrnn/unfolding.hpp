#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ltrnn/shape.hpp"
#include "ltrnn/tensor.hpp"

namespace ltrnn {

/// Row/column position inside an unfolded matrix.
struct MatrixCoords {
    Index row = 0;
    Index col = 0;
    friend bool operator==(const MatrixCoords&, const MatrixCoords&) = default;
};

/// Tensor circular unfolding X_<k,d>.
///
/// Modes are zero-based. Rows are indexed by the d cyclically consecutive
/// modes a, a+1, ..., k with a = (k - d + 1) mod N; columns by the remaining
/// modes k+1, ..., a-1 (cyclic). Inside each composite index the first listed
/// mode varies fastest, matching Shape's linearization.
class CircularUnfolding {
public:
    CircularUnfolding(Shape shape, std::size_t k, std::size_t d);

    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t mode() const noexcept { return k_; }
    [[nodiscard]] std::size_t depth() const noexcept { return d_; }
    [[nodiscard]] std::size_t start_mode() const noexcept { return a_; }
    [[nodiscard]] const std::vector<std::size_t>& row_modes() const noexcept { return row_modes_; }
    [[nodiscard]] const std::vector<std::size_t>& col_modes() const noexcept { return col_modes_; }
    [[nodiscard]] Index rows() const noexcept { return rows_; }
    [[nodiscard]] Index cols() const noexcept { return cols_; }

    [[nodiscard]] MatrixCoords to_matrix_coords(std::span<const Index> idx) const;
    [[nodiscard]] MultiIndex from_matrix_coords(MatrixCoords rc) const;

    /// Same map starting from a tensor linear index, using two div/mod pairs.
    [[nodiscard]] MatrixCoords coords_of_linear(Index linear) const noexcept {
        Index low = linear % low_size_;
        Index rest = linear / low_size_;
        Index mid = rest % mid_size_;
        Index high = rest / mid_size_;
        Index wrapped = high + high_size_ * low;
        return rows_are_mid_ ? MatrixCoords{mid, wrapped} : MatrixCoords{wrapped, mid};
    }

    [[nodiscard]] Index linear_of(MatrixCoords rc) const;

private:
    Shape shape_;
    std::size_t k_ = 0, d_ = 0, a_ = 0;
    std::vector<std::size_t> row_modes_, col_modes_;
    Index rows_ = 0, cols_ = 0;
    // The modes split into three contiguous runs [0,p) [p,q) [q,N); one of
    // rows/cols is the middle run, the other is the last run followed by the
    // first.
    Index low_size_ = 1, mid_size_ = 1, high_size_ = 1;
    bool rows_are_mid_ = true;
};

/// Start mode a for zero-based mode k and depth d in an order-N tensor.
std::size_t circular_start_mode(std::size_t order, std::size_t k, std::size_t d);

/// Matrix view of a sparse tensor through one unfolding; never materializes
/// the matrix. Row/column positions of the entries are computed once at
/// construction and the values are borrowed from the tensor.
class SparseMatrixView {
public:
    SparseMatrixView(const SparseTensor& t, const CircularUnfolding& u, unsigned threads = 1);

    [[nodiscard]] Index rows() const noexcept { return rows_; }
    [[nodiscard]] Index cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t nnz() const noexcept { return values_.size(); }

    /// y = M x
    void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
    /// z = M^T y
    void apply_transpose(const Eigen::VectorXd& y, Eigen::VectorXd& z) const;

    [[nodiscard]] std::span<const std::uint32_t> row_index() const noexcept { return row_; }
    [[nodiscard]] std::span<const std::uint32_t> col_index() const noexcept { return col_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

private:
    std::span<const double> values_;
    std::vector<std::uint32_t> row_, col_;
    Index rows_ = 0, cols_ = 0;
    unsigned threads_ = 1;
};

/// Values sigma * u[row(l)] * v[col(l)] at every l in the support.
SparseTensor fold_rank_one_at(const CircularUnfolding& u, double sigma, const Eigen::VectorXd& uvec,
                              const Eigen::VectorXd& vvec, const Support& support);

/// Random tensor-ring tensor with standard-normal cores. ranks[n] is the bond
/// between core n and core n+1 (cyclic), so core n has shape
/// ranks[n-1] x I_n x ranks[n].
DenseTensor tr_tensor(const Shape& shape, std::span<const Index> ranks, std::uint64_t seed);

/// Upper bound on rank(X_<k,d>) for a tensor-ring tensor with the given ranks.
Index tr_unfolding_rank_bound(std::span<const Index> ranks, std::size_t k, std::size_t d);

}  // namespace ltrnn
