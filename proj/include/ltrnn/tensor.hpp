#pragma once

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "ltrnn/shape.hpp"

namespace ltrnn {

/// Immutable, shareable sorted list of linear indices (the observed set Omega).
///
/// Sparse tensors that live on the same observed set share one Support, so
/// the index list is stored once no matter how many value arrays ride on it.
class Support {
public:
    Support() : idx_(std::make_shared<const std::vector<Index>>()) {}
    /// Takes a strictly increasing list; throws otherwise.
    explicit Support(std::vector<Index> sorted_indices, Index numel);

    [[nodiscard]] std::size_t size() const noexcept { return idx_->size(); }
    [[nodiscard]] bool empty() const noexcept { return idx_->empty(); }
    [[nodiscard]] Index operator[](std::size_t i) const { return (*idx_)[i]; }
    [[nodiscard]] std::span<const Index> indices() const noexcept { return *idx_; }
    [[nodiscard]] auto begin() const noexcept { return idx_->begin(); }
    [[nodiscard]] auto end() const noexcept { return idx_->end(); }

    /// True when both share storage or hold identical index lists.
    [[nodiscard]] bool same_as(const Support& other) const;

private:
    std::shared_ptr<const std::vector<Index>> idx_;
};

/// Coordinate-list sparse tensor: a Support plus one finite value per index.
class SparseTensor {
public:
    SparseTensor() = default;

    /// Builds from (linear index, value) pairs in any order. Duplicate
    /// indices, out-of-range indices and non-finite values are rejected.
    SparseTensor(Shape shape, std::vector<std::pair<Index, double>> entries);

    /// Values aligned with an existing support.
    SparseTensor(Shape shape, Support support, std::vector<double> values);

    /// All-zero values on the given support.
    static SparseTensor zeros(Shape shape, Support support);

    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
    [[nodiscard]] const Support& support() const noexcept { return support_; }
    [[nodiscard]] std::size_t nnz() const noexcept { return values_.size(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::span<double> mutable_values() noexcept { return values_; }
    [[nodiscard]] Index index(std::size_t i) const { return support_[i]; }

    /// Same shape and support, new values.
    [[nodiscard]] SparseTensor with_values(std::vector<double> values) const;

    [[nodiscard]] double frobenius_norm() const;

private:
    Shape shape_;
    Support support_;
    std::vector<double> values_;
};

/// Dense tensor stored in the global first-fastest linearization order.
class DenseTensor {
public:
    DenseTensor() = default;
    explicit DenseTensor(Shape shape);
    DenseTensor(Shape shape, std::vector<double> values);

    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::span<double> values() noexcept { return values_; }
    [[nodiscard]] double operator[](Index linear) const { return values_[static_cast<std::size_t>(linear)]; }
    [[nodiscard]] double& operator[](Index linear) { return values_[static_cast<std::size_t>(linear)]; }
    [[nodiscard]] double at(std::span<const Index> idx) const { return (*this)[shape_.linearize(idx)]; }

    [[nodiscard]] double frobenius_norm() const;

    /// P_Omega: restriction to a sorted support.
    [[nodiscard]] SparseTensor restrict_to(const Support& support) const;

private:
    Shape shape_;
    std::vector<double> values_;
};

/// Pure relabeling: the entry at linear index l stays at linear index l.
SparseTensor reshape(const SparseTensor& t, const Shape& new_shape);
DenseTensor reshape(const DenseTensor& t, const Shape& new_shape);
DenseTensor reshape(DenseTensor&& t, const Shape& new_shape);

/// alpha * x + beta * y for tensors on the same support.
SparseTensor sparse_axpy(double alpha, const SparseTensor& x, double beta, const SparseTensor& y);

/// Zero-filled dense tensor holding the sparse entries.
DenseTensor to_dense(const SparseTensor& t);

}  // namespace ltrnn
