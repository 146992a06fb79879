#include "ltrnn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ltrnn/errors.hpp"

namespace ltrnn {

namespace {

void require_finite(std::span<const double> values) {
    for (double v : values)
        if (!std::isfinite(v)) throw ParameterError("sparse tensor values must be finite");
}

double norm2(std::span<const double> values) {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
}

}  // namespace

Support::Support(std::vector<Index> sorted_indices, Index numel) {
    for (std::size_t i = 0; i < sorted_indices.size(); ++i) {
        Index l = sorted_indices[i];
        if (l < 0 || l >= numel)
            throw BoundsError("linear index " + std::to_string(l) + " out of range");
        if (i > 0 && l <= sorted_indices[i - 1])
            throw SupportError("support indices must be strictly increasing");
    }
    idx_ = std::make_shared<const std::vector<Index>>(std::move(sorted_indices));
}

bool Support::same_as(const Support& other) const {
    return idx_ == other.idx_ || *idx_ == *other.idx_;
}

SparseTensor::SparseTensor(Shape shape, std::vector<std::pair<Index, double>> entries)
    : shape_(std::move(shape)) {
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Index> idx;
    idx.reserve(entries.size());
    values_.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i > 0 && entries[i].first == entries[i - 1].first)
            throw SupportError("duplicate entry at linear index " + std::to_string(entries[i].first));
        idx.push_back(entries[i].first);
        values_.push_back(entries[i].second);
    }
    require_finite(values_);
    support_ = Support(std::move(idx), shape_.numel());
}

SparseTensor::SparseTensor(Shape shape, Support support, std::vector<double> values)
    : shape_(std::move(shape)), support_(std::move(support)), values_(std::move(values)) {
    if (values_.size() != support_.size())
        throw SupportError("value count " + std::to_string(values_.size()) +
                           " does not match support size " + std::to_string(support_.size()));
    if (!support_.empty() && support_[support_.size() - 1] >= shape_.numel())
        throw BoundsError("support does not fit shape " + shape_.to_string());
    require_finite(values_);
}

SparseTensor SparseTensor::zeros(Shape shape, Support support) {
    std::vector<double> v(support.size(), 0.0);
    return SparseTensor(std::move(shape), std::move(support), std::move(v));
}

SparseTensor SparseTensor::with_values(std::vector<double> values) const {
    return SparseTensor(shape_, support_, std::move(values));
}

double SparseTensor::frobenius_norm() const { return norm2(values_); }

DenseTensor::DenseTensor(Shape shape)
    : shape_(std::move(shape)), values_(static_cast<std::size_t>(shape_.numel()), 0.0) {}

DenseTensor::DenseTensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
    if (static_cast<Index>(values_.size()) != shape_.numel())
        throw ShapeError("dense value count " + std::to_string(values_.size()) +
                         " does not match shape " + shape_.to_string());
}

double DenseTensor::frobenius_norm() const { return norm2(values_); }

SparseTensor DenseTensor::restrict_to(const Support& support) const {
    std::vector<double> v;
    v.reserve(support.size());
    for (Index l : support) v.push_back(values_[static_cast<std::size_t>(l)]);
    return SparseTensor(shape_, support, std::move(v));
}

namespace {

void require_same_count(const Shape& from, const Shape& to) {
    if (from.numel() != to.numel())
        throw ShapeError("cannot reshape " + from.to_string() + " (" + std::to_string(from.numel()) +
                         " elements) into " + to.to_string() + " (" + std::to_string(to.numel()) +
                         " elements)");
}

}  // namespace

SparseTensor reshape(const SparseTensor& t, const Shape& new_shape) {
    require_same_count(t.shape(), new_shape);
    return SparseTensor(new_shape, t.support(), std::vector<double>(t.values().begin(), t.values().end()));
}

DenseTensor reshape(const DenseTensor& t, const Shape& new_shape) {
    require_same_count(t.shape(), new_shape);
    return DenseTensor(new_shape, std::vector<double>(t.values().begin(), t.values().end()));
}

DenseTensor reshape(DenseTensor&& t, const Shape& new_shape) {
    require_same_count(t.shape(), new_shape);
    std::vector<double> v(t.values().begin(), t.values().end());
    t = DenseTensor();
    return DenseTensor(new_shape, std::move(v));
}

SparseTensor sparse_axpy(double alpha, const SparseTensor& x, double beta, const SparseTensor& y) {
    if (!(x.shape() == y.shape()))
        throw ShapeError("axpy shape mismatch " + x.shape().to_string() + " vs " + y.shape().to_string());
    if (!x.support().same_as(y.support())) throw SupportError("axpy operands have different supports");
    std::vector<double> out(x.nnz());
    auto xv = x.values();
    auto yv = y.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha * xv[i] + beta * yv[i];
    return x.with_values(std::move(out));
}

DenseTensor to_dense(const SparseTensor& t) {
    DenseTensor d(t.shape());
    auto v = t.values();
    for (std::size_t i = 0; i < t.nnz(); ++i) d[t.index(i)] = v[i];
    return d;
}

}  // namespace ltrnn
