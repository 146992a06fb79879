#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ltrnn {

using Index = std::int64_t;

/// Zero-based coordinates (i_1, ..., i_N).
using MultiIndex = std::vector<Index>;

/// Dimensions of an N-th order tensor (N >= 2).
///
/// All tensors in the library share one linearization convention: the first
/// coordinate varies fastest, so linear = i_1 + I_1 * (i_2 + I_2 * (...)).
/// Unfoldings reuse the same rule for their composite row/column indices.
class Shape {
public:
    Shape() = default;
    explicit Shape(std::vector<Index> dims);
    Shape(std::initializer_list<Index> dims) : Shape(std::vector<Index>(dims)) {}

    [[nodiscard]] std::size_t order() const noexcept { return dims_.size(); }
    [[nodiscard]] Index dim(std::size_t n) const { return dims_.at(n); }
    [[nodiscard]] const std::vector<Index>& dims() const noexcept { return dims_; }
    [[nodiscard]] Index numel() const noexcept { return numel_; }
    /// Stride of mode n in the linear index.
    [[nodiscard]] Index stride(std::size_t n) const { return strides_.at(n); }

    [[nodiscard]] Index linearize(std::span<const Index> idx) const;
    [[nodiscard]] MultiIndex delinearize(Index linear) const;
    void delinearize(Index linear, std::span<Index> out) const;

    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const Shape& a, const Shape& b) { return a.dims_ == b.dims_; }

private:
    std::vector<Index> dims_;
    std::vector<Index> strides_;
    Index numel_ = 0;
};

/// Parse "30,30,30" (or "30x30x30") into a shape.
Shape parse_shape(const std::string& text);

/// Product of dims[first, last) with overflow checking.
Index checked_product(std::span<const Index> dims);

}  // namespace ltrnn
