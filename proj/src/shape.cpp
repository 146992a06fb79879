#include "ltrnn/shape.hpp"

#include <limits>
#include <sstream>

#include "ltrnn/errors.hpp"

namespace ltrnn {

Index checked_product(std::span<const Index> dims) {
    Index p = 1;
    for (Index d : dims) {
        if (d < 1) throw ShapeError("dimension must be >= 1, got " + std::to_string(d));
        if (p > std::numeric_limits<Index>::max() / d)
            throw ShapeError("element count overflows the index type");
        p *= d;
    }
    return p;
}

Shape::Shape(std::vector<Index> dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2) throw ShapeError("tensor order must be >= 2");
    numel_ = checked_product(dims_);
    strides_.resize(dims_.size());
    Index s = 1;
    for (std::size_t n = 0; n < dims_.size(); ++n) {
        strides_[n] = s;
        s *= dims_[n];
    }
}

Index Shape::linearize(std::span<const Index> idx) const {
    if (idx.size() != dims_.size())
        throw BoundsError("multi-index has " + std::to_string(idx.size()) +
                          " coordinates, shape has order " + std::to_string(dims_.size()));
    Index linear = 0;
    for (std::size_t n = 0; n < dims_.size(); ++n) {
        if (idx[n] < 0 || idx[n] >= dims_[n])
            throw BoundsError("coordinate " + std::to_string(idx[n]) + " out of range for mode " +
                              std::to_string(n) + " of " + to_string());
        linear += idx[n] * strides_[n];
    }
    return linear;
}

void Shape::delinearize(Index linear, std::span<Index> out) const {
    if (linear < 0 || linear >= numel_)
        throw BoundsError("linear index " + std::to_string(linear) + " out of range for " +
                          to_string());
    for (std::size_t n = 0; n < dims_.size(); ++n) {
        out[n] = linear % dims_[n];
        linear /= dims_[n];
    }
}

MultiIndex Shape::delinearize(Index linear) const {
    MultiIndex idx(dims_.size());
    delinearize(linear, idx);
    return idx;
}

std::string Shape::to_string() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t n = 0; n < dims_.size(); ++n) os << (n ? "," : "") << dims_[n];
    os << ')';
    return os.str();
}

Shape parse_shape(const std::string& text) {
    std::vector<Index> dims;
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(token, &used);
        } catch (const std::exception&) {
            throw ShapeError("cannot parse shape '" + text + "'");
        }
        if (used != token.size()) throw ShapeError("cannot parse shape '" + text + "'");
        dims.push_back(static_cast<Index>(v));
        token.clear();
    };
    for (char c : text) {
        if (c == ',' && token.empty()) throw ShapeError("empty dimension in shape '" + text + "'");
        if (c == ',' || c == 'x' || c == 'X' || c == ' ')
            flush();
        else
            token.push_back(c);
    }
    flush();
    return Shape(std::move(dims));
}

}  // namespace ltrnn
