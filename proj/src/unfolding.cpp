#include "ltrnn/unfolding.hpp"

#include <limits>
#include <random>
#include <string>
#include <thread>

#include "ltrnn/errors.hpp"

namespace ltrnn {

std::size_t circular_start_mode(std::size_t order, std::size_t k, std::size_t d) {
    // One-based a = k - d + 1 (or + N when d > k); zero-based this is the
    // same shift taken modulo N.
    return (k + order + 1 - d) % order;
}

CircularUnfolding::CircularUnfolding(Shape shape, std::size_t k, std::size_t d)
    : shape_(std::move(shape)), k_(k), d_(d) {
    const std::size_t n_modes = shape_.order();
    if (k >= n_modes)
        throw ParameterError("mode " + std::to_string(k) + " out of range for order " +
                             std::to_string(n_modes));
    if (d < 1 || d >= n_modes)
        throw ParameterError("unfolding depth d=" + std::to_string(d) + " must satisfy 1 <= d < N=" +
                             std::to_string(n_modes));
    a_ = circular_start_mode(n_modes, k, d);
    for (std::size_t j = 0; j < d; ++j) row_modes_.push_back((a_ + j) % n_modes);
    for (std::size_t j = 0; j < n_modes - d; ++j) col_modes_.push_back((k + 1 + j) % n_modes);

    rows_ = 1;
    for (auto m : row_modes_) rows_ *= shape_.dim(m);
    cols_ = shape_.numel() / rows_;

    auto prod = [&](std::size_t from, std::size_t to) {
        Index p = 1;
        for (std::size_t m = from; m < to; ++m) p *= shape_.dim(m);
        return p;
    };
    if (a_ <= k) {
        // rows: [a, k]; cols: [k+1, N) then [0, a)
        rows_are_mid_ = true;
        low_size_ = prod(0, a_);
        mid_size_ = prod(a_, k + 1);
        high_size_ = prod(k + 1, n_modes);
    } else {
        // rows: [a, N) then [0, k]; cols: [k+1, a)
        rows_are_mid_ = false;
        low_size_ = prod(0, k + 1);
        mid_size_ = prod(k + 1, a_);
        high_size_ = prod(a_, n_modes);
    }
}

MatrixCoords CircularUnfolding::to_matrix_coords(std::span<const Index> idx) const {
    (void)shape_.linearize(idx);  // bounds check
    MatrixCoords rc;
    Index s = 1;
    for (auto m : row_modes_) {
        rc.row += idx[m] * s;
        s *= shape_.dim(m);
    }
    s = 1;
    for (auto m : col_modes_) {
        rc.col += idx[m] * s;
        s *= shape_.dim(m);
    }
    return rc;
}

MultiIndex CircularUnfolding::from_matrix_coords(MatrixCoords rc) const {
    if (rc.row < 0 || rc.row >= rows_ || rc.col < 0 || rc.col >= cols_)
        throw BoundsError("matrix coordinates out of range");
    MultiIndex idx(shape_.order());
    for (auto m : row_modes_) {
        idx[m] = rc.row % shape_.dim(m);
        rc.row /= shape_.dim(m);
    }
    for (auto m : col_modes_) {
        idx[m] = rc.col % shape_.dim(m);
        rc.col /= shape_.dim(m);
    }
    return idx;
}

Index CircularUnfolding::linear_of(MatrixCoords rc) const {
    Index mid = rows_are_mid_ ? rc.row : rc.col;
    Index wrapped = rows_are_mid_ ? rc.col : rc.row;
    Index high = wrapped % high_size_;
    Index low = wrapped / high_size_;
    return low + low_size_ * (mid + mid_size_ * high);
}

SparseMatrixView::SparseMatrixView(const SparseTensor& t, const CircularUnfolding& u, unsigned threads)
    : values_(t.values()), rows_(u.rows()), cols_(u.cols()), threads_(threads == 0 ? 1 : threads) {
    if (!(t.shape() == u.shape()))
        throw ShapeError("tensor shape " + t.shape().to_string() + " does not match unfolding shape " +
                         u.shape().to_string());
    constexpr Index kMax = std::numeric_limits<std::uint32_t>::max();
    if (rows_ > kMax || cols_ > kMax) throw ParameterError("unfolding dimensions exceed 32-bit range");
    row_.resize(t.nnz());
    col_.resize(t.nnz());
    for (std::size_t i = 0; i < t.nnz(); ++i) {
        auto rc = u.coords_of_linear(t.index(i));
        row_[i] = static_cast<std::uint32_t>(rc.row);
        col_[i] = static_cast<std::uint32_t>(rc.col);
    }
}

namespace {

// Below this many entries a single pass is faster than spawning threads.
constexpr std::size_t kParallelMin = 1 << 15;

// Scatter-accumulate out[dst[i]] += val[i] * in[src[i]] over all entries,
// optionally split into contiguous chunks with per-chunk buffers that are
// summed in chunk order, so the result is fixed for a given thread count.
void scatter_product(std::span<const double> val, std::span<const std::uint32_t> dst,
                     std::span<const std::uint32_t> src, const Eigen::VectorXd& in, Eigen::VectorXd& out,
                     Index out_size, unsigned threads) {
    out.setZero(out_size);
    const std::size_t n = val.size();
    if (threads <= 1 || n < kParallelMin) {
        for (std::size_t i = 0; i < n; ++i) out[dst[i]] += val[i] * in[src[i]];
        return;
    }
    std::vector<Eigen::VectorXd> partial(threads);
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            auto& acc = partial[t];
            acc.setZero(out_size);
            const std::size_t lo = t * chunk;
            const std::size_t hi = std::min(n, lo + chunk);
            for (std::size_t i = lo; i < hi; ++i) acc[dst[i]] += val[i] * in[src[i]];
        });
    }
    for (auto& th : pool) th.join();
    for (unsigned t = 0; t < threads; ++t) out += partial[t];
}

}  // namespace

void SparseMatrixView::apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
    if (x.size() != cols_) throw ShapeError("matvec input length mismatch");
    scatter_product(values_, row_, col_, x, y, rows_, threads_);
}

void SparseMatrixView::apply_transpose(const Eigen::VectorXd& y, Eigen::VectorXd& z) const {
    if (y.size() != rows_) throw ShapeError("rmatvec input length mismatch");
    scatter_product(values_, col_, row_, y, z, cols_, threads_);
}

SparseTensor fold_rank_one_at(const CircularUnfolding& u, double sigma, const Eigen::VectorXd& uvec,
                              const Eigen::VectorXd& vvec, const Support& support) {
    if (uvec.size() != u.rows() || vvec.size() != u.cols())
        throw ShapeError("rank-one factor lengths (" + std::to_string(uvec.size()) + ", " +
                         std::to_string(vvec.size()) + ") do not match unfolding " +
                         std::to_string(u.rows()) + "x" + std::to_string(u.cols()));
    std::vector<double> values(support.size());
    for (std::size_t i = 0; i < support.size(); ++i) {
        auto rc = u.coords_of_linear(support[i]);
        values[i] = sigma * uvec[rc.row] * vvec[rc.col];
    }
    return SparseTensor(u.shape(), support, std::move(values));
}

DenseTensor tr_tensor(const Shape& shape, std::span<const Index> ranks, std::uint64_t seed) {
    const std::size_t order = shape.order();
    if (ranks.size() != order) throw ParameterError("need one tensor-ring rank per mode");
    for (Index r : ranks)
        if (r < 1) throw ParameterError("tensor-ring ranks must be positive");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    // cores[n][i] is the lateral slice G_n(:, i, :).
    std::vector<std::vector<Eigen::MatrixXd>> cores(order);
    for (std::size_t n = 0; n < order; ++n) {
        const Index left = ranks[(n + order - 1) % order];
        const Index right = ranks[n];
        cores[n].resize(static_cast<std::size_t>(shape.dim(n)));
        for (auto& slice : cores[n]) {
            slice.resize(left, right);
            for (Index c = 0; c < right; ++c)
                for (Index r = 0; r < left; ++r) slice(r, c) = normal(rng);
        }
    }

    DenseTensor out(shape);
    MultiIndex idx(order);
    for (Index l = 0; l < shape.numel(); ++l) {
        shape.delinearize(l, idx);
        Eigen::MatrixXd chain = cores[0][static_cast<std::size_t>(idx[0])];
        for (std::size_t n = 1; n < order; ++n) chain = chain * cores[n][static_cast<std::size_t>(idx[n])];
        out[l] = chain.trace();
    }
    return out;
}

Index tr_unfolding_rank_bound(std::span<const Index> ranks, std::size_t k, std::size_t d) {
    const std::size_t order = ranks.size();
    const std::size_t a = circular_start_mode(order, k, d);
    return ranks[k] * ranks[(a + order - 1) % order];
}

}  // namespace ltrnn
