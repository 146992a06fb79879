#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "doctest.h"
#include "ltrnn/errors.hpp"
#include "ltrnn/tensor.hpp"
#include "ltrnn/tensor_io.hpp"

using namespace ltrnn;

namespace {

SparseTensor random_sparse(const Shape& shape, std::size_t count, std::mt19937_64& rng) {
    std::uniform_int_distribution<Index> pick(0, shape.numel() - 1);
    std::normal_distribution<double> normal;
    std::vector<Index> idx;
    while (idx.size() < count) {
        Index l = pick(rng);
        if (std::find(idx.begin(), idx.end(), l) == idx.end()) idx.push_back(l);
    }
    std::vector<std::pair<Index, double>> entries;
    for (Index l : idx) entries.emplace_back(l, normal(rng));
    return SparseTensor(shape, std::move(entries));
}

}  // namespace

TEST_CASE("linearize uses first-coordinate-fastest order") {
    Shape s{2, 3};
    CHECK(s.linearize(std::vector<Index>{0, 0}) == 0);
    CHECK(s.linearize(std::vector<Index>{1, 0}) == 1);
    CHECK(s.linearize(std::vector<Index>{0, 1}) == 2);

    // Enumerate (2,3,4) with the last coordinate in the outer loop.
    Shape s3{2, 3, 4};
    Index expected = 0;
    for (Index k = 0; k < 4; ++k)
        for (Index j = 0; j < 3; ++j)
            for (Index i = 0; i < 2; ++i) {
                std::vector<Index> idx{i, j, k};
                CHECK(s3.linearize(idx) == expected);
                CHECK(s3.delinearize(expected) == idx);
                ++expected;
            }
    CHECK(s3.linearize(std::vector<Index>{1, 2, 3}) == 23);
}

TEST_CASE("linearize and delinearize are inverse on every small shape") {
    for (const Shape& s : {Shape{7, 11}, Shape{3, 4, 5, 6}, Shape{2, 2, 2, 2, 2, 2, 2, 2, 2, 2}, Shape{1, 9, 1}}) {
        for (Index l = 0; l < s.numel(); ++l) REQUIRE(s.linearize(s.delinearize(l)) == l);
    }
}

TEST_CASE("shape validation") {
    CHECK_THROWS_AS(Shape({5}), ShapeError);
    CHECK_THROWS_AS(Shape({3, 0}), ShapeError);
    CHECK_THROWS_AS(Shape({Index{1} << 40, Index{1} << 40}), ShapeError);
    Shape s{2, 3};
    CHECK_THROWS_AS((void)s.linearize(std::vector<Index>{2, 0}), BoundsError);
    CHECK_THROWS_AS((void)s.linearize(std::vector<Index>{0, -1}), BoundsError);
    CHECK_THROWS_AS((void)s.linearize(std::vector<Index>{0, 0, 0}), BoundsError);
    CHECK(parse_shape("30,30,30") == Shape{30, 30, 30});
    CHECK(parse_shape("12x15x12") == Shape{12, 15, 12});
    CHECK_THROWS(parse_shape("12,,3"));
}

TEST_CASE("sparse construction sorts and rejects duplicates") {
    SparseTensor t(Shape{2, 3}, {{4, 1.0}, {1, 2.0}, {3, 3.0}});
    REQUIRE(t.nnz() == 3);
    CHECK(t.index(0) == 1);
    CHECK(t.index(1) == 3);
    CHECK(t.index(2) == 4);
    CHECK(t.values()[0] == 2.0);
    CHECK_THROWS_AS(SparseTensor(Shape{2, 3}, {{1, 1.0}, {1, 1.0}}), SupportError);
    CHECK_THROWS_AS(SparseTensor(Shape{2, 3}, {{6, 1.0}}), BoundsError);
    CHECK_THROWS_AS(SparseTensor(Shape{2, 3}, {{0, std::nan("")}}), ParameterError);
    CHECK_THROWS_AS(SparseTensor(Shape{2, 3}, {{0, INFINITY}}), ParameterError);
}

TEST_CASE("reshape relabels without moving entries") {
    DenseTensor d(Shape{4, 1}, {1, 2, 3, 4});
    DenseTensor r = reshape(d, Shape{2, 2});
    CHECK(r[3] == 4.0);
    CHECK_THROWS_AS(reshape(d, Shape{3, 2}), ShapeError);

    Shape mri{180, 216, 180};
    Shape six{12, 15, 12, 18, 12, 15};
    CHECK(mri.numel() == 6998400);
    CHECK(six.numel() == mri.numel());

    std::mt19937_64 rng(3);
    Shape a{6, 10, 4}, b{3, 2, 5, 2, 4};
    for (int rep = 0; rep < 50; ++rep) {
        SparseTensor t = random_sparse(a, 40, rng);
        SparseTensor tb = reshape(t, b);
        CHECK(tb.nnz() == t.nnz());
        SparseTensor back = reshape(tb, a);
        REQUIRE(back.nnz() == t.nnz());
        for (std::size_t i = 0; i < t.nnz(); ++i) {
            CHECK(back.index(i) == t.index(i));
            CHECK(back.values()[i] == t.values()[i]);
        }
    }
}

TEST_CASE("sparse_axpy matches a dense oracle") {
    std::mt19937_64 rng(11);
    Shape s{5, 6, 7};
    SparseTensor x = random_sparse(s, 60, rng);
    std::normal_distribution<double> normal;
    std::vector<double> yv(x.nnz());
    for (double& v : yv) v = normal(rng);
    SparseTensor y = x.with_values(yv);

    SparseTensor same = sparse_axpy(1.0, x, 0.0, y);
    for (std::size_t i = 0; i < x.nnz(); ++i) CHECK(same.values()[i] == x.values()[i]);
    SparseTensor half = sparse_axpy(0.5, x, 0.5, x);
    for (std::size_t i = 0; i < x.nnz(); ++i) CHECK(half.values()[i] == x.values()[i]);

    SparseTensor z = sparse_axpy(0.3, x, -1.7, y);
    DenseTensor dx = to_dense(x), dy = to_dense(y), dz = to_dense(z);
    double worst = 0.0;
    for (Index l = 0; l < s.numel(); ++l) worst = std::max(worst, std::abs(dz[l] - (0.3 * dx[l] - 1.7 * dy[l])));
    CHECK(worst < 1e-12);

    SparseTensor other = random_sparse(s, 60, rng);
    CHECK_THROWS_AS(sparse_axpy(1.0, x, 1.0, other), SupportError);
}

TEST_CASE("tensor files round-trip bit-exactly") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    Shape s{3, 4, 5};
    std::vector<double> vals(static_cast<std::size_t>(s.numel()));
    for (double& v : vals) v = normal(rng) * 1e7;
    vals[0] = 0.1;
    vals[1] = -0.0;
    DenseTensor d(s, vals);
    std::stringstream ds;
    write_dense(ds, d);
    CHECK(ds.str().rfind("LTRNN-DENSE v1\n3 4 5\n", 0) == 0);
    DenseTensor d2 = read_dense(ds);
    CHECK(d2.shape() == s);
    CHECK(std::memcmp(d2.values().data(), d.values().data(), vals.size() * sizeof(double)) == 0);

    SparseTensor sp = random_sparse(s, 17, rng);
    std::stringstream ss;
    write_sparse(ss, sp);
    CHECK(ss.str().rfind("LTRNN-SPARSE v1\n3 4 5\n", 0) == 0);
    SparseTensor sp2 = read_sparse(ss);
    REQUIRE(sp2.nnz() == sp.nnz());
    for (std::size_t i = 0; i < sp.nnz(); ++i) {
        CHECK(sp2.index(i) == sp.index(i));
        CHECK(sp2.values()[i] == sp.values()[i]);
    }
}

TEST_CASE("sparse text format uses zero-based coordinates") {
    std::stringstream ss("LTRNN-SPARSE v1\n2 3\n1,2,7.5\n0,0,-1\n");
    SparseTensor t = read_sparse(ss);
    REQUIRE(t.nnz() == 2);
    CHECK(t.index(0) == 0);
    CHECK(t.index(1) == 5);
    CHECK(t.values()[1] == 7.5);

    std::stringstream bad_header("LTRNN-SPARSE v2\n2 3\n");
    CHECK_THROWS_AS(read_sparse(bad_header), IoError);
    std::stringstream bad_line("LTRNN-SPARSE v1\n2 3\n1,2\n");
    CHECK_THROWS_AS(read_sparse(bad_line), IoError);
    std::stringstream dup("LTRNN-SPARSE v1\n2 3\n1,2,1\n1,2,3\n");
    CHECK_THROWS(read_sparse(dup));
    std::stringstream short_dense("LTRNN-DENSE v1\n2 3\n");
    CHECK_THROWS_AS(read_dense(short_dense), IoError);
}
