#include "ltrnn/tensor_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "ltrnn/errors.hpp"

namespace ltrnn {

namespace {

constexpr const char* kDenseMagic = "LTRNN-DENSE v1";
constexpr const char* kSparseMagic = "LTRNN-SPARSE v1";

void write_dims(std::ostream& os, const Shape& s) {
    for (std::size_t n = 0; n < s.order(); ++n) os << (n ? " " : "") << s.dim(n);
    os << '\n';
}

Shape read_dims(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("missing dimension line");
    std::istringstream ls(line);
    std::vector<Index> dims;
    long long d = 0;
    while (ls >> d) dims.push_back(static_cast<Index>(d));
    if (!ls.eof()) throw IoError("malformed dimension line '" + line + "'");
    return Shape(std::move(dims));
}

void expect_magic(std::istream& is, const char* magic) {
    std::string line;
    if (!std::getline(is, line) || line != magic)
        throw IoError(std::string("expected header '") + magic + "'");
}

std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
}

}  // namespace

void write_dense(std::ostream& os, const DenseTensor& t) {
    os << kDenseMagic << '\n';
    write_dims(os, t.shape());
    constexpr std::size_t kChunk = 1 << 14;
    std::vector<char> buf(kChunk * 8);
    auto v = t.values();
    for (std::size_t start = 0; start < v.size(); start += kChunk) {
        std::size_t count = std::min(kChunk, v.size() - start);
        for (std::size_t i = 0; i < count; ++i) {
            std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(v[start + i]));
            std::memcpy(buf.data() + 8 * i, &bits, 8);
        }
        os.write(buf.data(), static_cast<std::streamsize>(count * 8));
    }
    if (!os) throw IoError("failed writing dense tensor");
}

DenseTensor read_dense(std::istream& is) {
    expect_magic(is, kDenseMagic);
    Shape shape = read_dims(is);
    std::vector<double> values(static_cast<std::size_t>(shape.numel()));
    std::vector<char> raw(values.size() * 8);
    is.read(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(is.gcount()) != raw.size())
        throw IoError("dense payload truncated: expected " + std::to_string(raw.size()) + " bytes");
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, raw.data() + 8 * i, 8);
        values[i] = std::bit_cast<double>(to_le(bits));
    }
    return DenseTensor(std::move(shape), std::move(values));
}

void write_sparse(std::ostream& os, const SparseTensor& t) {
    os << kSparseMagic << '\n';
    write_dims(os, t.shape());
    MultiIndex idx(t.shape().order());
    char num[64];
    auto v = t.values();
    for (std::size_t i = 0; i < t.nnz(); ++i) {
        t.shape().delinearize(t.index(i), idx);
        for (Index c : idx) os << c << ',';
        // Shortest representation that round-trips exactly.
        auto res = std::to_chars(num, num + sizeof num, v[i]);
        os.write(num, res.ptr - num);
        os << '\n';
    }
    if (!os) throw IoError("failed writing sparse tensor");
}

SparseTensor read_sparse(std::istream& is) {
    expect_magic(is, kSparseMagic);
    Shape shape = read_dims(is);
    const std::size_t order = shape.order();
    std::vector<std::pair<Index, double>> entries;
    MultiIndex idx(order);
    std::string line;
    std::size_t lineno = 2;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (std::size_t n = 0; n < order; ++n) {
            auto r = std::from_chars(p, end, idx[n]);
            if (r.ec != std::errc() || r.ptr == end || *r.ptr != ',')
                throw IoError("malformed sparse entry on line " + std::to_string(lineno));
            p = r.ptr + 1;
        }
        double value = 0.0;
        auto r = std::from_chars(p, end, value);
        if (r.ec != std::errc() || r.ptr != end)
            throw IoError("malformed sparse value on line " + std::to_string(lineno));
        entries.emplace_back(shape.linearize(idx), value);
    }
    return SparseTensor(std::move(shape), std::move(entries));
}

void save_dense(const std::filesystem::path& path, const DenseTensor& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    try {
        write_dense(os, t);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void save_sparse(const std::filesystem::path& path, const SparseTensor& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    try {
        write_sparse(os, t);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

DenseTensor load_dense(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path.string() + "'");
    try {
        return read_dense(is);
    } catch (const Error& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

SparseTensor load_sparse(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path.string() + "'");
    try {
        return read_sparse(is);
    } catch (const Error& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

Shape peek_shape(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path.string() + "'");
    std::string magic;
    std::getline(is, magic);
    if (magic != kDenseMagic && magic != kSparseMagic)
        throw IoError(path.string() + ": not an LTRNN tensor file");
    return read_dims(is);
}

}  // namespace ltrnn
