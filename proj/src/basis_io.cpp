#include "ltrnn/basis_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "ltrnn/errors.hpp"

namespace ltrnn {

namespace {

constexpr const char* kMagic = "LTRNN-BASIS v1";

void put(std::ostream& os, double x) {
    static_assert(std::endian::native == std::endian::little, "basis files are little-endian");
    char buf[8];
    std::memcpy(buf, &x, 8);
    os.write(buf, 8);
}

double get(std::istream& is, const std::filesystem::path& path) {
    char buf[8];
    if (!is.read(buf, 8)) throw IoError(path.string() + ": truncated basis file");
    double x = 0;
    std::memcpy(&x, buf, 8);
    return x;
}

std::vector<long long> read_numbers(std::istream& is, const std::filesystem::path& path) {
    std::string line;
    if (!std::getline(is, line)) throw IoError(path.string() + ": truncated basis header");
    std::istringstream ls(line);
    std::vector<long long> out;
    long long x = 0;
    while (ls >> x) out.push_back(x);
    if (!ls.eof() || out.empty()) throw IoError(path.string() + ": malformed basis header line '" + line + "'");
    return out;
}

}  // namespace

void save_basis(const std::filesystem::path& path, const BasisFactorSet& basis) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    os << kMagic << '\n';
    const Shape& s = basis.shape();
    for (std::size_t n = 0; n < s.order(); ++n) os << (n ? " " : "") << s.dim(n);
    os << '\n' << basis.depth() << '\n';
    auto ranks = basis.ranks();
    for (std::size_t k = 0; k < ranks.size(); ++k) os << (k ? " " : "") << ranks[k];
    os << '\n';
    for (std::size_t k = 0; k < basis.order(); ++k) {
        const ModeFactors& m = basis.mode(k);
        for (std::size_t j = 0; j < m.rank(); ++j) {
            put(os, m.sigma[j]);
            for (double x : m.u[j]) put(os, x);
            for (double x : m.v[j]) put(os, x);
        }
    }
    if (!os) throw IoError("write failed for '" + path.string() + "'");
}

BasisFactorSet load_basis(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(is, line) || line != kMagic) throw IoError(path.string() + ": not a basis file");
    std::vector<Index> dims;
    for (long long x : read_numbers(is, path)) dims.push_back(static_cast<Index>(x));
    const auto depth = read_numbers(is, path);
    const auto ranks = read_numbers(is, path);
    if (depth.size() != 1 || depth[0] < 1) throw IoError(path.string() + ": bad depth");
    BasisFactorSet basis(Shape(std::move(dims)), static_cast<std::size_t>(depth[0]));
    if (ranks.size() != basis.order()) throw IoError(path.string() + ": rank list does not match the order");
    for (std::size_t k = 0; k < basis.order(); ++k) {
        if (ranks[k] < 0) throw IoError(path.string() + ": negative rank");
        const auto& uf = basis.unfolding(k);
        for (long long j = 0; j < ranks[k]; ++j) {
            const double sigma = get(is, path);
            Eigen::VectorXd u(uf.rows()), v(uf.cols());
            for (auto& x : u) x = get(is, path);
            for (auto& x : v) x = get(is, path);
            basis.append(k, std::move(u), std::move(v), sigma);
        }
    }
    if (is.peek() != std::char_traits<char>::eof()) throw IoError(path.string() + ": trailing bytes after basis data");
    return basis;
}

}  // namespace ltrnn
