#pragma once

#include <filesystem>
#include <iosfwd>

#include "ltrnn/tensor.hpp"

namespace ltrnn {

// On-disk tensor formats.
//
//   LTRNN-DENSE v1\n
//   I_1 I_2 ... I_N\n
//   <numel little-endian float64 values, first coordinate fastest>
//
//   LTRNN-SPARSE v1\n
//   I_1 I_2 ... I_N\n
//   i_1,...,i_N,value\n      (zero-based, one line per entry)

void write_dense(std::ostream& os, const DenseTensor& t);
void write_sparse(std::ostream& os, const SparseTensor& t);
DenseTensor read_dense(std::istream& is);
SparseTensor read_sparse(std::istream& is);

void save_dense(const std::filesystem::path& path, const DenseTensor& t);
void save_sparse(const std::filesystem::path& path, const SparseTensor& t);
DenseTensor load_dense(const std::filesystem::path& path);
SparseTensor load_sparse(const std::filesystem::path& path);

/// Reads only the header of either format.
Shape peek_shape(const std::filesystem::path& path);

}  // namespace ltrnn
