#pragma once

#include <filesystem>

#include "ltrnn/basis.hpp"

namespace ltrnn {

// Basis file:
//
//   LTRNN-BASIS v1\n
//   I_1 ... I_N\n
//   d\n
//   R_1 ... R_N\n
//   per mode, per column: sigma, u (m_k values), v (n_k values) as little-endian float64

void save_basis(const std::filesystem::path& path, const BasisFactorSet& basis);
BasisFactorSet load_basis(const std::filesystem::path& path);

}  // namespace ltrnn
