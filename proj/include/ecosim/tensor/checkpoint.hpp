#pragma once

#include <string>

#include "ecosim/tensor/params.hpp"

namespace ecosim::tensor {

/// Flat binary parameter snapshot:
///   magic "ECOSIMPB" | u32 version | u32 block count |
///   per block: u32 name length, name bytes, u32 rows, u32 cols |
///   raw little-endian doubles for every block in declaration order.
/// Round trips are byte-identical.
void save_parameters(const ParameterStore& store, const std::string& path);

/// Loads values into an existing store; the block table (names + shapes, in
/// order) must match exactly.
void load_parameters(ParameterStore& store, const std::string& path);

}  // namespace ecosim::tensor
