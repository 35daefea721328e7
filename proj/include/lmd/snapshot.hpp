#pragma once

#include <string>

#include "lmd/field.hpp"

namespace lmd {

// Binary snapshot container, independent of grid spacing:
//   bytes 0..3   magic "PFLD"
//   u32          version (1)
//   u32          nx
//   u32          ny
//   u32          n_fields (3)
//   f64          time_s
//   u64          step
//   3 blocks of ny*nx f64, row-major, little-endian, in order phi, cA, cB.
// Round trips are bit-exact. The format carries no dx, so readers supply the
// grid spacing (defaulting to the 0.2 nm production value).
void write_snapshot(const FieldState& state, const std::string& path);
FieldState read_snapshot(const std::string& path, double dx_nm = 0.2);

// Canonical snapshot file name for a step index: snapshot_000000000123.pfld
std::string snapshot_filename(std::uint64_t step);

} // namespace lmd
