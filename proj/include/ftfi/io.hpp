#pragma once

#include "ftfi/types.hpp"

#include <filesystem>
#include <iosfwd>

namespace ftfi {

/// Field CSV: "# schema_version=1", then "vertex,c0,...,c{D-1}", then one
/// row "id,values..." per vertex in id order.
void write_field_csv(std::ostream& out, const Matrix& X);
/// Reads the format above; rows may come in any order but every id
/// 0..n-1 must appear exactly once. Throws ParseError.
Matrix read_field_csv(std::istream& in);
Matrix load_field_csv(const std::filesystem::path& path);

} // namespace ftfi
