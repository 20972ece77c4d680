#pragma once

#include "lqmfg/matrix_path.hpp"

#include <string>
#include <vector>

namespace lqmfg {

/// Shortest decimal string that round-trips the binary double.
std::string format_double(double x);

/// Writes `t,entry_11,entry_12,...` (row-major entries), one row per node.
void write_path_csv(const std::string& file, const MatrixPath& path);

/// Writes a table with an explicit header; each row formatted with
/// round-trip doubles.
void write_table_csv(const std::string& file, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

}  // namespace lqmfg
