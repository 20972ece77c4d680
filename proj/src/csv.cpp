#include "lqmfg/csv.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace lqmfg {

std::string format_double(double x)
{
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

void write_path_csv(const std::string& file, const MatrixPath& path)
{
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open " + file);
    out << "t";
    for (int i = 0; i < path.rows(); ++i)
        for (int j = 0; j < path.cols(); ++j) out << ",entry_" << (i + 1) << (j + 1);
    out << "\n";
    for (int k = 0; k < path.size(); ++k) {
        out << format_double(path.nodes()[k]);
        const auto& v = path.value(k);
        for (int i = 0; i < v.rows(); ++i)
            for (int j = 0; j < v.cols(); ++j) out << "," << format_double(v(i, j));
        out << "\n";
    }
}

void write_table_csv(const std::string& file, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows)
{
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open " + file);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << "\n";
    }
}

}  // namespace lqmfg
