#include "ftfi/io.hpp"
#include "ftfi/errors.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace ftfi {

void write_field_csv(std::ostream& out, const Matrix& X)
{
    out << "# schema_version=1\nvertex";
    for (Eigen::Index c = 0; c < X.cols(); ++c)
        out << ",c" << c;
    out << '\n' << std::setprecision(17);
    for (Eigen::Index v = 0; v < X.rows(); ++v) {
        out << v;
        for (Eigen::Index c = 0; c < X.cols(); ++c)
            out << ',' << X(v, c);
        out << '\n';
    }
}

Matrix read_field_csv(std::istream& in)
{
    std::string line;
    int line_no = 0;
    bool header = false;
    std::vector<std::vector<double>> rows;
    std::vector<long long> ids;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        if (!header) {
            if (line.rfind("vertex", 0) != 0)
                throw ParseError("field CSV line " + std::to_string(line_no) + ": expected a 'vertex,...' header");
            header = true;
            width = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
            if (width == 0)
                throw ParseError("field CSV line " + std::to_string(line_no) + ": header names no value columns");
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (cells.size() < 2)
            throw ParseError("field CSV line " + std::to_string(line_no) + ": need an id and at least one value");
        try {
            std::size_t used = 0;
            ids.push_back(std::stoll(cells[0], &used));
            if (used != cells[0].size())
                throw std::invalid_argument("id");
            std::vector<double> values;
            for (std::size_t i = 1; i < cells.size(); ++i) {
                values.push_back(std::stod(cells[i], &used));
                if (used != cells[i].size())
                    throw std::invalid_argument("value");
            }
            rows.push_back(std::move(values));
        } catch (const std::logic_error&) {
            throw ParseError("field CSV line " + std::to_string(line_no) + ": malformed number");
        }
        if (rows.back().size() != width)
            throw ParseError("field CSV line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                             " values, got " + std::to_string(rows.back().size()));
    }
    if (!header || rows.empty())
        throw ParseError("field CSV has no data rows");
    const auto n = static_cast<long long>(rows.size());
    Matrix X(n, static_cast<Eigen::Index>(width));
    std::vector<char> seen(n, 0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const long long id = ids[r];
        if (id < 0 || id >= n || seen[id])
            throw ParseError("field CSV: vertex ids must be 0.." + std::to_string(n - 1) + " each exactly once");
        seen[id] = 1;
        for (std::size_t c = 0; c < width; ++c)
            X(id, static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    return X;
}

Matrix load_field_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open field file " + path.string());
    return read_field_csv(in);
}

} // namespace ftfi
