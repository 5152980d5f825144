#include "plmdp/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace plmdp {

namespace {

bool parse_double(std::string_view field, double& out) {
    // Trim surrounding whitespace; from_chars wants a bare number.
    size_t b = field.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return false;
    size_t e = field.find_last_not_of(" \t\r");
    field = field.substr(b, e - b + 1);
    const auto res = std::from_chars(field.data(), field.data() + field.size(), out);
    return res.ec == std::errc() && res.ptr == field.data() + field.size();
}

std::vector<std::vector<double>> read_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        size_t start = 0;
        while (start <= line.size()) {
            size_t comma = line.find(',', start);
            const size_t end = comma == std::string::npos ? line.size() : comma;
            double v;
            if (!parse_double(std::string_view(line).substr(start, end - start), v))
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": malformed number");
            row.push_back(v);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": inconsistent column count");
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

Matrix read_csv_matrix(const std::string& path) {
    const auto rows = read_rows(path);
    if (rows.empty()) throw std::runtime_error(path + ": empty file");
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    return m;
}

Vector read_csv_vector(const std::string& path) {
    const Matrix m = read_csv_matrix(path);
    if (m.cols() == 1) return m.col(0);
    if (m.rows() == 1) return m.row(0).transpose();
    throw std::runtime_error(path + ": expected a single column of values");
}

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace plmdp
