#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fuse/common.hpp"
#include "fuse/matrix.hpp"

namespace fuse {

// Shortest round-trip decimal form; keeps file output byte-stable.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline bool parse_double(const std::string& tok, double& out) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t' || *(last - 1) == '\r'))
        --last;
    if (first == last) return false;
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

// Reads a numeric CSV matrix. Leading '#' lines are comments; a first row
// containing any non-numeric token is treated as a header and skipped.
// Ragged rows and non-finite values are rejected.
inline Matrix read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open '" + path + "'");

    std::vector<std::vector<double>> rows;
    std::string line;
    bool first_data_candidate = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') continue;
        auto toks = split_csv_line(line);
        std::vector<double> vals(toks.size());
        bool numeric = true;
        for (std::size_t i = 0; i < toks.size(); ++i) {
            if (!parse_double(toks[i], vals[i])) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (first_data_candidate) {
                first_data_candidate = false;  // header row
                continue;
            }
            throw data_error(path + ":" + std::to_string(line_no) + ": non-numeric value");
        }
        first_data_candidate = false;
        if (!rows.empty() && vals.size() != rows.front().size())
            throw data_error(path + ":" + std::to_string(line_no) + ": ragged row (" +
                             std::to_string(vals.size()) + " fields, expected " +
                             std::to_string(rows.front().size()) + ")");
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw data_error(path + ": no data rows");

    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
    if (!m.all_finite()) throw data_error(path + ": non-finite value in matrix");
    return m;
}

inline void write_csv_matrix(const std::string& path, const Matrix& m,
                             const std::string& header_comment = "",
                             const std::vector<std::string>& column_names = {}) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write '" + path + "'");
    if (!header_comment.empty()) out << "# " << header_comment << "\n";
    if (!column_names.empty()) {
        for (std::size_t j = 0; j < column_names.size(); ++j)
            out << (j ? "," : "") << column_names[j];
        out << "\n";
    }
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j)
            out << (j ? "," : "") << format_double(m(i, j));
        out << "\n";
    }
    if (!out) throw data_error("write failed for '" + path + "'");
}

}  // namespace fuse
