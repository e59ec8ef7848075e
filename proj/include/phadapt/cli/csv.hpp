#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "phadapt/errors.hpp"

namespace phadapt::cli {

/// 17 significant digits, enough to read every double back bit-exactly.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Comma separated, header row, LF line endings. Cells are written verbatim.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
        : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw IoError("cannot open " + path.string() + " for writing");
        row(header);
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
        if (!out_) throw IoError("write failed: " + path_.string());
    }

    void numbers(const std::vector<double>& values) {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(format_number(v));
        row(cells);
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw InvalidArgument("csv: no column named " + name);
    }

    /// Numeric value of a cell; empty cells read as NaN.
    double number(std::size_t row, std::size_t col) const {
        const std::string& cell = rows.at(row).at(col);
        if (cell.empty()) return std::nan("");
        return std::strtod(cell.c_str(), nullptr);
    }

    std::vector<double> numbers(const std::string& name) const {
        const std::size_t c = column(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) out.push_back(number(r, c));
        return out;
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + ": missing header row");
    t.header = split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        t.rows.push_back(split_csv_line(line));
    }
    return t;
}

}  // namespace phadapt::cli
