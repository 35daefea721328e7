#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lmd/errors.hpp"

namespace lmd {

// Minimal CSV output for purely numeric tables. Doubles are written with 17
// significant digits so downstream recomputation agrees to rounding.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : os_(path, std::ios::trunc) {
        if (!os_) throw IoError("csv: cannot open for writing: " + path);
    }

    void header(const std::vector<std::string>& names) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (i) os_ << ',';
            os_ << names[i];
        }
        os_ << '\n';
    }

    void field(double v) {
        sep();
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os_ << buf;
    }
    void field(std::uint64_t v) {
        sep();
        os_ << v;
    }
    void field(int v) {
        sep();
        os_ << v;
    }
    void field(const std::optional<double>& v) {
        if (v) {
            field(*v);
        } else {
            sep(); // empty cell marks an undefined quantity
        }
    }
    void field(const std::string& v) {
        sep();
        os_ << v;
    }

    void end_row() {
        os_ << '\n';
        col_ = 0;
    }

private:
    void sep() {
        if (col_++) os_ << ',';
    }
    std::ofstream os_;
    int col_ = 0;
};

class CsvReader {
public:
    explicit CsvReader(const std::string& path) : is_(path) {
        if (!is_) throw IoError("csv: cannot open for reading: " + path);
    }

    bool next(std::vector<std::string>& row) {
        std::string line;
        if (!std::getline(is_, line)) return false;
        row.clear();
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, ',')) row.push_back(cell);
        if (!line.empty() && line.back() == ',') row.emplace_back();
        return true;
    }

private:
    std::ifstream is_;
};

} // namespace lmd
