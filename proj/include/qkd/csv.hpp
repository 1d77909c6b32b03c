#pragma once

// CSV report writer. Numeric fields are printed in scientific notation with
// 13 significant digits so reports round-trip and are byte-stable.

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace qkd {

class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> columns)
        : n_columns_(columns.size()) {
        append_row(columns);
    }

    void append_row(const std::vector<std::string>& cells) {
        if (cells.size() != n_columns_)
            throw std::invalid_argument("CsvWriter: wrong cell count");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    static std::string num(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12e", v);
        return buf;
    }

    static std::string num(std::uint64_t v) { return std::to_string(v); }

    std::string str() const { return out_.str(); }

  private:
    std::size_t n_columns_;
    std::ostringstream out_;
};

}  // namespace qkd
