#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace abcmc {

/// Shortest round-trip decimal form, at most 17 significant digits.
std::string format_double(double v);

/// Accumulates a CSV document in memory. Rows end with LF.
class CsvWriter {
public:
    explicit CsvWriter(const std::vector<std::string>& header);

    CsvWriter& cell(std::string_view text);
    CsvWriter& cell(double v);
    CsvWriter& cell(long long v);
    CsvWriter& cell(unsigned long long v);
    CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
    CsvWriter& cell(std::size_t v) { return cell(static_cast<unsigned long long>(v)); }
    void end_row();

    const std::string& str() const { return text_; }

private:
    std::string text_;
    bool row_open_ = false;
};

/// Writes to path + ".tmp" then renames over path.
void write_file_atomic(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

/// Splits a plain CSV document (no quoting) into rows of fields.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace abcmc
