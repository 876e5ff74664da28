#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace dprisk {

/// Minimal RFC-4180 style reader: comma separated, optional double-quoted
/// fields with "" escapes, mandatory header row. Field counts are enforced
/// against the header.
class CsvReader {
  public:
    /// Opens the file and reads the header row. Throws InputError when the
    /// file cannot be opened, SchemaError when the header does not match
    /// `expected_header` (empty = accept any header).
    CsvReader(const std::filesystem::path& path, std::span<const std::string> expected_header);

    /// Reads the next data row into `fields`. Returns false at end of file.
    bool next(std::vector<std::string>& fields);

    const std::vector<std::string>& header() const { return header_; }
    const std::string& file_name() const { return file_name_; }
    /// 1-based line number of the row most recently returned by next().
    std::size_t line() const { return line_; }

    /// Context string "file.csv line 12" for error messages.
    std::string context() const;
    /// Context string including the named column.
    std::string context(std::size_t column_index) const;

  private:
    bool read_record(std::vector<std::string>& fields);

    std::ifstream stream_;
    std::string file_name_;
    std::vector<std::string> header_;
    std::size_t line_ = 0;
};

/// Writes rows with minimal quoting (only when a field contains a comma,
/// quote, or newline). Output is byte-deterministic for identical input.
class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, std::span<const std::string> header);

    void write_row(std::span<const std::string> fields);
    void flush() { stream_.flush(); }

  private:
    std::ofstream stream_;
    std::string file_name_;
    std::size_t columns_ = 0;
};

/// Integer field parse with file/line/column error context.
int parse_int_field(const CsvReader& reader, std::size_t column, const std::string& value);
/// Floating-point field parse with file/line/column error context.
double parse_double_field(const CsvReader& reader, std::size_t column, const std::string& value);

} // namespace dprisk
