#include "dprisk/csv.hpp"

#include "dprisk/errors.hpp"

#include <charconv>

namespace dprisk {

CsvReader::CsvReader(const std::filesystem::path& path,
                     std::span<const std::string> expected_header)
    : stream_(path), file_name_(path.filename().string()) {
    if (!stream_) {
        throw InputError("cannot open input file '" + path.string() + "'");
    }
    std::vector<std::string> fields;
    if (!read_record(fields)) {
        throw SchemaError(file_name_ + ": missing header row");
    }
    header_ = fields;
    if (!expected_header.empty()) {
        bool matches = header_.size() == expected_header.size();
        for (std::size_t i = 0; matches && i < header_.size(); ++i) {
            matches = header_[i] == expected_header[i];
        }
        if (!matches) {
            std::string expected;
            for (const auto& name : expected_header) {
                if (!expected.empty()) {
                    expected += ',';
                }
                expected += name;
            }
            std::string got;
            for (const auto& name : header_) {
                if (!got.empty()) {
                    got += ',';
                }
                got += name;
            }
            throw SchemaError(file_name_ + ": header mismatch, expected '" + expected +
                              "' got '" + got + "'");
        }
    }
}

bool CsvReader::read_record(std::vector<std::string>& fields) {
    fields.clear();
    std::string line;
    if (!std::getline(stream_, line)) {
        return false;
    }
    ++line_;
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    std::string field;
    bool quoted = false;
    std::size_t i = 0;
    while (true) {
        if (quoted) {
            if (i >= line.size()) {
                throw SchemaError(context() + ": unterminated quoted field");
            }
            const char c = line[i++];
            if (c == '"') {
                if (i < line.size() && line[i] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (i >= line.size()) {
            fields.push_back(std::move(field));
            break;
        }
        const char c = line[i++];
        if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else {
            field += c;
        }
    }
    return true;
}

bool CsvReader::next(std::vector<std::string>& fields) {
    if (!read_record(fields)) {
        return false;
    }
    if (fields.size() != header_.size()) {
        throw SchemaError(context() + ": expected " + std::to_string(header_.size()) +
                          " fields, got " + std::to_string(fields.size()));
    }
    return true;
}

std::string CsvReader::context() const {
    return file_name_ + " line " + std::to_string(line_);
}

std::string CsvReader::context(std::size_t column_index) const {
    std::string name = column_index < header_.size() ? header_[column_index]
                                                     : std::to_string(column_index + 1);
    return context() + " column '" + name + "'";
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::span<const std::string> header)
    : stream_(path, std::ios::binary), file_name_(path.filename().string()),
      columns_(header.size()) {
    if (!stream_) {
        throw InputError("cannot open output file '" + path.string() + "'");
    }
    write_row(header);
}

void CsvWriter::write_row(std::span<const std::string> fields) {
    if (fields.size() != columns_) {
        throw InputError(file_name_ + ": row has " + std::to_string(fields.size()) +
                         " fields, header has " + std::to_string(columns_));
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) {
            stream_ << ',';
        }
        const std::string& f = fields[i];
        if (f.find_first_of(",\"\n") != std::string::npos) {
            stream_ << '"';
            for (const char c : f) {
                if (c == '"') {
                    stream_ << "\"\"";
                } else {
                    stream_ << c;
                }
            }
            stream_ << '"';
        } else {
            stream_ << f;
        }
    }
    stream_ << '\n';
}

int parse_int_field(const CsvReader& reader, std::size_t column, const std::string& value) {
    int result = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), result);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw SchemaError(reader.context(column) + ": invalid integer '" + value + "'");
    }
    return result;
}

double parse_double_field(const CsvReader& reader, std::size_t column, const std::string& value) {
    double result = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), result);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw SchemaError(reader.context(column) + ": invalid number '" + value + "'");
    }
    return result;
}

} // namespace dprisk
