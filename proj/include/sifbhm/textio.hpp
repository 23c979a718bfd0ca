#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sifbhm {

/// Malformed input file. `offset` is the byte offset of the offending line or field.
class ParseError : public std::runtime_error
{
public:
    ParseError(const std::string& path, std::size_t offset, const std::string& what);

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Comma-separated fields of one line; no quoting, fields are trimmed of spaces and '\r'.
std::vector<std::string_view> split_fields(std::string_view line);

/// Whole-field parses; throw std::invalid_argument naming the field on any trailing junk.
double parse_double(std::string_view field);
std::int64_t parse_int(std::string_view field);

/// 17 significant digits, enough for any double to round-trip bitwise.
std::string format_double(double value);

/// Whole file into memory; throws std::runtime_error when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place.
/// Refuses to replace an existing file unless `overwrite` is set.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents, bool overwrite);

/// Line-at-a-time reader that tracks byte offsets. A final line must end in '\n'.
class LineCursor
{
public:
    LineCursor(std::string_view text, std::string path);

    /// False at end of input. Throws ParseError on a final line with no terminating newline.
    bool next(std::string_view& line);
    std::size_t line_offset() const { return line_offset_; }
    std::size_t line_number() const { return line_number_; }
    const std::string& path() const { return path_; }

    [[noreturn]] void fail(const std::string& what) const;

private:
    std::string_view text_;
    std::string path_;
    std::size_t pos_ = 0;
    std::size_t line_offset_ = 0;
    std::size_t line_number_ = 0;
};

} // namespace sifbhm
