#include "sifbhm/textio.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace sifbhm {

ParseError::ParseError(const std::string& path, std::size_t offset, const std::string& what)
    : std::runtime_error(path + ": byte " + std::to_string(offset) + ": " + what), offset_(offset)
{
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string_view f = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!f.empty() && f.front() == ' ') {
            f.remove_prefix(1);
        }
        while (!f.empty() && f.back() == ' ') {
            f.remove_suffix(1);
        }
        out.push_back(f);
        if (comma == std::string_view::npos) {
            return out;
        }
        start = comma + 1;
    }
}

double parse_double(std::string_view field)
{
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (first != last && *first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (field.empty() || ec != std::errc() || ptr != last) {
        throw std::invalid_argument("not a number: '" + std::string(field) + "'");
    }
    return value;
}

std::int64_t parse_int(std::string_view field)
{
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        throw std::invalid_argument("not an integer: '" + std::string(field) + "'");
    }
    return value;
}

std::string format_double(double value)
{
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
    if (ec != std::errc()) {
        throw std::logic_error("double formatting failed");
    }
    return {buf.data(), ptr};
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents, bool overwrite)
{
    if (!overwrite && std::filesystem::exists(path)) {
        throw std::runtime_error(path.string() + " exists; pass the force flag to overwrite");
    }
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out.flush()) {
            throw std::runtime_error("short write to " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

LineCursor::LineCursor(std::string_view text, std::string path) : text_(text), path_(std::move(path)) {}

bool LineCursor::next(std::string_view& line)
{
    if (pos_ >= text_.size()) {
        return false;
    }
    const std::size_t nl = text_.find('\n', pos_);
    line_offset_ = pos_;
    ++line_number_;
    if (nl == std::string_view::npos) {
        fail("truncated line (no terminating newline)");
    }
    line = text_.substr(pos_, nl - pos_);
    pos_ = nl + 1;
    return true;
}

void LineCursor::fail(const std::string& what) const
{
    throw ParseError(path_, line_offset_, "line " + std::to_string(line_number_) + ": " + what);
}

} // namespace sifbhm
