#include "housing_sd/text_format.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace hsd::text {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

std::vector<std::string_view> split_top_level(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    bool quoted = false;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') quoted = !quoted;
        if (s[i] == sep && !quoted) {
            parts.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    parts.push_back(trim(s.substr(start)));
    return parts;
}

std::string unquote(std::string_view s, const std::string& ctx) {
    if (s.size() < 2 || s.front() != '"' || s.back() != '"') throw std::invalid_argument(ctx + ": expected a quoted string");
    return std::string(s.substr(1, s.size() - 2));
}

void parse_scalar(std::string_view s, TomlValue& v, const std::string& ctx) {
    if (s == "true" || s == "false") {
        v.is_bool = true;
        v.boolean = s == "true";
        return;
    }
    std::string buf(s);
    buf.erase(std::remove(buf.begin(), buf.end(), '_'), buf.end());
    char* end = nullptr;
    v.number = std::strtod(buf.c_str(), &end);
    if (buf.empty() || end != buf.c_str() + buf.size()) throw std::invalid_argument(ctx + ": bad number '" + buf + "'");
}

}  // namespace

std::vector<std::pair<std::string, TomlValue>> parse_toml(std::istream& in) {
    std::vector<std::pair<std::string, TomlValue>> out;
    std::string section;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string ctx = "line " + std::to_string(lineno);
        const std::string stripped = strip_comment(raw);
        const auto line = trim(stripped);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw std::invalid_argument(ctx + ": unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw std::invalid_argument(ctx + ": expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        const auto rhs = trim(line.substr(eq + 1));
        TomlValue v;
        if (!rhs.empty() && rhs.front() == '{') {
            if (rhs.back() != '}') throw std::invalid_argument(ctx + ": unterminated inline table");
            bool has_value = false;
            for (auto field : split_top_level(rhs.substr(1, rhs.size() - 2), ',')) {
                if (field.empty()) continue;
                const auto feq = field.find('=');
                if (feq == std::string_view::npos) throw std::invalid_argument(ctx + ": bad inline table field");
                const auto fkey = trim(field.substr(0, feq));
                const auto fval = trim(field.substr(feq + 1));
                if (fkey == "value") {
                    parse_scalar(fval, v, ctx);
                    has_value = true;
                } else if (fkey == "units") {
                    v.units = unquote(fval, ctx);
                } else if (fkey == "source") {
                    v.source = unquote(fval, ctx);
                } else {
                    throw std::invalid_argument(ctx + ": unknown field '" + std::string(fkey) + "'");
                }
            }
            if (!has_value) throw std::invalid_argument(ctx + ": inline table lacks a value");
        } else {
            parse_scalar(rhs, v, ctx);
        }
        const std::string full = section.empty() ? key : section + "." + key;
        for (const auto& [k, _] : out)
            if (k == full) throw std::invalid_argument(ctx + ": duplicate key '" + full + "'");
        out.emplace_back(full, std::move(v));
    }
    return out;
}

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::string(trim(cur)));
            cur.clear();
        } else if (c != '\r' && c != '\n') {
            cur += c;
        }
    }
    cells.push_back(std::string(trim(cur)));
    return cells;
}

void write_file_atomic(const std::string& path, std::string_view contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw std::runtime_error("short write to " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace hsd::text
