#include "facts/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "facts/error.hpp"

namespace facts {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFile(path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw WriteError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_file(const fs::path& path, std::string_view contents) {
    if (path.has_parent_path()) ensure_directory(path.parent_path());
    fs::path tmp = path;
    tmp += ".part";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw WriteError("cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw WriteError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw WriteError("cannot rename " + tmp.string() + ": " + ec.message());
}

namespace csv {

std::vector<Record> parse(std::string_view text) {
    std::vector<Record> records;
    Record current;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    current.line = 1;

    auto end_field = [&] {
        current.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(current));
        current = Record{};
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            in_quotes = true;
            field_started = true;
            break;
        case ',':
            end_field();
            field_started = true;
            break;
        case '\r':
            break;
        case '\n':
            end_record();
            ++line;
            current.line = line;
            break;
        default:
            field.push_back(c);
            field_started = true;
        }
    }
    if (field_started || !current.fields.empty() || !field.empty()) end_record();
    return records;
}

std::string escape_field(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_row(const Row& row) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out.push_back(',');
        out += escape_field(row[i]);
    }
    out.push_back('\n');
    return out;
}

}  // namespace csv

namespace {

void emit(const nlohmann::json& v, std::string& out, int indent, int depth) {
    using nlohmann::json;
    auto newline = [&](int d) {
        if (indent < 0) return;
        out.push_back('\n');
        out.append(static_cast<std::size_t>(indent * d), ' ');
    };
    switch (v.type()) {
    case json::value_t::object: {
        if (v.empty()) { out += "{}"; return; }
        out.push_back('{');
        bool first = true;
        for (const auto& [key, item] : v.items()) {  // nlohmann::json objects iterate in key order
            if (!first) out.push_back(',');
            first = false;
            newline(depth + 1);
            out += json(key).dump();
            out += indent < 0 ? ":" : ": ";
            emit(item, out, indent, depth + 1);
        }
        newline(depth);
        out.push_back('}');
        return;
    }
    case json::value_t::array: {
        if (v.empty()) { out += "[]"; return; }
        // Arrays of scalars stay on one line; nested structures are indented.
        const bool flat = std::all_of(v.begin(), v.end(),
                                      [](const json& e) { return e.is_primitive(); });
        out.push_back('[');
        bool first = true;
        for (const auto& item : v) {
            if (!first) out += flat ? ", " : ",";
            first = false;
            if (!flat) newline(depth + 1);
            emit(item, out, indent, depth + 1);
        }
        if (!flat) newline(depth);
        out.push_back(']');
        return;
    }
    case json::value_t::number_float: {
        const double d = v.get<double>();
        if (!std::isfinite(d)) { out += "null"; return; }
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", d);
        std::string s(buf);
        if (s.find_first_of(".eE") == std::string::npos) s += ".0";
        out += s;
        return;
    }
    default:
        out += v.dump(-1, ' ', false, json::error_handler_t::replace);
    }
}

}  // namespace

std::string canonical_json(const nlohmann::json& value, int indent) {
    std::string out;
    emit(value, out, indent, 0);
    out.push_back('\n');
    return out;
}

}  // namespace facts
