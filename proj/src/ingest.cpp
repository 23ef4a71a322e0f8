#include "facts/ingest.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>
#include <unistd.h>

#include "facts/error.hpp"
#include "facts/io.hpp"
#include "facts/utf8.hpp"

namespace facts::ingest {

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

bool is_line_break(char c) { return c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool digits_only_line(std::string_view line) {
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos) return false;
    const auto last = line.find_last_not_of(" \t");
    for (auto i = first; i <= last; ++i)
        if (line[i] < '0' || line[i] > '9') return false;
    return true;
}

// Lowercase letter at the start of `rest`, decoded as UTF-8.
bool starts_lowercase(std::string_view rest) {
    if (rest.empty()) return false;
    const auto len = std::min<std::size_t>(4, rest.size());
    const auto decoded = utf8::decode(rest.substr(0, len));
    return !decoded.empty() && utf8::is_lower(decoded.front());
}

}  // namespace

std::string extract_text(const fs::path& doc_path, std::string_view extractor_template) {
    if (!fs::is_regular_file(doc_path)) throw MissingFile(doc_path.string());
    auto ext = doc_path.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".txt") return read_file(doc_path);

    if (extractor_template.empty())
        throw UnsupportedInput("no extractor configured for '" + ext + "' input: " + doc_path.string());

    std::string command(extractor_template);
    const std::string placeholder = "{input}";
    const std::string quoted = shell_quote(doc_path.string());
    for (auto pos = command.find(placeholder); pos != std::string::npos;
         pos = command.find(placeholder, pos + quoted.size()))
        command.replace(pos, placeholder.size(), quoted);

    char diag_name[] = "/tmp/facts-extract-XXXXXX";
    const int diag_fd = mkstemp(diag_name);
    if (diag_fd >= 0) {
        close(diag_fd);
        command = "{ " + command + " ; } 2>" + shell_quote(diag_name);
    }

    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) throw ExtractionFailed(-1, "cannot start extractor");
    std::string output;
    std::array<char, 8192> buf{};
    for (std::size_t n; (n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0;)
        output.append(buf.data(), n);
    const int status = pclose(pipe);
    const int exit_status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;

    std::string diagnostics;
    if (diag_fd >= 0) {
        try {
            diagnostics = read_file(diag_name);
        } catch (const Error&) {
        }
        std::remove(diag_name);
    }
    if (exit_status != 0) throw ExtractionFailed(exit_status, diagnostics);
    if (output.empty()) throw ExtractionFailed(0, diagnostics.empty() ? "no output" : diagnostics);
    return output;
}

std::string clean_text(std::string_view raw, const CleanOptions& options) {
    // Normalize every line-break flavour to '\n' ("\r\n" counts once).
    std::string text;
    text.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const char c = raw[i];
        if (c == '\r' && i + 1 < raw.size() && raw[i + 1] == '\n') continue;
        text.push_back(is_line_break(c) ? '\n' : c);
    }

    if (options.join_hyphenated) {
        std::string joined;
        joined.reserve(text.size());
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (text[i] == '-' && i + 1 < text.size() && text[i + 1] == '\n' &&
                starts_lowercase(std::string_view(text).substr(i + 2))) {
                ++i;  // drop "-\n"
                continue;
            }
            joined.push_back(text[i]);
        }
        text = std::move(joined);
    }

    std::string flat;
    flat.reserve(text.size());
    std::size_t start = 0;
    bool first_line = true;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        const std::string_view line(text.data() + start, end - start);
        if (!digits_only_line(line)) {
            if (!first_line) flat.push_back(' ');
            flat.append(line);
            first_line = false;
        }
        start = end + 1;
    }

    std::string out;
    out.reserve(flat.size());
    for (char c : flat) {
        if (c == '\t') c = ' ';
        if (c == ' ' && (out.empty() || out.back() == ' ')) continue;
        out.push_back(c);
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

CleanedDocument make_cleaned_document(std::string source_id, std::string_view raw,
                                      const CleanOptions& options) {
    CleanedDocument doc;
    doc.source_id = std::move(source_id);
    doc.text = clean_text(raw, options);
    doc.char_count = utf8::length(doc.text);
    return doc;
}

std::vector<Chunk> chunk_text(std::string_view cleaned, std::size_t limit, std::string_view source_id) {
    if (limit == 0) throw ConfigError("chunk limit must be positive");
    const std::u32string text = utf8::decode(cleaned);
    std::vector<Chunk> chunks;
    std::size_t pos = 0;
    bool follows_space = false;
    const std::size_t n = text.size();
    while (pos < n) {
        std::size_t end = n;
        std::size_t next = n;
        bool soft = false;
        if (n - pos > limit) {
            end = pos + limit;
            next = end;
            // Last space in (pos, pos + limit]; a space exactly at pos + limit
            // still yields a full-length chunk.
            for (std::size_t s = pos + limit; s > pos; --s) {
                if (text[s] == U' ') {
                    end = s;
                    next = s + 1;
                    soft = true;
                    break;
                }
            }
        }
        Chunk chunk;
        chunk.source_id = std::string(source_id);
        chunk.index = chunks.size();
        chunk.text = utf8::encode(std::u32string_view(text).substr(pos, end - pos));
        chunk.char_count = end - pos;
        chunk.follows_space = follows_space;
        chunks.push_back(std::move(chunk));
        follows_space = soft;
        pos = next;
    }
    return chunks;
}

std::string rejoin_chunks(const std::vector<Chunk>& chunks) {
    std::string out;
    for (const auto& c : chunks) {
        if (c.follows_space) out.push_back(' ');
        out += c.text;
    }
    return out;
}

}  // namespace facts::ingest
