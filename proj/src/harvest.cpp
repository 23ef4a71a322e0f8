#include "facts/harvest.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <mutex>
#include <thread>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "facts/error.hpp"
#include "facts/http.hpp"
#include "facts/io.hpp"

namespace facts::harvest {

namespace {

constexpr std::size_t kColumns = 6;

bool parse_year(const std::string& text, int& year) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, year);
    return ec == std::errc{} && ptr == last;
}

bool is_file_url(std::string_view url) { return url.starts_with("file:"); }

bool valid_url(std::string_view url) {
    if (is_file_url(url)) return url.size() > 5;
    return http::parse_url(url).has_value();
}

std::string trim(std::string s) {
    const auto ws = " \t";
    s.erase(0, s.find_first_not_of(ws));
    s.erase(s.find_last_not_of(ws) + 1);
    return s;
}

// Resolves `file:/abs`, `file:///abs` and `file:relative` against base_dir.
fs::path file_url_path(std::string_view url, const fs::path& base_dir) {
    std::string_view rest = url.substr(5);
    if (rest.starts_with("//")) rest.remove_prefix(2);
    fs::path p{std::string(rest)};
    return p.is_absolute() ? p : base_dir / p;
}

struct Outcome {
    enum class Kind { Downloaded, Skipped, Failed } kind = Kind::Failed;
    std::string reason;
};

Outcome fetch_one(const DocumentRef& ref, const fs::path& out_dir, const FetchOptions& options,
                  const fs::path& base_dir) {
    const fs::path target = out_dir / payload_filename(ref);
    if (fs::exists(target)) return {Outcome::Kind::Skipped, {}};

    if (is_file_url(ref.url)) {
        const fs::path src = file_url_path(ref.url, base_dir);
        std::error_code ec;
        if (!fs::is_regular_file(src, ec)) return {Outcome::Kind::Failed, "file not found: " + src.string()};
        try {
            write_file(target, read_file(src));
        } catch (const Error& e) {
            return {Outcome::Kind::Failed, e.what()};
        }
        return {Outcome::Kind::Downloaded, {}};
    }

    const auto url = http::parse_url(ref.url);
    if (!url) return {Outcome::Kind::Failed, "unsupported URL"};

    std::string reason;
    auto backoff = options.initial_backoff;
    for (unsigned attempt = 0; attempt < std::max(1u, options.attempts); ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        const http::Response res = http::get(*url, options.timeout);
        if (res.status == 0) {
            reason = "transport error: " + res.error;
            continue;
        }
        if (res.status >= 200 && res.status < 300) {
            try {
                write_file(target, res.body);
            } catch (const Error& e) {
                return {Outcome::Kind::Failed, e.what()};
            }
            return {Outcome::Kind::Downloaded, {}};
        }
        reason = "HTTP " + std::to_string(res.status);
        if (res.status < 500) break;  // client errors are not transient
    }
    return {Outcome::Kind::Failed, reason};
}

}  // namespace

Manifest load_manifest(const fs::path& path, std::optional<int> year_filter) {
    if (!fs::is_regular_file(path)) throw MissingFile(path.string());
    std::string text = read_file(path);
    if (text.starts_with("\xEF\xBB\xBF")) text.erase(0, 3);

    const auto records = csv::parse(text);
    if (records.empty()) throw ConfigError("manifest is empty: " + path.string());
    const auto& header = records.front().fields;
    if (csv::format_row(header) != std::string(kManifestHeader) + "\n")
        throw ConfigError("manifest header must be exactly '" + std::string(kManifestHeader) +
                          "': " + path.string());

    Manifest manifest;
    std::unordered_set<std::string> seen;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;  // blank line
        if (rec.fields.size() != kColumns) {
            manifest.errors.push_back({rec.line, "expected 6 fields, got " +
                                                     std::to_string(rec.fields.size())});
            continue;
        }
        DocumentRef ref;
        ref.source_id = trim(rec.fields[0]);
        ref.url = trim(rec.fields[1]);
        ref.title = rec.fields[2];
        ref.authors = rec.fields[3];
        ref.source_note = rec.fields[5];
        if (ref.source_id.empty()) {
            manifest.errors.push_back({rec.line, "empty source_id"});
            continue;
        }
        if (ref.source_id.find_first_of("/\\") != std::string::npos || ref.source_id == "." ||
            ref.source_id == "..") {
            manifest.errors.push_back({rec.line, "source_id is not a valid file name"});
            continue;
        }
        if (!parse_year(trim(rec.fields[4]), ref.year) || ref.year < 1000 || ref.year > 9999) {
            manifest.errors.push_back({rec.line, "year is not a four-digit integer: '" +
                                                     rec.fields[4] + "'"});
            continue;
        }
        if (!valid_url(ref.url)) {
            manifest.errors.push_back({rec.line, "url is not absolute: '" + ref.url + "'"});
            continue;
        }
        if (!seen.insert(ref.source_id).second) throw DuplicateSourceId(ref.source_id);
        if (year_filter && ref.year != *year_filter) continue;
        manifest.refs.push_back(std::move(ref));
    }
    for (const auto& e : manifest.errors)
        spdlog::warn("{}:{}: {}", path.string(), e.line, e.reason);
    return manifest;
}

std::string payload_filename(const DocumentRef& ref) {
    std::string_view url = ref.url;
    url = url.substr(0, url.find_first_of("?#"));
    const auto slash = url.find_last_of('/');
    const auto leaf = slash == std::string_view::npos ? url : url.substr(slash + 1);
    std::string ext = ".pdf";
    if (const auto dot = leaf.find_last_of('.'); dot != std::string_view::npos && dot + 1 < leaf.size()) {
        const auto candidate = leaf.substr(dot);
        const bool plain = std::all_of(candidate.begin() + 1, candidate.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) != 0;
        });
        if (plain && candidate.size() <= 6) {
            ext.assign(candidate);
            std::transform(ext.begin(), ext.end(), ext.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        }
    }
    return ref.source_id + ext;
}

FetchReport fetch_documents(const std::vector<DocumentRef>& refs, const fs::path& out_dir,
                            const FetchOptions& options, const fs::path& base_dir) {
    ensure_directory(out_dir);
    {
        // An unwritable directory fails the batch, not individual refs.
        const fs::path probe = out_dir / ".write-probe";
        write_file(probe, "");
        fs::remove(probe);
    }

    std::vector<Outcome> outcomes(refs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < refs.size(); i = next++) {
            outcomes[i] = fetch_one(refs[i], out_dir, options, base_dir);
            if (outcomes[i].kind == Outcome::Kind::Failed)
                spdlog::warn("fetch {} failed: {}", refs[i].source_id, outcomes[i].reason);
        }
    };
    const std::size_t n_threads =
        std::min<std::size_t>(std::max(1u, options.max_parallel), std::max<std::size_t>(1, refs.size()));
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    pool.clear();

    FetchReport report;
    for (std::size_t i = 0; i < refs.size(); ++i) {
        switch (outcomes[i].kind) {
        case Outcome::Kind::Downloaded: ++report.downloaded; break;
        case Outcome::Kind::Skipped: ++report.skipped; break;
        case Outcome::Kind::Failed:
            ++report.failed;
            report.failures.emplace_back(refs[i].source_id, outcomes[i].reason);
            break;
        }
    }
    return report;
}

std::string format_citation_record(const DocumentRef& ref) {
    auto line = [](std::string_view key, std::string_view value) {
        std::string out(key);
        out += ':';
        if (!value.empty()) {
            out += ' ';
            for (char c : value) out += (c == '\n' || c == '\r') ? ' ' : c;
        }
        out += '\n';
        return out;
    };
    return line("source_id", ref.source_id) + line("title", ref.title) + line("authors", ref.authors) +
           line("year", std::to_string(ref.year)) + line("source_note", ref.source_note) +
           line("url", ref.url);
}

fs::path write_citation_record(const DocumentRef& ref, const fs::path& out_dir) {
    const fs::path path = out_dir / (ref.source_id + ".cite.txt");
    write_file(path, format_citation_record(ref));
    return path;
}

}  // namespace facts::harvest
