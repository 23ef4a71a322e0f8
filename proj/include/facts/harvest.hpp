#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace facts::harvest {

/// One manifest row: where a document lives and how to cite it.
struct DocumentRef {
    std::string source_id;
    std::string url;
    std::string title;
    std::string authors;
    int year = 0;
    std::string source_note;

    bool operator==(const DocumentRef&) const = default;
};

struct RowError {
    std::size_t line = 0;
    std::string reason;
};

struct Manifest {
    std::vector<DocumentRef> refs;
    std::vector<RowError> errors;  // malformed rows, skipped
};

/// Header every manifest must start with, verbatim.
inline constexpr const char* kManifestHeader = "source_id,url,title,authors,year,source_note";

/// Parses the manifest at `path`, keeping manifest order. Malformed rows are
/// reported in `Manifest::errors` and skipped; a repeated source_id throws
/// DuplicateSourceId. With `year_filter`, only rows of that year are kept.
Manifest load_manifest(const std::filesystem::path& path, std::optional<int> year_filter = {});

struct FetchOptions {
    unsigned max_parallel = 4;
    unsigned attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::seconds timeout{60};
};

struct FetchReport {
    std::size_t downloaded = 0;
    std::size_t skipped = 0;
    std::size_t failed = 0;
    std::vector<std::pair<std::string, std::string>> failures;  // (source_id, reason), manifest order
};

/// File name a ref is stored under: `<source_id>` plus the URL's extension,
/// `.pdf` when the URL path has none.
std::string payload_filename(const DocumentRef& ref);

/// Downloads every ref into `out_dir`. Refs whose payload already exists are
/// skipped. Per-ref failures are collected, never thrown; transport errors and
/// 5xx responses are retried with exponential backoff. `http`, `https` and
/// `file:` URLs are accepted (a relative `file:` path resolves against
/// `base_dir`).
FetchReport fetch_documents(const std::vector<DocumentRef>& refs,
                            const std::filesystem::path& out_dir,
                            const FetchOptions& options = {},
                            const std::filesystem::path& base_dir = {});

/// Writes `<source_id>.cite.txt` with `key: value` lines in a fixed order.
std::filesystem::path write_citation_record(const DocumentRef& ref,
                                            const std::filesystem::path& out_dir);

std::string format_citation_record(const DocumentRef& ref);

}  // namespace facts::harvest
