#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace facts::ingest {

inline constexpr std::size_t kDefaultChunkLimit = 3500;

struct CleanedDocument {
    std::string source_id;
    std::string text;            // UTF-8, single line, no double spaces
    std::size_t char_count = 0;  // Unicode scalar values
};

struct Chunk {
    std::string source_id;
    std::size_t index = 0;
    std::string text;
    std::size_t char_count = 0;
    // True when this chunk starts after a split on a space; the space itself
    // belongs to neither chunk and is restored by rejoin_chunks.
    bool follows_space = false;

    bool operator==(const Chunk&) const = default;
};

/// Returns `.txt` files verbatim. Other inputs run `extractor_template` with
/// `{input}` replaced by the shell-quoted path and capture standard output.
/// Throws UnsupportedInput without a template, ExtractionFailed when the
/// command exits nonzero or prints nothing.
std::string extract_text(const std::filesystem::path& doc_path, std::string_view extractor_template);

struct CleanOptions {
    bool join_hyphenated = true;
};

/// Flattens extracted text into one line:
///  1. `-` + line break + lowercase letter is joined (optional);
///  2. lines holding only digits (page numbers) are dropped;
///  3. remaining line breaks become spaces;
///  4. space runs collapse to one space;
///  5. leading and trailing whitespace is trimmed.
/// Carriage returns, form feeds and vertical tabs count as line breaks and
/// tabs as spaces. Idempotent.
std::string clean_text(std::string_view raw, const CleanOptions& options = {});

CleanedDocument make_cleaned_document(std::string source_id, std::string_view raw,
                                      const CleanOptions& options = {});

/// Greedy split into chunks of at most `limit` characters, cutting at the last
/// space inside the window or hard-cutting at `limit` when there is none.
std::vector<Chunk> chunk_text(std::string_view cleaned, std::size_t limit = kDefaultChunkLimit,
                              std::string_view source_id = {});

/// Inverse of chunk_text: one space before every chunk that follows a space
/// split, nothing at hard cuts.
std::string rejoin_chunks(const std::vector<Chunk>& chunks);

}  // namespace facts::ingest
