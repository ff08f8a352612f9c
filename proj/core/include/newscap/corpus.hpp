#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "newscap/segmenter.hpp"

namespace newscap {

enum class Split { kTrain, kValidation, kTest };

// GoodNews-style corpora carry no image position; NYTimes-style corpora
// locate the image inside the article.
enum class CorpusStyle { kGoodNews, kNyTimes, kGeneric };

std::string_view to_string(Split split);
Split parse_split(std::string_view s);
std::string_view to_string(CorpusStyle style);
CorpusStyle parse_corpus_style(std::string_view s);

struct Document {
  std::string doc_id;
  std::string article_text;
  std::vector<Sentence> sentences;
  std::string caption;
  std::string image_ref;
  // Word offset of the image inside the article, 0 <= pos <= total_words().
  std::optional<std::size_t> image_position;
  Split split = Split::kTrain;

  std::size_t total_words() const noexcept {
    return sentences.empty() ? 0 : sentences.back().end_word;
  }

  // Index of the sentence holding word `word`; a position equal to
  // total_words() maps to the last sentence.
  std::size_t sentence_at_word(std::size_t word) const;
};

// Throws SchemaError if the document breaks any structural invariant:
// contiguous ascending sentence ranges, sentences re-joining to the
// normalized article, image position in range, non-empty caption/article.
void validate_document(const Document& doc);

// Builds a document from raw fields, segmenting the article.
Document make_document(std::string doc_id, std::string article,
                       std::string caption, std::string image_ref,
                       std::optional<std::size_t> image_position, Split split,
                       const SentenceSegmenter& segmenter);

struct SplitCounts {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;

  std::size_t total() const noexcept { return train + validation + test; }
};

// Immutable after construction; safe for concurrent readers.
class Corpus {
 public:
  Corpus() = default;
  Corpus(CorpusStyle style, std::vector<Document> documents);

  CorpusStyle style() const noexcept { return style_; }
  const std::vector<Document>& documents() const noexcept { return docs_; }
  std::size_t size() const noexcept { return docs_.size(); }
  bool empty() const noexcept { return docs_.empty(); }

  const Document* find(std::string_view doc_id) const;
  SplitCounts split_counts() const;

  std::vector<const Document*> select(std::optional<Split> split) const;

 private:
  CorpusStyle style_ = CorpusStyle::kGeneric;
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

// Streams raw input records ("doc_id", "article", "caption", "image_ref",
// optional "image_position", "split"), one JSON object per line. Blank
// lines are skipped. The callback receives the 1-based line number.
void for_each_input_record(
    std::istream& in,
    const std::function<void(std::size_t line, Document doc)>& sink,
    const SentenceSegmenter& segmenter);

Corpus ingest_jsonl(std::istream& in, CorpusStyle style,
                    const SentenceSegmenter& segmenter = SentenceSegmenter());
Corpus ingest_jsonl(const std::filesystem::path& path, CorpusStyle style,
                    const SentenceSegmenter& segmenter = SentenceSegmenter());

// Validated corpus directory: documents.jsonl + manifest.json.
std::string serialize_document(const Document& doc);
Document parse_document(std::string_view line);
std::string corpus_manifest_json(const Corpus& corpus);
void write_corpus_dir(const Corpus& corpus, const std::filesystem::path& dir);
Corpus read_corpus_dir(const std::filesystem::path& dir);

}  // namespace newscap
