#include "newscap/corpus.hpp"

#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>

#include "newscap/error.hpp"
#include "newscap/text.hpp"

namespace newscap {
namespace {

using nlohmann::ordered_json;

std::string at_line(std::size_t line) {
  return " at line " + std::to_string(line);
}

const ordered_json& require(const ordered_json& rec, const char* field,
                            std::size_t line) {
  auto it = rec.find(field);
  if (it == rec.end() || it->is_null()) {
    throw SchemaError(std::string("missing field ") + field + at_line(line));
  }
  return *it;
}

std::string require_string(const ordered_json& rec, const char* field,
                           std::size_t line) {
  const auto& v = require(rec, field, line);
  if (!v.is_string()) {
    throw SchemaError(std::string("field ") + field + at_line(line) +
                      " must be a string");
  }
  return v.get<std::string>();
}

std::optional<std::size_t> optional_position(const ordered_json& rec,
                                             std::size_t line) {
  auto it = rec.find("image_position");
  if (it == rec.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer() || it->get<long long>() < 0) {
    throw SchemaError("field image_position" + at_line(line) +
                      " must be a non-negative integer");
  }
  return it->get<std::size_t>();
}

}  // namespace

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "train";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "validation" || s == "val") return Split::kValidation;
  if (s == "test") return Split::kTest;
  throw SchemaError("unknown split '" + std::string(s) + "'");
}

std::string_view to_string(CorpusStyle style) {
  switch (style) {
    case CorpusStyle::kGoodNews: return "goodnews";
    case CorpusStyle::kNyTimes: return "nytimes";
    case CorpusStyle::kGeneric: return "generic";
  }
  return "generic";
}

CorpusStyle parse_corpus_style(std::string_view s) {
  if (s == "goodnews") return CorpusStyle::kGoodNews;
  if (s == "nytimes") return CorpusStyle::kNyTimes;
  if (s == "generic") return CorpusStyle::kGeneric;
  throw InvalidArgument("unknown corpus style '" + std::string(s) + "'");
}

std::size_t Document::sentence_at_word(std::size_t word) const {
  if (sentences.empty()) throw InvalidArgument("document has no sentences");
  if (word >= total_words()) return sentences.size() - 1;
  std::size_t lo = 0, hi = sentences.size();
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (sentences[mid].start_word <= word) lo = mid; else hi = mid;
  }
  return lo;
}

void validate_document(const Document& doc) {
  const std::string& id = doc.doc_id;
  if (id.empty()) throw SchemaError("empty doc_id");
  if (text::word_count(doc.caption) == 0) {
    throw SchemaError("empty caption for doc " + id);
  }
  if (doc.sentences.empty()) throw SchemaError("empty article for doc " + id);
  std::size_t expected_start = 0;
  std::string rejoined;
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    const Sentence& s = doc.sentences[i];
    if (s.index != i || s.start_word != expected_start ||
        s.end_word <= s.start_word ||
        text::word_count(s.text) != s.word_count()) {
      throw SchemaError("inconsistent sentence offsets in doc " + id);
    }
    expected_start = s.end_word;
    if (i) rejoined += ' ';
    rejoined += s.text;
  }
  if (rejoined != text::normalize_whitespace(doc.article_text)) {
    throw SchemaError("sentences do not reproduce the article of doc " + id);
  }
  if (doc.image_position && *doc.image_position > doc.total_words()) {
    throw SchemaError("image_position out of range in doc " + id);
  }
}

Document make_document(std::string doc_id, std::string article,
                       std::string caption, std::string image_ref,
                       std::optional<std::size_t> image_position, Split split,
                       const SentenceSegmenter& segmenter) {
  Document d;
  d.doc_id = std::move(doc_id);
  d.sentences = segmenter.segment(article);
  d.article_text = std::move(article);
  d.caption = std::move(caption);
  d.image_ref = std::move(image_ref);
  d.image_position = image_position;
  d.split = split;
  return d;
}

Corpus::Corpus(CorpusStyle style, std::vector<Document> documents)
    : style_(style), docs_(std::move(documents)) {
  by_id_.reserve(docs_.size());
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    if (!by_id_.emplace(docs_[i].doc_id, i).second) {
      throw SchemaError("duplicate doc_id " + docs_[i].doc_id);
    }
  }
}

const Document* Corpus::find(std::string_view doc_id) const {
  auto it = by_id_.find(std::string(doc_id));
  return it == by_id_.end() ? nullptr : &docs_[it->second];
}

SplitCounts Corpus::split_counts() const {
  SplitCounts c;
  for (const auto& d : docs_) {
    switch (d.split) {
      case Split::kTrain: ++c.train; break;
      case Split::kValidation: ++c.validation; break;
      case Split::kTest: ++c.test; break;
    }
  }
  return c;
}

std::vector<const Document*> Corpus::select(std::optional<Split> split) const {
  std::vector<const Document*> out;
  for (const auto& d : docs_) {
    if (!split || d.split == *split) out.push_back(&d);
  }
  return out;
}

void for_each_input_record(
    std::istream& in,
    const std::function<void(std::size_t line, Document doc)>& sink,
    const SentenceSegmenter& segmenter) {
  std::string buf;
  std::size_t line = 0;
  while (std::getline(in, buf)) {
    ++line;
    if (text::word_count(buf) == 0) continue;
    ordered_json rec;
    try {
      rec = ordered_json::parse(buf);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError("malformed record" + at_line(line) + ": " + e.what());
    }
    if (!rec.is_object()) {
      throw SchemaError("malformed record" + at_line(line) +
                        ": expected a JSON object");
    }
    std::string doc_id = require_string(rec, "doc_id", line);
    std::string article = require_string(rec, "article", line);
    std::string caption = require_string(rec, "caption", line);
    std::string image_ref = require_string(rec, "image_ref", line);
    const Split split = [&] {
      const std::string s = require_string(rec, "split", line);
      try {
        return parse_split(s);
      } catch (const SchemaError& e) {
        throw SchemaError(std::string(e.what()) + at_line(line));
      }
    }();
    const auto pos = optional_position(rec, line);
    Document doc = make_document(std::move(doc_id), std::move(article),
                                 std::move(caption), std::move(image_ref),
                                 pos, split, segmenter);
    try {
      validate_document(doc);
    } catch (const SchemaError& e) {
      throw SchemaError(std::string(e.what()) + at_line(line));
    }
    sink(line, std::move(doc));
  }
}

Corpus ingest_jsonl(std::istream& in, CorpusStyle style,
                    const SentenceSegmenter& segmenter) {
  std::vector<Document> docs;
  std::unordered_map<std::string, std::size_t> seen;
  for_each_input_record(
      in,
      [&](std::size_t line, Document doc) {
        if (style == CorpusStyle::kNyTimes && !doc.image_position) {
          throw SchemaError("missing field image_position" + at_line(line));
        }
        auto [it, inserted] = seen.emplace(doc.doc_id, line);
        if (!inserted) {
          throw SchemaError("duplicate doc_id " + doc.doc_id + at_line(line) +
                            " (first seen at line " +
                            std::to_string(it->second) + ")");
        }
        docs.push_back(std::move(doc));
      },
      segmenter);
  return Corpus(style, std::move(docs));
}

Corpus ingest_jsonl(const std::filesystem::path& path, CorpusStyle style,
                    const SentenceSegmenter& segmenter) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file " + path.string());
  return ingest_jsonl(in, style, segmenter);
}

std::string serialize_document(const Document& doc) {
  ordered_json j;
  j["doc_id"] = doc.doc_id;
  j["split"] = to_string(doc.split);
  j["image_ref"] = doc.image_ref;
  j["image_position"] = doc.image_position ? ordered_json(*doc.image_position)
                                           : ordered_json(nullptr);
  j["caption"] = doc.caption;
  j["article"] = doc.article_text;
  auto& sents = j["sentences"] = ordered_json::array();
  for (const auto& s : doc.sentences) {
    sents.push_back(
        ordered_json{{"start", s.start_word}, {"end", s.end_word},
                     {"text", s.text}});
  }
  return j.dump();
}

Document parse_document(std::string_view line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("malformed corpus record: ") + e.what());
  }
  try {
    Document d;
    d.doc_id = j.at("doc_id").get<std::string>();
    d.split = parse_split(j.at("split").get<std::string>());
    d.image_ref = j.at("image_ref").get<std::string>();
    if (!j.at("image_position").is_null()) {
      d.image_position = j.at("image_position").get<std::size_t>();
    }
    d.caption = j.at("caption").get<std::string>();
    d.article_text = j.at("article").get<std::string>();
    for (const auto& s : j.at("sentences")) {
      Sentence sent;
      sent.index = d.sentences.size();
      sent.start_word = s.at("start").get<std::size_t>();
      sent.end_word = s.at("end").get<std::size_t>();
      sent.text = s.at("text").get<std::string>();
      d.sentences.push_back(std::move(sent));
    }
    validate_document(d);
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("invalid corpus record: ") + e.what());
  }
}

std::string corpus_manifest_json(const Corpus& corpus) {
  const SplitCounts c = corpus.split_counts();
  ordered_json j;
  j["style"] = to_string(corpus.style());
  j["documents"] = c.total();
  j["splits"] = {{"train", c.train}, {"validation", c.validation},
                 {"test", c.test}};
  j["records"] = "documents.jsonl";
  return j.dump(2) + "\n";
}

void write_corpus_dir(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "documents.jsonl", std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / "documents.jsonl").string());
    for (const auto& d : corpus.documents()) out << serialize_document(d) << '\n';
  }
  std::ofstream manifest(dir / "manifest.json", std::ios::binary);
  if (!manifest) throw IoError("cannot write " + (dir / "manifest.json").string());
  manifest << corpus_manifest_json(corpus);
}

Corpus read_corpus_dir(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "manifest.json");
  if (!manifest) {
    throw IoError("no corpus manifest at " + (dir / "manifest.json").string());
  }
  CorpusStyle style = CorpusStyle::kGeneric;
  try {
    const auto m = ordered_json::parse(manifest);
    style = parse_corpus_style(m.at("style").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("invalid corpus manifest: ") + e.what());
  }
  std::ifstream in(dir / "documents.jsonl");
  if (!in) throw IoError("cannot open " + (dir / "documents.jsonl").string());
  std::vector<Document> docs;
  std::string line;
  while (std::getline(in, line)) {
    if (text::word_count(line) == 0) continue;
    docs.push_back(parse_document(line));
  }
  return Corpus(style, std::move(docs));
}

}  // namespace newscap
