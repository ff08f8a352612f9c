#include "newscap/ner.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "newscap/error.hpp"
#include "newscap/text.hpp"

namespace newscap {
namespace {

constexpr std::array<std::pair<EntityLabel, std::string_view>, 18> kLabels{{
    {EntityLabel::kPerson, "PERSON"},
    {EntityLabel::kOrg, "ORG"},
    {EntityLabel::kGpe, "GPE"},
    {EntityLabel::kLoc, "LOC"},
    {EntityLabel::kEvent, "EVENT"},
    {EntityLabel::kFac, "FAC"},
    {EntityLabel::kNorp, "NORP"},
    {EntityLabel::kWorkOfArt, "WORK_OF_ART"},
    {EntityLabel::kProduct, "PRODUCT"},
    {EntityLabel::kLaw, "LAW"},
    {EntityLabel::kLanguage, "LANGUAGE"},
    {EntityLabel::kDate, "DATE"},
    {EntityLabel::kTime, "TIME"},
    {EntityLabel::kPercent, "PERCENT"},
    {EntityLabel::kMoney, "MONEY"},
    {EntityLabel::kQuantity, "QUANTITY"},
    {EntityLabel::kOrdinal, "ORDINAL"},
    {EntityLabel::kCardinal, "CARDINAL"},
}};

const std::array<EntityLabel, 18> kAllLabels = [] {
  std::array<EntityLabel, 18> a{};
  for (std::size_t i = 0; i < kLabels.size(); ++i) a[i] = kLabels[i].first;
  return a;
}();

std::string read_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw IoError(std::string("cannot open ") + what + " " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Word tokens are maximal runs of word characters; every other
// non-space byte is its own token.
struct Token {
  std::size_t begin;
  std::size_t end;
  bool word;
};

std::vector<Token> scan_tokens(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (text::is_space(s[i])) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (text::is_word_char(s[i])) {
      while (i < s.size() && text::is_word_char(s[i])) ++i;
      out.push_back({start, i, true});
    } else {
      ++i;
      out.push_back({start, i, false});
    }
  }
  return out;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c)) != 0;
  });
}

// A candidate entity before overlap resolution. `priority` orders exact
// span ties: lower wins.
struct Candidate {
  std::size_t begin;
  std::size_t end;
  EntityLabel label;
  int priority;
};

constexpr std::array<std::string_view, 7> kWeekdays{
    "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday",
    "Sunday"};
constexpr std::array<std::string_view, 12> kMonths{
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};
constexpr std::array<std::string_view, 3> kScales{"million", "billion",
                                                  "trillion"};

template <std::size_t N>
bool one_of(std::string_view w, const std::array<std::string_view, N>& set) {
  return std::find(set.begin(), set.end(), w) != set.end();
}

class PatternScanner {
 public:
  PatternScanner(std::string_view text, const std::vector<Token>& toks)
      : text_(text), toks_(toks) {}

  void scan(std::vector<Candidate>& out) const {
    for (std::size_t k = 0; k < toks_.size(); ++k) {
      const std::string_view w = str(k);
      if (toks_[k].word) {
        if (one_of(w, kWeekdays)) add(out, k, k + 1, EntityLabel::kDate);
        if (one_of(w, kMonths)) month_date(out, k);
        if (is_ordinal(w)) add(out, k, k + 1, EntityLabel::kOrdinal);
      }
      if (w == "$") money(out, k);
      if (all_digits(w) && (k == 0 || !adjacent(k - 1) || !number_joiner(k - 1))) {
        number_forms(out, k);
      }
    }
  }

 private:
  std::string_view str(std::size_t k) const {
    return text_.substr(toks_[k].begin, toks_[k].end - toks_[k].begin);
  }
  // Token k+1 starts exactly where token k ends.
  bool adjacent(std::size_t k) const {
    return k + 1 < toks_.size() && toks_[k + 1].begin == toks_[k].end;
  }
  bool number_joiner(std::size_t k) const {
    const std::string_view w = str(k);
    return (w == "," || w == ".") && k > 0 && all_digits(str(k - 1));
  }
  void add(std::vector<Candidate>& out, std::size_t first, std::size_t last,
           EntityLabel label) const {
    out.push_back({toks_[first].begin, toks_[last - 1].end, label, 1});
  }

  // Returns one past the last token of the number starting at k
  // ("1,200", "3.5"), or k if token k is not numeric.
  std::size_t number_end(std::size_t k) const {
    if (k >= toks_.size() || !all_digits(str(k))) return k;
    std::size_t e = k + 1;
    while (e + 1 < toks_.size() && adjacent(e - 1) && adjacent(e) &&
           (str(e) == "," || str(e) == ".") && all_digits(str(e + 1))) {
      e += 2;
    }
    return e;
  }

  bool is_year(std::size_t k) const {
    const std::string_view w = str(k);
    if (w.size() != 4 || !all_digits(w)) return false;
    const int y = std::stoi(std::string(w));
    return y >= 1900 && y <= 2099;
  }

  static bool is_ordinal(std::string_view w) {
    if (w.size() < 3) return false;
    const std::string_view suffix = w.substr(w.size() - 2);
    if (suffix != "st" && suffix != "nd" && suffix != "rd" && suffix != "th") {
      return false;
    }
    return all_digits(w.substr(0, w.size() - 2));
  }

  void month_date(std::vector<Candidate>& out, std::size_t k) const {
    std::size_t e = k + 1;
    bool has_day = false;
    if (e < toks_.size() && all_digits(str(e)) && str(e).size() <= 2 &&
        !adjacent(k)) {
      const int day = std::stoi(std::string(str(e)));
      if (day >= 1 && day <= 31) {
        has_day = true;
        ++e;
      }
    }
    bool has_year = false;
    if (has_day && e + 1 < toks_.size() && str(e) == "," && adjacent(e - 1) &&
        is_year(e + 1)) {
      e += 2;
      has_year = true;
    } else if (e < toks_.size() && is_year(e) && !adjacent(e - 1)) {
      ++e;
      has_year = true;
    }
    // A bare "May" is far more often the modal verb.
    if (str(k) == "May" && !has_day && !has_year) return;
    add(out, k, e, EntityLabel::kDate);
  }

  void money(std::vector<Candidate>& out, std::size_t k) const {
    if (!adjacent(k)) return;
    std::size_t e = number_end(k + 1);
    if (e == k + 1) return;
    if (e < toks_.size() && one_of(str(e), kScales)) ++e;
    add(out, k, e, EntityLabel::kMoney);
  }

  void number_forms(std::vector<Candidate>& out, std::size_t k) const {
    const std::size_t e = number_end(k);
    // Percentages.
    if (e < toks_.size() && str(e) == "%" && adjacent(e - 1)) {
      add(out, k, e + 1, EntityLabel::kPercent);
    } else if (e < toks_.size() && str(e) == "percent") {
      add(out, k, e + 1, EntityLabel::kPercent);
    }
    // Clock times: 3:30, optionally followed by a.m./p.m.
    if (e == k + 1 && e + 1 < toks_.size() && str(e) == ":" && adjacent(k) &&
        adjacent(e) && all_digits(str(e + 1)) && str(e + 1).size() == 2) {
      std::size_t te = e + 2;
      if (te + 3 < toks_.size() && (str(te) == "a" || str(te) == "p") &&
          str(te + 1) == "." && str(te + 2) == "m" && str(te + 3) == ".") {
        te += 4;
      }
      add(out, k, te, EntityLabel::kTime);
    }
    if (e == k + 1 && is_year(k)) {
      add(out, k, e, EntityLabel::kDate);
    } else {
      add(out, k, e, EntityLabel::kCardinal);
    }
  }

  std::string_view text_;
  const std::vector<Token>& toks_;
};

std::vector<Entity> resolve(std::string_view text,
                            std::vector<Candidate> cands, TextField field) {
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) {
                     const auto la = a.end - a.begin, lb = b.end - b.begin;
                     if (la != lb) return la > lb;
                     if (a.begin != b.begin) return a.begin < b.begin;
                     return a.priority < b.priority;
                   });
  std::vector<bool> taken(text.size(), false);
  std::vector<Entity> out;
  for (const auto& c : cands) {
    bool free = true;
    for (std::size_t i = c.begin; i < c.end && free; ++i) free = !taken[i];
    if (!free) continue;
    std::fill(taken.begin() + static_cast<std::ptrdiff_t>(c.begin),
              taken.begin() + static_cast<std::ptrdiff_t>(c.end), true);
    out.push_back(Entity{std::string(text.substr(c.begin, c.end - c.begin)),
                         c.label,
                         {c.begin, c.end},
                         field});
  }
  std::sort(out.begin(), out.end(), [](const Entity& a, const Entity& b) {
    return a.span.begin < b.span.begin;
  });
  return out;
}

}  // namespace

std::string_view to_string(EntityLabel label) {
  for (const auto& [l, name] : kLabels) {
    if (l == label) return name;
  }
  return "PERSON";
}

EntityLabel parse_entity_label(std::string_view s) {
  for (const auto& [l, name] : kLabels) {
    if (name == s) return l;
  }
  throw SchemaError("unknown entity label '" + std::string(s) + "'");
}

std::span<const EntityLabel> all_entity_labels() { return kAllLabels; }

std::string_view to_string(TextField field) {
  switch (field) {
    case TextField::kArticle: return "article";
    case TextField::kCaption: return "caption";
    case TextField::kGenerated: return "generated";
  }
  return "article";
}

TextField parse_text_field(std::string_view s) {
  if (s == "article") return TextField::kArticle;
  if (s == "caption") return TextField::kCaption;
  if (s == "generated") return TextField::kGenerated;
  throw SchemaError("unknown text field '" + std::string(s) + "'");
}

std::vector<Entity> tag_entities(std::string_view text, const Tagger& tagger,
                                 const TextRef& ref) {
  return tagger.tag(text, ref);
}

void Gazetteer::add(std::string surface, EntityLabel label) {
  if (text::word_count(surface) == 0) {
    throw SchemaError("empty gazetteer surface");
  }
  entries_.insert_or_assign(std::move(surface), label);
}

Gazetteer Gazetteer::parse(std::string_view data) {
  Gazetteer g;
  std::istringstream in{std::string(data)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::word_count(line) == 0 || line.front() == '#') continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) {
      throw SchemaError("gazetteer line " + std::to_string(n) +
                        " lacks a TAB separator");
    }
    std::string surface = line.substr(0, tab);
    const std::string label = text::normalize_whitespace(line.substr(tab + 1));
    try {
      g.add(std::move(surface), parse_entity_label(label));
    } catch (const SchemaError& e) {
      throw SchemaError(std::string(e.what()) + " at gazetteer line " +
                        std::to_string(n));
    }
  }
  return g;
}

Gazetteer Gazetteer::load(const std::filesystem::path& path) {
  return parse(read_file(path, "gazetteer"));
}

// First token text -> entries starting with it, longest first.
struct GazetteerTagger::Index {
  struct Entry {
    std::string surface;
    std::size_t tokens;
    EntityLabel label;
  };
  std::unordered_map<std::string, std::vector<Entry>> by_first;
};

GazetteerTagger::GazetteerTagger(Gazetteer gazetteer, bool use_patterns)
    : gazetteer_(std::move(gazetteer)),
      use_patterns_(use_patterns),
      index_(std::make_unique<Index>()) {
  for (const auto& [surface, label] : gazetteer_.entries()) {
    const auto toks = scan_tokens(surface);
    if (toks.empty()) continue;
    const std::string first =
        surface.substr(toks[0].begin, toks[0].end - toks[0].begin);
    index_->by_first[first].push_back({surface, toks.size(), label});
  }
  for (auto& [_, entries] : index_->by_first) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Index::Entry& a, const Index::Entry& b) {
                       return a.surface.size() > b.surface.size();
                     });
  }
}

GazetteerTagger::~GazetteerTagger() = default;

std::vector<Entity> GazetteerTagger::tag(std::string_view text,
                                         const TextRef& ref) const {
  const auto toks = scan_tokens(text);
  std::vector<Candidate> cands;
  for (std::size_t k = 0; k < toks.size(); ++k) {
    const std::string first(text.substr(toks[k].begin, toks[k].end - toks[k].begin));
    auto it = index_->by_first.find(first);
    if (it == index_->by_first.end()) continue;
    for (const auto& e : it->second) {
      if (k + e.tokens > toks.size()) continue;
      const std::size_t begin = toks[k].begin;
      const std::size_t end = toks[k + e.tokens - 1].end;
      // Exact slice equality also pins the inner whitespace.
      if (text.substr(begin, end - begin) == e.surface) {
        cands.push_back({begin, end, e.label, 0});
      }
    }
  }
  if (use_patterns_) PatternScanner(text, toks).scan(cands);
  return resolve(text, std::move(cands), ref.field);
}

AnnotationTagger AnnotationTagger::parse(std::string_view data) {
  AnnotationTagger t;
  std::istringstream in{std::string(data)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (text::word_count(line) == 0) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const std::string doc_id = j.at("doc_id").get<std::string>();
      const TextField field = parse_text_field(j.at("field").get<std::string>());
      std::vector<Entity> ents;
      for (const auto& e : j.at("entities")) {
        Entity ent;
        ent.surface = e.at("surface").get<std::string>();
        ent.label = parse_entity_label(e.at("label").get<std::string>());
        ent.span = {e.at("start_char").get<std::size_t>(),
                    e.at("end_char").get<std::size_t>()};
        ent.source = field;
        if (ent.span.end < ent.span.begin) {
          throw SchemaError("inverted span");
        }
        ents.push_back(std::move(ent));
      }
      std::stable_sort(ents.begin(), ents.end(),
                       [](const Entity& a, const Entity& b) {
                         return a.span.begin < b.span.begin;
                       });
      t.records_[doc_id + '\t' + std::string(to_string(field))] = std::move(ents);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError("malformed annotation record at line " +
                        std::to_string(n) + ": " + e.what());
    } catch (const SchemaError& e) {
      throw SchemaError(std::string(e.what()) + " at annotation line " +
                        std::to_string(n));
    }
  }
  return t;
}

AnnotationTagger AnnotationTagger::load(const std::filesystem::path& path) {
  return parse(read_file(path, "annotation file"));
}

std::vector<Entity> AnnotationTagger::tag(std::string_view text,
                                          const TextRef& ref) const {
  const auto key = std::string(ref.doc_id) + '\t' + std::string(to_string(ref.field));
  auto it = records_.find(key);
  if (it == records_.end()) {
    throw SchemaError("no external annotations for doc_id " +
                      std::string(ref.doc_id) + " (field " +
                      std::string(to_string(ref.field)) + ")");
  }
  for (const auto& e : it->second) {
    if (e.span.end > text.size() ||
        text.substr(e.span.begin, e.span.end - e.span.begin) != e.surface) {
      throw SchemaError("annotation span for '" + e.surface +
                        "' does not match the text of doc_id " +
                        std::string(ref.doc_id));
    }
  }
  return it->second;
}

VisualEntityPolicy VisualEntityPolicy::default_policy() {
  return {{EntityLabel::kDate, EntityLabel::kTime, EntityLabel::kPercent,
           EntityLabel::kMoney, EntityLabel::kQuantity, EntityLabel::kOrdinal,
           EntityLabel::kCardinal}};
}

VisualEntityPolicy VisualEntityPolicy::parse(std::string_view data) {
  VisualEntityPolicy p;
  std::istringstream in{std::string(data)};
  std::string line;
  while (std::getline(in, line)) {
    const std::string label = text::normalize_whitespace(line);
    if (label.empty() || label.front() == '#') continue;
    p.non_visual_labels.insert(parse_entity_label(label));
  }
  if (!p.non_visual_labels.contains(EntityLabel::kDate)) {
    throw SchemaError("visual entity policy must list DATE as non-visual");
  }
  return p;
}

VisualEntityPolicy VisualEntityPolicy::load(const std::filesystem::path& path) {
  return parse(read_file(path, "policy file"));
}

std::vector<Entity> visual_entities(std::span<const Entity> entities,
                                    const VisualEntityPolicy& policy) {
  std::vector<Entity> out;
  for (const auto& e : entities) {
    if (policy.is_visual(e.label)) out.push_back(e);
  }
  return out;
}

std::vector<std::string> unique_surfaces(std::span<const Entity> entities) {
  std::vector<std::string> out;
  std::set<std::string_view> seen;
  for (const auto& e : entities) {
    if (seen.insert(e.surface).second) out.push_back(e.surface);
  }
  return out;
}

std::vector<std::string> ordered_entity_intersection(
    std::span<const Entity> caption, std::span<const Entity> article) {
  std::set<std::string_view> in_article;
  for (const auto& e : article) in_article.insert(e.surface);
  std::vector<Entity> ordered(caption.begin(), caption.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const Entity& a, const Entity& b) {
                     return a.span.begin < b.span.begin;
                   });
  std::vector<std::string> out;
  std::set<std::string_view> emitted;
  for (const auto& e : ordered) {
    if (in_article.contains(e.surface) && emitted.insert(e.surface).second) {
      out.push_back(e.surface);
    }
  }
  return out;
}

MatchCounts match_surfaces(std::span<const std::string> generated,
                           std::span<const std::string> reference) {
  std::map<std::string_view, std::size_t> remaining;
  for (const auto& r : reference) ++remaining[r];
  MatchCounts c;
  for (const auto& g : generated) {
    auto it = remaining.find(g);
    if (it != remaining.end() && it->second > 0) {
      --it->second;
      ++c.true_positives;
    } else {
      ++c.false_positives;
    }
  }
  c.false_negatives = reference.size() - c.true_positives;
  return c;
}

MatchCounts match_entities(std::span<const Entity> generated,
                           std::span<const Entity> reference) {
  std::vector<std::string> g, r;
  g.reserve(generated.size());
  r.reserve(reference.size());
  for (const auto& e : generated) g.push_back(e.surface);
  for (const auto& e : reference) r.push_back(e.surface);
  return match_surfaces(g, r);
}

PrecisionRecall entity_pr(std::size_t tp, std::size_t fp, std::size_t fn) {
  PrecisionRecall pr;
  if (tp + fp > 0) pr.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) pr.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return pr;
}

PrecisionRecall entity_pr(const MatchCounts& c) {
  return entity_pr(c.true_positives, c.false_positives, c.false_negatives);
}

}  // namespace newscap
