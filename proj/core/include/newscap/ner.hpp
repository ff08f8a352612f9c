#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace newscap {

enum class EntityLabel {
  kPerson,
  kOrg,
  kGpe,
  kLoc,
  kEvent,
  kFac,
  kNorp,
  kWorkOfArt,
  kProduct,
  kLaw,
  kLanguage,
  kDate,
  kTime,
  kPercent,
  kMoney,
  kQuantity,
  kOrdinal,
  kCardinal,
};

std::string_view to_string(EntityLabel label);
// Throws SchemaError for labels outside the closed set.
EntityLabel parse_entity_label(std::string_view s);
std::span<const EntityLabel> all_entity_labels();

// Which text an entity was recognized in.
enum class TextField { kArticle, kCaption, kGenerated };

std::string_view to_string(TextField field);
TextField parse_text_field(std::string_view s);

struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

struct Entity {
  std::string surface;
  EntityLabel label = EntityLabel::kPerson;
  CharSpan span;
  TextField source = TextField::kArticle;

  friend bool operator==(const Entity&, const Entity&) = default;
};

// Identifies the text being tagged, for taggers that replay annotations.
struct TextRef {
  std::string_view doc_id;
  TextField field = TextField::kArticle;
};

class Tagger {
 public:
  virtual ~Tagger() = default;
  // Entities in ascending span order, non-overlapping.
  virtual std::vector<Entity> tag(std::string_view text,
                                  const TextRef& ref) const = 0;
};

std::vector<Entity> tag_entities(std::string_view text, const Tagger& tagger,
                                 const TextRef& ref = {});

// surface -> label. Surfaces are matched case-sensitively.
class Gazetteer {
 public:
  void add(std::string surface, EntityLabel label);
  std::size_t size() const noexcept { return entries_.size(); }
  const std::map<std::string, EntityLabel>& entries() const noexcept {
    return entries_;
  }

  // "surface<TAB>label" per line; blank lines and '#' comments skipped.
  static Gazetteer parse(std::string_view data);
  static Gazetteer load(const std::filesystem::path& path);

 private:
  std::map<std::string, EntityLabel> entries_;
};

// Deterministic built-in recognizer: gazetteer hits plus pattern rules for
// weekdays, month dates, years, times, percentages, money, ordinals and
// cardinals. Overlapping candidates resolve longest match first, then
// leftmost; on an exact tie a gazetteer hit beats a pattern.
class GazetteerTagger final : public Tagger {
 public:
  explicit GazetteerTagger(Gazetteer gazetteer, bool use_patterns = true);
  ~GazetteerTagger() override;

  std::vector<Entity> tag(std::string_view text,
                          const TextRef& ref) const override;

  const Gazetteer& gazetteer() const noexcept { return gazetteer_; }

 private:
  struct Index;
  Gazetteer gazetteer_;
  bool use_patterns_;
  std::unique_ptr<Index> index_;
};

// Replays externally produced annotations keyed by (doc_id, field). One
// JSON record per line: {"doc_id", "field", "entities": [{"surface",
// "label", "start_char", "end_char"}]}.
class AnnotationTagger final : public Tagger {
 public:
  static AnnotationTagger parse(std::string_view data);
  static AnnotationTagger load(const std::filesystem::path& path);

  // Throws SchemaError naming the doc_id when no record covers `ref`, or
  // when a recorded span does not reproduce its surface in `text`.
  std::vector<Entity> tag(std::string_view text,
                          const TextRef& ref) const override;

  std::size_t size() const noexcept { return records_.size(); }

 private:
  std::unordered_map<std::string, std::vector<Entity>> records_;
};

struct VisualEntityPolicy {
  std::set<EntityLabel> non_visual_labels;

  bool is_visual(EntityLabel label) const {
    return !non_visual_labels.contains(label);
  }

  // DATE, TIME, PERCENT, MONEY, QUANTITY, ORDINAL, CARDINAL.
  static VisualEntityPolicy default_policy();
  // One label per line. DATE must be present.
  static VisualEntityPolicy parse(std::string_view data);
  static VisualEntityPolicy load(const std::filesystem::path& path);
};

std::vector<Entity> visual_entities(std::span<const Entity> entities,
                                    const VisualEntityPolicy& policy);

// Distinct surfaces in order of first occurrence.
std::vector<std::string> unique_surfaces(std::span<const Entity> entities);

// Caption entities (in caption order) whose surface also occurs among
// `article` surfaces; each surface listed once, at its first appearance.
std::vector<std::string> ordered_entity_intersection(
    std::span<const Entity> caption, std::span<const Entity> article);

struct MatchCounts {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;

  MatchCounts& operator+=(const MatchCounts& o) {
    true_positives += o.true_positives;
    false_positives += o.false_positives;
    false_negatives += o.false_negatives;
    return *this;
  }
  friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

// Exact, case-sensitive surface matching with multiset clipping: each
// reference occurrence absorbs at most one generated occurrence.
MatchCounts match_entities(std::span<const Entity> generated,
                           std::span<const Entity> reference);
MatchCounts match_surfaces(std::span<const std::string> generated,
                           std::span<const std::string> reference);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

// 0/0 is reported as 0.
PrecisionRecall entity_pr(std::size_t tp, std::size_t fp, std::size_t fn);
PrecisionRecall entity_pr(const MatchCounts& counts);

}  // namespace newscap
