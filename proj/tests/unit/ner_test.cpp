#include <gtest/gtest.h>

#include "newscap/error.hpp"
#include "newscap/ner.hpp"

namespace newscap {
namespace {

using Pairs = std::vector<std::pair<std::string, EntityLabel>>;

Pairs pairs_of(const std::vector<Entity>& es) {
  Pairs out;
  for (const auto& e : es) out.emplace_back(e.surface, e.label);
  return out;
}

Entity ent(std::string s, EntityLabel l = EntityLabel::kPerson) {
  Entity e;
  e.surface = std::move(s);
  e.label = l;
  return e;
}

std::vector<Entity> ents(std::initializer_list<const char*> surfaces) {
  std::vector<Entity> out;
  for (const char* s : surfaces) out.push_back(ent(s));
  return out;
}

TEST(Tagger, GazetteerHits) {
  Gazetteer g;
  g.add("Lucy Bronze", EntityLabel::kPerson);
  g.add("England", EntityLabel::kGpe);
  const GazetteerTagger t(g);
  const auto es = tag_entities("Lucy Bronze plays for England", t);
  EXPECT_EQ(pairs_of(es), (Pairs{{"Lucy Bronze", EntityLabel::kPerson},
                                 {"England", EntityLabel::kGpe}}));
  EXPECT_EQ(es[0].span, (CharSpan{0, 11}));
  EXPECT_EQ(es[1].span, (CharSpan{22, 29}));
}

TEST(Tagger, WeekdayPattern) {
  const GazetteerTagger t(Gazetteer{});
  EXPECT_EQ(pairs_of(tag_entities("on Tuesday", t)),
            (Pairs{{"Tuesday", EntityLabel::kDate}}));
}

TEST(Tagger, PatternsCanBeDisabled) {
  const GazetteerTagger t(Gazetteer{}, false);
  EXPECT_TRUE(tag_entities("on Tuesday, 40 percent paid $3", t).empty());
}

TEST(Tagger, LongestMatchWins) {
  Gazetteer g;
  g.add("New York", EntityLabel::kGpe);
  g.add("New York City", EntityLabel::kGpe);
  const GazetteerTagger t(g);
  EXPECT_EQ(pairs_of(tag_entities("New York City", t)),
            (Pairs{{"New York City", EntityLabel::kGpe}}));
  EXPECT_EQ(pairs_of(tag_entities("New York Times", t)),
            (Pairs{{"New York", EntityLabel::kGpe}}));
}

TEST(Tagger, GazetteerRequiresWordBoundaries) {
  Gazetteer g;
  g.add("Paris", EntityLabel::kGpe);
  const GazetteerTagger t(g, false);
  EXPECT_TRUE(tag_entities("Parisian cafes", t).empty());
  EXPECT_EQ(tag_entities("in Paris.", t).size(), 1u);
}

TEST(Tagger, NumericPatterns) {
  const GazetteerTagger t(Gazetteer{});
  const auto es = tag_entities("About 40 percent paid $3 in 2019.", t);
  std::set<EntityLabel> labels;
  for (const auto& e : es) labels.insert(e.label);
  EXPECT_TRUE(labels.contains(EntityLabel::kPercent));
  EXPECT_TRUE(labels.contains(EntityLabel::kMoney));
  EXPECT_TRUE(labels.contains(EntityLabel::kDate));
}

TEST(Gazetteer, ParsesTsvAndRejectsUnknownLabel) {
  const auto g = Gazetteer::parse("# comment\nObama\tPERSON\n\nUN\tORG\n");
  EXPECT_EQ(g.size(), 2u);
  EXPECT_EQ(g.entries().at("UN"), EntityLabel::kOrg);
  EXPECT_THROW(Gazetteer::parse("X\tALIEN\n"), Error);
}

TEST(AnnotationTagger, ReplaysRecordedSpans) {
  const auto t = AnnotationTagger::parse(
      R"({"doc_id":"d1","field":"caption","entities":[{"surface":"Obama","label":"PERSON","start_char":4,"end_char":9}]})");
  const auto es = t.tag("Hey Obama", {"d1", TextField::kCaption});
  ASSERT_EQ(es.size(), 1u);
  EXPECT_EQ(es[0].surface, "Obama");
  EXPECT_EQ(es[0].source, TextField::kCaption);
}

TEST(AnnotationTagger, MissingKeyNamesDocId) {
  const auto t = AnnotationTagger::parse("");
  try {
    t.tag("text", {"doc42", TextField::kArticle});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSchema);
    EXPECT_NE(std::string(e.what()).find("doc42"), std::string::npos);
  }
}

TEST(AnnotationTagger, SpanMismatchRejected) {
  const auto t = AnnotationTagger::parse(
      R"({"doc_id":"d1","field":"article","entities":[{"surface":"Obama","label":"PERSON","start_char":0,"end_char":5}]})");
  EXPECT_THROW(t.tag("Hello world", {"d1", TextField::kArticle}), Error);
}

TEST(VisualEntities, DropsDate) {
  const std::vector<Entity> in{ent("Obama"), ent("Tuesday", EntityLabel::kDate)};
  const auto out = visual_entities(in, VisualEntityPolicy::default_policy());
  EXPECT_EQ(pairs_of(out), (Pairs{{"Obama", EntityLabel::kPerson}}));
}

TEST(VisualEntities, EmptyStaysEmpty) {
  EXPECT_TRUE(visual_entities({}, VisualEntityPolicy::default_policy()).empty());
}

TEST(VisualEntities, DefaultPolicyDropsNumericLabels) {
  const std::vector<Entity> in{ent("40 percent", EntityLabel::kPercent),
                               ent("$3", EntityLabel::kMoney)};
  EXPECT_TRUE(visual_entities(in, VisualEntityPolicy::default_policy()).empty());
  const auto p = VisualEntityPolicy::default_policy();
  for (auto l : all_entity_labels()) {
    const bool expected_visual =
        !(l == EntityLabel::kDate || l == EntityLabel::kTime || l == EntityLabel::kPercent ||
          l == EntityLabel::kMoney || l == EntityLabel::kQuantity ||
          l == EntityLabel::kOrdinal || l == EntityLabel::kCardinal);
    EXPECT_EQ(p.is_visual(l), expected_visual) << to_string(l);
  }
}

TEST(VisualEntities, PolicyFileMustContainDate) {
  EXPECT_THROW(VisualEntityPolicy::parse("TIME\n"), Error);
  const auto p = VisualEntityPolicy::parse("DATE\nGPE\n");
  EXPECT_FALSE(p.is_visual(EntityLabel::kGpe));
  EXPECT_TRUE(p.is_visual(EntityLabel::kMoney));
}

TEST(Intersection, PreservesCaptionOrderAndDedupes) {
  EXPECT_EQ(ordered_entity_intersection(ents({"Ertz", "Bronze", "England"}),
                                        ents({"England", "Bronze"})),
            (std::vector<std::string>{"Bronze", "England"}));
  EXPECT_TRUE(ordered_entity_intersection(ents({"A"}), ents({"B"})).empty());
  EXPECT_EQ(ordered_entity_intersection(ents({"X", "Y", "X"}), ents({"Y", "X"})),
            (std::vector<std::string>{"X", "Y"}));
}

TEST(UniqueSurfaces, FirstOccurrenceOrder) {
  EXPECT_EQ(unique_surfaces(ents({"A", "B", "A"})), (std::vector<std::string>{"A", "B"}));
}

TEST(MatchEntities, Examples) {
  EXPECT_EQ(match_entities(ents({"Paris", "Obama"}), ents({"Obama", "UN"})),
            (MatchCounts{1, 1, 1}));
  EXPECT_EQ(match_entities(ents({"Obama", "Obama"}), ents({"Obama", "Obama"})),
            (MatchCounts{2, 0, 0}));
  EXPECT_EQ(match_entities(ents({"Obama", "Obama", "Obama"}), ents({"Obama"})),
            (MatchCounts{1, 2, 0}));
}

TEST(MatchEntities, CaseSensitive) {
  EXPECT_EQ(match_entities(ents({"obama"}), ents({"Obama"})), (MatchCounts{0, 1, 1}));
}

TEST(EntityPr, Examples) {
  auto pr = entity_pr(1, 1, 1);
  EXPECT_DOUBLE_EQ(pr.precision, 0.5);
  EXPECT_DOUBLE_EQ(pr.recall, 0.5);
  pr = entity_pr(0, 0, 0);
  EXPECT_EQ(pr.precision, 0.0);
  EXPECT_EQ(pr.recall, 0.0);
  pr = entity_pr(3, 1, 2);
  EXPECT_DOUBLE_EQ(pr.precision, 0.75);
  EXPECT_DOUBLE_EQ(pr.recall, 0.6);
}

TEST(EntityLabels, RoundTripClosedSet) {
  EXPECT_EQ(all_entity_labels().size(), 18u);
  for (auto l : all_entity_labels()) EXPECT_EQ(parse_entity_label(to_string(l)), l);
  EXPECT_THROW(parse_entity_label("MISC"), Error);
}

}  // namespace
}  // namespace newscap
