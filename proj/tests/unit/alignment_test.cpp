#include <gtest/gtest.h>

#include "newscap/alignment.hpp"
#include "newscap/error.hpp"
#include "newscap/text.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

namespace newscap {
namespace {

Document doc_from(const std::string& article, const std::string& caption) {
  return make_document("d", article, caption, "img", std::nullopt, Split::kTrain,
                       SentenceSegmenter());
}

Entity ent(std::string s, EntityLabel l = EntityLabel::kPerson) {
  Entity e;
  e.surface = std::move(s);
  e.label = l;
  return e;
}

const SentMetadata& sent_meta(const AlignmentSample& s) { return std::get<SentMetadata>(s.metadata); }

TEST(SentenceSelection, EntitySentenceIsPositive) {
  const auto d = doc_from("Lucy Bronze scored twice. The weather was mild.", "Lucy Bronze smiles.");
  const std::vector<Entity> e{ent("Lucy Bronze")};
  const auto s = build_sentence_selection(d, e, VisualEntityPolicy::default_policy(), std::nullopt, 1);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].input_context, "Lucy Bronze scored twice.");
  EXPECT_EQ(s[0].target, "yes");
  EXPECT_EQ(sent_meta(s[1]).provenance, SentProvenance::kCaptionPositive);
  EXPECT_EQ(s[1].input_context, "Lucy Bronze smiles.");
  EXPECT_EQ(s[1].target, "yes");
  EXPECT_EQ(s[2].input_context, "The weather was mild.");
  EXPECT_EQ(s[2].target, "no");
  EXPECT_EQ(sent_meta(s[2]).provenance, SentProvenance::kNegative);
}

TEST(SentenceSelection, MaximumScoreSentencesOnly) {
  const auto d = doc_from("Alpha met Beta. Alpha left. Rain fell. Snow fell. Wind blew.",
                          "Alpha and Beta.");
  const std::vector<Entity> e{ent("Alpha"), ent("Beta")};
  const auto s = build_sentence_selection(d, e, VisualEntityPolicy::default_policy(), std::nullopt, 4);
  std::vector<std::string> pos, neg;
  for (const auto& x : s) {
    if (sent_meta(x).provenance == SentProvenance::kPositive) pos.push_back(x.input_context);
    if (sent_meta(x).provenance == SentProvenance::kNegative) neg.push_back(x.input_context);
  }
  EXPECT_EQ(pos, (std::vector<std::string>{"Alpha met Beta."}));
  EXPECT_EQ(neg.size(), 2u);
  for (const auto& n : neg) EXPECT_EQ(n.find("Alpha"), std::string::npos);
  EXPECT_EQ(sent_meta(s[0]).visual_entity_count, 2u);
}

TEST(SentenceSelection, NonVisualEntitiesIgnored) {
  const auto d = doc_from("It was Tuesday. Rain fell.", "On Tuesday.");
  const std::vector<Entity> e{ent("Tuesday", EntityLabel::kDate)};
  EXPECT_TRUE(build_sentence_selection(d, e, VisualEntityPolicy::default_policy(), std::nullopt, 1).empty());
}

TEST(SentenceSelection, NegativeCountRejectedAndClamped) {
  const auto d = doc_from("Alpha ran. Rain fell.", "Alpha.");
  const std::vector<Entity> e{ent("Alpha")};
  const auto p = VisualEntityPolicy::default_policy();
  EXPECT_THROW(build_sentence_selection(d, e, p, -1, 1), Error);
  EXPECT_EQ(build_sentence_selection(d, e, p, 10, 1).size(), 3u);
  EXPECT_EQ(build_sentence_selection(d, e, p, 0, 1).size(), 2u);
}

TEST(SentenceSelection, SeedDeterminesNegatives) {
  const auto syn = testing::make_synthetic_corpus(10, 21);
  const GazetteerTagger tagger(syn.gazetteer);
  for (const auto& d : syn.docs) {
    const auto ce = tagger.tag(d.caption, {d.doc_id, TextField::kCaption});
    const auto a = build_sentence_selection(d, ce, VisualEntityPolicy::default_policy(), std::nullopt, 99);
    const auto b = build_sentence_selection(d, ce, VisualEntityPolicy::default_policy(), std::nullopt, 99);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(serialize_sample(a[i]), serialize_sample(b[i]));
  }
}

TEST(SentenceSelection, SyntheticCorpusSatisfiesOracle) {
  const auto syn = testing::make_synthetic_corpus(40, 4);
  const GazetteerTagger tagger(syn.gazetteer);
  const auto policy = VisualEntityPolicy::default_policy();
  for (const auto& d : syn.docs) {
    const auto ce = tagger.tag(d.caption, {d.doc_id, TextField::kCaption});
    const auto ae = tagger.tag(d.article_text, {d.doc_id, TextField::kArticle});
    const auto sent = build_sentence_selection(d, ce, policy, std::nullopt, 17);
    const auto entity = build_entity_selection(d, ce, ae);
    const auto v = testing::alignment_violations(d, ce, ae, policy, sent, entity);
    EXPECT_TRUE(v.empty()) << d.doc_id << ": " << text::join(v, "; ");
  }
}

TEST(EntitySelection, CaptionOrderedIntersection) {
  const auto d = doc_from("Bronze and England won.", "Ertz, Bronze and England.");
  const std::vector<Entity> ce{ent("Ertz"), ent("Bronze"), ent("England", EntityLabel::kGpe)};
  const std::vector<Entity> ae{ent("Bronze"), ent("England", EntityLabel::kGpe)};
  const auto s = build_entity_selection(d, ce, ae);
  EXPECT_EQ(s.target, "Bronze, England");
  EXPECT_EQ(std::get<EntMetadata>(s.metadata).targets,
            (std::vector<std::string>{"Bronze", "England"}));
  EXPECT_TRUE(s.input_context.ends_with("The possible related entities are: Bronze, England"))
      << s.input_context;
}

TEST(EntitySelection, EmptyIntersectionAndRepeats) {
  const auto d = doc_from("X met Y there.", "X met Y; X smiled.");
  EXPECT_EQ(build_entity_selection(d, std::vector<Entity>{ent("Z")}, std::vector<Entity>{ent("X")}).target, "");
  const std::vector<Entity> ce{ent("X"), ent("Y"), ent("X")};
  const std::vector<Entity> ae{ent("Y"), ent("X")};
  EXPECT_EQ(build_entity_selection(d, ce, ae).target, "X, Y");
}

TEST(CaptionSample, TargetIsCaptionAndContextWithinBudget) {
  std::string article = "Start";
  for (int i = 0; i < 799; ++i) article += " w";
  article += ".";
  const auto d = doc_from(article, "A b c.");
  const auto s = build_caption_sample(d, origin_context(d, CorpusStyle::kGoodNews, 500));
  EXPECT_EQ(s.target, "A b c.");
  EXPECT_LE(text::word_count(s.input_context), 500u);
  EXPECT_EQ(s.id, "d:cap");
}

SampleStreams streams(std::size_t cap, std::size_t sent, std::size_t ent) {
  SampleStreams st;
  for (std::size_t i = 0; i < cap; ++i) st.cap.push_back({.id = "c" + std::to_string(i)});
  for (std::size_t i = 0; i < sent; ++i) {
    st.sent_sets.push_back({{.id = "s" + std::to_string(i) + "a"}, {.id = "s" + std::to_string(i) + "b"}});
  }
  for (std::size_t i = 0; i < ent; ++i) st.ent.push_back({.id = "e" + std::to_string(i)});
  return st;
}

TEST(MiniGroups, ExactDivision) {
  const auto a = assemble_minigroups(streams(4, 2, 2), 1);
  EXPECT_EQ(a.groups.size(), 2u);
  EXPECT_EQ(a.leftover_count(), 0u);
  for (const auto& g : a.groups) {
    EXPECT_NE(g.cap_ids[0], g.cap_ids[1]);
    EXPECT_EQ(g.sent_ids.size(), 2u);
    EXPECT_FALSE(g.ent_id.empty());
  }
}

TEST(MiniGroups, LeftoverReported) {
  const auto a = assemble_minigroups(streams(5, 2, 2), 1);
  EXPECT_EQ(a.groups.size(), 2u);
  EXPECT_EQ(a.leftover_cap.size(), 1u);
  EXPECT_EQ(a.leftover_count(), 1u);
}

TEST(MiniGroups, DeterministicGivenSeed) {
  const auto a = assemble_minigroups(streams(9, 5, 6), 77);
  const auto b = assemble_minigroups(streams(9, 5, 6), 77);
  ASSERT_EQ(a.groups.size(), b.groups.size());
  for (std::size_t i = 0; i < a.groups.size(); ++i) {
    EXPECT_EQ(serialize_minigroup(i, a.groups[i]), serialize_minigroup(i, b.groups[i]));
  }
  EXPECT_EQ(a.leftover_cap, b.leftover_cap);
}

TEST(MiniGroups, EmptyStreamRejected) {
  EXPECT_THROW(assemble_minigroups(streams(2, 0, 1), 1), Error);
}

TEST(Samples, SerializeRoundTrip) {
  const auto d = doc_from("Alpha ran. Rain fell.", "Alpha.");
  const std::vector<Entity> e{ent("Alpha")};
  for (const auto& s : build_sentence_selection(d, e, VisualEntityPolicy::default_policy(), std::nullopt, 3)) {
    EXPECT_EQ(serialize_sample(parse_sample(serialize_sample(s))), serialize_sample(s));
  }
  const auto es = build_entity_selection(d, e, e);
  EXPECT_EQ(serialize_sample(parse_sample(serialize_sample(es))), serialize_sample(es));
}

}  // namespace
}  // namespace newscap
