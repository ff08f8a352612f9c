#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "newscap/error.hpp"
#include "newscap/evaluation.hpp"
#include "oracles.hpp"

namespace newscap {
namespace {

GazetteerTagger letters_tagger() {
  Gazetteer g;
  for (const char* s : {"Alpha", "Bravo", "Charlie", "Delta", "Echo", "Foxtrot"}) {
    g.add(s, EntityLabel::kPerson);
  }
  return GazetteerTagger(g, false);
}

struct Fixture {
  std::vector<std::string> generated{"Alpha Bravo Charlie Echo"};
  std::vector<std::string> references{"Alpha Bravo Charlie Delta Echo Foxtrot"};
  std::vector<std::string> contexts{"Alpha and Bravo saw Charlie and Delta."};
};

TEST(EntityReport, InAndOutOfContextRecall) {
  const Fixture f;
  const auto tagger = letters_tagger();
  const auto a = entity_report(f.generated, f.references, f.contexts, tagger);
  EXPECT_EQ(a.in_context_reference, 4u);
  EXPECT_EQ(a.in_context_matched, 3u);
  EXPECT_EQ(a.out_context_reference, 2u);
  EXPECT_EQ(a.out_context_matched, 1u);
  EXPECT_DOUBLE_EQ(a.in_context_recall(), 0.75);
  EXPECT_DOUBLE_EQ(a.out_context_recall(), 0.5);
  EXPECT_EQ(a.overall, (MatchCounts{4, 0, 2}));
  EXPECT_FALSE(a.out_of_train_pr().has_value());
}

TEST(EntityReport, OutOfTrainRestriction) {
  const Fixture f;
  const auto tagger = letters_tagger();
  const auto index = parse_train_index("Alpha\nBravo\n\nCharlie\n");
  const auto a = entity_report(f.generated, f.references, f.contexts, tagger, &index);
  ASSERT_TRUE(a.out_of_train.has_value());
  EXPECT_EQ(*a.out_of_train, (MatchCounts{1, 0, 2}));
  const auto pr = *a.out_of_train_pr();
  EXPECT_DOUBLE_EQ(pr.precision, 1.0);
  EXPECT_DOUBLE_EQ(pr.recall, 1.0 / 3.0);
}

TEST(EntityReport, AgreesWithBruteForceOracle) {
  const auto tagger = letters_tagger();
  const std::vector<std::string> gen{"Alpha Alpha Bravo", "Echo", "", "Delta Foxtrot Delta"};
  const std::vector<std::string> ref{"Alpha Bravo Bravo", "Echo Echo Charlie", "Delta", "Delta"};
  const std::vector<std::string> ctx{"Bravo is here.", "Nothing.", "Delta was here.", "Delta"};
  auto surfaces = [&](const std::vector<std::string>& texts) {
    std::vector<std::vector<std::string>> out;
    for (const auto& t : texts) {
      out.emplace_back();
      for (const auto& e : tagger.tag(t, {})) out.back().push_back(e.surface);
    }
    return out;
  };
  const auto o = testing::brute_force_entities(surfaces(gen), surfaces(ref), ctx);
  const auto a = entity_report(gen, ref, ctx, tagger);
  EXPECT_EQ(a.overall.true_positives, o.matched);
  EXPECT_EQ(a.overall.true_positives + a.overall.false_negatives, o.reference);
  EXPECT_EQ(a.overall.true_positives + a.overall.false_positives, o.generated);
  EXPECT_EQ(a.in_context_reference, o.in_reference);
  EXPECT_EQ(a.in_context_matched, o.in_matched);
  EXPECT_EQ(a.out_context_reference, o.out_reference);
  EXPECT_EQ(a.out_context_matched, o.out_matched);
}

TEST(EntityReport, LengthMismatchRejected) {
  const auto tagger = letters_tagger();
  const std::vector<std::string> one{"x"}, two{"x", "y"};
  EXPECT_THROW(entity_report(one, two, one, tagger), Error);
}

TEST(Report, MeteorRendering) {
  const Fixture f;
  const auto tagger = letters_tagger();
  const auto r = evaluate(f.generated, f.references, f.contexts, tagger);
  EXPECT_NE(render_table(r).find("not computed"), std::string::npos);
  EXPECT_TRUE(nlohmann::json::parse(report_json(r)).at("meteor").is_null());
  const auto m = merge_external_meteor(r, 0.1422);
  const auto table = render_table(m);
  EXPECT_NE(table.find("14.22"), std::string::npos) << table;
  EXPECT_NE(table.find("(external)"), std::string::npos) << table;
  const auto j = nlohmann::json::parse(report_json(m));
  EXPECT_DOUBLE_EQ(j.at("meteor").at("value").get<double>(), 0.1422);
  EXPECT_EQ(j.at("meteor").at("provenance"), "external");
  EXPECT_THROW(merge_external_meteor(r, 1.5), Error);
  EXPECT_THROW(merge_external_meteor(r, -0.1), Error);
}

TEST(Report, PerfectPredictionsRenderHundred) {
  const std::vector<std::string> caps{"Alpha meets Bravo in the park", "Echo sings at night"};
  const std::vector<std::string> ctx{"Alpha.", "Echo."};
  const auto tagger = letters_tagger();
  const auto r = evaluate(caps, caps, ctx, tagger);
  EXPECT_NEAR(r.scores.bleu4, 1.0, 1e-6);
  EXPECT_NEAR(r.scores.rouge_l, 1.0, 1e-12);
  EXPECT_EQ(r.documents, 2u);
  EXPECT_NE(render_table(r).find("100.00"), std::string::npos);
}

TEST(Predictions, RoundTripAndStrictParsing) {
  const Prediction p{"d1", "A \"quoted\" caption"};
  const auto back = parse_predictions(serialize_prediction(p) + "\n\n");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], p);
  EXPECT_THROW(parse_predictions("{\"doc_id\":\"x\"}\n"), Error);
}

}  // namespace
}  // namespace newscap
