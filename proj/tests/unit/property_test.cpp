#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "newscap/alignment.hpp"
#include "newscap/context.hpp"
#include "newscap/evaluation.hpp"
#include "newscap/loss.hpp"
#include "newscap/metrics.hpp"
#include "newscap/ner.hpp"
#include "newscap/rng.hpp"
#include "newscap/text.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

// Randomized properties. Each generator is a plain function of a seeded
// stream, so every failure reproduces from the printed trial number.
namespace newscap {
namespace {

constexpr int kTrials = 200;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng_.uniform_below(n)); }
  bool coin() { return below(2) == 0; }

  std::string word() {
    static const char* const kVocab[] = {"the", "a",   "man",   "woman", "park", "Obama",
                                         "UN",  "in",  "Paris", "walks", "dog",  "red",
                                         "of",  "on",  "city",  "team",  "wins", "2019"};
    return kVocab[below(std::size(kVocab))];
  }

  std::string phrase(std::size_t max_words) {
    std::string s;
    const std::size_t n = below(max_words + 1);
    for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + word();
    return s;
  }

  std::string noisy_text(std::size_t max_len) {
    static const std::string kChars = "abcXYZ .,!?'\"-$%0123()\t";
    std::string s;
    const std::size_t n = below(max_len + 1);
    for (std::size_t i = 0; i < n; ++i) s += kChars[below(kChars.size())];
    return s;
  }

  std::vector<std::string> surfaces(std::size_t max_n) {
    static const char* const kNames[] = {"Obama", "UN", "Paris", "Bronze", "England"};
    std::vector<std::string> out;
    const std::size_t n = below(max_n + 1);
    for (std::size_t i = 0; i < n; ++i) out.push_back(kNames[below(std::size(kNames))]);
    return out;
  }

  SeededRng& rng() { return rng_; }

 private:
  SeededRng rng_;
};

std::vector<Entity> as_entities(const std::vector<std::string>& s) {
  std::vector<Entity> out;
  for (const auto& x : s) out.push_back({x, EntityLabel::kPerson, {}, TextField::kCaption});
  return out;
}

TEST(Property, CorpusMetricsArePermutationInvariant) {
  Gen g(1);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::string> cand, ref;
    const std::size_t n = 2 + g.below(8);
    for (std::size_t i = 0; i < n; ++i) {
      cand.push_back(g.phrase(10));
      ref.push_back(g.phrase(10) + " end");
    }
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    g.rng().shuffle(std::span<std::size_t>(perm));
    std::vector<std::string> pc, pr;
    for (auto i : perm) {
      pc.push_back(cand[i]);
      pr.push_back(ref[i]);
    }
    const auto a = metrics::score_captions(cand, ref);
    const auto b = metrics::score_captions(pc, pr);
    EXPECT_NEAR(a.bleu4, b.bleu4, 1e-12) << t;
    EXPECT_NEAR(a.rouge_l, b.rouge_l, 1e-12) << t;
    EXPECT_NEAR(a.cider, b.cider, 1e-9) << t;
  }
}

TEST(Property, IdenticalCaptionsScoreMaximally) {
  Gen g(2);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::string> caps;
    const std::size_t n = 1 + g.below(6);
    for (std::size_t i = 0; i < n; ++i) caps.push_back(g.phrase(8) + " one two three four");
    const auto s = metrics::score_captions(caps, caps);
    EXPECT_NEAR(s.bleu4, 1.0, 1e-6) << t;
    EXPECT_NEAR(s.rouge_l, 1.0, 1e-12) << t;
    EXPECT_GE(s.cider, 0.0);
  }
}

TEST(Property, MetricsStayInRange) {
  Gen g(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::string> cand, ref;
    const std::size_t n = 1 + g.below(6);
    for (std::size_t i = 0; i < n; ++i) {
      cand.push_back(g.noisy_text(40));
      ref.push_back(g.noisy_text(40));
    }
    const auto s = metrics::score_captions(cand, ref);
    EXPECT_GE(s.bleu4, 0.0);
    EXPECT_LE(s.bleu4, 1.0 + 1e-9);
    EXPECT_GE(s.rouge_l, 0.0);
    EXPECT_LE(s.rouge_l, 1.0 + 1e-12);
    EXPECT_GE(s.cider, 0.0);
  }
}

TEST(Property, VisualPolicyIsIdempotent) {
  Gen g(4);
  const auto labels = all_entity_labels();
  const auto policy = VisualEntityPolicy::default_policy();
  for (int t = 0; t < kTrials; ++t) {
    std::vector<Entity> es;
    for (std::size_t i = 0, n = g.below(8); i < n; ++i) {
      es.push_back({g.word(), labels[g.below(labels.size())], {}, TextField::kArticle});
    }
    const auto once = visual_entities(es, policy);
    EXPECT_EQ(visual_entities(once, policy), once) << t;
    for (const auto& e : once) EXPECT_TRUE(policy.is_visual(e.label));
  }
}

TEST(Property, RecallNeverDropsWhenAMatchIsAdded) {
  Gen g(13);
  for (int t = 0; t < kTrials; ++t) {
    auto gen = g.surfaces(5);
    const auto ref = g.surfaces(5);
    if (ref.empty()) continue;
    const double before = entity_pr(match_surfaces(gen, ref)).recall;
    gen.push_back(ref[g.below(ref.size())]);
    EXPECT_GE(entity_pr(match_surfaces(gen, ref)).recall, before) << t;
  }
}

TEST(Property, MatchCountsConserveOccurrencesAndSwapSymmetrically) {
  Gen g(5);
  for (int t = 0; t < kTrials; ++t) {
    const auto gen = g.surfaces(6);
    const auto ref = g.surfaces(6);
    const auto m = match_surfaces(gen, ref);
    EXPECT_EQ(m.true_positives + m.false_positives, gen.size());
    EXPECT_EQ(m.true_positives + m.false_negatives, ref.size());
    const auto swapped = match_surfaces(ref, gen);
    EXPECT_EQ(swapped.true_positives, m.true_positives);
    EXPECT_EQ(swapped.false_positives, m.false_negatives);
    EXPECT_EQ(match_entities(as_entities(gen), as_entities(ref)), m);
  }
}

TEST(Property, OrderedIntersectionMatchesOracleAndIsIdempotent) {
  Gen g(6);
  for (int t = 0; t < kTrials; ++t) {
    const auto cap = as_entities(g.surfaces(6));
    const auto art = as_entities(g.surfaces(6));
    const auto got = ordered_entity_intersection(cap, art);
    EXPECT_EQ(got, testing::naive_ordered_intersection(cap, art)) << t;
    EXPECT_EQ(ordered_entity_intersection(as_entities(got), art), got) << t;
  }
}

TEST(Property, WordBoundaryMatchesNaiveScan) {
  Gen g(7);
  for (int t = 0; t < kTrials * 5; ++t) {
    const auto hay = g.noisy_text(30) + (g.coin() ? " UN" : "UNa") + g.noisy_text(10);
    const std::string needle = g.coin() ? "UN" : "a";
    EXPECT_EQ(text::contains_at_word_boundary(hay, needle),
              testing::naive_boundary_contains(hay, needle))
        << "'" << hay << "' / " << needle;
  }
}

TEST(Property, SegmentationPreservesWords) {
  Gen g(8);
  for (int t = 0; t < kTrials; ++t) {
    std::string article;
    const std::size_t n = g.below(8);
    for (std::size_t i = 0; i < n; ++i) {
      article += "Mr. " + g.phrase(6) + (g.coin() ? ". " : "? ") + (g.coin() ? "\n" : "");
    }
    const auto sentences = segment_sentences(article);
    std::vector<std::string> parts;
    for (const auto& s : sentences) parts.push_back(s.text);
    EXPECT_EQ(text::join(parts, " "), text::normalize_whitespace(article)) << t;
    std::size_t words = 0;
    for (const auto& s : sentences) words += s.word_count();
    EXPECT_EQ(words, text::word_count(article)) << t;
  }
}

TEST(Property, ContextsRespectCapsAndOrdering) {
  const auto syn = testing::make_synthetic_corpus(40, 9);
  Gen g(9);
  for (const auto& d : syn.docs) {
    for (int t = 0; t < 5; ++t) {
      const std::size_t budget = 1 + g.below(300);
      const std::size_t cap = 1 + g.below(400);
      const auto origin = origin_context(d, CorpusStyle::kNyTimes, budget);
      EXPECT_LE(origin.sentence_word_count, budget);
      EXPECT_TRUE(testing::context_violations(d, origin, budget).empty());
      std::vector<std::size_t> sel;
      const std::size_t k = g.below(d.sentences.size() + 1);
      for (std::size_t i = 0; i < k; ++i) sel.push_back(g.below(d.sentences.size()));
      const auto ctx = supplement_context(d, sel, g.surfaces(3), origin, cap);
      const auto v = testing::context_violations(d, ctx, cap);
      EXPECT_TRUE(v.empty()) << d.doc_id << ": " << text::join(v, "; ");
      // The kept sentences are an article-order prefix of the merged set, and
      // the first dropped one would have overflowed the cap.
      std::set<std::size_t> merged(sel.begin(), sel.end());
      for (auto i : origin.sentence_indices()) merged.insert(i);
      const auto kept = ctx.sentence_indices();
      const std::vector<std::size_t> all(merged.begin(), merged.end());
      ASSERT_LE(kept.size(), all.size());
      EXPECT_TRUE(std::equal(kept.begin(), kept.end(), all.begin()));
      if (kept.size() < all.size()) {
        EXPECT_GT(ctx.sentence_word_count + d.sentences[all[kept.size()]].word_count(), cap);
      }
      // A context re-supplemented with nothing new is a fixed point.
      const auto again = supplement_context(d, {}, ctx.entity_hints, ctx, cap);
      EXPECT_EQ(again.final_text, ctx.final_text);
    }
  }
}

TEST(Property, SerializationRoundTrips) {
  const auto syn = testing::make_synthetic_corpus(30, 10);
  const GazetteerTagger tagger(syn.gazetteer);
  for (const auto& d : syn.docs) {
    EXPECT_EQ(serialize_document(parse_document(serialize_document(d))), serialize_document(d));
    const auto ctx = origin_context(d, CorpusStyle::kNyTimes, 120);
    EXPECT_EQ(serialize_context(d.doc_id, parse_context_record(serialize_context(d.doc_id, ctx)).context),
              serialize_context(d.doc_id, ctx));
    const auto ce = tagger.tag(d.caption, {d.doc_id, TextField::kCaption});
    for (const auto& s : build_sentence_selection(d, ce, VisualEntityPolicy::default_policy(), std::nullopt, 3)) {
      EXPECT_EQ(serialize_sample(parse_sample(serialize_sample(s))), serialize_sample(s));
    }
    const Prediction p{d.doc_id, d.caption};
    EXPECT_EQ(parse_predictions(serialize_prediction(p)).at(0), p);
  }
}

TEST(Property, MiniGroupsPartitionTheStreams) {
  Gen g(11);
  for (int t = 0; t < 50; ++t) {
    SampleStreams st;
    std::multiset<std::string> all;
    auto add = [&](const std::string& id) {
      all.insert(id);
      return AlignmentSample{.id = id};
    };
    for (std::size_t i = 0, n = 1 + g.below(12); i < n; ++i) st.cap.push_back(add("c" + std::to_string(i)));
    for (std::size_t i = 0, n = 1 + g.below(6); i < n; ++i) {
      st.sent_sets.push_back({add("s" + std::to_string(i) + "x"), add("s" + std::to_string(i) + "y")});
    }
    for (std::size_t i = 0, n = 1 + g.below(6); i < n; ++i) st.ent.push_back(add("e" + std::to_string(i)));
    const auto a = assemble_minigroups(st, g.rng().next());
    std::multiset<std::string> seen;
    for (const auto& grp : a.groups) {
      seen.insert(grp.cap_ids.begin(), grp.cap_ids.end());
      seen.insert(grp.sent_ids.begin(), grp.sent_ids.end());
      seen.insert(grp.ent_id);
    }
    seen.insert(a.leftover_cap.begin(), a.leftover_cap.end());
    for (const auto& s : a.leftover_sent_sets) seen.insert(s.begin(), s.end());
    seen.insert(a.leftover_ent.begin(), a.leftover_ent.end());
    EXPECT_EQ(seen, all) << t;
    EXPECT_EQ(a.groups.size(), std::min({st.cap.size() / 2, st.sent_sets.size(), st.ent.size()}));
  }
}

TEST(Property, LossIsBoundedAndLinear) {
  Gen g(12);
  for (int t = 0; t < kTrials; ++t) {
    std::vector<double> lp;
    for (std::size_t i = 0, n = 1 + g.below(10); i < n; ++i) {
      lp.push_back(-static_cast<double>(g.below(1000)) / 100.0);
    }
    const double l = loss::lm_loss(lp);
    EXPECT_LE(l, -*std::min_element(lp.begin(), lp.end()) + 1e-12);
    EXPECT_GE(l, 0.0);
    const double a = static_cast<double>(g.below(50)) / 10.0;
    const double b = static_cast<double>(g.below(50)) / 10.0;
    const auto w = loss::TaskWeights::goodnews();
    EXPECT_NEAR(loss::weighted_total(a + b, 1, 1, w),
                loss::weighted_total(a, 1, 1, w) + loss::weighted_total(b, 0, 0, w), 1e-12);
  }
}

}  // namespace
}  // namespace newscap
