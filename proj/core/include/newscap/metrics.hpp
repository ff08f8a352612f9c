#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

// Caption metrics with the COCO caption evaluation conventions: PTB-style
// tokenization, lowercasing and removal of punctuation tokens, corpus BLEU
// with "closest" reference length, ROUGE-L with beta 1.2 averaged over
// documents, and CIDEr-D (n = 1..4, sigma = 6, clipped tf-idf, x10) with
// idf computed over the reference corpus.
namespace newscap::metrics {

// Lowercased tokens with the toolkit's punctuation tokens removed.
std::vector<std::string> ptb_tokenize(std::string_view caption);

// ptb_tokenize joined with single spaces.
std::string ptb_normalize(std::string_view caption);

// The *_tokenized variants take captions that are already normalized
// (space-separated tokens). All throw InvalidArgument on an empty corpus or
// mismatched lengths.
double bleu4_tokenized(std::span<const std::string> candidates,
                       std::span<const std::string> references);
double rouge_l_tokenized(std::span<const std::string> candidates,
                         std::span<const std::string> references);
std::vector<double> cider_scores_tokenized(std::span<const std::string> candidates,
                                           std::span<const std::string> references);
double cider_tokenized(std::span<const std::string> candidates,
                       std::span<const std::string> references);

// Raw-caption entry points; tokenize with ptb_normalize first.
double bleu4(std::span<const std::string> candidates,
             std::span<const std::string> references);
double rouge_l(std::span<const std::string> candidates,
               std::span<const std::string> references);
double cider(std::span<const std::string> candidates,
             std::span<const std::string> references);

struct CaptionScores {
  double bleu4 = 0.0;
  double rouge_l = 0.0;
  double cider = 0.0;
};

// Tokenizes once and computes all three.
CaptionScores score_captions(std::span<const std::string> candidates,
                             std::span<const std::string> references);

}  // namespace newscap::metrics
