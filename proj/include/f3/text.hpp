#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "f3/common.hpp"

namespace f3 {

class Dataset;

using TokenList = std::vector<std::string>;

/// Lowercases ASCII letters, splits on every run of characters that are not
/// alphanumeric, and drops single-character tokens. Bytes of multi-byte UTF-8
/// sequences count as alphanumeric so non-ASCII words stay whole.
TokenList tokenize(std::string_view text);

/// Adjacent-pair terms ("screen broke") for ngram == 2; the tokens for 1.
TokenList ngrams(const TokenList& tokens, int ngram);

struct SparseEntry {
  std::uint32_t index = 0;
  double weight = 0.0;
  bool operator==(const SparseEntry&) const = default;
};

/// Strictly increasing indices, no duplicates.
using SparseVector = std::vector<SparseEntry>;

class Vocabulary {
 public:
  Vocabulary() = default;

  std::size_t size() const { return terms_.size(); }
  int ngram() const { return ngram_; }
  std::size_t min_df() const { return min_df_; }
  std::size_t documents() const { return documents_; }

  /// Column of `term`, or -1 if not stored.
  long index_of(std::string_view term) const;
  const std::string& term(std::size_t index) const { return terms_[index]; }
  std::size_t document_frequency(std::size_t index) const { return df_[index]; }
  double idf(std::size_t index) const { return idf_[index]; }

 private:
  friend class TfidfVectorizer;

  int ngram_ = 1;
  std::size_t min_df_ = 1;
  std::size_t documents_ = 0;
  std::vector<std::string> terms_;
  std::vector<std::size_t> df_;
  std::vector<double> idf_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Smoothed TF-IDF: idf(t) = ln((1 + N) / (1 + df(t))) + 1, raw counts as tf,
/// L2-normalized document vectors. Columns are ordered lexicographically.
class TfidfVectorizer {
 public:
  static TfidfVectorizer fit(std::span<const TokenList> docs, int ngram, std::size_t min_df);

  SparseVector transform(const TokenList& tokens) const;
  const Vocabulary& vocabulary() const { return vocab_; }

 private:
  Vocabulary vocab_;
};

std::pair<Vocabulary, std::vector<SparseVector>> tfidf_fit_transform(
    std::span<const TokenList> docs, int ngram, std::size_t min_df);

/// Fixed English stopword list used by frequent_terms.
bool is_stopword(std::string_view token);

struct TermCount {
  std::string term;
  std::size_t count = 0;
  bool operator==(const TermCount&) const = default;
};

/// Top-k unigrams of one (city, label) slice after stopword removal, by
/// descending count; ties broken lexicographically.
std::vector<TermCount> frequent_terms(const Dataset& dataset, City city, Label label,
                                      std::size_t k);

/// Same ranking over an explicit token corpus.
std::vector<TermCount> frequent_terms(std::span<const TokenList> docs, std::size_t k);

}  // namespace f3
