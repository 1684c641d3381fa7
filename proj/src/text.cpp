#include "f3/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "f3/corpus.hpp"

namespace f3 {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

std::size_t codepoints(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

}  // namespace

TokenList tokenize(std::string_view text) {
  TokenList tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    if (i == start) continue;
    std::string token(text.substr(start, i - start));
    if (codepoints(token) < 2) continue;
    for (auto& c : token) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    tokens.push_back(std::move(token));
  }
  return tokens;
}

TokenList ngrams(const TokenList& tokens, int ngram) {
  if (ngram == 1) return tokens;
  if (ngram != 2) throw std::invalid_argument("ngram order must be 1 or 2");
  TokenList out;
  if (tokens.size() < 2) return out;
  out.reserve(tokens.size() - 1);
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) out.push_back(tokens[i] + ' ' + tokens[i + 1]);
  return out;
}

long Vocabulary::index_of(std::string_view term) const {
  auto it = index_.find(std::string(term));
  return it == index_.end() ? -1 : static_cast<long>(it->second);
}

TfidfVectorizer TfidfVectorizer::fit(std::span<const TokenList> docs, int ngram,
                                     std::size_t min_df) {
  if (docs.empty()) throw std::invalid_argument("tfidf: no documents");
  if (ngram != 1 && ngram != 2) throw std::invalid_argument("tfidf: ngram order must be 1 or 2");

  std::map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    auto terms = ngrams(doc, ngram);
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    for (auto& t : terms) ++df[std::move(t)];
  }

  TfidfVectorizer v;
  Vocabulary& vocab = v.vocab_;
  vocab.ngram_ = ngram;
  vocab.min_df_ = min_df;
  vocab.documents_ = docs.size();
  const double n = static_cast<double>(docs.size());
  for (auto& [term, count] : df) {
    if (count < min_df) continue;
    vocab.index_.emplace(term, vocab.terms_.size());
    vocab.terms_.push_back(term);
    vocab.df_.push_back(count);
    vocab.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  if (vocab.terms_.empty())
    throw Error("tfidf: empty vocabulary (min_df " + std::to_string(min_df) +
                " removed every term)");
  return v;
}

SparseVector TfidfVectorizer::transform(const TokenList& tokens) const {
  std::map<std::size_t, double> counts;
  for (const auto& term : ngrams(tokens, vocab_.ngram_)) {
    auto it = vocab_.index_.find(term);
    if (it != vocab_.index_.end()) counts[it->second] += 1.0;
  }
  SparseVector out;
  out.reserve(counts.size());
  double norm2 = 0.0;
  for (const auto& [index, tf] : counts) {
    double w = tf * vocab_.idf_[index];
    out.push_back({static_cast<std::uint32_t>(index), w});
    norm2 += w * w;
  }
  if (norm2 > 0.0) {
    double inv = 1.0 / std::sqrt(norm2);
    for (auto& e : out) e.weight *= inv;
  }
  return out;
}

std::pair<Vocabulary, std::vector<SparseVector>> tfidf_fit_transform(
    std::span<const TokenList> docs, int ngram, std::size_t min_df) {
  auto vectorizer = TfidfVectorizer::fit(docs, ngram, min_df);
  std::vector<SparseVector> out;
  out.reserve(docs.size());
  for (const auto& doc : docs) out.push_back(vectorizer.transform(doc));
  return {vectorizer.vocabulary(), std::move(out)};
}

bool is_stopword(std::string_view token) {
  // "one" and "time" are content words in review text and deliberately absent.
  static const std::unordered_set<std::string_view> kStopwords = {
      "a",      "about",  "above",   "after",  "again",   "against", "all",     "am",
      "an",     "and",    "any",     "are",    "as",      "at",      "be",      "because",
      "been",   "before", "being",   "below",  "between", "both",    "but",     "by",
      "can",    "could",  "did",     "do",     "does",    "doing",   "don",     "down",
      "during", "each",   "few",     "for",    "from",    "further", "had",     "has",
      "have",   "having", "he",      "her",    "here",    "hers",    "herself", "him",
      "himself", "his",   "how",     "if",     "in",      "into",    "is",      "it",
      "its",    "itself", "just",    "me",     "more",    "most",    "my",      "myself",
      "no",     "nor",    "not",     "now",    "of",      "off",     "on",      "once",
      "only",   "or",     "other",   "our",    "ours",    "ourselves", "out",   "over",
      "own",    "same",   "she",     "should", "so",      "some",    "such",    "than",
      "that",   "the",    "their",   "theirs", "them",    "themselves", "then", "there",
      "these",  "they",   "this",    "those",  "through", "to",      "too",     "under",
      "until",  "up",     "very",    "was",    "we",      "were",    "what",    "when",
      "where",  "which",  "while",   "who",    "whom",    "why",     "will",    "with",
      "would",  "you",    "your",    "yours",  "yourself", "yourselves", "ve", "ll",
      "re",     "didn",   "doesn",   "isn",    "wasn",    "won",     "got",     "get",
      "also",   "even",   "go",      "went",   "said",    "told",
  };
  return kStopwords.contains(token);
}

std::vector<TermCount> frequent_terms(std::span<const TokenList> docs, std::size_t k) {
  if (k == 0) return {};
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& doc : docs) {
    for (const auto& t : doc) {
      if (!is_stopword(t)) ++counts[t];
    }
  }
  std::vector<TermCount> ranked;
  ranked.reserve(counts.size());
  for (auto& [term, count] : counts) ranked.push_back({term, count});
  auto order = [](const TermCount& a, const TermCount& b) {
    return a.count != b.count ? a.count > b.count : a.term < b.term;
  };
  if (ranked.size() > k) {
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<long>(k), ranked.end(), order);
    ranked.resize(k);
  } else {
    std::sort(ranked.begin(), ranked.end(), order);
  }
  return ranked;
}

std::vector<TermCount> frequent_terms(const Dataset& dataset, City city, Label label,
                                      std::size_t k) {
  std::vector<TokenList> docs;
  for (const auto& r : dataset.reviews()) {
    if (r.city == city && r.label == label) docs.push_back(tokenize(r.text));
  }
  return frequent_terms(docs, k);
}

}  // namespace f3
