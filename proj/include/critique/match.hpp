#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "critique/corpus.hpp"
#include "critique/text.hpp"
#include "json.hpp"

namespace critique {

/// (term index, weight) pairs sorted by term index.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

double dot(const SparseVector& a, const SparseVector& b);

/// Word-level TF-IDF space over user documents: raw term counts times
/// idf = ln(N / df), each user vector L2-normalized.
class TfidfIndex {
 public:
  TfidfIndex() = default;

  /// Throws InvalidArgument on an empty document map.
  static TfidfIndex build(const UserDocuments& docs);

  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<double>& idf() const { return idf_; }
  /// Sorted user ids.
  const std::vector<std::string>& user_ids() const { return user_ids_; }
  const SparseVector& user_vector(std::string_view user_id) const;
  const std::vector<SparseVector>& user_vectors() const { return user_vectors_; }
  std::size_t document_count() const { return user_ids_.size(); }

  /// -1 when the term is not indexed.
  std::int64_t term_index(const std::string& term) const;

  nlohmann::json to_json() const;
  static TfidfIndex from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static TfidfIndex load(const std::filesystem::path& path);

 private:
  void rebuild_lookup();

  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::uint32_t> term_lookup_;
  std::vector<double> idf_;
  std::vector<std::string> user_ids_;
  std::vector<SparseVector> user_vectors_;
};

inline TfidfIndex build_tfidf_index(const UserDocuments& docs) { return TfidfIndex::build(docs); }

SparseVector vectorize_query(const TfidfIndex& index, std::string_view text,
                             const StopwordSet& stopwords = StopwordSet::bundled());

struct UserMatch {
  std::string user_id;
  double similarity = 0.0;
};

/// Most similar user by cosine; ties go to the smallest user_id.
/// Throws NoSignal when the query has no weight in the index.
UserMatch match_user(const TfidfIndex& index, std::string_view text,
                     const StopwordSet& stopwords = StopwordSet::bundled());

}  // namespace critique
