#include "critique/match.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "critique/error.hpp"

namespace critique {

using nlohmann::json;

namespace {

void normalize(SparseVector& v) {
  double sq = 0.0;
  for (const auto& [_, w] : v) sq += w * w;
  if (sq == 0.0) {
    v.clear();
    return;
  }
  const double norm = std::sqrt(sq);
  for (auto& [_, w] : v) w /= norm;
}

SparseVector weigh(const std::map<std::uint32_t, int>& counts, const std::vector<double>& idf) {
  SparseVector v;
  for (const auto& [term, tf] : counts) {
    const double w = tf * idf[term];
    if (w > 0.0) v.emplace_back(term, w);
  }
  normalize(v);
  return v;
}

}  // namespace

double dot(const SparseVector& a, const SparseVector& b) {
  double sum = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      sum += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  return sum;
}

TfidfIndex TfidfIndex::build(const UserDocuments& docs) {
  if (docs.empty()) throw Error(ErrorCode::InvalidArgument, "cannot index zero user documents");

  TfidfIndex index;
  std::map<std::string, std::size_t> df;
  for (const auto& [_, doc] : docs) {
    for (const auto& [term, count] : doc.tokens) {
      if (count > 0) ++df[term];
    }
  }
  const double n = static_cast<double>(docs.size());
  for (const auto& [term, d] : df) {
    index.terms_.push_back(term);
    index.idf_.push_back(std::log(n / static_cast<double>(d)));
  }
  index.rebuild_lookup();

  for (const auto& [user_id, doc] : docs) {
    std::map<std::uint32_t, int> counts;
    for (const auto& [term, count] : doc.tokens) {
      if (count > 0) counts[index.term_lookup_.at(term)] = count;
    }
    index.user_ids_.push_back(user_id);
    index.user_vectors_.push_back(weigh(counts, index.idf_));
  }
  return index;
}

void TfidfIndex::rebuild_lookup() {
  term_lookup_.clear();
  for (std::uint32_t i = 0; i < terms_.size(); ++i) term_lookup_.emplace(terms_[i], i);
}

const SparseVector& TfidfIndex::user_vector(std::string_view user_id) const {
  auto it = std::lower_bound(user_ids_.begin(), user_ids_.end(), user_id);
  if (it == user_ids_.end() || *it != user_id) {
    throw Error(ErrorCode::UnknownUser, "unknown user '" + std::string(user_id) + "'");
  }
  return user_vectors_[static_cast<std::size_t>(it - user_ids_.begin())];
}

std::int64_t TfidfIndex::term_index(const std::string& term) const {
  auto it = term_lookup_.find(term);
  return it == term_lookup_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

json TfidfIndex::to_json() const {
  json users = json::object();
  for (std::size_t u = 0; u < user_ids_.size(); ++u) {
    json entries = json::array();
    for (const auto& [term, w] : user_vectors_[u]) entries.push_back({term, w});
    users[user_ids_[u]] = std::move(entries);
  }
  return {{"terms", terms_}, {"idf", idf_}, {"users", std::move(users)}};
}

TfidfIndex TfidfIndex::from_json(const json& j) {
  TfidfIndex index;
  try {
    index.terms_ = j.at("terms").get<std::vector<std::string>>();
    index.idf_ = j.at("idf").get<std::vector<double>>();
    if (index.terms_.size() != index.idf_.size()) {
      throw Error(ErrorCode::Parse, "index has mismatched terms and idf lengths");
    }
    for (const auto& [user_id, entries] : j.at("users").items()) {
      SparseVector v;
      for (const auto& e : entries) {
        auto term = e.at(0).get<std::uint32_t>();
        if (term >= index.terms_.size()) throw Error(ErrorCode::Parse, "term index out of range");
        v.emplace_back(term, e.at(1).get<double>());
      }
      std::sort(v.begin(), v.end());
      index.user_ids_.push_back(user_id);
      index.user_vectors_.push_back(std::move(v));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed index: ") + e.what());
  }
  // nlohmann objects iterate in key order, so user_ids_ is already sorted.
  index.rebuild_lookup();
  return index;
}

void TfidfIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << to_json().dump();
}

TfidfIndex TfidfIndex::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
  }
  return from_json(j);
}

SparseVector vectorize_query(const TfidfIndex& index, std::string_view text,
                             const StopwordSet& stopwords) {
  std::map<std::uint32_t, int> counts;
  for (const auto& tok : tokenize(text, stopwords)) {
    auto term = index.term_index(tok);
    if (term >= 0) ++counts[static_cast<std::uint32_t>(term)];
  }
  return weigh(counts, index.idf());
}

UserMatch match_user(const TfidfIndex& index, std::string_view text,
                     const StopwordSet& stopwords) {
  if (index.document_count() == 0) throw Error(ErrorCode::InvalidArgument, "empty index");
  auto query = vectorize_query(index, text, stopwords);
  if (query.empty()) {
    throw Error(ErrorCode::NoSignal, "query has no terms in common with any user; please rephrase");
  }
  std::size_t best = 0;
  double best_sim = -1.0;
  const auto& vectors = index.user_vectors();
  for (std::size_t u = 0; u < vectors.size(); ++u) {
    const double sim = dot(query, vectors[u]);
    // user_ids are sorted, so strict > keeps the smallest id on ties.
    if (sim > best_sim) {
      best_sim = sim;
      best = u;
    }
  }
  return {index.user_ids()[best], std::clamp(best_sim, 0.0, 1.0)};
}

}  // namespace critique
