#include "critique/engine.hpp"

#include <algorithm>
#include <numeric>

#include "critique/error.hpp"

namespace critique {

std::string_view to_string(Polarity p) {
  return p == Polarity::Positive ? "positive" : "negative";
}

std::string_view to_string(Backend b) { return b == Backend::Shared ? "shared" : "per_item"; }

Polarity parse_polarity(std::string_view s) {
  auto v = to_lower(s);
  if (v == "positive") return Polarity::Positive;
  if (v == "negative") return Polarity::Negative;
  throw Error(ErrorCode::BadRequest, "polarity must be 'positive' or 'negative'");
}

Backend parse_backend(std::string_view s) {
  auto v = to_lower(s);
  if (v == "shared") return Backend::Shared;
  if (v == "per_item") return Backend::PerItem;
  throw Error(ErrorCode::BadRequest, "backend must be 'shared' or 'per_item'");
}

double UserState::effective_weight(std::size_t k) const {
  if (auto it = critiques.find(k); it != critiques.end()) {
    return it->second == Polarity::Positive ? 1.0 : -1.0;
  }
  return base[k];
}

std::vector<double> UserState::effective_weights() const {
  std::vector<double> w(base);
  for (const auto& [k, p] : critiques) w[k] = p == Polarity::Positive ? 1.0 : -1.0;
  return w;
}

UserState zero_state(std::size_t vocab_size) {
  return UserState{std::vector<double>(vocab_size, 0.0), {}};
}

UserState init_user_state(std::string_view user_id, const ReviewCorpus& corpus,
                          const Vocabulary& vocab, const StopwordSet& stopwords) {
  if (!corpus.has_user(user_id)) {
    throw Error(ErrorCode::UnknownUser, "unknown user '" + std::string(user_id) + "'");
  }
  auto counts = count_keyphrases(tokenize(corpus.user_text(user_id), stopwords), vocab);
  return UserState{l2_normalize(counts), {}};
}

double score_item(const UserState& state, const ItemProfile& profile) {
  if (state.base.size() != profile.salience.size()) {
    throw Error(ErrorCode::VocabularyMismatch,
                "user state and profile of '" + profile.item_id + "' use different vocabularies");
  }
  double score = 0.0;
  for (std::size_t k = 0; k < profile.salience.size(); ++k) {
    score += state.effective_weight(k) * profile.salience[k];
  }
  return score;
}

Explanation explain_shared(const UserState& state, std::size_t k_expl) {
  const auto w = state.effective_weights();
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] > 0.0) keep.push_back(k);
  }
  std::stable_sort(keep.begin(), keep.end(),
                   [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
  if (keep.size() > k_expl) keep.resize(k_expl);
  return Explanation{std::move(keep), ExplanationScope::Global};
}

Explanation explain_per_item(const UserState& state, const ItemProfile& profile,
                             std::size_t k_expl) {
  if (state.base.size() != profile.salience.size()) {
    throw Error(ErrorCode::VocabularyMismatch,
                "user state and profile of '" + profile.item_id + "' use different vocabularies");
  }
  const auto w = state.effective_weights();
  const auto& p = profile.salience;
  std::vector<std::size_t> keep;
  std::vector<double> relevance(p.size(), 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0 && w[k] >= 0.0) {
      relevance[k] = p[k] * (1.0 + w[k]);
      keep.push_back(k);
    }
  }
  std::stable_sort(keep.begin(), keep.end(),
                   [&](std::size_t a, std::size_t b) { return relevance[a] > relevance[b]; });
  if (keep.size() > k_expl) keep.resize(k_expl);
  return Explanation{std::move(keep), ExplanationScope::PerItem};
}

bool RankedList::operator==(const RankedList& other) const {
  if (entries.size() != other.entries.size()) return false;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& a = entries[i];
    const auto& b = other.entries[i];
    if (a.item_id != b.item_id || a.score != b.score) return false;
    if (static_cast<bool>(a.explanation) != static_cast<bool>(b.explanation)) return false;
    if (a.explanation && *a.explanation != *b.explanation) return false;
  }
  return true;
}

RankedList recommend(const UserState& state, const Catalog& catalog, const ProfileMap& profiles,
                     std::string_view destination, const RecommendOptions& options) {
  if (options.top_n < 1) throw Error(ErrorCode::InvalidArgument, "top_n must be at least 1");
  const auto members = catalog.items_in(destination);

  std::vector<std::pair<const ItemProfile*, double>> scored;
  scored.reserve(members.size());
  for (const auto* item : members) {
    auto it = profiles.find(item->item_id);
    if (it == profiles.end()) {
      throw Error(ErrorCode::UnknownItem, "no profile for item '" + item->item_id + "'");
    }
    scored.emplace_back(&it->second, score_item(state, it->second));
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first->item_id < b.first->item_id;
  });
  if (scored.size() > options.top_n) scored.resize(options.top_n);

  RankedList list;
  list.entries.reserve(scored.size());
  std::shared_ptr<const Explanation> shared;
  if (options.backend == Backend::Shared) {
    shared = std::make_shared<const Explanation>(explain_shared(state, options.k_expl));
  }
  for (const auto& [profile, score] : scored) {
    auto explanation = shared ? shared
                              : std::make_shared<const Explanation>(
                                    explain_per_item(state, *profile, options.k_expl));
    list.entries.push_back(RankedEntry{profile->item_id, score, std::move(explanation)});
  }
  return list;
}

UserState apply_critique(const UserState& state, const Vocabulary& vocab,
                         std::string_view keyphrase, Polarity polarity, Backend backend) {
  const auto k = vocab.index_of(keyphrase);
  if (backend == Backend::Shared && polarity == Polarity::Positive) {
    throw Error(ErrorCode::PositiveNotSupported,
                "the shared-explanation backend only accepts negative critiques");
  }
  UserState next = state;
  next.critiques[k] = polarity;
  return next;
}

UserState retract_critique(const UserState& state, const Vocabulary& vocab,
                           std::string_view keyphrase) {
  const auto k = vocab.index_of(keyphrase);
  if (!state.critiques.count(k)) {
    throw Error(ErrorCode::NotCritiqued, "keyphrase '" + std::string(keyphrase) + "' is not critiqued");
  }
  UserState next = state;
  next.critiques.erase(k);
  return next;
}

std::vector<std::string> filter_static(const Catalog& catalog, const ProfileMap& profiles,
                                       const Vocabulary& vocab, std::string_view destination,
                                       const std::vector<std::string>& selected) {
  std::vector<std::size_t> wanted;
  for (const auto& phrase : selected) wanted.push_back(vocab.index_of(phrase));

  std::vector<std::string> out;
  for (const auto* item : catalog.items_in(destination)) {
    auto it = profiles.find(item->item_id);
    if (it == profiles.end()) continue;
    const auto& p = it->second.salience;
    if (std::all_of(wanted.begin(), wanted.end(), [&](std::size_t k) { return p[k] > 0.0; })) {
      out.push_back(item->item_id);
    }
  }
  return out;
}

}  // namespace critique
