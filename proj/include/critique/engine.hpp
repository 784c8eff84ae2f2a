#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "critique/corpus.hpp"

namespace critique {

enum class Polarity { Positive, Negative };

/// SHARED: one explanation for the whole list, disagreement-only critiques.
/// PER_ITEM: an explanation per user-item pair, critiques of both polarities.
enum class Backend { Shared, PerItem };

std::string_view to_string(Polarity p);
std::string_view to_string(Backend b);
/// Case-insensitive; throws BadRequest.
Polarity parse_polarity(std::string_view s);
Backend parse_backend(std::string_view s);

/// Immutable preference state. Critiques never touch `base`; they override
/// the effective weight of a keyphrase to +1 or -1.
struct UserState {
  std::vector<double> base;
  std::map<std::size_t, Polarity> critiques;

  double effective_weight(std::size_t k) const;
  std::vector<double> effective_weights() const;

  bool operator==(const UserState&) const = default;
};

UserState zero_state(std::size_t vocab_size);

/// Base vector = normalized keyphrase counts over the user's reviews.
/// Throws UnknownUser.
UserState init_user_state(std::string_view user_id, const ReviewCorpus& corpus,
                          const Vocabulary& vocab,
                          const StopwordSet& stopwords = StopwordSet::bundled());

/// Sum over k of effective weight times salience. Throws VocabularyMismatch.
double score_item(const UserState& state, const ItemProfile& profile);

enum class ExplanationScope { Global, PerItem };

struct Explanation {
  std::vector<std::size_t> keyphrases;  // vocabulary indices
  ExplanationScope scope = ExplanationScope::Global;

  bool operator==(const Explanation&) const = default;
};

inline constexpr std::size_t kDefaultTopN = 10;
inline constexpr std::size_t kDefaultExplanationSize = 6;

Explanation explain_shared(const UserState& state, std::size_t k_expl = kDefaultExplanationSize);
Explanation explain_per_item(const UserState& state, const ItemProfile& profile,
                             std::size_t k_expl = kDefaultExplanationSize);

struct RankedEntry {
  std::string item_id;
  double score = 0.0;
  /// Under SHARED every entry points at the same global explanation.
  std::shared_ptr<const Explanation> explanation;
};

struct RankedList {
  std::vector<RankedEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  /// Compares ids, scores and explanation contents.
  bool operator==(const RankedList& other) const;
};

struct RecommendOptions {
  std::size_t top_n = kDefaultTopN;
  std::size_t k_expl = kDefaultExplanationSize;
  Backend backend = Backend::PerItem;
};

/// Scores every item of the destination, best first with ties by ascending
/// item_id, truncated to top_n. Throws UnknownDestination.
RankedList recommend(const UserState& state, const Catalog& catalog, const ProfileMap& profiles,
                     std::string_view destination, const RecommendOptions& options);

/// Returns a new state with `keyphrase` set to `polarity`. Throws
/// UnknownKeyphrase, or PositiveNotSupported under the SHARED backend.
UserState apply_critique(const UserState& state, const Vocabulary& vocab,
                         std::string_view keyphrase, Polarity polarity, Backend backend);

/// Throws UnknownKeyphrase or NotCritiqued.
UserState retract_critique(const UserState& state, const Vocabulary& vocab,
                           std::string_view keyphrase);

/// Items of the destination mentioning every selected keyphrase, by
/// ascending item_id.
std::vector<std::string> filter_static(const Catalog& catalog, const ProfileMap& profiles,
                                       const Vocabulary& vocab, std::string_view destination,
                                       const std::vector<std::string>& selected);

}  // namespace critique
