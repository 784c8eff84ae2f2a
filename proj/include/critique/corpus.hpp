#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "critique/text.hpp"

namespace critique {

struct Review {
  std::string review_id;
  std::string user_id;
  std::string item_id;
  int rating = 0;
  std::string text;

  bool operator==(const Review&) const = default;
};

struct Item {
  std::string item_id;
  std::string name;
  std::string destination;
  std::string description;

  bool operator==(const Item&) const = default;
};

/// Reviews in load order, indexed by user and by item.
class ReviewCorpus {
 public:
  ReviewCorpus() = default;
  /// Throws DuplicateId on a repeated review_id, InvalidArgument on a
  /// rating outside [1,5] or a blank text.
  explicit ReviewCorpus(std::vector<Review> reviews);

  const std::vector<Review>& reviews() const { return reviews_; }
  std::size_t size() const { return reviews_.size(); }
  bool empty() const { return reviews_.empty(); }

  bool has_user(std::string_view user_id) const;
  /// Distinct user ids, sorted.
  std::vector<std::string> user_ids() const;
  std::vector<const Review*> reviews_by_user(std::string_view user_id) const;
  std::vector<const Review*> reviews_of_item(std::string_view item_id) const;

  /// The user's review texts joined by newlines, in load order.
  std::string user_text(std::string_view user_id) const;
  /// The item's review texts joined by newlines, in load order.
  std::string item_review_text(std::string_view item_id) const;

 private:
  std::vector<Review> reviews_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_user_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_item_;
};

/// Items keyed by id. Destinations are the sorted distinct destination
/// values; items within a destination are listed by ascending item_id.
class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::vector<Item> items);

  const std::vector<Item>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  const Item* find(std::string_view item_id) const;
  const Item& at(std::string_view item_id) const;

  const std::vector<std::string>& destinations() const { return destinations_; }
  bool has_destination(std::string_view destination) const;
  /// Throws UnknownDestination.
  std::vector<const Item*> items_in(std::string_view destination) const;

 private:
  std::vector<Item> items_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> destinations_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_destination_;
};

ReviewCorpus parse_reviews(std::istream& in, const std::string& source = "<reviews>");
ReviewCorpus load_reviews(const std::filesystem::path& path);
Catalog parse_items(std::istream& in, const std::string& source = "<items>");
Catalog load_items(const std::filesystem::path& path);

void write_reviews(std::ostream& out, const ReviewCorpus& corpus);
void write_items(std::ostream& out, const Catalog& catalog);

/// Ordered keyphrase list; index order is rank order. Phrases are lowercase
/// and have one or two tokens.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> phrases);

  std::size_t size() const { return phrases_.size(); }
  bool empty() const { return phrases_.empty(); }
  const std::string& phrase(std::size_t index) const { return phrases_.at(index); }
  const std::vector<std::string>& phrases() const { return phrases_; }
  std::optional<std::size_t> find(std::string_view phrase) const;
  /// Throws UnknownKeyphrase.
  std::size_t index_of(std::string_view phrase) const;

  bool operator==(const Vocabulary& other) const { return phrases_ == other.phrases_; }

 private:
  std::vector<std::string> phrases_;
  std::unordered_map<std::string, std::size_t> index_;
};

Vocabulary parse_vocabulary(std::string_view text);
Vocabulary load_vocabulary(const std::filesystem::path& path);

struct MiningOptions {
  std::size_t max_phrases = 90;
  double df_low = 0.01;
  double df_high = 0.5;
  std::set<std::string> exclude;
};

/// Concatenation of the item's review texts and its description, which is
/// the document both mining and item profiles count over.
std::string item_document(const ReviewCorpus& corpus, const Item& item);

/// Frequency-ranked unigram and bigram candidates whose item-level document
/// frequency lies in [df_low, df_high]. Throws EmptyCorpus.
Vocabulary mine_vocabulary(const ReviewCorpus& corpus, const Catalog& catalog,
                           const MiningOptions& options,
                           const StopwordSet& stopwords = StopwordSet::bundled());

/// Occurrences of each vocabulary phrase in a token stream; bigrams count
/// adjacent token pairs.
std::vector<int> count_keyphrases(const std::vector<std::string>& tokens,
                                  const Vocabulary& vocab);

/// L2-normalized copy; the zero vector stays zero.
std::vector<double> l2_normalize(const std::vector<int>& counts);

struct ItemProfile {
  std::string item_id;
  std::vector<int> counts;
  std::vector<double> salience;
};

using ProfileMap = std::map<std::string, ItemProfile, std::less<>>;

ItemProfile build_item_profile(const ReviewCorpus& corpus, const Item& item,
                               const Vocabulary& vocab,
                               const StopwordSet& stopwords = StopwordSet::bundled());
ProfileMap build_item_profiles(const ReviewCorpus& corpus, const Catalog& catalog,
                               const Vocabulary& vocab,
                               const StopwordSet& stopwords = StopwordSet::bundled());

struct UserDocument {
  std::string user_id;
  std::map<std::string, int> tokens;
};

using UserDocuments = std::map<std::string, UserDocument, std::less<>>;

UserDocuments build_user_documents(const ReviewCorpus& corpus,
                                   const StopwordSet& stopwords = StopwordSet::bundled());

}  // namespace critique
