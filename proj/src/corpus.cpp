#include "critique/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "critique/error.hpp"
#include "json.hpp"

namespace critique {

using nlohmann::json;

namespace {

std::string located(const std::string& source, std::size_t line, const std::string& what) {
  return source + ":" + std::to_string(line) + ": " + what;
}

std::string string_field(const json& obj, const char* key, const std::string& source,
                         std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorCode::Parse, located(source, line, std::string("missing field '") + key + "'"),
                line);
  }
  if (!it->is_string()) {
    throw Error(ErrorCode::Parse,
                located(source, line, std::string("field '") + key + "' must be a string"), line);
  }
  return it->get<std::string>();
}

template <typename F>
void for_each_json_line(std::istream& in, const std::string& source, F&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::Parse, located(source, lineno, e.what()), lineno);
    }
    if (!obj.is_object()) {
      throw Error(ErrorCode::Parse, located(source, lineno, "expected a JSON object"), lineno);
    }
    fn(obj, lineno);
  }
}

std::string join_texts(const std::vector<const Review*>& reviews) {
  std::string out;
  for (const auto* r : reviews) {
    if (!out.empty()) out.push_back('\n');
    out += r->text;
  }
  return out;
}

}  // namespace

// --- ReviewCorpus --------------------------------------------------------

ReviewCorpus::ReviewCorpus(std::vector<Review> reviews) : reviews_(std::move(reviews)) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < reviews_.size(); ++i) {
    const auto& r = reviews_[i];
    if (!seen.insert(r.review_id).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate review_id '" + r.review_id + "'");
    }
    if (r.rating < 1 || r.rating > 5) {
      throw Error(ErrorCode::InvalidArgument,
                  "review '" + r.review_id + "' has rating outside [1,5]");
    }
    if (trim(r.text).empty()) {
      throw Error(ErrorCode::InvalidArgument, "review '" + r.review_id + "' has empty text");
    }
    by_user_[r.user_id].push_back(i);
    by_item_[r.item_id].push_back(i);
  }
}

bool ReviewCorpus::has_user(std::string_view user_id) const {
  return by_user_.count(std::string(user_id)) != 0;
}

std::vector<std::string> ReviewCorpus::user_ids() const {
  std::vector<std::string> ids;
  ids.reserve(by_user_.size());
  for (const auto& [id, _] : by_user_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<const Review*> ReviewCorpus::reviews_by_user(std::string_view user_id) const {
  std::vector<const Review*> out;
  if (auto it = by_user_.find(std::string(user_id)); it != by_user_.end()) {
    for (auto i : it->second) out.push_back(&reviews_[i]);
  }
  return out;
}

std::vector<const Review*> ReviewCorpus::reviews_of_item(std::string_view item_id) const {
  std::vector<const Review*> out;
  if (auto it = by_item_.find(std::string(item_id)); it != by_item_.end()) {
    for (auto i : it->second) out.push_back(&reviews_[i]);
  }
  return out;
}

std::string ReviewCorpus::user_text(std::string_view user_id) const {
  return join_texts(reviews_by_user(user_id));
}

std::string ReviewCorpus::item_review_text(std::string_view item_id) const {
  return join_texts(reviews_of_item(item_id));
}

// --- Catalog -------------------------------------------------------------

Catalog::Catalog(std::vector<Item> items) : items_(std::move(items)) {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const auto& item = items_[i];
    if (!index_.emplace(item.item_id, i).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate item_id '" + item.item_id + "'");
    }
    if (trim(item.destination).empty()) {
      throw Error(ErrorCode::InvalidArgument, "item '" + item.item_id + "' has empty destination");
    }
    by_destination_[item.destination].push_back(i);
  }
  for (auto& [dest, members] : by_destination_) {
    destinations_.push_back(dest);
    std::sort(members.begin(), members.end(), [this](std::size_t a, std::size_t b) {
      return items_[a].item_id < items_[b].item_id;
    });
  }
}

const Item* Catalog::find(std::string_view item_id) const {
  auto it = index_.find(std::string(item_id));
  return it == index_.end() ? nullptr : &items_[it->second];
}

const Item& Catalog::at(std::string_view item_id) const {
  if (const auto* item = find(item_id)) return *item;
  throw Error(ErrorCode::UnknownItem, "unknown item '" + std::string(item_id) + "'");
}

bool Catalog::has_destination(std::string_view destination) const {
  return by_destination_.find(destination) != by_destination_.end();
}

std::vector<const Item*> Catalog::items_in(std::string_view destination) const {
  auto it = by_destination_.find(destination);
  if (it == by_destination_.end()) {
    throw Error(ErrorCode::UnknownDestination,
                "unknown destination '" + std::string(destination) + "'");
  }
  std::vector<const Item*> out;
  out.reserve(it->second.size());
  for (auto i : it->second) out.push_back(&items_[i]);
  return out;
}

// --- JSONL I/O -----------------------------------------------------------

ReviewCorpus parse_reviews(std::istream& in, const std::string& source) {
  std::vector<Review> reviews;
  std::unordered_set<std::string> seen;
  for_each_json_line(in, source, [&](const json& obj, std::size_t line) {
    Review r;
    r.review_id = string_field(obj, "review_id", source, line);
    r.user_id = string_field(obj, "user_id", source, line);
    r.item_id = string_field(obj, "item_id", source, line);
    r.text = string_field(obj, "text", source, line);
    auto rating = obj.find("rating");
    if (rating == obj.end()) {
      throw Error(ErrorCode::Parse, located(source, line, "missing field 'rating'"), line);
    }
    if (!rating->is_number_integer()) {
      throw Error(ErrorCode::Parse, located(source, line, "field 'rating' must be an integer"),
                  line);
    }
    r.rating = rating->get<int>();
    if (r.rating < 1 || r.rating > 5) {
      throw Error(ErrorCode::Parse, located(source, line, "rating outside [1,5]"), line);
    }
    if (trim(r.text).empty()) {
      throw Error(ErrorCode::Parse, located(source, line, "empty review text"), line);
    }
    if (!seen.insert(r.review_id).second) {
      throw Error(ErrorCode::DuplicateId,
                  located(source, line, "duplicate review_id '" + r.review_id + "'"), line);
    }
    reviews.push_back(std::move(r));
  });
  return ReviewCorpus(std::move(reviews));
}

ReviewCorpus load_reviews(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return parse_reviews(in, path.filename().string());
}

Catalog parse_items(std::istream& in, const std::string& source) {
  std::vector<Item> items;
  std::unordered_set<std::string> seen;
  for_each_json_line(in, source, [&](const json& obj, std::size_t line) {
    Item item;
    item.item_id = string_field(obj, "item_id", source, line);
    item.name = string_field(obj, "name", source, line);
    item.destination = string_field(obj, "destination", source, line);
    item.description = string_field(obj, "description", source, line);
    if (trim(item.destination).empty()) {
      throw Error(ErrorCode::Parse, located(source, line, "empty destination"), line);
    }
    if (!seen.insert(item.item_id).second) {
      throw Error(ErrorCode::DuplicateId,
                  located(source, line, "duplicate item_id '" + item.item_id + "'"), line);
    }
    items.push_back(std::move(item));
  });
  return Catalog(std::move(items));
}

Catalog load_items(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return parse_items(in, path.filename().string());
}

void write_reviews(std::ostream& out, const ReviewCorpus& corpus) {
  for (const auto& r : corpus.reviews()) {
    json obj = {{"review_id", r.review_id},
                {"user_id", r.user_id},
                {"item_id", r.item_id},
                {"rating", r.rating},
                {"text", r.text}};
    out << obj.dump() << '\n';
  }
}

void write_items(std::ostream& out, const Catalog& catalog) {
  for (const auto& item : catalog.items()) {
    json obj = {{"item_id", item.item_id},
                {"name", item.name},
                {"destination", item.destination},
                {"description", item.description}};
    out << obj.dump() << '\n';
  }
}

// --- Vocabulary ----------------------------------------------------------

Vocabulary::Vocabulary(std::vector<std::string> phrases) : phrases_(std::move(phrases)) {
  for (std::size_t i = 0; i < phrases_.size(); ++i) {
    const auto& p = phrases_[i];
    auto toks = phrase_tokens(p);
    if (toks.empty() || toks.size() > 2) {
      throw Error(ErrorCode::InvalidArgument, "keyphrase '" + p + "' must have 1 or 2 tokens");
    }
    auto canonical = toks.size() == 1 ? toks[0] : toks[0] + " " + toks[1];
    if (canonical != p || to_lower(p) != p) {
      throw Error(ErrorCode::InvalidArgument,
                  "keyphrase '" + p + "' must be lowercase with single-space separation");
    }
    if (!index_.emplace(p, i).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate keyphrase '" + p + "'");
    }
  }
}

std::optional<std::size_t> Vocabulary::find(std::string_view phrase) const {
  auto it = index_.find(std::string(phrase));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::index_of(std::string_view phrase) const {
  if (auto idx = find(phrase)) return *idx;
  throw Error(ErrorCode::UnknownKeyphrase, "unknown keyphrase '" + std::string(phrase) + "'");
}

Vocabulary parse_vocabulary(std::string_view text) {
  std::vector<std::string> phrases;
  for (const auto& line : split_lines(text)) {
    auto p = trim(line);
    if (!p.empty()) phrases.push_back(std::move(p));
  }
  return Vocabulary(std::move(phrases));
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  return parse_vocabulary(read_file(path));
}

// --- Mining and profiles -------------------------------------------------

std::string item_document(const ReviewCorpus& corpus, const Item& item) {
  auto text = corpus.item_review_text(item.item_id);
  if (!text.empty()) text.push_back('\n');
  text += item.description;
  return text;
}

Vocabulary mine_vocabulary(const ReviewCorpus& corpus, const Catalog& catalog,
                           const MiningOptions& options, const StopwordSet& stopwords) {
  if (options.max_phrases < 1) {
    throw Error(ErrorCode::InvalidArgument, "vocabulary size must be at least 1");
  }
  if (!(options.df_low >= 0.0 && options.df_low < options.df_high && options.df_high <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "document frequency band must satisfy 0 <= low < high <= 1");
  }
  if (corpus.empty() || catalog.size() == 0) {
    throw Error(ErrorCode::EmptyCorpus, "cannot mine keyphrases from an empty corpus");
  }

  struct Stats {
    std::size_t frequency = 0;
    std::size_t items = 0;
  };
  std::unordered_map<std::string, Stats> stats;

  for (const auto& item : catalog.items()) {
    auto tokens = tokenize(item_document(corpus, item), stopwords);
    std::unordered_set<std::string> present;
    auto record = [&](std::string phrase) {
      auto& s = stats[phrase];
      ++s.frequency;
      if (present.insert(std::move(phrase)).second) ++s.items;
    };
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      record(tokens[i]);
      if (i + 1 < tokens.size()) record(tokens[i] + " " + tokens[i + 1]);
    }
  }

  const auto n_items = static_cast<double>(catalog.size());
  std::vector<std::pair<std::string, std::size_t>> candidates;
  for (auto& [phrase, s] : stats) {
    const double df = static_cast<double>(s.items) / n_items;
    if (df < options.df_low || df > options.df_high) continue;
    if (options.exclude.count(phrase)) continue;
    candidates.emplace_back(phrase, s.frequency);
  }
  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (candidates.size() > options.max_phrases) candidates.resize(options.max_phrases);

  std::vector<std::string> phrases;
  phrases.reserve(candidates.size());
  for (auto& c : candidates) phrases.push_back(std::move(c.first));
  return Vocabulary(std::move(phrases));
}

std::vector<int> count_keyphrases(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
  std::vector<int> counts(vocab.size(), 0);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (auto k = vocab.find(tokens[i])) ++counts[*k];
    if (i + 1 < tokens.size()) {
      if (auto k = vocab.find(tokens[i] + " " + tokens[i + 1])) ++counts[*k];
    }
  }
  return counts;
}

std::vector<double> l2_normalize(const std::vector<int>& counts) {
  double sq = 0.0;
  for (int c : counts) sq += static_cast<double>(c) * c;
  std::vector<double> out(counts.size(), 0.0);
  if (sq == 0.0) return out;
  const double norm = std::sqrt(sq);
  for (std::size_t k = 0; k < counts.size(); ++k) out[k] = counts[k] / norm;
  return out;
}

ItemProfile build_item_profile(const ReviewCorpus& corpus, const Item& item,
                               const Vocabulary& vocab, const StopwordSet& stopwords) {
  ItemProfile profile;
  profile.item_id = item.item_id;
  profile.counts = count_keyphrases(tokenize(item_document(corpus, item), stopwords), vocab);
  profile.salience = l2_normalize(profile.counts);
  return profile;
}

ProfileMap build_item_profiles(const ReviewCorpus& corpus, const Catalog& catalog,
                               const Vocabulary& vocab, const StopwordSet& stopwords) {
  if (vocab.empty()) throw Error(ErrorCode::InvalidArgument, "vocabulary is empty");
  ProfileMap profiles;
  for (const auto& item : catalog.items()) {
    profiles.emplace(item.item_id, build_item_profile(corpus, item, vocab, stopwords));
  }
  return profiles;
}

UserDocuments build_user_documents(const ReviewCorpus& corpus, const StopwordSet& stopwords) {
  UserDocuments docs;
  for (const auto& r : corpus.reviews()) {
    auto& doc = docs[r.user_id];
    doc.user_id = r.user_id;
    for (auto& tok : tokenize(r.text, stopwords)) ++doc.tokens[tok];
  }
  return docs;
}

}  // namespace critique
