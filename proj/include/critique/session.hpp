#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "critique/config.hpp"
#include "critique/corpus.hpp"
#include "critique/engine.hpp"
#include "critique/justify.hpp"
#include "critique/match.hpp"
#include "json.hpp"

namespace critique {

struct Category {
  std::string name;
  std::vector<std::string> keyphrases;
};

/// Six contiguous buckets of the vocabulary in rank order.
std::vector<Category> default_categories(const Vocabulary& vocab);

/// Everything a session reads: corpus, catalog, vocabulary, item profiles,
/// the matching index and the justification templates. Read-only once built.
struct System {
  Config config;
  StopwordSet stopwords;
  ReviewCorpus corpus;
  Catalog catalog;
  Vocabulary vocab;
  ProfileMap profiles;
  TfidfIndex index;
  TemplateSet templates = TemplateSet::bundled();
  std::vector<Category> categories;

  struct Overrides {
    std::optional<Vocabulary> vocab;
    std::optional<StopwordSet> stopwords;
    std::optional<TemplateSet> templates;
    std::optional<TfidfIndex> index;
    std::optional<std::vector<Category>> categories;
    std::set<std::string> exclude;
  };

  static System build(ReviewCorpus corpus, Catalog catalog, const Config& config,
                      Overrides overrides);
  static System build(ReviewCorpus corpus, Catalog catalog, const Config& config = {}) {
    return build(std::move(corpus), std::move(catalog), config, Overrides{});
  }

  /// Reads reviews.jsonl and items.jsonl plus any of the optional override
  /// files (vocab.txt, exclude.txt, stopwords.txt, templates.txt,
  /// adjectives.txt, index.json, categories.json) from `dir`.
  static System load(const std::filesystem::path& dir, const Config& config = {});

  RecommendOptions recommend_options(Backend backend) const {
    return RecommendOptions{config.top_n, config.k_expl, backend};
  }
};

enum class InterfaceMode { A, B, C, D };
enum class SessionStatus { AwaitingDestination, Active, Finished };
enum class HistoryAction { Positive, Negative, Retract };

std::string_view to_string(InterfaceMode m);
std::string_view to_string(SessionStatus s);
std::string_view to_string(HistoryAction a);
InterfaceMode parse_interface_mode(std::string_view s);
/// The backend an interface uses when none is requested.
Backend default_backend(InterfaceMode mode);

struct HistoryEntry {
  int step = 0;
  std::string keyphrase;
  HistoryAction action = HistoryAction::Negative;

  bool operator==(const HistoryEntry&) const = default;
};

struct Session {
  std::string session_id;
  std::string matched_user;
  double similarity = 0.0;
  Backend backend = Backend::PerItem;
  InterfaceMode mode = InterfaceMode::C;
  std::optional<std::string> destination;
  UserState state;
  std::vector<HistoryEntry> history;
  RankedList current;
  SessionStatus status = SessionStatus::AwaitingDestination;
};

/// 128 random bits, hex encoded.
std::string new_session_id();

/// Cold-start entry. Interface A skips matching and starts from a zero
/// state. Throws BadRequest for an empty query or a backend the interface
/// cannot drive, NoSignal when the query matches nobody.
Session start_session(const System& system, std::string_view query, InterfaceMode mode,
                      Backend backend, std::string session_id = new_session_id());
Session choose_destination(const System& system, Session session, std::string_view destination);
Session critique(const System& system, Session session, std::string_view keyphrase,
                 Polarity polarity);
Session retract(const System& system, Session session, std::string_view keyphrase);
Session finish(Session session);

/// Ranking recomputed from scratch for the session's state and destination.
RankedList recompute(const System& system, const Session& session);

/// Phrases with a token starting with `prefix` (case-insensitive), in rank
/// order.
std::vector<std::string> search_keyphrases(const Vocabulary& vocab, std::string_view prefix);

nlohmann::json session_to_json(const Session& session, const Vocabulary& vocab);
Session session_from_json(const System& system, const nlohmann::json& j);

/// Concurrent session registry. Mutations of one session are serialized;
/// readers always see a complete session value.
class SessionStore {
 public:
  std::shared_ptr<const Session> insert(Session session);
  /// Throws NotFound.
  std::shared_ptr<const Session> get(std::string_view id) const;

  template <typename F>
  std::shared_ptr<const Session> update(std::string_view id, F&& fn) {
    auto slot = find_slot(id);
    std::lock_guard write(slot->write_mutex);
    auto next = std::make_shared<const Session>(fn(*slot->load()));
    slot->store(next);
    return next;
  }

  std::vector<std::shared_ptr<const Session>> all() const;
  std::size_t size() const;

 private:
  struct Slot {
    std::mutex write_mutex;
    mutable std::mutex value_mutex;
    std::shared_ptr<const Session> value;

    std::shared_ptr<const Session> load() const {
      std::lock_guard lock(value_mutex);
      return value;
    }
    void store(std::shared_ptr<const Session> v) {
      std::lock_guard lock(value_mutex);
      value = std::move(v);
    }
  };

  std::shared_ptr<Slot> find_slot(std::string_view id) const;

  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<Slot>> slots_;
};

}  // namespace critique
