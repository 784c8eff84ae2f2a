#include "critique/session.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <random>

#include "critique/error.hpp"
#include "critique/resources.hpp"

namespace critique {

using nlohmann::json;

namespace {

constexpr std::size_t kCategoryCount = 6;

void require_status(const Session& s, SessionStatus expected) {
  if (s.status != expected) {
    throw Error(ErrorCode::WrongStatus, "session is " + std::string(to_string(s.status)) +
                                            ", expected " + std::string(to_string(expected)));
  }
}

std::vector<Category> parse_categories(const json& j, const Vocabulary& vocab) {
  std::vector<Category> out;
  try {
    for (const auto& entry : j) {
      Category c;
      c.name = entry.at("name").get<std::string>();
      c.keyphrases = entry.at("keyphrases").get<std::vector<std::string>>();
      for (const auto& k : c.keyphrases) vocab.index_of(k);
      out.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed categories: ") + e.what());
  }
  return out;
}

}  // namespace

std::vector<Category> default_categories(const Vocabulary& vocab) {
  std::vector<Category> out;
  const auto n = vocab.size();
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    const auto begin = n * c / kCategoryCount;
    const auto end = n * (c + 1) / kCategoryCount;
    Category cat;
    cat.name = "Group " + std::to_string(c + 1);
    for (auto k = begin; k < end; ++k) cat.keyphrases.push_back(vocab.phrase(k));
    out.push_back(std::move(cat));
  }
  return out;
}

System System::build(ReviewCorpus corpus, Catalog catalog, const Config& config,
                     Overrides overrides) {
  config.validate();
  System sys;
  sys.config = config;
  sys.stopwords = overrides.stopwords ? std::move(*overrides.stopwords) : StopwordSet::bundled();
  sys.corpus = std::move(corpus);
  sys.catalog = std::move(catalog);
  if (overrides.vocab) {
    sys.vocab = std::move(*overrides.vocab);
  } else {
    MiningOptions mining{config.vocab_size, config.df_low, config.df_high, overrides.exclude};
    sys.vocab = mine_vocabulary(sys.corpus, sys.catalog, mining, sys.stopwords);
  }
  sys.profiles = build_item_profiles(sys.corpus, sys.catalog, sys.vocab, sys.stopwords);
  sys.index = overrides.index ? std::move(*overrides.index)
                              : build_tfidf_index(build_user_documents(sys.corpus, sys.stopwords));
  if (overrides.templates) sys.templates = std::move(*overrides.templates);
  sys.categories = overrides.categories ? std::move(*overrides.categories)
                                        : default_categories(sys.vocab);
  return sys;
}

System System::load(const std::filesystem::path& dir, const Config& config) {
  namespace fs = std::filesystem;
  auto corpus = load_reviews(dir / "reviews.jsonl");
  auto catalog = load_items(dir / "items.jsonl");

  Overrides o;
  if (fs::exists(dir / "vocab.txt")) o.vocab = load_vocabulary(dir / "vocab.txt");
  if (fs::exists(dir / "stopwords.txt")) o.stopwords = StopwordSet::from_file(dir / "stopwords.txt");
  if (fs::exists(dir / "exclude.txt")) {
    for (const auto& line : split_lines(read_file(dir / "exclude.txt"))) {
      auto p = to_lower(trim(line));
      if (!p.empty()) o.exclude.insert(std::move(p));
    }
  }
  if (fs::exists(dir / "templates.txt") || fs::exists(dir / "adjectives.txt")) {
    o.templates = TemplateSet::parse(
        fs::exists(dir / "templates.txt") ? read_file(dir / "templates.txt")
                                          : std::string(resources::templates_txt),
        fs::exists(dir / "adjectives.txt") ? read_file(dir / "adjectives.txt")
                                           : std::string(resources::adjectives_txt));
  }
  if (fs::exists(dir / "index.json")) o.index = TfidfIndex::load(dir / "index.json");

  std::optional<json> categories;
  if (fs::exists(dir / "categories.json")) {
    try {
      categories = json::parse(read_file(dir / "categories.json"));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::Parse, "categories.json: " + std::string(e.what()));
    }
  }
  auto sys = build(std::move(corpus), std::move(catalog), config, std::move(o));
  if (categories) sys.categories = parse_categories(*categories, sys.vocab);
  return sys;
}

std::string_view to_string(InterfaceMode m) {
  switch (m) {
    case InterfaceMode::A: return "A";
    case InterfaceMode::B: return "B";
    case InterfaceMode::C: return "C";
    case InterfaceMode::D: return "D";
  }
  return "?";
}

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::AwaitingDestination: return "AWAITING_DESTINATION";
    case SessionStatus::Active: return "ACTIVE";
    case SessionStatus::Finished: return "FINISHED";
  }
  return "?";
}

std::string_view to_string(HistoryAction a) {
  switch (a) {
    case HistoryAction::Positive: return "POSITIVE";
    case HistoryAction::Negative: return "NEGATIVE";
    case HistoryAction::Retract: return "RETRACT";
  }
  return "?";
}

InterfaceMode parse_interface_mode(std::string_view s) {
  if (s.size() == 1) {
    switch (std::toupper(static_cast<unsigned char>(s[0]))) {
      case 'A': return InterfaceMode::A;
      case 'B': return InterfaceMode::B;
      case 'C': return InterfaceMode::C;
      case 'D': return InterfaceMode::D;
      default: break;
    }
  }
  throw Error(ErrorCode::BadRequest, "interface must be one of A, B, C, D");
}

Backend default_backend(InterfaceMode mode) {
  return mode == InterfaceMode::B ? Backend::Shared : Backend::PerItem;
}

std::string new_session_id() {
  thread_local std::mt19937_64 rng = [] {
    std::random_device rd;
    std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
    return std::mt19937_64(seq);
  }();
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                static_cast<unsigned long long>(rng()));
  return buf;
}

Session start_session(const System& system, std::string_view query, InterfaceMode mode,
                      Backend backend, std::string session_id) {
  if (trim(query).empty()) throw Error(ErrorCode::BadRequest, "query must not be empty");
  if (mode == InterfaceMode::B && backend != Backend::Shared) {
    throw Error(ErrorCode::BadRequest, "interface B runs on the shared backend");
  }
  if ((mode == InterfaceMode::C || mode == InterfaceMode::D) && backend != Backend::PerItem) {
    throw Error(ErrorCode::BadRequest, "interfaces C and D run on the per_item backend");
  }

  Session s;
  s.session_id = std::move(session_id);
  s.backend = backend;
  s.mode = mode;
  if (mode == InterfaceMode::A) {
    s.state = zero_state(system.vocab.size());
  } else {
    auto match = match_user(system.index, query, system.stopwords);
    s.matched_user = match.user_id;
    s.similarity = match.similarity;
    s.state = init_user_state(match.user_id, system.corpus, system.vocab, system.stopwords);
  }
  s.status = SessionStatus::AwaitingDestination;
  return s;
}

RankedList recompute(const System& system, const Session& session) {
  if (!session.destination) return {};
  return recommend(session.state, system.catalog, system.profiles, *session.destination,
                   system.recommend_options(session.backend));
}

Session choose_destination(const System& system, Session session, std::string_view destination) {
  require_status(session, SessionStatus::AwaitingDestination);
  if (!system.catalog.has_destination(destination)) {
    throw Error(ErrorCode::UnknownDestination,
                "unknown destination '" + std::string(destination) + "'");
  }
  session.destination = std::string(destination);
  session.status = SessionStatus::Active;
  session.current = recompute(system, session);
  return session;
}

Session critique(const System& system, Session session, std::string_view keyphrase,
                 Polarity polarity) {
  require_status(session, SessionStatus::Active);
  if (session.mode == InterfaceMode::A) {
    throw Error(ErrorCode::BadRequest, "interface A filters instead of critiquing");
  }
  session.state = apply_critique(session.state, system.vocab, keyphrase, polarity, session.backend);
  session.history.push_back(
      HistoryEntry{static_cast<int>(session.history.size()) + 1, std::string(keyphrase),
                   polarity == Polarity::Positive ? HistoryAction::Positive
                                                  : HistoryAction::Negative});
  session.current = recompute(system, session);
  return session;
}

Session retract(const System& system, Session session, std::string_view keyphrase) {
  require_status(session, SessionStatus::Active);
  session.state = retract_critique(session.state, system.vocab, keyphrase);
  session.history.push_back(HistoryEntry{static_cast<int>(session.history.size()) + 1,
                                         std::string(keyphrase), HistoryAction::Retract});
  session.current = recompute(system, session);
  return session;
}

Session finish(Session session) {
  require_status(session, SessionStatus::Active);
  session.status = SessionStatus::Finished;
  return session;
}

std::vector<std::string> search_keyphrases(const Vocabulary& vocab, std::string_view prefix) {
  const auto needle = to_lower(trim(prefix));
  std::vector<std::string> out;
  for (const auto& phrase : vocab.phrases()) {
    const auto toks = phrase_tokens(phrase);
    if (std::any_of(toks.begin(), toks.end(),
                    [&](const std::string& t) { return t.starts_with(needle); })) {
      out.push_back(phrase);
    }
  }
  return out;
}

json session_to_json(const Session& s, const Vocabulary& vocab) {
  json critiques = json::object();
  for (const auto& [k, p] : s.state.critiques) critiques[vocab.phrase(k)] = to_string(p);
  json history = json::array();
  for (const auto& h : s.history) {
    history.push_back({{"step", h.step}, {"keyphrase", h.keyphrase}, {"action", to_string(h.action)}});
  }
  json current = json::array();
  for (const auto& e : s.current.entries) {
    json phrases = json::array();
    if (e.explanation) {
      for (auto k : e.explanation->keyphrases) phrases.push_back(vocab.phrase(k));
    }
    current.push_back({{"item_id", e.item_id}, {"score", e.score}, {"explanation", phrases}});
  }
  return {
      {"session_id", s.session_id},
      {"matched_user", s.matched_user},
      {"similarity", s.similarity},
      {"backend", to_string(s.backend)},
      {"interface", to_string(s.mode)},
      {"destination", s.destination ? json(*s.destination) : json(nullptr)},
      {"status", to_string(s.status)},
      {"state", {{"base", s.state.base}, {"critiques", critiques}}},
      {"history", history},
      {"current", current},
      {"catalog_unlocked", s.status == SessionStatus::Finished},
  };
}

Session session_from_json(const System& system, const json& j) {
  Session s;
  try {
    s.session_id = j.at("session_id").get<std::string>();
    s.matched_user = j.at("matched_user").get<std::string>();
    s.similarity = j.at("similarity").get<double>();
    s.backend = parse_backend(j.at("backend").get<std::string>());
    s.mode = parse_interface_mode(j.at("interface").get<std::string>());
    if (!j.at("destination").is_null()) s.destination = j.at("destination").get<std::string>();
    const auto status = j.at("status").get<std::string>();
    if (status == "AWAITING_DESTINATION") {
      s.status = SessionStatus::AwaitingDestination;
    } else if (status == "ACTIVE") {
      s.status = SessionStatus::Active;
    } else if (status == "FINISHED") {
      s.status = SessionStatus::Finished;
    } else {
      throw Error(ErrorCode::Parse, "unknown session status '" + status + "'");
    }
    s.state.base = j.at("state").at("base").get<std::vector<double>>();
    if (s.state.base.size() != system.vocab.size()) {
      throw Error(ErrorCode::VocabularyMismatch, "snapshot was taken with a different vocabulary");
    }
    for (const auto& [phrase, p] : j.at("state").at("critiques").items()) {
      s.state.critiques[system.vocab.index_of(phrase)] = parse_polarity(p.get<std::string>());
    }
    for (const auto& h : j.at("history")) {
      const auto action = h.at("action").get<std::string>();
      HistoryEntry e{h.at("step").get<int>(), h.at("keyphrase").get<std::string>(),
                     HistoryAction::Retract};
      if (action == "POSITIVE") {
        e.action = HistoryAction::Positive;
      } else if (action == "NEGATIVE") {
        e.action = HistoryAction::Negative;
      } else if (action != "RETRACT") {
        throw Error(ErrorCode::Parse, "unknown history action '" + action + "'");
      }
      s.history.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed session snapshot: ") + e.what());
  }
  s.current = recompute(system, s);
  return s;
}

// --- SessionStore --------------------------------------------------------

std::shared_ptr<const Session> SessionStore::insert(Session session) {
  auto slot = std::make_shared<Slot>();
  auto value = std::make_shared<const Session>(std::move(session));
  slot->store(value);
  std::unique_lock lock(mutex_);
  if (!slots_.emplace(value->session_id, std::move(slot)).second) {
    throw Error(ErrorCode::DuplicateId, "session id collision");
  }
  return value;
}

std::shared_ptr<SessionStore::Slot> SessionStore::find_slot(std::string_view id) const {
  std::shared_lock lock(mutex_);
  auto it = slots_.find(std::string(id));
  if (it == slots_.end()) {
    throw Error(ErrorCode::NotFound, "no session '" + std::string(id) + "'");
  }
  return it->second;
}

std::shared_ptr<const Session> SessionStore::get(std::string_view id) const {
  return find_slot(id)->load();
}

std::vector<std::shared_ptr<const Session>> SessionStore::all() const {
  std::shared_lock lock(mutex_);
  std::vector<std::shared_ptr<const Session>> out;
  out.reserve(slots_.size());
  for (const auto& [_, slot] : slots_) out.push_back(slot->load());
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a->session_id < b->session_id; });
  return out;
}

std::size_t SessionStore::size() const {
  std::shared_lock lock(mutex_);
  return slots_.size();
}

}  // namespace critique
