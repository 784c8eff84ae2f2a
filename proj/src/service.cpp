#include "critique/service.hpp"

#include <sstream>

#include "httplib.h"

namespace critique {

using nlohmann::json;

std::string_view to_string(ApiErrorCode code) {
  switch (code) {
    case ApiErrorCode::NoSignal: return "NO_SIGNAL";
    case ApiErrorCode::UnknownDestination: return "UNKNOWN_DESTINATION";
    case ApiErrorCode::UnknownKeyphrase: return "UNKNOWN_KEYPHRASE";
    case ApiErrorCode::PositiveNotSupported: return "POSITIVE_NOT_SUPPORTED";
    case ApiErrorCode::WrongStatus: return "WRONG_STATUS";
    case ApiErrorCode::NotFound: return "NOT_FOUND";
    case ApiErrorCode::BadRequest: return "BAD_REQUEST";
  }
  return "BAD_REQUEST";
}

ApiErrorCode api_error_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoSignal: return ApiErrorCode::NoSignal;
    case ErrorCode::UnknownDestination: return ApiErrorCode::UnknownDestination;
    case ErrorCode::UnknownKeyphrase: return ApiErrorCode::UnknownKeyphrase;
    case ErrorCode::PositiveNotSupported: return ApiErrorCode::PositiveNotSupported;
    case ErrorCode::WrongStatus: return ApiErrorCode::WrongStatus;
    case ErrorCode::NotFound:
    case ErrorCode::UnknownItem:
    case ErrorCode::UnknownUser: return ApiErrorCode::NotFound;
    case ErrorCode::NotCritiqued:
    case ErrorCode::BadRequest:
    case ErrorCode::InvalidArgument:
    case ErrorCode::Parse:
    case ErrorCode::DuplicateId:
    case ErrorCode::EmptyCorpus:
    case ErrorCode::VocabularyMismatch:
    case ErrorCode::Io: return ApiErrorCode::BadRequest;
  }
  return ApiErrorCode::BadRequest;
}

int http_status(ApiErrorCode code) { return code == ApiErrorCode::NotFound ? 404 : 400; }

namespace {

ApiResponse error_body(ApiErrorCode code, const std::string& message) {
  return {http_status(code), json{{"code", to_string(code)}, {"message", message}}};
}

template <typename F>
ApiResponse guarded(F&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return error_response(e);
  } catch (const json::exception& e) {
    return error_body(ApiErrorCode::BadRequest, e.what());
  }
}

std::string required_string(const json& body, const char* key) {
  if (!body.is_object()) throw Error(ErrorCode::BadRequest, "request body must be a JSON object");
  auto it = body.find(key);
  if (it == body.end() || !it->is_string()) {
    throw Error(ErrorCode::BadRequest, std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

json item_json(const Item& item) {
  return {{"item_id", item.item_id},
          {"name", item.name},
          {"destination", item.destination},
          {"description", item.description}};
}

json phrases_json(const Explanation& e, const Vocabulary& vocab) {
  json out = json::array();
  for (auto k : e.keyphrases) out.push_back(vocab.phrase(k));
  return out;
}

std::vector<std::string> phrases_of(const Explanation& e, const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (auto k : e.keyphrases) out.push_back(vocab.phrase(k));
  return out;
}

}  // namespace

ApiResponse error_response(const Error& e) {
  return error_body(api_error_code(e.code()), e.what());
}

json Api::recommendations_payload(const Session& s) const {
  const auto& vocab = system_.vocab;
  const bool shared = s.backend == Backend::Shared;
  const bool static_mode = s.mode == InterfaceMode::A;
  const bool highlights = s.mode == InterfaceMode::B || s.mode == InterfaceMode::C;
  const bool justify = s.mode == InterfaceMode::D;

  json critiques = json::array();
  for (const auto& [k, p] : s.state.critiques) {
    critiques.push_back({{"keyphrase", vocab.phrase(k)}, {"polarity", to_string(p)}});
  }

  json out = {
      {"session_id", s.session_id},
      {"interface", to_string(s.mode)},
      {"backend", to_string(s.backend)},
      {"status", to_string(s.status)},
      {"destination", s.destination ? json(*s.destination) : json(nullptr)},
      {"critiques", critiques},
  };
  if (shared && !static_mode) {
    const auto global = explain_shared(s.state, system_.config.k_expl);
    out["shared_explanation"] = phrases_json(global, vocab);
  }

  json items = json::array();
  int rank = 0;
  for (const auto& entry : s.current.entries) {
    ++rank;
    const auto& item = system_.catalog.at(entry.item_id);
    json j = {{"item_id", item.item_id},
              {"name", item.name},
              {"score", entry.score},
              {"description", item.description}};
    if (!static_mode && !shared) j["explanation"] = phrases_json(*entry.explanation, vocab);
    if (highlights) {
      json spans = json::array();
      for (const auto& span : highlight(item.description, phrases_of(*entry.explanation, vocab))) {
        spans.push_back({{"start", span.start}, {"end", span.end}, {"keyphrase", span.keyphrase}});
      }
      j["highlights"] = std::move(spans);
    }
    if (justify) {
      const auto just = generate_justification(*entry.explanation,
                                               system_.profiles.at(item.item_id), vocab,
                                               item.name, rank, system_.templates);
      j["justification"] = just.text;
    }
    items.push_back(std::move(j));
  }
  out["items"] = std::move(items);
  return out;
}

ApiResponse Api::create_session(const json& body) {
  return guarded([&]() -> ApiResponse {
    const auto query = required_string(body, "query");
    const auto mode = parse_interface_mode(required_string(body, "interface"));
    auto backend = default_backend(mode);
    if (auto it = body.find("backend"); it != body.end() && !it->is_null()) {
      if (!it->is_string()) throw Error(ErrorCode::BadRequest, "field 'backend' must be a string");
      backend = parse_backend(it->get<std::string>());
    }
    auto s = store_.insert(start_session(system_, query, mode, backend));
    return {200, json{{"session_id", s->session_id},
                      {"matched_user", s->matched_user},
                      {"similarity", s->similarity},
                      {"interface", to_string(s->mode)},
                      {"backend", to_string(s->backend)},
                      {"status", to_string(s->status)},
                      {"destinations", system_.catalog.destinations()}}};
  });
}

ApiResponse Api::choose_destination(std::string_view id, const json& body) {
  return guarded([&]() -> ApiResponse {
    const auto destination = required_string(body, "destination");
    auto s = store_.update(id, [&](const Session& cur) {
      return critique::choose_destination(system_, cur, destination);
    });
    return {200, recommendations_payload(*s)};
  });
}

ApiResponse Api::recommendations(std::string_view id) const {
  return guarded([&]() -> ApiResponse {
    auto s = store_.get(id);
    if (s->status == SessionStatus::AwaitingDestination) {
      throw Error(ErrorCode::WrongStatus, "choose a destination first");
    }
    return {200, recommendations_payload(*s)};
  });
}

ApiResponse Api::critique(std::string_view id, const json& body) {
  return guarded([&]() -> ApiResponse {
    const auto keyphrase = required_string(body, "keyphrase");
    const auto polarity = parse_polarity(required_string(body, "polarity"));
    auto s = store_.update(id, [&](const Session& cur) {
      return critique::critique(system_, cur, keyphrase, polarity);
    });
    return {200, recommendations_payload(*s)};
  });
}

ApiResponse Api::retract(std::string_view id, std::string_view keyphrase) {
  return guarded([&]() -> ApiResponse {
    if (keyphrase.empty()) throw Error(ErrorCode::BadRequest, "missing keyphrase");
    auto s = store_.update(id, [&](const Session& cur) {
      return critique::retract(system_, cur, keyphrase);
    });
    return {200, recommendations_payload(*s)};
  });
}

ApiResponse Api::finish(std::string_view id) {
  return guarded([&]() -> ApiResponse {
    auto s = store_.update(id, [](const Session& cur) { return critique::finish(cur); });
    return {200, session_to_json(*s, system_.vocab)};
  });
}

ApiResponse Api::session(std::string_view id) const {
  return guarded([&]() -> ApiResponse {
    return {200, session_to_json(*store_.get(id), system_.vocab)};
  });
}

ApiResponse Api::session_catalog(std::string_view id) const {
  return guarded([&]() -> ApiResponse {
    auto s = store_.get(id);
    if (s->status != SessionStatus::Finished) {
      throw Error(ErrorCode::WrongStatus, "the full catalog opens once the session is finished");
    }
    return catalog(std::nullopt, {});
  });
}

ApiResponse Api::keyphrases(std::string_view prefix) const {
  return guarded([&]() -> ApiResponse {
    return {200, json{{"keyphrases", search_keyphrases(system_.vocab, prefix)}}};
  });
}

ApiResponse Api::catalog(std::optional<std::string> destination,
                         std::vector<std::string> keyphrases) const {
  return guarded([&]() -> ApiResponse {
    json items = json::array();
    if (destination) {
      for (const auto& id : filter_static(system_.catalog, system_.profiles, system_.vocab,
                                          *destination, keyphrases)) {
        items.push_back(item_json(system_.catalog.at(id)));
      }
    } else {
      for (const auto& dest : system_.catalog.destinations()) {
        for (const auto& id : filter_static(system_.catalog, system_.profiles, system_.vocab, dest,
                                            keyphrases)) {
          items.push_back(item_json(system_.catalog.at(id)));
        }
      }
    }
    return {200, json{{"items", std::move(items)}}};
  });
}

ApiResponse Api::destinations() const {
  json out = json::array();
  for (const auto& d : system_.catalog.destinations()) {
    out.push_back({{"name", d}, {"hotels", system_.catalog.items_in(d).size()}});
  }
  return {200, json{{"destinations", out}}};
}

ApiResponse Api::categories() const {
  json out = json::array();
  for (const auto& c : system_.categories) {
    out.push_back({{"name", c.name}, {"keyphrases", c.keyphrases}});
  }
  return {200, json{{"categories", out}}};
}

json Api::snapshot() const {
  json sessions = json::array();
  for (const auto& s : store_.all()) sessions.push_back(session_to_json(*s, system_.vocab));
  return {{"sessions", sessions}};
}

void Api::restore(const json& snapshot) {
  for (const auto& j : snapshot.at("sessions")) store_.insert(session_from_json(system_, j));
}

// --- HTTP ----------------------------------------------------------------

namespace {

void send(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return json::parse(req.body);  // json::parse_error -> BAD_REQUEST via guarded()
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, ',')) {
    auto p = trim(part);
    if (!p.empty()) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

Server::Server(Api& api, std::optional<std::filesystem::path> static_dir)
    : api_(api), http_(std::make_unique<httplib::Server>()) {
  install_routes();
  if (static_dir) http_->set_mount_point("/", static_dir->string());
}

Server::~Server() { stop(); }

void Server::install_routes() {
  auto& s = *http_;
  auto with_body = [](const httplib::Request& req, auto&& fn) {
    json body;
    try {
      body = parse_body(req);
    } catch (const json::exception& e) {
      return error_body(ApiErrorCode::BadRequest, std::string("malformed JSON body: ") + e.what());
    }
    return fn(body);
  };

  s.Post("/api/session", [this, with_body](const httplib::Request& req, httplib::Response& res) {
    send(res, with_body(req, [&](const json& b) { return api_.create_session(b); }));
  });
  s.Get(R"(/api/session/([0-9A-Za-z_-]+))", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, api_.session(req.matches[1].str()));
  });
  s.Post(R"(/api/session/([0-9A-Za-z_-]+)/destination)",
         [this, with_body](const httplib::Request& req, httplib::Response& res) {
           send(res, with_body(req, [&](const json& b) {
             return api_.choose_destination(req.matches[1].str(), b);
           }));
         });
  s.Get(R"(/api/session/([0-9A-Za-z_-]+)/recommendations)",
        [this](const httplib::Request& req, httplib::Response& res) {
          send(res, api_.recommendations(req.matches[1].str()));
        });
  s.Post(R"(/api/session/([0-9A-Za-z_-]+)/critique)",
         [this, with_body](const httplib::Request& req, httplib::Response& res) {
           send(res, with_body(req, [&](const json& b) {
             return api_.critique(req.matches[1].str(), b);
           }));
         });
  s.Delete(R"(/api/session/([0-9A-Za-z_-]+)/critique)",
           [this, with_body](const httplib::Request& req, httplib::Response& res) {
             if (req.has_param("keyphrase")) {
               send(res, api_.retract(req.matches[1].str(), req.get_param_value("keyphrase")));
               return;
             }
             send(res, with_body(req, [&](const json& b) {
               if (!b.contains("keyphrase") || !b["keyphrase"].is_string()) {
                 return error_body(ApiErrorCode::BadRequest, "missing keyphrase");
               }
               return api_.retract(req.matches[1].str(), b["keyphrase"].get<std::string>());
             }));
           });
  s.Post(R"(/api/session/([0-9A-Za-z_-]+)/finish)",
         [this](const httplib::Request& req, httplib::Response& res) {
           send(res, api_.finish(req.matches[1].str()));
         });
  s.Get(R"(/api/session/([0-9A-Za-z_-]+)/catalog)",
        [this](const httplib::Request& req, httplib::Response& res) {
          send(res, api_.session_catalog(req.matches[1].str()));
        });
  s.Get("/api/keyphrases", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, api_.keyphrases(req.get_param_value("prefix")));
  });
  s.Get("/api/catalog", [this](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> destination;
    if (req.has_param("destination")) destination = req.get_param_value("destination");
    send(res, api_.catalog(destination, split_csv(req.get_param_value("keyphrases"))));
  });
  s.Get("/api/destinations", [this](const httplib::Request&, httplib::Response& res) {
    send(res, api_.destinations());
  });
  s.Get("/api/categories", [this](const httplib::Request&, httplib::Response& res) {
    send(res, api_.categories());
  });

  s.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    auto code = res.status == 404 ? ApiErrorCode::NotFound : ApiErrorCode::BadRequest;
    auto r = error_body(code, "no route for " + req.method + " " + req.path);
    r.status = res.status;
    send(res, r);
  });
  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(json{{"code", "INTERNAL"}, {"message", what}}.dump(), "application/json");
  });
}

bool Server::listen(const std::string& host, int port) { return http_->listen(host, port); }

int Server::bind_to_any_port(const std::string& host) { return http_->bind_to_any_port(host); }

bool Server::listen_after_bind() { return http_->listen_after_bind(); }

void Server::wait_until_ready() const { http_->wait_until_ready(); }

void Server::stop() {
  if (http_ && http_->is_running()) http_->stop();
}

}  // namespace critique
