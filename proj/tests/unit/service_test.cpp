#include "critique/service.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <thread>

#include "critique/error.hpp"
#include "harness.hpp"

using namespace critique;
using harness::Reply;
using nlohmann::json;

namespace {

const System& fixture() {
  static const System system = System::load(paths::fixture_dir());
  return system;
}

class ServiceTest : public ::testing::Test {
 protected:
  harness::Service service{fixture()};

  std::string open(const std::string& mode, const std::string& dest = "") {
    auto r = service.post("/api/session", {{"query", "quiet spa and a great pool"}, {"interface", mode}});
    EXPECT_EQ(r.status, 200) << r.body.dump();
    const auto id = r.body.at("session_id").get<std::string>();
    if (!dest.empty()) {
      auto d = service.post("/api/session/" + id + "/destination", {{"destination", dest}});
      EXPECT_EQ(d.status, 200) << d.body.dump();
    }
    return id;
  }

  std::string first_destination() const { return fixture().catalog.destinations().front(); }

  void expect_error(const Reply& r, int status, const std::string& code) {
    EXPECT_EQ(r.status, status) << r.body.dump();
    EXPECT_EQ(r.body.value("code", ""), code) << r.body.dump();
    EXPECT_EQ(harness::schema_errors("error", r.body), "");
  }
};

}  // namespace

TEST(ApiErrors, EveryLibraryErrorMapsToOneWireCode) {
  for (int c = 0; c <= static_cast<int>(ErrorCode::BadRequest); ++c) {
    const auto api = api_error_code(static_cast<ErrorCode>(c));
    const auto name = to_string(api);
    EXPECT_FALSE(name.empty());
    EXPECT_EQ(http_status(api), api == ApiErrorCode::NotFound ? 404 : 400);
  }
  EXPECT_EQ(api_error_code(ErrorCode::NotCritiqued), ApiErrorCode::BadRequest);
  EXPECT_EQ(api_error_code(ErrorCode::UnknownItem), ApiErrorCode::NotFound);
}

TEST_F(ServiceTest, CreateSessionListsFourDestinations) {
  auto r = service.post("/api/session", {{"query", "quiet spa and a great pool"}, {"interface", "C"}});
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(harness::schema_errors("create_session", r.body), "");
  EXPECT_EQ(r.body["destinations"].size(), 4u);
  EXPECT_EQ(r.body["status"], "AWAITING_DESTINATION");
  EXPECT_EQ(r.body["backend"], "per_item");
}

TEST_F(ServiceTest, CreateSessionErrors) {
  expect_error(service.post("/api/session", {{"query", ""}, {"interface", "C"}}), 400, "BAD_REQUEST");
  expect_error(service.post("/api/session", {{"query", "the and of"}, {"interface", "C"}}), 400, "NO_SIGNAL");
  expect_error(service.post("/api/session", {{"query", "pool"}, {"interface", "Q"}}), 400, "BAD_REQUEST");
  expect_error(service.post("/api/session", {{"query", "pool"}, {"interface", "B"}, {"backend", "per_item"}}), 400,
               "BAD_REQUEST");
  expect_error(service.post_raw("/api/session", "{not json"), 400, "BAD_REQUEST");
  expect_error(service.post("/api/session", json::array()), 400, "BAD_REQUEST");
}

TEST_F(ServiceTest, RecommendationsPerInterface) {
  const auto dest = first_destination();
  for (const std::string mode : {"A", "B", "C", "D"}) {
    const auto id = open(mode, dest);
    auto r = service.get("/api/session/" + id + "/recommendations");
    ASSERT_EQ(r.status, 200) << mode;
    EXPECT_EQ(harness::schema_errors("recommendations", r.body), "") << mode;
    ASSERT_EQ(r.body["items"].size(), std::min<std::size_t>(10, fixture().catalog.items_in(dest).size()));
    EXPECT_EQ(r.body.contains("shared_explanation"), mode == "B");
    if (mode == "B") {
      EXPECT_LE(r.body["shared_explanation"].size(), 6u);
    }
    for (const auto& item : r.body["items"]) {
      EXPECT_EQ(item.contains("justification"), mode == "D");
      EXPECT_EQ(item.contains("highlights"), mode == "B" || mode == "C");
      EXPECT_EQ(item.contains("explanation"), mode == "C" || mode == "D");
      if (mode == "D") {
        EXPECT_FALSE(item["justification"].get<std::string>().empty());
        for (const auto& k : item["explanation"]) {
          EXPECT_NE(item["justification"].get<std::string>().find(k.get<std::string>()), std::string::npos);
        }
      }
    }
  }
}

TEST_F(ServiceTest, SessionLifecycleErrorsAndFinish) {
  const auto id = open("C");
  expect_error(service.get("/api/session/" + id + "/recommendations"), 400, "WRONG_STATUS");
  expect_error(service.post("/api/session/" + id + "/destination", {{"destination", "Atlantis"}}), 400,
               "UNKNOWN_DESTINATION");
  ASSERT_EQ(service.post("/api/session/" + id + "/destination", {{"destination", first_destination()}}).status, 200);
  expect_error(service.post("/api/session/" + id + "/destination", {{"destination", first_destination()}}), 400,
               "WRONG_STATUS");
  expect_error(service.post("/api/session/" + id + "/critique", {{"keyphrase", "no such phrase"}, {"polarity", "negative"}}),
               400, "UNKNOWN_KEYPHRASE");
  expect_error(service.post("/api/session/" + id + "/critique", {{"keyphrase", fixture().vocab.phrase(0)}}), 400,
               "BAD_REQUEST");
  expect_error(service.del("/api/session/" + id + "/critique?keyphrase=" + harness::url_encode(fixture().vocab.phrase(0))),
               400, "BAD_REQUEST");
  expect_error(service.get("/api/session/" + id + "/catalog"), 400, "WRONG_STATUS");

  auto done = service.post("/api/session/" + id + "/finish", json::object());
  ASSERT_EQ(done.status, 200);
  EXPECT_EQ(harness::schema_errors("session", done.body), "");
  EXPECT_EQ(done.body["status"], "FINISHED");
  EXPECT_TRUE(done.body["catalog_unlocked"].get<bool>());
  expect_error(service.post("/api/session/" + id + "/critique", {{"keyphrase", fixture().vocab.phrase(0)}, {"polarity", "negative"}}),
               400, "WRONG_STATUS");
  auto catalog = service.get("/api/session/" + id + "/catalog");
  ASSERT_EQ(catalog.status, 200);
  EXPECT_EQ(catalog.body["items"].size(), fixture().catalog.size());
}

TEST_F(ServiceTest, UnknownSessionAndRouteAreNotFound) {
  expect_error(service.get("/api/session/deadbeef"), 404, "NOT_FOUND");
  expect_error(service.get("/api/session/deadbeef/recommendations"), 404, "NOT_FOUND");
  expect_error(service.get("/api/nothing-here"), 404, "NOT_FOUND");
}

TEST_F(ServiceTest, PositiveOnSharedBackendIsRejected) {
  const auto id = open("B", first_destination());
  expect_error(service.post("/api/session/" + id + "/critique",
                            {{"keyphrase", fixture().vocab.phrase(0)}, {"polarity", "positive"}}),
               400, "POSITIVE_NOT_SUPPORTED");
}

TEST_F(ServiceTest, CritiqueThenDeleteRestoresPayload) {
  const auto id = open("C", first_destination());
  const auto before = service.get("/api/session/" + id + "/recommendations").body;
  const auto phrase = before["items"][0]["explanation"][0].get<std::string>();
  auto after = service.post("/api/session/" + id + "/critique", {{"keyphrase", phrase}, {"polarity", "negative"}});
  ASSERT_EQ(after.status, 200);
  EXPECT_EQ(harness::schema_errors("recommendations", after.body), "");
  EXPECT_NE(after.body["items"], before["items"]);
  auto restored = service.del("/api/session/" + id + "/critique?keyphrase=" + harness::url_encode(phrase));
  ASSERT_EQ(restored.status, 200);
  EXPECT_EQ(restored.body, before);

  // The JSON-body form of DELETE behaves the same.
  ASSERT_EQ(service.post("/api/session/" + id + "/critique", {{"keyphrase", phrase}, {"polarity", "negative"}}).status, 200);
  httplib::Client c("127.0.0.1", service.port());
  auto res = c.Delete("/api/session/" + id + "/critique", json{{"keyphrase", phrase}}.dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(json::parse(res->body), before);
}

TEST_F(ServiceTest, NegativeCritiqueChangesListIffAListedItemMentionsIt) {
  const auto& sys = fixture();
  const auto id = open("C", first_destination());
  const auto before = service.get("/api/session/" + id + "/recommendations").body;
  std::set<std::string> listed;
  for (const auto& item : before["items"]) listed.insert(item["item_id"].get<std::string>());
  int changed = 0, unchanged = 0;
  for (std::size_t k = 0; k < sys.vocab.size() && (changed < 3 || unchanged < 3); ++k) {
    bool mentioned = false;
    for (const auto& item_id : listed) mentioned = mentioned || sys.profiles.at(item_id).salience[k] > 0.0;
    const auto phrase = sys.vocab.phrase(k);
    auto after = service.post("/api/session/" + id + "/critique", {{"keyphrase", phrase}, {"polarity", "negative"}});
    ASSERT_EQ(after.status, 200);
    EXPECT_EQ(after.body["items"] != before["items"], mentioned) << phrase;
    (mentioned ? changed : unchanged)++;
    ASSERT_EQ(service.del("/api/session/" + id + "/critique?keyphrase=" + harness::url_encode(phrase)).status, 200);
  }
}

TEST_F(ServiceTest, KeyphraseSearchCatalogDestinationsCategories) {
  const auto& sys = fixture();
  auto all = service.get("/api/keyphrases");
  ASSERT_EQ(all.status, 200);
  EXPECT_EQ(harness::schema_errors("keyphrases", all.body), "");
  EXPECT_EQ(all.body["keyphrases"].size(), sys.vocab.size());
  const auto phrase = sys.vocab.phrase(0);
  auto some = service.get("/api/keyphrases?prefix=" + harness::url_encode(phrase.substr(0, 3)));
  EXPECT_NE(std::find(some.body["keyphrases"].begin(), some.body["keyphrases"].end(), phrase),
            some.body["keyphrases"].end());
  EXPECT_TRUE(service.get("/api/keyphrases?prefix=zzz").body["keyphrases"].empty());

  for (const auto& d : sys.catalog.destinations()) {
    auto c = service.get("/api/catalog?destination=" + harness::url_encode(d));
    ASSERT_EQ(c.status, 200);
    EXPECT_EQ(harness::schema_errors("catalog", c.body), "");
    EXPECT_EQ(c.body["items"].size(), sys.catalog.items_in(d).size());
  }
  auto everything = service.get("/api/catalog");
  EXPECT_EQ(everything.body["items"].size(), sys.catalog.size());
  auto filtered = service.get("/api/catalog?destination=" + harness::url_encode(first_destination()) +
                              "&keyphrases=" + harness::url_encode(phrase));
  EXPECT_EQ(filtered.body["items"].size(),
            filter_static(sys.catalog, sys.profiles, sys.vocab, first_destination(), {phrase}).size());
  expect_error(service.get("/api/catalog?destination=Atlantis"), 400, "UNKNOWN_DESTINATION");
  expect_error(service.get("/api/catalog?keyphrases=nope"), 400, "UNKNOWN_KEYPHRASE");

  auto dests = service.get("/api/destinations");
  EXPECT_EQ(harness::schema_errors("destinations", dests.body), "");
  EXPECT_EQ(dests.body["destinations"].size(), 4u);
  auto cats = service.get("/api/categories");
  EXPECT_EQ(harness::schema_errors("categories", cats.body), "");
  EXPECT_EQ(cats.body["categories"].size(), 6u);
}

TEST_F(ServiceTest, SessionEndpointValidates) {
  const auto id = open("D", first_destination());
  ASSERT_EQ(service.post("/api/session/" + id + "/critique",
                         {{"keyphrase", fixture().vocab.phrase(2)}, {"polarity", "positive"}})
                .status,
            200);
  auto r = service.get("/api/session/" + id);
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(harness::schema_errors("session", r.body), "");
  EXPECT_EQ(r.body["history"].size(), 1u);
}

TEST_F(ServiceTest, ConcurrentSessionsStayIsolated) {
  const auto& sys = fixture();
  const auto a = open("C", first_destination());
  const auto b = open("C", first_destination());
  std::vector<std::string> mine, theirs;
  for (std::size_t k = 0; k < 40; ++k) (k % 2 ? theirs : mine).push_back(sys.vocab.phrase(k));
  auto worker = [&](const std::string& id, const std::vector<std::string>& phrases) {
    for (const auto& p : phrases) {
      auto r = service.post("/api/session/" + id + "/critique", {{"keyphrase", p}, {"polarity", "negative"}});
      ASSERT_EQ(r.status, 200);
      for (const auto& c : r.body["critiques"]) {
        ASSERT_NE(std::find(phrases.begin(), phrases.end(), c["keyphrase"].get<std::string>()), phrases.end());
      }
    }
  };
  std::thread ta(worker, a, mine), tb(worker, b, theirs);
  ta.join();
  tb.join();
  auto sa = service.get("/api/session/" + a).body;
  auto sb = service.get("/api/session/" + b).body;
  EXPECT_EQ(sa["state"]["critiques"].size(), mine.size());
  EXPECT_EQ(sb["state"]["critiques"].size(), theirs.size());
  for (const auto& p : mine) EXPECT_FALSE(sb["state"]["critiques"].contains(p));
}

TEST_F(ServiceTest, SnapshotRestoresSessions) {
  const auto id = open("C", first_destination());
  ASSERT_EQ(service.post("/api/session/" + id + "/critique",
                         {{"keyphrase", fixture().vocab.phrase(1)}, {"polarity", "negative"}})
                .status,
            200);
  const auto snap = service.api().snapshot();
  Api fresh(fixture());
  fresh.restore(json::parse(snap.dump()));
  EXPECT_EQ(fresh.session(id).body, service.api().session(id).body);
  EXPECT_EQ(fresh.recommendations(id).body, service.api().recommendations(id).body);
}
