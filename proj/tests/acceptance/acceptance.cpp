// Acceptance suite: one PASS/FAIL line per primary criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "critique/error.hpp"
#include "critique/justify.hpp"
#include "critique/match.hpp"
#include "critique/resources.hpp"
#include "critique/service.hpp"
#include "critique/session.hpp"
#include "critique/simulate.hpp"
#include "generators.hpp"
#include "harness.hpp"
#include "oracles.hpp"
#include "paths.hpp"

using namespace critique;
using nlohmann::json;

namespace {

// Thrown by check() with a description of the first violation.
struct Violation {
  std::string what;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw Violation{what};
}

struct Criterion {
  std::string name;
  double limit_s;
  std::function<std::string()> run;  // returns a one-line summary
};

const System& fixture() {
  static const System system = System::load(paths::fixture_dir());
  return system;
}

const std::set<std::string>& stop() {
  static const std::set<std::string> s = oracle::stopword_list(std::string(resources::stopwords_txt));
  return s;
}

std::vector<std::pair<std::string, double>> as_pairs(const RankedList& list) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& e : list.entries) out.emplace_back(e.item_id, e.score);
  return out;
}

System toy_system(gen::Rng& rng) {
  auto toy = gen::corpus(rng, gen::uniform(rng, 6, 16), gen::uniform(rng, 12, 30), gen::uniform(rng, 1, 3),
                         gen::uniform(rng, 2, 5));
  Config cfg;
  cfg.vocab_size = 30;
  cfg.df_high = 0.9;
  return System::build(std::move(toy.corpus), std::move(toy.catalog), cfg);
}

// --- criteria ---------------------------------------------------------------

std::string structural() {
  const auto& sys = fixture();
  check(sys.vocab.size() == 90, "fixture vocabulary has " + std::to_string(sys.vocab.size()) + " phrases");
  std::size_t lists = 0;
  for (const auto& dest : sys.catalog.destinations()) {
    const auto expected = std::min<std::size_t>(10, sys.catalog.items_in(dest).size());
    for (const auto backend : {Backend::PerItem, Backend::Shared}) {
      for (std::size_t u = 0; u < sys.index.user_ids().size(); u += 10) {
        auto state = init_user_state(sys.index.user_ids()[u], sys.corpus, sys.vocab, sys.stopwords);
        const auto list = recommend(state, sys.catalog, sys.profiles, dest, sys.recommend_options(backend));
        check(list.size() == expected, "list length " + std::to_string(list.size()) + " in " + dest);
        for (const auto& e : list.entries) {
          check(e.explanation && e.explanation->keyphrases.size() <= 6, "explanation longer than 6");
        }
        ++lists;
      }
    }
  }
  const auto synthetic = generate_synthetic(SyntheticParams{});
  const auto& dests = synthetic.catalog.destinations();
  check(dests.size() == 4, "synthetic corpus has " + std::to_string(dests.size()) + " destinations");
  std::ostringstream sizes;
  for (const auto& d : dests) {
    const auto n = synthetic.catalog.items_in(d).size();
    check(n >= 25 && n <= 45, "destination " + d + " has " + std::to_string(n) + " hotels");
    sizes << (sizes.tellp() ? "," : "") << n;
  }
  return "vocab=90 lists=" + std::to_string(lists) + " synthetic_sizes=" + sizes.str();
}

std::string matching() {
  gen::Rng rng(20);
  std::size_t queries = 0, no_signal = 0;
  const int corpora = 60;
  for (int round = 0; round < corpora; ++round) {
    auto toy = gen::corpus(rng, gen::uniform(rng, 2, 40), 8, 2, gen::uniform(rng, 1, 6));
    auto index = build_tfidf_index(build_user_documents(toy.corpus));
    std::map<std::string, std::string> texts;
    for (const auto& u : toy.corpus.user_ids()) texts[u] = toy.corpus.user_text(u);
    oracle::Tfidf ref(texts, stop());
    for (int q = 0; q < 20; ++q) {
      const auto query = gen::sentence(rng, 1, 10);
      const auto [winner, sim] = ref.best(query, stop());
      ++queries;
      if (winner.empty()) {
        bool threw = false;
        try {
          match_user(index, query);
        } catch (const Error& e) {
          threw = e.code() == ErrorCode::NoSignal;
        }
        check(threw, "expected NoSignal for '" + query + "'");
        ++no_signal;
        continue;
      }
      const auto m = match_user(index, query);
      check(m.user_id == winner, "winner " + m.user_id + " != oracle " + winner + " for '" + query + "'");
      check(std::abs(m.similarity - sim) <= 1e-9, "similarity off by more than 1e-9");
    }
  }
  return "corpora=" + std::to_string(corpora) + " queries=" + std::to_string(queries) +
         " no_signal=" + std::to_string(no_signal);
}

std::string ranking() {
  gen::Rng rng(30);
  std::size_t cases = 0, sequences = 0;
  while (cases < 2000) {
    const auto sys = toy_system(rng);
    for (int seq = 0; seq < 10; ++seq) {
      const bool shared = gen::unit(rng) < 0.3;
      Session s;
      try {
        s = start_session(sys, gen::sentence(rng), shared ? InterfaceMode::B : InterfaceMode::C,
                          shared ? Backend::Shared : Backend::PerItem);
      } catch (const Error&) {
        continue;
      }
      const auto& dests = sys.catalog.destinations();
      s = choose_destination(sys, s, dests[gen::uniform(rng, 0, dests.size() - 1)]);
      ++sequences;
      for (int step = 0; step < 15; ++step) {
        const auto k = gen::uniform(rng, 0, sys.vocab.size() - 1);
        const auto& phrase = sys.vocab.phrase(k);
        if (s.state.critiques.count(k) && gen::unit(rng) < 0.4) {
          s = retract(sys, s, phrase);
        } else {
          const auto pol = !shared && gen::unit(rng) < 0.5 ? Polarity::Positive : Polarity::Negative;
          s = critique::critique(sys, s, phrase, pol);
        }
        check(s.current == recompute(sys, s), "current differs from recompute");
        check(as_pairs(s.current) == oracle::rank(s.state, sys.catalog, sys.profiles, *s.destination, 10),
              "current differs from brute-force ranking");
        for (const auto& e : s.current.entries) {
          const auto expected =
              shared ? oracle::shared_explanation(s.state, 6)
                     : oracle::per_item_explanation(s.state, sys.profiles.at(e.item_id).salience, 6);
          check(e.explanation->keyphrases == expected, "explanation differs from oracle");
        }
        ++cases;
      }
    }
  }
  return "cases=" + std::to_string(cases) + " sequences=" + std::to_string(sequences);
}

std::string algebra() {
  gen::Rng rng(40);
  std::map<std::string, std::size_t> counts;
  const std::size_t target = 1500;
  auto done = [&] {
    for (const char* name : {"negative", "positive", "idempotence", "overwrite", "retract", "exclusion"}) {
      if (counts[name] < target) return false;
    }
    return true;
  };
  while (!done()) {
    const auto sys = toy_system(rng);
    const auto& dests = sys.catalog.destinations();
    for (int c = 0; c < 50; ++c) {
      auto s = gen::state(rng, sys.vocab.size(), 0.2);
      const auto k = gen::uniform(rng, 0, sys.vocab.size() - 1);
      const auto& phrase = sys.vocab.phrase(k);
      const auto before = s;
      const double w = oracle::weight(s, k);

      // Negative: strictly lower when p_k > 0 and w' was above -1, unchanged when p_k = 0.
      const auto neg = apply_critique(s, sys.vocab, phrase, Polarity::Negative, Backend::PerItem);
      const auto pos = apply_critique(s, sys.vocab, phrase, Polarity::Positive, Backend::PerItem);
      for (const auto& item : sys.catalog.items()) {
        const auto& prof = sys.profiles.at(item.item_id);
        const double s0 = score_item(s, prof), sn = score_item(neg, prof), sp = score_item(pos, prof);
        if (prof.salience[k] == 0.0) {
          check(sn == s0 && sp == s0, "score changed for an item without the phrase");
        } else {
          check(w > -1.0 ? sn < s0 : sn == s0, "negative did not lower " + item.item_id);
          check(sp >= s0, "positive lowered " + item.item_id);
          if (w < 1.0) check(sp > s0, "positive did not raise " + item.item_id);
        }
      }
      ++counts["negative"];
      ++counts["positive"];

      for (const auto pol : {Polarity::Negative, Polarity::Positive}) {
        const auto once = pol == Polarity::Negative ? neg : pos;
        check(apply_critique(once, sys.vocab, phrase, pol, Backend::PerItem) == once, "critique not idempotent");
      }
      ++counts["idempotence"];

      check(apply_critique(pos, sys.vocab, phrase, Polarity::Negative, Backend::PerItem) == neg,
            "negative did not overwrite positive");
      check(apply_critique(neg, sys.vocab, phrase, Polarity::Positive, Backend::PerItem) == pos,
            "positive did not overwrite negative");
      ++counts["overwrite"];

      const auto dest = dests[gen::uniform(rng, 0, dests.size() - 1)];
      const auto opts = sys.recommend_options(Backend::PerItem);
      if (!s.critiques.count(k)) {
        for (const auto* after : {&neg, &pos}) {
          const auto back = retract_critique(*after, sys.vocab, phrase);
          check(back == before, "retract did not restore the state");
          check(recommend(back, sys.catalog, sys.profiles, dest, opts) ==
                    recommend(before, sys.catalog, sys.profiles, dest, opts),
                "retract did not restore the ranking");
        }
        ++counts["retract"];
      }

      for (const auto backend : {Backend::PerItem, Backend::Shared}) {
        const auto list = recommend(neg, sys.catalog, sys.profiles, dest, sys.recommend_options(backend));
        for (const auto& e : list.entries) {
          const auto& ks = e.explanation->keyphrases;
          check(std::find(ks.begin(), ks.end(), k) == ks.end(), "negative phrase in an explanation");
        }
        const auto global = explain_shared(neg, 6);
        check(std::find(global.keyphrases.begin(), global.keyphrases.end(), k) == global.keyphrases.end(),
              "negative phrase in the shared explanation");
      }
      ++counts["exclusion"];
    }
  }
  std::ostringstream out;
  for (const auto& [name, n] : counts) out << name << "=" << n << " ";
  auto line = out.str();
  line.pop_back();
  return line;
}

std::string study() {
  const auto synthetic = generate_synthetic(SyntheticParams{});
  const auto sys = System::build(synthetic.reviews, synthetic.catalog);
  StudyParams params;
  params.seed = 0;
  params.sessions = 200;
  params.max_steps = 10;
  params.backend = Backend::PerItem;
  params.policy = Policy::TargetDriven;
  const auto td = run_study(sys, params);
  params.threads = 4;
  check(run_study(sys, params) == td, "target-driven study not deterministic across threads");
  params.threads = 1;
  params.policy = Policy::Random;
  const auto rnd = run_study(sys, params);
  check(run_study(sys, params) == rnd, "random study not deterministic");
  const auto mt = aggregate(td), mr = aggregate(rnd);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "td_success=%.3f random_success=%.3f td_initial=%.2f td_final=%.2f random_initial=%.2f "
                "random_final=%.2f",
                mt.success_rate, mr.success_rate, mt.mean_initial_rank, mt.mean_final_rank, mr.mean_initial_rank,
                mr.mean_final_rank);
  check(mt.success_rate >= 2.0 * mr.success_rate, std::string("success ratio below 2: ") + buf);
  check(mt.mean_final_rank <= mt.mean_initial_rank, std::string("final rank above initial: ") + buf);
  return buf;
}

std::string justification() {
  const auto& sys = fixture();
  std::size_t lists = 0, texts = 0;
  double worst = 1.0;
  auto check_list = [&](const RankedList& list) {
    std::vector<Justification> js;
    int rank = 0;
    for (const auto& e : list.entries) {
      const auto& item = sys.catalog.at(e.item_id);
      auto j = generate_justification(*e.explanation, sys.profiles.at(e.item_id), sys.vocab, item.name, ++rank,
                                      sys.templates);
      for (auto k : e.explanation->keyphrases) {
        check(j.text.find(sys.vocab.phrase(k)) != std::string::npos,
              "'" + sys.vocab.phrase(k) + "' missing from justification of " + e.item_id);
      }
      js.push_back(std::move(j));
      ++texts;
    }
    const double d = diversity_score(js);
    worst = std::min(worst, d);
    check(d >= 0.5, "diversity " + std::to_string(d) + " below 0.5");
    ++lists;
  };
  const auto opts = sys.recommend_options(Backend::PerItem);
  gen::Rng rng(60);
  for (const auto& user : sys.index.user_ids()) {
    auto state = init_user_state(user, sys.corpus, sys.vocab, sys.stopwords);
    for (const auto& dest : sys.catalog.destinations()) {
      check_list(recommend(state, sys.catalog, sys.profiles, dest, opts));
    }
    for (int c = 0; c < 3; ++c) {
      const auto k = gen::uniform(rng, 0, sys.vocab.size() - 1);
      state = apply_critique(state, sys.vocab, sys.vocab.phrase(k),
                             gen::unit(rng) < 0.5 ? Polarity::Positive : Polarity::Negative, Backend::PerItem);
    }
    for (const auto& dest : sys.catalog.destinations()) {
      check_list(recommend(state, sys.catalog, sys.profiles, dest, opts));
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "top10_lists=%zu justifications=%zu min_diversity=%.3f", lists, texts, worst);
  return buf;
}

std::string service_contract() {
  const auto& sys = fixture();
  harness::Service service(sys);
  std::size_t validated = 0;
  std::set<std::string> codes;
  auto ok = [&](const harness::Reply& r, const std::string& schema) {
    check(r.status == 200, schema + " returned " + std::to_string(r.status) + ": " + r.body.dump());
    const auto errs = harness::schema_errors(schema, r.body);
    check(errs.empty(), schema + " schema: " + errs);
    ++validated;
    return r.body;
  };
  auto err = [&](const harness::Reply& r, int status, const std::string& code) {
    check(r.status == status && r.body.value("code", "") == code,
          "expected " + code + ", got " + std::to_string(r.status) + " " + r.body.dump());
    const auto errs = harness::schema_errors("error", r.body);
    check(errs.empty(), "error schema: " + errs);
    codes.insert(code);
  };
  const auto dest = sys.catalog.destinations().front();
  const auto phrase = sys.vocab.phrase(0);
  auto open = [&](const std::string& mode) {
    auto created = ok(service.post("/api/session", {{"query", "quiet spa and a great pool"}, {"interface", mode}}),
                      "create_session");
    const auto id = created["session_id"].get<std::string>();
    ok(service.post("/api/session/" + id + "/destination", {{"destination", dest}}), "recommendations");
    return id;
  };

  for (const std::string mode : {"A", "B", "C", "D"}) {
    const auto id = open(mode);
    const auto base = "/api/session/" + id;
    ok(service.get(base + "/recommendations"), "recommendations");
    if (mode != "A") {
      ok(service.post(base + "/critique", {{"keyphrase", phrase}, {"polarity", "negative"}}), "recommendations");
      ok(service.del(base + "/critique?keyphrase=" + harness::url_encode(phrase)), "recommendations");
    }
    ok(service.get(base), "session");
    ok(service.post(base + "/finish", json::object()), "session");
    ok(service.get(base + "/catalog"), "catalog");
  }
  ok(service.get("/api/keyphrases?prefix=" + harness::url_encode(phrase.substr(0, 2))), "keyphrases");
  ok(service.get("/api/catalog?destination=" + harness::url_encode(dest)), "catalog");
  ok(service.get("/api/destinations"), "destinations");
  ok(service.get("/api/categories"), "categories");

  err(service.post("/api/session", {{"query", "the and of"}, {"interface", "C"}}), 400, "NO_SIGNAL");
  err(service.post_raw("/api/session", "{oops"), 400, "BAD_REQUEST");
  const auto c = open("C");
  err(service.post("/api/session/" + c + "/destination", {{"destination", dest}}), 400, "WRONG_STATUS");
  const auto fresh = ok(service.post("/api/session", {{"query", "quiet spa"}, {"interface", "C"}}), "create_session");
  const auto fresh_id = fresh["session_id"].get<std::string>();
  err(service.post("/api/session/" + fresh_id + "/destination", {{"destination", "Atlantis"}}), 400,
      "UNKNOWN_DESTINATION");
  err(service.post("/api/session/" + c + "/critique", {{"keyphrase", "no such phrase"}, {"polarity", "negative"}}),
      400, "UNKNOWN_KEYPHRASE");
  const auto b = open("B");
  err(service.post("/api/session/" + b + "/critique", {{"keyphrase", phrase}, {"polarity", "positive"}}), 400,
      "POSITIVE_NOT_SUPPORTED");
  err(service.get("/api/session/0000/recommendations"), 404, "NOT_FOUND");
  check(codes.size() == 7, "only " + std::to_string(codes.size()) + " error codes reached");

  // Two sessions critiqued concurrently never see each other's critiques.
  const auto s1 = open("C"), s2 = open("C");
  std::vector<std::string> p1, p2;
  for (std::size_t k = 0; k < sys.vocab.size(); ++k) (k % 2 ? p2 : p1).push_back(sys.vocab.phrase(k));
  std::string failure;
  std::mutex failure_mutex;
  auto worker = [&](const std::string& id, const std::vector<std::string>& mine) {
    for (const auto& p : mine) {
      auto r = service.post("/api/session/" + id + "/critique", {{"keyphrase", p}, {"polarity", "negative"}});
      bool good = r.status == 200;
      for (const auto& cr : r.body.value("critiques", json::array())) {
        good = good && std::find(mine.begin(), mine.end(), cr["keyphrase"].get<std::string>()) != mine.end();
      }
      if (!good) {
        std::lock_guard lock(failure_mutex);
        failure = "session " + id + " saw a foreign critique";
      }
    }
  };
  std::thread t1(worker, s1, p1), t2(worker, s2, p2);
  t1.join();
  t2.join();
  check(failure.empty(), failure);
  const auto j1 = ok(service.get("/api/session/" + s1), "session");
  const auto j2 = ok(service.get("/api/session/" + s2), "session");
  check(j1["state"]["critiques"].size() == p1.size() && j2["state"]["critiques"].size() == p2.size(),
        "critique counts differ after concurrent updates");
  return "validated_200s=" + std::to_string(validated) + " error_codes=" + std::to_string(codes.size()) +
         " concurrent_critiques=" + std::to_string(p1.size() + p2.size());
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  fixture();
  const double setup = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("setup: fixture system loaded in %.2fs\n", setup);

  const std::vector<Criterion> criteria = {
      {"structural-constants", 1.0, structural},
      {"oracle-matching", 10.0, matching},
      {"oracle-ranking", 30.0, ranking},
      {"critique-algebra", 30.0, algebra},
      {"simulated-study", 60.0, study},
      {"justification", 5.0, justification},
      {"service-contract", 30.0, service_contract},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = true;
    try {
      detail = c.run();
    } catch (const Violation& v) {
      pass = false;
      detail = v.what;
    } catch (const std::exception& e) {
      pass = false;
      detail = std::string("exception: ") + e.what();
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (pass && elapsed >= c.limit_s) {
      pass = false;
      detail += " (time limit exceeded)";
    }
    if (!pass) ++failed;
    std::printf("%s %-22s %7.3fs / %4.0fs  %s\n", pass ? "PASS" : "FAIL", c.name.c_str(), elapsed, c.limit_s,
                detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
