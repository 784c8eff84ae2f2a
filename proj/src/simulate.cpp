#include "critique/simulate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <cctype>
#include <random>
#include <thread>

#include "critique/error.hpp"

namespace critique {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 120> kFeaturePool = {
    "pool",       "spa",         "gym",        "sauna",      "wifi",        "parking",
    "buffet",     "bar",         "restaurant", "terrace",    "rooftop",     "balcony",
    "garden",     "beach",       "lake",       "mountains",  "shuttle",     "airport",
    "station",    "metro",       "downtown",   "quiet",      "reception",   "concierge",
    "housekeeping", "bed",       "pillows",    "shower",     "bathtub",     "towels",
    "minibar",    "kettle",      "espresso",   "tea",        "snacks",      "aircon",
    "heating",    "elevator",    "luggage",    "laundry",    "desk",        "workspace",
    "conference", "wedding",     "kids",       "playground", "pets",        "bikes",
    "hiking",     "skiing",      "museum",     "shopping",   "nightlife",   "casino",
    "golf",       "tennis",      "jacuzzi",    "massage",    "yoga",        "vegan",
    "wine",       "cocktails",   "brunch",     "dinner",     "pastries",    "croissants",
    "fruit",      "juice",       "decor",      "vintage",    "modern",      "historic",
    "architecture", "fireplace", "library",    "piano",      "music",       "courtyard",
    "sunset",     "harbor",      "riverside",  "oldtown",    "tram",        "taxi",
    "valet",      "upgrade",     "suite",      "loft",       "kitchenette", "microwave",
    "fridge",     "blackout",    "soundproof", "carpet",     "lounge",      "cafe",
    "bakery",     "vineyard",    "canal",      "cathedral",  "gallery",     "opera",
    "boutique",   "hostel",      "chalet",     "cabin",      "marina",      "lagoon",
    "glacier",    "sailing",     "kayak",      "snorkeling", "diving",      "surfing",
    "karaoke",    "billiards",   "bowling",    "cinema",     "arcade",      "aquarium",
};

constexpr std::array<std::string_view, 8> kDestinations = {
    "Lausanne", "Geneva", "Zurich", "Lugano", "Basel", "Lucerne", "Montreux", "Zermatt"};

constexpr std::array<std::string_view, 14> kNamePrefix = {
    "Grand",  "Royal",   "Alpine", "Blue", "Golden", "Silver", "Old",
    "Little", "Central", "Lake",   "Park", "Crown",  "Green",  "North"};
constexpr std::array<std::string_view, 14> kNameSuffix = {
    "Palace", "Lodge", "Inn",   "Residence", "Suites",   "House", "Manor",
    "Court",  "Tower", "Villa", "Retreat",   "Quarters", "Hall",  "Garden"};

constexpr std::array<std::string_view, 20> kAdjectives = {
    "great",   "lovely",    "nice",     "excellent", "superb",   "fine",    "wonderful",
    "amazing", "pleasant",  "fantastic", "solid",    "charming", "perfect", "terrific",
    "splendid", "brilliant", "adequate", "memorable", "cozy",    "spotless"};

// {k} is the keyphrase, {a} an adjective. Frames use stopwords only, so the
// sole content tokens of a review are keyphrases and adjectives.
constexpr std::array<std::string_view, 8> kFrames = {
    "The {k} was {a}.", "{A} {k}.",          "Our {k} was {a}.", "Such a {a} {k}!",
    "What a {a} {k}.",  "The {k} is {a}.",   "Very {a} {k}.",    "And the {k}, {a}."};

std::string synthesized_feature(std::size_t i) {
  // Letters only, so the tokenizer keeps it as one token.
  std::string s = "feat";
  do {
    s.push_back(static_cast<char>('a' + i % 26));
    i /= 26;
  } while (i > 0);
  return s;
}

std::string render_frame(std::string_view frame, std::string_view keyphrase,
                         std::string_view adjective) {
  std::string out;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (frame.compare(i, 3, "{k}") == 0) {
      out += keyphrase;
      i += 2;
    } else if (frame.compare(i, 3, "{a}") == 0) {
      out += adjective;
      i += 2;
    } else if (frame.compare(i, 3, "{A}") == 0) {
      const auto at = out.size();
      out += adjective;
      out[at] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[at])));
      i += 2;
    } else {
      out.push_back(frame[i]);
    }
  }
  return out;
}

// Random mixture over the given candidate indices with gamma(1) weights,
// normalized to sum 1.
std::vector<double> mixture_over(std::mt19937_64& rng, std::size_t dims,
                                 const std::vector<std::size_t>& support) {
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::vector<double> w(dims, 0.0);
  double total = 0.0;
  for (auto k : support) {
    w[k] = gamma(rng) + 0.05;
    total += w[k];
  }
  for (auto& x : w) x /= total;
  return w;
}

// `count` distinct indices drawn from `pool` (pool order shuffled in place),
// skipping anything already in `taken`.
std::vector<std::size_t> draw_distinct(std::mt19937_64& rng, std::vector<std::size_t> pool,
                                       std::size_t count, const std::vector<std::size_t>& taken = {}) {
  std::shuffle(pool.begin(), pool.end(), rng);
  std::vector<std::size_t> out;
  for (auto k : pool) {
    if (out.size() == count) break;
    if (std::find(taken.begin(), taken.end(), k) != taken.end()) continue;
    out.push_back(k);
  }
  return out;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return (aa == 0.0 || bb == 0.0) ? 0.0 : ab / std::sqrt(aa * bb);
}

char pad_digit(std::size_t v) { return static_cast<char>('0' + v % 10); }

std::string padded_id(char prefix, std::size_t n, std::size_t width) {
  std::string digits(width, '0');
  for (std::size_t i = 0; i < width; ++i) {
    digits[width - 1 - i] = pad_digit(n);
    n /= 10;
  }
  return std::string(1, prefix) + digits;
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticParams& p) {
  if (p.n_destinations == 0 || p.hotels_min == 0 || p.hotels_max < p.hotels_min ||
      p.n_users == 0 || p.reviews_per_user == 0 || p.vocab_size == 0 ||
      p.features_min == 0 || p.features_max < p.features_min) {
    throw Error(ErrorCode::InvalidArgument,
                "synthetic corpus needs at least one destination, hotel, user, review and keyphrase");
  }
  std::mt19937_64 rng(p.seed);

  std::vector<std::string> features;
  for (std::size_t i = 0; i < p.vocab_size; ++i) {
    features.push_back(i < kFeaturePool.size() ? std::string(kFeaturePool[i])
                                               : synthesized_feature(i - kFeaturePool.size()));
  }
  const auto dims = features.size();

  // Hotels.
  std::vector<Item> items;
  std::vector<std::vector<double>> hotel_mix;
  std::uniform_int_distribution<std::size_t> hotel_count(p.hotels_min, p.hotels_max);
  std::uniform_int_distribution<std::size_t> hotel_support(p.features_min, p.features_max);
  std::vector<std::size_t> all_features(dims);
  std::iota(all_features.begin(), all_features.end(), 0);
  for (std::size_t d = 0; d < p.n_destinations; ++d) {
    const auto theme = draw_distinct(rng, all_features, std::min(p.theme_size, dims));
    const std::string dest = d < kDestinations.size()
                                 ? std::string(kDestinations[d])
                                 : "Destination " + std::to_string(d + 1);
    const auto n = hotel_count(rng);
    for (std::size_t h = 0; h < n; ++h) {
      const auto serial = items.size();
      const auto support_size = std::min(hotel_support(rng), dims);
      auto support = draw_distinct(rng, theme, std::min(p.theme_share, support_size));
      auto rest = draw_distinct(rng, all_features, support_size - support.size(), support);
      support.insert(support.end(), rest.begin(), rest.end());
      auto mix = mixture_over(rng, dims, support);

      std::vector<std::size_t> top(dims);
      std::iota(top.begin(), top.end(), 0);
      std::stable_sort(top.begin(), top.end(), [&](auto a, auto b) { return mix[a] > mix[b]; });

      Item item;
      item.item_id = padded_id('h', serial + 1, 4);
      const auto combos = kNamePrefix.size() * kNameSuffix.size();
      item.name = std::string(kNamePrefix[serial % kNamePrefix.size()]) + " " +
                  std::string(kNameSuffix[(serial / kNamePrefix.size()) % kNameSuffix.size()]);
      if (serial >= combos) item.name += " " + std::to_string(serial / combos + 1);
      item.destination = dest;
      item.description = item.name + ", " + dest + ". Known for its " + features[top[0]] + ", " +
                         features[top[1]] + " and " + features[top[2]] + ".";
      items.push_back(std::move(item));
      hotel_mix.push_back(std::move(mix));
    }
  }

  // Users and their reviews.
  std::vector<Review> reviews;
  std::uniform_int_distribution<std::size_t> user_support(4, 8);
  std::uniform_int_distribution<std::size_t> mention_count(3, 6);
  std::uniform_int_distribution<std::size_t> frame_pick(0, kFrames.size() - 1);
  std::uniform_int_distribution<std::size_t> adjective_pick(0, kAdjectives.size() - 1);
  std::normal_distribution<double> rating_noise(0.0, 0.5);
  const auto n_reviews = std::min(p.reviews_per_user, items.size());

  for (std::size_t u = 0; u < p.n_users; ++u) {
    const auto user_id = padded_id('u', u + 1, 4);
    const auto pref = mixture_over(rng, dims, draw_distinct(rng, all_features, user_support(rng)));

    std::vector<double> visit(items.size());
    for (std::size_t h = 0; h < items.size(); ++h) visit[h] = 0.05 + cosine(pref, hotel_mix[h]);

    for (std::size_t r = 0; r < n_reviews; ++r) {
      std::discrete_distribution<std::size_t> pick(visit.begin(), visit.end());
      const auto h = pick(rng);
      visit[h] = 0.0;  // at most one review per user and hotel

      std::vector<double> emit(dims);
      for (std::size_t k = 0; k < dims; ++k) emit[k] = hotel_mix[h][k] * (1.0 + p.preference_weight * pref[k] * 10.0);
      std::discrete_distribution<std::size_t> mention(emit.begin(), emit.end());

      std::string text;
      const auto mentions = mention_count(rng);
      for (std::size_t m = 0; m < mentions; ++m) {
        if (!text.empty()) text.push_back(' ');
        text += render_frame(kFrames[frame_pick(rng)], features[mention(rng)],
                             kAdjectives[adjective_pick(rng)]);
      }
      const double affinity = cosine(pref, hotel_mix[h]);
      const int rating = std::clamp(
          static_cast<int>(std::lround(2.0 + 3.0 * affinity + rating_noise(rng))), 1, 5);

      reviews.push_back(Review{padded_id('r', reviews.size() + 1, 6), user_id,
                               items[h].item_id, rating, std::move(text)});
    }
  }

  std::vector<std::string> planted(features.begin(), features.end());
  return SyntheticCorpus{ReviewCorpus(std::move(reviews)), Catalog(std::move(items)),
                         std::move(planted)};
}

std::string_view to_string(Policy p) {
  return p == Policy::TargetDriven ? "target_driven" : "random";
}

Policy parse_policy(std::string_view s) {
  auto v = to_lower(s);
  if (v == "target_driven") return Policy::TargetDriven;
  if (v == "random") return Policy::Random;
  throw Error(ErrorCode::BadRequest, "policy must be 'target_driven' or 'random'");
}

double SimulationReport::imputed_rank(std::size_t step) const {
  const auto& r = steps.at(step).rank;
  return r ? static_cast<double>(*r) : static_cast<double>(destination_size + 1);
}

std::size_t target_rank(const System& system, const UserState& state, Backend backend,
                        const Item& target) {
  const auto size = system.catalog.items_in(target.destination).size();
  auto options = system.recommend_options(backend);
  options.top_n = size;
  const auto full = recommend(state, system.catalog, system.profiles, target.destination, options);
  for (std::size_t i = 0; i < full.entries.size(); ++i) {
    if (full.entries[i].item_id == target.item_id) return i + 1;
  }
  throw Error(ErrorCode::UnknownItem, "target missing from its destination ranking");
}

namespace {

std::optional<IssuedCritique> target_driven_critique(const System& system, const Session& session,
                                                     const ItemProfile& target) {
  const auto& top = session.current.entries.front();
  const auto& top_profile = system.profiles.at(top.item_id);
  const auto& crit = session.state.critiques;
  const auto& pt = target.salience;

  // Lowest-salience keyphrase of the explanation shown, ties by rank order.
  auto least_target_salience = [&]() -> std::optional<IssuedCritique> {
    std::optional<std::size_t> best;
    for (auto k : top.explanation->keyphrases) {
      if (crit.count(k)) continue;
      if (!best || pt[k] < pt[*best]) best = k;
    }
    if (!best) return std::nullopt;
    return IssuedCritique{system.vocab.phrase(*best), Polarity::Negative};
  };

  if (session.backend == Backend::Shared) return least_target_salience();

  std::optional<std::size_t> best;
  double best_gap = 0.0;
  for (std::size_t k = 0; k < pt.size(); ++k) {
    if (crit.count(k)) continue;
    const double gap = pt[k] - top_profile.salience[k];
    if (gap > best_gap) {
      best_gap = gap;
      best = k;
    }
  }
  if (best) return IssuedCritique{system.vocab.phrase(*best), Polarity::Positive};
  return least_target_salience();
}

std::optional<IssuedCritique> random_critique(const System& system, const Session& session,
                                              std::mt19937_64& rng) {
  std::vector<std::size_t> open;
  for (std::size_t k = 0; k < system.vocab.size(); ++k) {
    if (!session.state.critiques.count(k)) open.push_back(k);
  }
  if (open.empty()) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
  const auto k = open[pick(rng)];
  auto polarity = Polarity::Negative;
  if (session.backend == Backend::PerItem) {
    std::bernoulli_distribution coin(0.5);
    polarity = coin(rng) ? Polarity::Positive : Polarity::Negative;
  }
  return IssuedCritique{system.vocab.phrase(k), polarity};
}

}  // namespace

SimulationReport simulate_session(const System& system, std::string_view target, Policy policy,
                                  std::size_t max_steps, std::uint64_t seed, Backend backend) {
  const auto& item = system.catalog.at(target);
  const auto& profile = system.profiles.at(item.item_id);
  const auto top_n = system.config.top_n;

  SimulationReport report;
  report.target_item = item.item_id;
  report.destination_size = system.catalog.items_in(item.destination).size();

  const auto mode = backend == Backend::Shared ? InterfaceMode::B : InterfaceMode::C;
  Session session;
  try {
    session = start_session(system, system.corpus.item_review_text(item.item_id), mode, backend,
                            "sim-" + item.item_id);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoSignal && e.code() != ErrorCode::BadRequest) throw;
    report.steps.push_back(SimulationStep{std::nullopt, std::nullopt});
    return report;
  }
  session = choose_destination(system, std::move(session), item.destination);

  std::mt19937_64 rng(seed);
  auto record = [&](std::optional<IssuedCritique> issued) {
    const auto rank = target_rank(system, session.state, backend, item);
    report.steps.push_back(SimulationStep{rank, std::move(issued)});
    if (rank <= top_n) {
      report.success = true;
      report.steps_to_success = report.steps.size() - 1;
    }
  };

  record(std::nullopt);
  for (std::size_t step = 1; step <= max_steps && !report.success; ++step) {
    auto next = policy == Policy::TargetDriven ? target_driven_critique(system, session, profile)
                                               : random_critique(system, session, rng);
    if (!next) break;
    session = critique(system, std::move(session), next->keyphrase, next->polarity);
    record(std::move(next));
  }
  return report;
}

std::vector<std::string> study_targets(const System& system, std::uint64_t seed,
                                       std::size_t count) {
  std::vector<std::string> reviewed;
  for (const auto& item : system.catalog.items()) {
    if (!system.corpus.reviews_of_item(item.item_id).empty()) reviewed.push_back(item.item_id);
  }
  if (reviewed.empty()) throw Error(ErrorCode::EmptyCorpus, "no reviewed items to simulate");
  std::mt19937_64 rng(seed);
  std::shuffle(reviewed.begin(), reviewed.end(), rng);
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(reviewed[i % reviewed.size()]);
  return out;
}

std::vector<SimulationReport> run_study(const System& system, const StudyParams& params) {
  const auto targets = study_targets(system, params.seed, params.sessions);
  std::vector<SimulationReport> reports(targets.size());
  auto run_one = [&](std::size_t i) {
    const std::uint64_t session_seed = params.seed * 1000003ULL + i;
    reports[i] = simulate_session(system, targets[i], params.policy, params.max_steps,
                                  session_seed, params.backend);
  };

  const auto threads = std::max<std::size_t>(1, params.threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < targets.size(); ++i) run_one(i);
    return reports;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < targets.size(); i += threads) run_one(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reports;
}

AggregateMetrics aggregate(const std::vector<SimulationReport>& reports) {
  if (reports.empty()) throw Error(ErrorCode::InvalidArgument, "no reports to aggregate");
  AggregateMetrics m;
  std::size_t longest = 0;
  for (const auto& r : reports) longest = std::max(longest, r.steps.size());
  m.mean_rank_by_step.assign(longest, 0.0);

  const double n = static_cast<double>(reports.size());
  double successes = 0.0;
  for (const auto& r : reports) {
    if (r.success) successes += 1.0;
    const auto last = r.steps.size() - 1;
    m.mean_initial_rank += r.imputed_rank(0);
    m.mean_final_rank += r.imputed_rank(last);
    for (std::size_t t = 0; t < longest; ++t) {
      m.mean_rank_by_step[t] += r.imputed_rank(std::min(t, last));
    }
  }
  m.success_rate = successes / n;
  m.mean_initial_rank /= n;
  m.mean_final_rank /= n;
  for (auto& x : m.mean_rank_by_step) x /= n;
  return m;
}

json report_to_json(const SimulationReport& r) {
  json steps = json::array();
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    const auto& s = r.steps[i];
    steps.push_back({
        {"step", i},
        {"rank", s.rank ? json(*s.rank) : json(nullptr)},
        {"critique", s.critique ? json{{"keyphrase", s.critique->keyphrase},
                                       {"polarity", to_string(s.critique->polarity)}}
                                : json(nullptr)},
    });
  }
  return {
      {"target_item", r.target_item},
      {"destination_size", r.destination_size},
      {"success", r.success},
      {"steps_to_success", r.steps_to_success ? json(*r.steps_to_success) : json(nullptr)},
      {"steps", steps},
  };
}

json metrics_to_json(const AggregateMetrics& m) {
  return {
      {"success_rate", m.success_rate},
      {"mean_initial_rank", m.mean_initial_rank},
      {"mean_final_rank", m.mean_final_rank},
      {"mean_rank_by_step", m.mean_rank_by_step},
      {"absent_rank_imputation", "destination_size + 1"},
  };
}

}  // namespace critique
