#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "critique/corpus.hpp"
#include "critique/engine.hpp"
#include "critique/session.hpp"
#include "json.hpp"

namespace critique {

struct SyntheticParams {
  std::uint64_t seed = 0;
  std::size_t n_destinations = 4;
  std::size_t hotels_min = 25;
  std::size_t hotels_max = 45;
  std::size_t n_users = 300;
  std::size_t reviews_per_user = 110;
  std::size_t vocab_size = 90;
  /// Keyphrases a hotel offers.
  std::size_t features_min = 8;
  std::size_t features_max = 12;
  /// Features per destination theme, and how many of a hotel's features
  /// come from its destination's theme.
  std::size_t theme_size = 18;
  std::size_t theme_share = 7;
  /// How strongly a reviewer's own preferences shape what they mention.
  double preference_weight = 0.0;
};

struct SyntheticCorpus {
  ReviewCorpus reviews;
  Catalog catalog;
  /// The keyphrases the generator planted, in pool order.
  std::vector<std::string> planted;
};

/// Planted-structure corpus: every hotel has a sparse keyphrase mixture,
/// every user a preference mixture, and review texts mention keyphrases in
/// proportion to hotel weight times user affinity. Throws InvalidArgument
/// on degenerate parameters.
SyntheticCorpus generate_synthetic(const SyntheticParams& params);

enum class Policy { TargetDriven, Random };

std::string_view to_string(Policy p);
/// Accepts "target_driven" or "random". Throws BadRequest.
Policy parse_policy(std::string_view s);

struct IssuedCritique {
  std::string keyphrase;
  Polarity polarity = Polarity::Negative;

  bool operator==(const IssuedCritique&) const = default;
};

struct SimulationStep {
  std::optional<std::size_t> rank;  // 1-based; nullopt when the session never started
  std::optional<IssuedCritique> critique;

  bool operator==(const SimulationStep&) const = default;
};

struct SimulationReport {
  std::string target_item;
  std::size_t destination_size = 0;
  std::vector<SimulationStep> steps;
  bool success = false;
  std::optional<std::size_t> steps_to_success;

  /// Rank at `step`, with missing ranks imputed as destination_size + 1.
  double imputed_rank(std::size_t step) const;
  bool operator==(const SimulationReport&) const = default;
};

/// Target's 1-based position in the full ranking of its destination.
std::size_t target_rank(const System& system, const UserState& state, Backend backend,
                        const Item& target);

/// Runs one closed-loop session for `target`: the query is the target's
/// review text, the destination is the target's, and at most `max_steps`
/// critiques are issued by `policy`. Throws UnknownItem.
SimulationReport simulate_session(const System& system, std::string_view target, Policy policy,
                                  std::size_t max_steps, std::uint64_t seed, Backend backend);

struct StudyParams {
  std::uint64_t seed = 0;
  std::size_t sessions = 200;
  std::size_t max_steps = 10;
  Policy policy = Policy::TargetDriven;
  Backend backend = Backend::PerItem;
  std::size_t threads = 1;
};

/// Targets are the reviewed items in a seed-shuffled order, cycled as needed.
std::vector<std::string> study_targets(const System& system, std::uint64_t seed, std::size_t count);
std::vector<SimulationReport> run_study(const System& system, const StudyParams& params);

struct AggregateMetrics {
  double success_rate = 0.0;
  double mean_initial_rank = 0.0;
  double mean_final_rank = 0.0;
  /// Reports that stopped early carry their last rank forward.
  std::vector<double> mean_rank_by_step;
};

/// Throws InvalidArgument on an empty report list.
AggregateMetrics aggregate(const std::vector<SimulationReport>& reports);

nlohmann::json report_to_json(const SimulationReport& report);
nlohmann::json metrics_to_json(const AggregateMetrics& metrics);

}  // namespace critique
