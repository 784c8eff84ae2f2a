#pragma once

#include <cstddef>
#include <filesystem>

#include "critique/engine.hpp"
#include "json.hpp"

namespace critique {

struct Config {
  std::size_t top_n = kDefaultTopN;
  std::size_t k_expl = kDefaultExplanationSize;
  std::size_t vocab_size = 90;
  double df_low = 0.01;
  double df_high = 0.5;
  Backend backend = Backend::PerItem;

  /// Throws InvalidArgument when a value is out of range.
  void validate() const;
  nlohmann::json to_json() const;
};

/// Keys absent from `j` keep their current value; unknown keys are rejected.
Config merge_config(Config base, const nlohmann::json& j);
Config load_config(const std::filesystem::path& path, Config base = {});

}  // namespace critique
