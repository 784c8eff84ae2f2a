#include "critique/config.hpp"

#include "critique/error.hpp"
#include "critique/text.hpp"

namespace critique {

using nlohmann::json;

void Config::validate() const {
  if (top_n < 1) throw Error(ErrorCode::InvalidArgument, "top_n must be at least 1");
  if (k_expl < 1) throw Error(ErrorCode::InvalidArgument, "k_expl must be at least 1");
  if (vocab_size < 1) throw Error(ErrorCode::InvalidArgument, "vocab_size must be at least 1");
  if (!(df_low >= 0.0 && df_low < df_high && df_high <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "need 0 <= df_low < df_high <= 1");
  }
}

json Config::to_json() const {
  return {{"top_n", top_n},   {"k_expl", k_expl},   {"vocab_size", vocab_size},
          {"df_low", df_low}, {"df_high", df_high}, {"backend", std::string(to_string(backend))}};
}

Config merge_config(Config base, const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Parse, "config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "top_n") {
        base.top_n = value.get<std::size_t>();
      } else if (key == "k_expl") {
        base.k_expl = value.get<std::size_t>();
      } else if (key == "vocab_size") {
        base.vocab_size = value.get<std::size_t>();
      } else if (key == "df_low") {
        base.df_low = value.get<double>();
      } else if (key == "df_high") {
        base.df_high = value.get<double>();
      } else if (key == "backend") {
        base.backend = parse_backend(value.get<std::string>());
      } else {
        throw Error(ErrorCode::Parse, "unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("bad config value: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BadRequest) throw Error(ErrorCode::Parse, e.what());
    throw;
  }
  base.validate();
  return base;
}

Config load_config(const std::filesystem::path& path, Config base) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
  }
  return merge_config(base, j);
}

}  // namespace critique
