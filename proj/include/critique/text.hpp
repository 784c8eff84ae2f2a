#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace critique {

class StopwordSet {
 public:
  StopwordSet() = default;

  /// One token per line; blank lines and surrounding whitespace ignored.
  static StopwordSet from_text(std::string_view text);
  static StopwordSet from_file(const std::filesystem::path& path);
  static const StopwordSet& bundled();

  bool contains(const std::string& token) const { return words_.count(token) != 0; }
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

/// A maximal run of ASCII alphanumerics in the source text, lowercased.
/// `begin`/`end` are byte offsets into the source.
struct RawToken {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string lower;
};

std::vector<RawToken> raw_tokens(std::string_view text);

inline constexpr std::size_t kMinTokenLength = 3;

/// Lowercase, split on non-alphanumerics, drop stopwords and tokens shorter
/// than kMinTokenLength. This is the single tokenizer used for keyphrase
/// counting, vocabulary mining and TF-IDF terms.
std::vector<std::string> tokenize(std::string_view text,
                                  const StopwordSet& stopwords = StopwordSet::bundled());

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split_lines(std::string_view text);

/// Splits a keyphrase on single spaces.
std::vector<std::string> phrase_tokens(std::string_view phrase);

std::string read_file(const std::filesystem::path& path);

}  // namespace critique
