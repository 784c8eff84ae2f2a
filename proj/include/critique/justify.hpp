#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "critique/corpus.hpp"
#include "critique/engine.hpp"

namespace critique {

/// [start, end) in Unicode code points of the description.
struct HighlightSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string keyphrase;

  bool operator==(const HighlightSpan&) const = default;
};

/// Case-insensitive whole-token matches; a bigram matches its two tokens
/// separated by exactly one whitespace character. Overlaps resolve
/// leftmost-longest.
std::vector<HighlightSpan> highlight(std::string_view description,
                                     const std::vector<std::string>& keyphrases);

enum class Intensity { Low = 0, Medium = 1, High = 2 };

/// Tercile of count[k] within the item's non-zero counts, by the fraction of
/// those counts that are <= count[k].
Intensity count_tercile(const ItemProfile& profile, std::size_t k);

/// Sentence templates with `{name}` and `{phrases}` placeholders plus the
/// low/medium/high intensity adjectives.
class TemplateSet {
 public:
  TemplateSet(std::vector<std::string> templates, std::array<std::string, 3> adjectives);

  static TemplateSet parse(std::string_view templates_text, std::string_view adjectives_text);
  static TemplateSet load(const std::filesystem::path& templates_path,
                          const std::filesystem::path& adjectives_path);
  static const TemplateSet& bundled();

  std::size_t size() const { return templates_.size(); }
  const std::string& at(std::size_t i) const { return templates_.at(i); }
  const std::string& adjective(Intensity level) const {
    return adjectives_[static_cast<std::size_t>(level)];
  }

 private:
  std::vector<std::string> templates_;
  std::array<std::string, 3> adjectives_;
};

inline constexpr std::size_t kMinTemplates = 5;

struct Justification {
  std::string text;
  std::vector<std::string> keyphrases_used;
  int template_id = -1;  // -1 for the empty justification

  bool operator==(const Justification&) const = default;
};

/// Fills template (rank_position mod T) with the hotel name and the
/// explanation's keyphrases, each prefixed by its intensity adjective.
/// Throws InvalidArgument for a GLOBAL explanation.
Justification generate_justification(const Explanation& explanation, const ItemProfile& profile,
                                     const Vocabulary& vocab, std::string_view item_name,
                                     int rank_position,
                                     const TemplateSet& templates = TemplateSet::bundled());

/// Trimmed non-empty sentences, split on '.', '!' and '?'.
std::vector<std::string> split_sentences(std::string_view text);

/// 1 - duplicated sentences / total sentences. Throws InvalidArgument for
/// fewer than two justifications.
double diversity_score(const std::vector<Justification>& justifications);

}  // namespace critique
