#include "critique/justify.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "critique/error.hpp"
#include "critique/resources.hpp"

namespace critique {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Code point index of every byte offset (plus one past the end). Only
// lead-byte offsets are meaningful; tokens never start mid-character.
std::vector<std::size_t> code_point_offsets(std::string_view s) {
  std::vector<std::size_t> out(s.size() + 1, 0);
  std::size_t cp = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = cp;
    if (i + 1 >= s.size() || (static_cast<unsigned char>(s[i + 1]) & 0xC0) != 0x80) ++cp;
  }
  out[s.size()] = cp;
  return out;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

std::string join_phrases(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += (i + 1 == parts.size()) ? " and " : ", ";
    out += parts[i];
  }
  return out;
}

}  // namespace

std::vector<HighlightSpan> highlight(std::string_view description,
                                     const std::vector<std::string>& keyphrases) {
  std::vector<std::vector<std::string>> phrases;
  for (const auto& k : keyphrases) {
    auto toks = phrase_tokens(to_lower(k));
    if (!toks.empty() && toks.size() <= 2) phrases.push_back(std::move(toks));
  }
  const auto tokens = raw_tokens(description);
  const auto cp = code_point_offsets(description);

  std::vector<HighlightSpan> spans;
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t best_len = 0;
    const std::vector<std::string>* best = nullptr;
    for (const auto& p : phrases) {
      if (p.size() <= best_len || i + p.size() > tokens.size()) continue;
      if (tokens[i].lower != p[0]) continue;
      if (p.size() == 2) {
        const auto& a = tokens[i];
        const auto& b = tokens[i + 1];
        if (b.lower != p[1] || b.begin != a.end + 1 || !is_space(description[a.end])) continue;
      }
      best_len = p.size();
      best = &p;
    }
    if (best == nullptr) {
      ++i;
      continue;
    }
    const auto begin = tokens[i].begin;
    const auto end = tokens[i + best_len - 1].end;
    std::string phrase = (*best)[0];
    if (best_len == 2) phrase += " " + (*best)[1];
    spans.push_back(HighlightSpan{cp[begin], cp[end], std::move(phrase)});
    i += best_len;
  }
  return spans;
}

Intensity count_tercile(const ItemProfile& profile, std::size_t k) {
  const int c = profile.counts.at(k);
  std::size_t nonzero = 0;
  std::size_t at_most = 0;
  for (int other : profile.counts) {
    if (other <= 0) continue;
    ++nonzero;
    if (other <= c) ++at_most;
  }
  if (c <= 0 || nonzero == 0) return Intensity::Low;
  // Integer comparison of at_most / nonzero against 1/3 and 2/3.
  if (3 * at_most <= nonzero) return Intensity::Low;
  if (3 * at_most <= 2 * nonzero) return Intensity::Medium;
  return Intensity::High;
}

TemplateSet::TemplateSet(std::vector<std::string> templates, std::array<std::string, 3> adjectives)
    : templates_(std::move(templates)), adjectives_(std::move(adjectives)) {
  if (templates_.size() < kMinTemplates) {
    throw Error(ErrorCode::InvalidArgument,
                "need at least " + std::to_string(kMinTemplates) + " justification templates");
  }
  for (const auto& t : templates_) {
    if (t.find("{phrases}") == std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "template lacks {phrases}: " + t);
    }
  }
}

TemplateSet TemplateSet::parse(std::string_view templates_text, std::string_view adjectives_text) {
  std::vector<std::string> templates;
  for (const auto& line : split_lines(templates_text)) {
    auto t = trim(line);
    if (!t.empty()) templates.push_back(std::move(t));
  }
  std::vector<std::string> adjectives;
  for (const auto& line : split_lines(adjectives_text)) {
    auto a = trim(line);
    if (!a.empty()) adjectives.push_back(std::move(a));
  }
  if (adjectives.size() != 3) {
    throw Error(ErrorCode::InvalidArgument, "adjectives file must have exactly three lines");
  }
  return TemplateSet(std::move(templates), {adjectives[0], adjectives[1], adjectives[2]});
}

TemplateSet TemplateSet::load(const std::filesystem::path& templates_path,
                              const std::filesystem::path& adjectives_path) {
  return parse(read_file(templates_path), read_file(adjectives_path));
}

const TemplateSet& TemplateSet::bundled() {
  static const TemplateSet set = parse(resources::templates_txt, resources::adjectives_txt);
  return set;
}

Justification generate_justification(const Explanation& explanation, const ItemProfile& profile,
                                     const Vocabulary& vocab, std::string_view item_name,
                                     int rank_position, const TemplateSet& templates) {
  if (explanation.scope != ExplanationScope::PerItem) {
    throw Error(ErrorCode::InvalidArgument, "justifications need a per-item explanation");
  }
  Justification out;
  if (explanation.keyphrases.empty()) return out;

  std::vector<std::string> rendered;
  for (auto k : explanation.keyphrases) {
    const auto& phrase = vocab.phrase(k);
    out.keyphrases_used.push_back(phrase);
    rendered.push_back(templates.adjective(count_tercile(profile, k)) + " " + phrase);
  }
  const auto t = static_cast<int>(templates.size());
  out.template_id = ((rank_position % t) + t) % t;
  out.text = templates.at(static_cast<std::size_t>(out.template_id));
  replace_all(out.text, "{name}", item_name);
  replace_all(out.text, "{phrases}", join_phrases(rendered));
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    auto s = trim(current);
    if (!s.empty()) out.push_back(std::move(s));
    current.clear();
  };
  for (char c : text) {
    if (c == '.' || c == '!' || c == '?') {
      flush();
    } else {
      current.push_back(c);
    }
  }
  flush();
  return out;
}

double diversity_score(const std::vector<Justification>& justifications) {
  if (justifications.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "diversity needs at least two justifications");
  }
  std::size_t total = 0;
  std::unordered_set<std::string> distinct;
  for (const auto& j : justifications) {
    for (auto& s : split_sentences(j.text)) {
      ++total;
      distinct.insert(std::move(s));
    }
  }
  if (total == 0) return 1.0;
  const auto duplicates = total - distinct.size();
  return 1.0 - static_cast<double>(duplicates) / static_cast<double>(total);
}

}  // namespace critique
