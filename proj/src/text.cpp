#include "critique/text.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "critique/error.hpp"
#include "critique/resources.hpp"

namespace critique {

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "IO";
    case ErrorCode::Parse: return "PARSE";
    case ErrorCode::DuplicateId: return "DUPLICATE_ID";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::EmptyCorpus: return "EMPTY_CORPUS";
    case ErrorCode::UnknownUser: return "UNKNOWN_USER";
    case ErrorCode::UnknownItem: return "UNKNOWN_ITEM";
    case ErrorCode::UnknownDestination: return "UNKNOWN_DESTINATION";
    case ErrorCode::UnknownKeyphrase: return "UNKNOWN_KEYPHRASE";
    case ErrorCode::PositiveNotSupported: return "POSITIVE_NOT_SUPPORTED";
    case ErrorCode::NotCritiqued: return "NOT_CRITIQUED";
    case ErrorCode::VocabularyMismatch: return "VOCABULARY_MISMATCH";
    case ErrorCode::NoSignal: return "NO_SIGNAL";
    case ErrorCode::WrongStatus: return "WRONG_STATUS";
    case ErrorCode::NotFound: return "NOT_FOUND";
    case ErrorCode::BadRequest: return "BAD_REQUEST";
  }
  return "UNKNOWN";
}

StopwordSet StopwordSet::from_text(std::string_view text) {
  StopwordSet set;
  for (auto& line : split_lines(text)) {
    auto word = to_lower(trim(line));
    if (!word.empty()) set.words_.insert(std::move(word));
  }
  return set;
}

StopwordSet StopwordSet::from_file(const std::filesystem::path& path) {
  return from_text(read_file(path));
}

const StopwordSet& StopwordSet::bundled() {
  static const StopwordSet set = from_text(resources::stopwords_txt);
  return set;
}

std::vector<RawToken> raw_tokens(std::string_view text) {
  std::vector<RawToken> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_alnum(text[i])) {
      ++i;
      continue;
    }
    RawToken tok;
    tok.begin = i;
    while (i < text.size() && is_alnum(text[i])) {
      tok.lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i]))));
      ++i;
    }
    tok.end = i;
    out.push_back(std::move(tok));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text, const StopwordSet& stopwords) {
  std::vector<std::string> out;
  for (auto& tok : raw_tokens(text)) {
    if (tok.lower.size() < kMinTokenLength || stopwords.contains(tok.lower)) continue;
    out.push_back(std::move(tok.lower));
  }
  return out;
}

std::string trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r\n\f\v");
  return std::string(s.substr(first, last - first + 1));
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < text.size()) lines.emplace_back(text.substr(start));
      break;
    }
    std::string line(text.substr(start, nl - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = nl + 1;
  }
  return lines;
}

std::vector<std::string> phrase_tokens(std::string_view phrase) {
  std::vector<std::string> out;
  std::istringstream in{std::string(phrase)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace critique
