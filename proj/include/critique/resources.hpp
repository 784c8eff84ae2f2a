#pragma once

#include <string_view>

// Text resources compiled in from data/resources.
namespace critique::resources {
extern const std::string_view stopwords_txt;
extern const std::string_view templates_txt;
extern const std::string_view adjectives_txt;
}  // namespace critique::resources
