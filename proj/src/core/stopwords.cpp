#include "claimshift/core/stopwords.hpp"

#include "claimshift/core/text.hpp"
#include "claimshift/embedded_data.hpp"

namespace claimshift {

std::set<std::string> parse_stopwords(std::string_view text) {
  std::set<std::string> out;
  std::size_t i = 0;
  while (i <= text.size()) {
    auto nl = text.find('\n', i);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text::trim(text.substr(i, nl - i));
    if (!line.empty() && line[0] != '#') out.insert(text::to_lower(line));
    i = nl + 1;
  }
  return out;
}

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words = parse_stopwords(embedded::kStopwords);
  return words;
}

}  // namespace claimshift
