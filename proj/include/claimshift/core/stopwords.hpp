#pragma once

#include <set>
#include <string>
#include <string_view>

namespace claimshift {

// One lowercased word per line; blank lines and '#' comments are skipped.
std::set<std::string> parse_stopwords(std::string_view text);

// The shipped list (data/stopwords_en_v1.txt).
const std::set<std::string>& default_stopwords();
inline constexpr std::string_view kStopwordsVersion = "en_v1";

}  // namespace claimshift
