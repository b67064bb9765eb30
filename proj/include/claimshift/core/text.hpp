#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace claimshift::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
std::size_t word_count(std::string_view s);
bool contains_icase(std::string_view haystack, std::string_view needle);
std::string replace_all(std::string s, std::string_view from, std::string_view to);

// Substitutes {name} placeholders. Unknown placeholders are left in place.
std::string render(std::string_view tpl, const std::map<std::string, std::string>& vars);

// Lowercased alphanumeric word tokens.
std::vector<std::string> word_tokens(std::string_view s);

}  // namespace claimshift::text
