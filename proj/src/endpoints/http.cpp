#include "claimshift/endpoints/http.hpp"

#include "claimshift/core/errors.hpp"

namespace claimshift::endpoints {

SplitUrl split_url(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ContractError("not a URL: " + url);
  auto path = url.find('/', scheme + 3);
  SplitUrl out;
  if (path == std::string::npos) {
    out.origin = url;
  } else {
    out.origin = url.substr(0, path);
    out.prefix = url.substr(path);
  }
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

void raise_for_status(int status, const std::string& body, const std::string& what,
                      const std::string& retry_after_header) {
  if (status >= 200 && status < 300) return;
  std::string msg = what + ": HTTP " + std::to_string(status);
  if (!body.empty()) msg += ": " + body.substr(0, 200);
  if (status == 404) throw NotFoundError(msg);
  if (status == 429) {
    long long ms = 1000;
    try {
      if (!retry_after_header.empty()) ms = std::stoll(retry_after_header) * 1000;
    } catch (...) {
    }
    throw QuotaError(msg, std::chrono::milliseconds(ms));
  }
  if (status >= 500 || status <= 0) throw TransportError(msg);
  throw Error(msg);
}

}  // namespace claimshift::endpoints
