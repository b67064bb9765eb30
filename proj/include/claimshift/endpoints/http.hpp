#pragma once

#include <string>

namespace claimshift::endpoints {

// "http://host:8080/v1" -> origin "http://host:8080", prefix "/v1".
struct SplitUrl {
  std::string origin;
  std::string prefix;
};
SplitUrl split_url(const std::string& url);

// Maps an HTTP status to the error taxonomy: 404 NotFoundError, 429
// QuotaError, 5xx TransportError, other 4xx Error. No-op for 2xx.
void raise_for_status(int status, const std::string& body, const std::string& what,
                      const std::string& retry_after_header = {});

}  // namespace claimshift::endpoints
