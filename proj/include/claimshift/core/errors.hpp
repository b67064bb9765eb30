#pragma once

#include <chrono>
#include <stdexcept>
#include <string>

namespace claimshift {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated an operation's precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Network or endpoint failure that may succeed on retry.
class TransportError : public Error {
 public:
  using Error::Error;
};

class QuotaError : public TransportError {
 public:
  QuotaError(const std::string& what, std::chrono::milliseconds retry_after)
      : TransportError(what), retry_after_(retry_after) {}
  std::chrono::milliseconds retry_after() const { return retry_after_; }

 private:
  std::chrono::milliseconds retry_after_;
};

class ProbeFailedError : public Error {
 public:
  using Error::Error;
};

class ClaimRejectedError : public Error {
 public:
  using Error::Error;
};

class UpdateFailedError : public Error {
 public:
  UpdateFailedError(const std::string& what, std::string log)
      : Error(what), log_(std::move(log)) {}
  const std::string& log() const { return log_; }

 private:
  std::string log_;
};

// Artifact on disk is malformed, has the wrong schema, or carries a foreign
// config hash.
class ArtifactError : public Error {
 public:
  using Error::Error;
};

}  // namespace claimshift
