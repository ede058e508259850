#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace metacurate {

using EntryId = std::uint32_t;

// Base class for all library failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad parameters or missing/incompatible configuration (t <= 0, missing
// source kind, digest mismatch between counts and metadata, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Corrupt or inconsistent data encountered at runtime (entry id out of
// range, malformed counts file, shard length mismatch, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// Filesystem-level failures.
class IoError : public Error {
 public:
  using Error::Error;
};

inline std::string trim_copy(const std::string& s) {
  const char* ws = " \t\r\n\f\v";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace metacurate
