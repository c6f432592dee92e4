#pragma once

#include <stdexcept>
#include <string>

namespace ecosim {

/// Invalid configuration (bad field values, schema violations).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Tensor/layer dimension mismatch.
class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

/// An action referencing a document that is not in the current candidate set.
class InvalidActionError : public std::runtime_error {
 public:
  InvalidActionError(const std::string& what, int doc_id)
      : std::runtime_error(what), doc_id_(doc_id) {}
  int doc_id() const { return doc_id_; }

 private:
  int doc_id_;
};

/// API misuse (calling backward before forward, stale-parameter updates, ...).
class UsageError : public std::logic_error {
 public:
  explicit UsageError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace ecosim
