#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace aoisched {

/// The network always has exactly two devices, indexed 0 and 1 in code
/// and labelled 1 and 2 in every user-facing file.
inline constexpr int kDevices = 2;

using StateIndex = std::uint32_t;
using ActionCode = std::uint8_t;

using Policy = std::vector<ActionCode>;
using ValueFunction = std::vector<double>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model construction or usage error (infeasible action, empty restriction, ...).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// File system failures: unreadable input, unwritable output, malformed files.
class IoError : public Error {
 public:
  using Error::Error;
};

struct Transition {
  StateIndex next = 0;
  double probability = 0.0;
};

/// Successor distribution of one (state, action) pair. Never longer than four
/// entries: each device either resets its age or does not.
class SuccessorList {
 public:
  static constexpr std::size_t kCapacity = 4;

  /// Adds probability mass to `next`, merging with an existing entry.
  void add(StateIndex next, double probability) {
    for (std::size_t i = 0; i < size_; ++i) {
      if (items_[i].next == next) {
        items_[i].probability += probability;
        return;
      }
    }
    if (size_ == kCapacity) throw ModelError("successor list overflow");
    items_[size_++] = Transition{next, probability};
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  const Transition& operator[](std::size_t i) const { return items_[i]; }
  const Transition* begin() const { return items_.data(); }
  const Transition* end() const { return items_.data() + size_; }

  double total() const {
    double sum = 0.0;
    for (const auto& t : *this) sum += t.probability;
    return sum;
  }

 private:
  std::array<Transition, kCapacity> items_{};
  std::size_t size_ = 0;
};

}  // namespace aoisched
