// Apache License, Version 2.0, refer to LICENSE.txt

// Generalised Stirling numbers S^n_{m,a} in log space, built row by row from
//
//   S^{n+1}_{m,a} = S^n_{m-1,a} + (n - m a) S^n_{m,a},   S^0_0 = 1,
//
// with -inf standing for zero entries (m > n, or m = 0 < n).

#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <vector>

namespace hpyp {

class StirlingCache {
 public:
  static constexpr std::size_t kDefaultHardLimit = std::size_t{1} << 15;

  explicit StirlingCache(double discount, std::size_t hard_limit = kDefaultHardLimit);

  StirlingCache(const StirlingCache&) = delete;
  StirlingCache& operator=(const StirlingCache&) = delete;

  double discount() const { return discount_; }
  std::size_t hard_limit() const { return hard_limit_; }
  // Number of complete rows; entries (n, m) with n < rows() are cached.
  std::size_t rows() const { return ready_.load(std::memory_order_acquire); }

  // log S^n_{m,discount}. Grows the table as needed; throws std::length_error
  // when n exceeds the hard limit.
  double log_stirling(std::size_t n, std::size_t m) const;

  // log [S^{c+dc}_{t+dt} / S^c_t]. Both count pairs must be valid
  // (t <= c, t = 0 iff c = 0); otherwise std::domain_error.
  double log_stirling_ratio(std::size_t c, std::size_t t, int dc, int dt) const;

  // Versioned binary dump. Header: magic, version, discount, max_n, max_m.
  void save(std::ostream& out) const;
  static std::unique_ptr<StirlingCache> load(std::istream& in,
                                             std::size_t hard_limit = kDefaultHardLimit);

 private:
  void grow(std::size_t n) const;

  double discount_;
  std::size_t hard_limit_;
  // Row n holds n + 1 entries. The pointer array is sized once so readers
  // never race with a reallocation; rows below ready_ are immutable.
  mutable std::vector<std::unique_ptr<double[]>> rows_;
  mutable std::atomic<std::size_t> ready_{0};
  mutable std::mutex grow_mutex_;
};

}  // namespace hpyp
