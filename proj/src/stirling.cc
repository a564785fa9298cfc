// Apache License, Version 2.0, refer to LICENSE.txt

#include "hpyp/stirling.hh"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "hpyp/random.hh"

namespace hpyp {

namespace {

constexpr char kMagic[8] = {'H', 'P', 'Y', 'P', 'S', 'T', 'I', 'R'};
constexpr std::uint32_t kVersion = 1;

bool valid_pair(std::size_t c, std::size_t t) {
  return t <= c && ((t == 0) == (c == 0));
}

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("truncated stirling cache file");
  return v;
}

}  // namespace

StirlingCache::StirlingCache(double discount, std::size_t hard_limit)
    : discount_(discount), hard_limit_(hard_limit), rows_(hard_limit + 1) {
  if (!(discount >= 0.0 && discount < 1.0))
    throw std::domain_error("stirling discount must lie in [0, 1)");
  if (hard_limit == 0) throw std::invalid_argument("stirling hard limit must be positive");
  rows_[0] = std::make_unique<double[]>(1);
  rows_[0][0] = 0.0;
  ready_.store(1, std::memory_order_release);
}

void StirlingCache::grow(std::size_t n) const {
  if (n > hard_limit_)
    throw std::length_error("stirling cache row " + std::to_string(n) +
                            " exceeds hard limit " + std::to_string(hard_limit_));
  std::lock_guard<std::mutex> lock(grow_mutex_);
  std::size_t ready = ready_.load(std::memory_order_relaxed);
  if (n < ready) return;
  // Doubling growth, clipped at the hard limit.
  std::size_t target = std::min(hard_limit_ + 1, std::max(n + 1, 2 * ready));
  for (std::size_t row = ready; row < target; ++row) {
    const double* prev = rows_[row - 1].get();
    auto cur = std::make_unique<double[]>(row + 1);
    const double prev_n = static_cast<double>(row - 1);
    cur[0] = kNegInf;
    for (std::size_t m = 1; m <= row; ++m) {
      double from_diag = prev[m - 1];
      double from_same = kNegInf;
      if (m <= row - 1) {
        double coef = prev_n - static_cast<double>(m) * discount_;
        if (coef > 0.0 && prev[m] != kNegInf) from_same = std::log(coef) + prev[m];
      }
      cur[m] = log_add(from_diag, from_same);
    }
    rows_[row] = std::move(cur);
  }
  ready_.store(target, std::memory_order_release);
}

double StirlingCache::log_stirling(std::size_t n, std::size_t m) const {
  if (m > n) return kNegInf;
  if (n >= ready_.load(std::memory_order_acquire)) grow(n);
  return rows_[n][m];
}

double StirlingCache::log_stirling_ratio(std::size_t c, std::size_t t, int dc, int dt) const {
  if (dc < 0 || dc > 1 || dt < 0 || dt > 1)
    throw std::domain_error("stirling ratio increments must be 0 or 1");
  const std::size_t c2 = c + static_cast<std::size_t>(dc);
  const std::size_t t2 = t + static_cast<std::size_t>(dt);
  if (!valid_pair(c, t) || !valid_pair(c2, t2))
    throw std::domain_error("invalid customer/table count pair for stirling ratio");
  return log_stirling(c2, t2) - log_stirling(c, t);
}

void StirlingCache::save(std::ostream& out) const {
  const std::uint64_t max_n = rows() - 1;
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, discount_);
  write_pod(out, max_n);
  write_pod(out, max_n);  // max_m: the table is a full triangle
  for (std::size_t n = 0; n <= max_n; ++n)
    out.write(reinterpret_cast<const char*>(rows_[n].get()),
              static_cast<std::streamsize>((n + 1) * sizeof(double)));
  if (!out) throw std::runtime_error("failed writing stirling cache");
}

std::unique_ptr<StirlingCache> StirlingCache::load(std::istream& in, std::size_t hard_limit) {
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a stirling cache file");
  if (read_pod<std::uint32_t>(in) != kVersion)
    throw std::runtime_error("unsupported stirling cache version");
  const double discount = read_pod<double>(in);
  const auto max_n = read_pod<std::uint64_t>(in);
  const auto max_m = read_pod<std::uint64_t>(in);
  if (max_m != max_n) throw std::runtime_error("stirling cache must be a full triangle");
  auto cache = std::make_unique<StirlingCache>(discount, std::max<std::size_t>(hard_limit, max_n));
  for (std::size_t n = 0; n <= max_n; ++n) {
    auto row = std::make_unique<double[]>(n + 1);
    in.read(reinterpret_cast<char*>(row.get()), static_cast<std::streamsize>((n + 1) * sizeof(double)));
    if (!in) throw std::runtime_error("truncated stirling cache file");
    cache->rows_[n] = std::move(row);
  }
  cache->ready_.store(max_n + 1, std::memory_order_release);
  return cache;
}

}  // namespace hpyp
