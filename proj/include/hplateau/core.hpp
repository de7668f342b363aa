#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cstdint>
#include <cstddef>
#include <cstdlib>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace hplateau {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition was violated by the caller's input.
class DomainError : public Error {
public:
  using Error::Error;
};

/// A numerical procedure could not reach its accuracy target.
class NumericalError : public Error {
public:
  using Error::Error;
};

inline void require(bool ok, const std::string &message) {
  if (!ok)
    throw DomainError(message);
}

// Fixed-shape pairwise summation. The reduction tree depends only on the
// input length, so results are bit-reproducible.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs)
      s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

/// Worker cap: HP_THREADS if set (>= 1), otherwise hardware concurrency.
inline unsigned worker_count() {
  if (const char *env = std::getenv("HP_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1)
      return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(chunk_begin, chunk_end, chunk_index) over fixed-size chunks of
/// [0, n). Chunk boundaries never depend on the worker count, so any
/// per-chunk partial results combined in chunk order are deterministic.
template <class Body>
void parallel_chunks(std::size_t n, std::size_t chunk, Body &&body) {
  if (n == 0)
    return;
  const std::size_t chunks = (n + chunk - 1) / chunk;
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(worker_count(), chunks));
  auto run = [&](std::size_t c) {
    const std::size_t b = c * chunk;
    body(b, std::min(n, b + chunk), c);
  };
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c)
      run(c);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t c = w; c < chunks; c += workers)
        run(c);
    });
  for (auto &t : pool)
    t.join();
}

inline Complex to_complex(const Vec2 &z) { return {z.x(), z.y()}; }
inline Vec2 to_vec2(Complex z) { return {z.real(), z.imag()}; }

} // namespace hplateau
