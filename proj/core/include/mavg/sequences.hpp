#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace mavg::seq {

// Radical-inverse (van der Corput) value of index >= 1 in a prime base.
double halton(std::uint64_t index, std::uint32_t base);

// First n primes.
std::vector<std::uint32_t> first_primes(std::size_t n);

// Inverse standard normal cdf: Acklam's rational approximation polished with
// one Halley step. |error| < 1e-9 on [1e-12, 1-1e-12]; inv_norm_cdf(0.5) == 0.
double inv_norm_cdf(double u);

// Deterministic source of standard normal draws addressed by (row, column).
//
// halton: row p, column j is the radical inverse of index p+1+burn_in in the
// (j+1)-th prime base mapped through inv_norm_cdf. Bases above 50 use a fixed
// digit permutation (Fisher-Yates driven by splitmix64 seeded with the base,
// digit 0 kept fixed) because raw Halton columns correlate badly at large
// bases. The burn-in (default 20) drops the early, strongly striped points.
//
// pseudo: counter-based splitmix64; entry (row, col) depends only on
// (seed, row, col, antithetic), so any thread may evaluate any entry. With
// antithetic on, rows form (z, -z) pairs: row 2k+1 is the negation of row 2k.
class NormalStream {
 public:
  static NormalStream halton(std::size_t dim, int burn_in = 20);
  static NormalStream pseudo(std::uint64_t seed, std::size_t dim, bool antithetic);

  double operator()(std::uint64_t row, std::size_t col) const;
  std::size_t dim() const { return dim_; }
  bool antithetic() const { return antithetic_; }

 private:
  NormalStream() = default;
  enum class Kind { halton, pseudo };
  Kind kind_ = Kind::pseudo;
  std::size_t dim_ = 0;
  int burn_in_ = 0;
  std::uint64_t seed_ = 0;
  bool antithetic_ = false;
  std::vector<std::uint32_t> bases_;
  std::vector<std::vector<std::uint32_t>> perms_;  // empty vector = identity
};

// rows x stream.dim() matrix of standard normals, filled in parallel by rows.
Eigen::MatrixXd normal_matrix(const NormalStream& stream, std::uint64_t rows);

// Same, for stream rows [first_row, first_row + rows): chunked consumption.
Eigen::MatrixXd normal_matrix(const NormalStream& stream, std::uint64_t first_row,
                              std::uint64_t rows);

}  // namespace mavg::seq
