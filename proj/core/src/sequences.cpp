#include "mavg/sequences.hpp"

#include <cmath>
#include <stdexcept>

#include "mavg/normal.hpp"
#include "mavg/parallel.hpp"

namespace mavg::seq {

namespace {

std::uint64_t splitmix64(std::uint64_t state) {
  std::uint64_t z = state + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// counter-based draw: pure function of (seed, counter)
std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t counter) {
  return splitmix64(seed + counter * 0x9e3779b97f4a7c15ULL);
}

// strictly inside (0, 1)
double to_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Permutation of digits {0..base-1} with digit 0 fixed, deterministic per base.
std::vector<std::uint32_t> digit_permutation(std::uint32_t base) {
  std::vector<std::uint32_t> perm(base);
  for (std::uint32_t i = 0; i < base; ++i) perm[i] = i;
  std::uint64_t state = splitmix64(base);
  for (std::uint32_t i = base - 1; i >= 2; --i) {
    state = splitmix64(state);
    const std::uint32_t j = 1 + static_cast<std::uint32_t>(state % i);
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

double halton_permuted(std::uint64_t index, std::uint32_t base,
                       const std::vector<std::uint32_t>& perm) {
  const double inv = 1.0 / base;
  double f = inv;
  double x = 0.0;
  while (index > 0) {
    const std::uint32_t digit = static_cast<std::uint32_t>(index % base);
    x += f * (perm.empty() ? digit : perm[digit]);
    index /= base;
    f *= inv;
  }
  return x;
}

constexpr std::uint32_t kScrambleAbove = 50;  // raw bases: primes 2..47

}  // namespace

double halton(std::uint64_t index, std::uint32_t base) {
  if (index == 0) throw std::invalid_argument("halton: index starts at 1");
  if (base < 2) throw std::invalid_argument("halton: base must be >= 2");
  return halton_permuted(index, base, {});
}

std::vector<std::uint32_t> first_primes(std::size_t n) {
  std::vector<std::uint32_t> out;
  out.reserve(n);
  std::uint32_t candidate = 2;
  while (out.size() < n) {
    bool prime = true;
    for (std::uint32_t p : out) {
      if (static_cast<std::uint64_t>(p) * p > candidate) break;
      if (candidate % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) out.push_back(candidate);
    ++candidate;
  }
  return out;
}

double inv_norm_cdf(double u) {
  if (!(u > 0.0 && u < 1.0))
    throw std::domain_error("inv_norm_cdf: u must lie strictly inside (0, 1)");

  // Acklam's coefficients
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;

  double x;
  if (u < p_low) {
    const double q = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (u <= 1.0 - p_low) {
    const double q = u - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - u));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // One Halley step against the Cody cdf; keeps 0.5 -> 0 exact and pushes the
  // absolute error to ~1e-15 in the bulk.
  const double e = norm_cdf(x) - u;
  const double w = e / norm_pdf(x);
  return x - w / (1.0 + 0.5 * x * w);
}

NormalStream NormalStream::halton(std::size_t dim, int burn_in) {
  if (dim == 0) throw std::invalid_argument("NormalStream: dim must be positive");
  if (burn_in < 0) throw std::invalid_argument("NormalStream: burn_in must be >= 0");
  NormalStream s;
  s.kind_ = Kind::halton;
  s.dim_ = dim;
  s.burn_in_ = burn_in;
  s.bases_ = first_primes(dim);
  s.perms_.resize(dim);
  for (std::size_t j = 0; j < dim; ++j)
    if (s.bases_[j] > kScrambleAbove) s.perms_[j] = digit_permutation(s.bases_[j]);
  return s;
}

NormalStream NormalStream::pseudo(std::uint64_t seed, std::size_t dim, bool antithetic) {
  if (dim == 0) throw std::invalid_argument("NormalStream: dim must be positive");
  NormalStream s;
  s.kind_ = Kind::pseudo;
  s.dim_ = dim;
  s.seed_ = seed;
  s.antithetic_ = antithetic;
  return s;
}

double NormalStream::operator()(std::uint64_t row, std::size_t col) const {
  if (col >= dim_) throw std::out_of_range("NormalStream: column out of range");
  if (kind_ == Kind::halton) {
    const std::uint64_t index = row + 1 + static_cast<std::uint64_t>(burn_in_);
    return inv_norm_cdf(halton_permuted(index, bases_[col], perms_[col]));
  }
  const std::uint64_t draw_row = antithetic_ ? row >> 1 : row;
  const std::uint64_t counter = draw_row * dim_ + col;
  double z = inv_norm_cdf(to_unit(counter_bits(seed_, counter)));
  if (antithetic_ && (row & 1ULL)) z = -z;
  return z;
}

Eigen::MatrixXd normal_matrix(const NormalStream& stream, std::uint64_t rows) {
  return normal_matrix(stream, 0, rows);
}

Eigen::MatrixXd normal_matrix(const NormalStream& stream, std::uint64_t first_row,
                              std::uint64_t rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows),
                      static_cast<Eigen::Index>(stream.dim()));
  parallel_for_blocks(rows, 1024, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t p = lo; p < hi; ++p)
      for (std::size_t j = 0; j < stream.dim(); ++j)
        out(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j)) =
            stream(first_row + p, j);
  });
  return out;
}

}  // namespace mavg::seq
