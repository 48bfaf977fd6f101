#pragma once

// Exact nonnegative dyadic rationals: numerator / 2^exponent.
//
// Every measure in the library (cylinder measures, union measures, 2^-i
// budgets) is carried as a Dyadic so that bounds are compared exactly.

#include <compare>
#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace klsel {

class Dyadic {
 public:
  using Integer = boost::multiprecision::cpp_int;

  Dyadic() = default;
  Dyadic(std::uint64_t integer);  // NOLINT: implicit on purpose, Dyadic d = 1;
  // numerator / 2^exponent, reduced to canonical form. Throws on negative
  // numerators.
  Dyadic(Integer numerator, std::uint32_t exponent);

  static Dyadic pow2_neg(std::uint32_t k);  // 2^-k

  const Integer& numerator() const { return numerator_; }
  std::uint32_t exponent() const { return exponent_; }
  bool is_zero() const { return numerator_ == 0; }

  Dyadic& operator+=(const Dyadic& rhs);
  // Throws klsel::Error when the result would be negative.
  Dyadic& operator-=(const Dyadic& rhs);
  Dyadic& operator*=(const Dyadic& rhs);

  friend Dyadic operator+(Dyadic lhs, const Dyadic& rhs) { return lhs += rhs; }
  friend Dyadic operator-(Dyadic lhs, const Dyadic& rhs) { return lhs -= rhs; }
  friend Dyadic operator*(Dyadic lhs, const Dyadic& rhs) { return lhs *= rhs; }

  // Multiplies by 2^-k.
  Dyadic scaled_down(std::uint32_t k) const;

  friend bool operator==(const Dyadic& a, const Dyadic& b) {
    return a.exponent_ == b.exponent_ && a.numerator_ == b.numerator_;
  }
  friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b);

  double to_double() const;
  // "0", "1", "3/4", "7/8", ...
  std::string str() const;

 private:
  void normalize();

  Integer numerator_ = 0;
  std::uint32_t exponent_ = 0;
};

}  // namespace klsel
