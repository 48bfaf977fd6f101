#include "klsel/dyadic.hpp"

#include <algorithm>
#include <cmath>

#include "klsel/error.hpp"

namespace klsel {

Dyadic::Dyadic(std::uint64_t integer) : numerator_(integer), exponent_(0) {}

Dyadic::Dyadic(Integer numerator, std::uint32_t exponent)
    : numerator_(std::move(numerator)), exponent_(exponent) {
  if (numerator_ < 0) throw Error("Dyadic: negative numerator");
  normalize();
}

Dyadic Dyadic::pow2_neg(std::uint32_t k) { return Dyadic(Integer(1), k); }

void Dyadic::normalize() {
  if (numerator_ == 0) {
    exponent_ = 0;
    return;
  }
  auto shift = std::min<std::uint32_t>(
      exponent_, static_cast<std::uint32_t>(boost::multiprecision::lsb(numerator_)));
  numerator_ >>= shift;
  exponent_ -= shift;
}

Dyadic& Dyadic::operator+=(const Dyadic& rhs) {
  if (exponent_ >= rhs.exponent_) {
    numerator_ += rhs.numerator_ << (exponent_ - rhs.exponent_);
  } else {
    numerator_ = (numerator_ << (rhs.exponent_ - exponent_)) + rhs.numerator_;
    exponent_ = rhs.exponent_;
  }
  normalize();
  return *this;
}

Dyadic& Dyadic::operator-=(const Dyadic& rhs) {
  if (*this < rhs) throw Error("Dyadic: subtraction would go negative");
  if (exponent_ >= rhs.exponent_) {
    numerator_ -= rhs.numerator_ << (exponent_ - rhs.exponent_);
  } else {
    numerator_ = (numerator_ << (rhs.exponent_ - exponent_)) - rhs.numerator_;
    exponent_ = rhs.exponent_;
  }
  normalize();
  return *this;
}

Dyadic& Dyadic::operator*=(const Dyadic& rhs) {
  numerator_ *= rhs.numerator_;
  exponent_ += rhs.exponent_;
  normalize();
  return *this;
}

Dyadic Dyadic::scaled_down(std::uint32_t k) const {
  Dyadic out = *this;
  if (out.numerator_ != 0) out.exponent_ += k;
  return out;
}

std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
  if (a.exponent_ == b.exponent_) {
    if (a.numerator_ == b.numerator_) return std::strong_ordering::equal;
    return a.numerator_ < b.numerator_ ? std::strong_ordering::less
                                       : std::strong_ordering::greater;
  }
  Dyadic::Integer lhs = a.numerator_;
  Dyadic::Integer rhs = b.numerator_;
  if (a.exponent_ < b.exponent_) {
    lhs <<= (b.exponent_ - a.exponent_);
  } else {
    rhs <<= (a.exponent_ - b.exponent_);
  }
  if (lhs == rhs) return std::strong_ordering::equal;
  return lhs < rhs ? std::strong_ordering::less : std::strong_ordering::greater;
}

double Dyadic::to_double() const {
  return std::ldexp(numerator_.convert_to<double>(), -static_cast<int>(exponent_));
}

std::string Dyadic::str() const {
  if (exponent_ == 0) return numerator_.str();
  Integer denominator = Integer(1) << exponent_;
  return numerator_.str() + "/" + denominator.str();
}

}  // namespace klsel
