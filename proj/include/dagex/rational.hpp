#pragma once

#include <cstdint>
#include <string>

namespace dagex {

// Exact rational on 64-bit numerator/denominator, always normalized
// (den > 0, gcd(|num|, den) == 1). Arithmetic goes through 128-bit
// intermediates and throws on overflow of the normalized result.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(std::int64_t value) : num_(value), den_(1) {}
    Rational(std::int64_t num, std::int64_t den);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    bool is_integer() const { return den_ == 1; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    Rational operator/(const Rational& o) const; // throws DivisionByZero
    Rational operator-() const { return Rational(-num_, den_); }

    bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Rational& o) const { return !(*this == o); }
    bool operator<(const Rational& o) const;

    // "3", "-7/2"
    std::string to_string() const;
    // Decimal rendering: exact when the denominator divides a power of 10,
    // otherwise shortest round-trip double.
    std::string to_decimal_string() const;

    // Accepts "3", "-7/2", "2.5".
    static Rational parse(const std::string& text);

private:
    std::int64_t num_;
    std::int64_t den_;
};

// Shortest round-trip rendering of a double ("0.1" not "0.100000...").
std::string shortest_double(double value);

} // namespace dagex
