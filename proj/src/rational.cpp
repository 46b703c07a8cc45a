#include "dagex/rational.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "dagex/errors.hpp"

namespace dagex {

namespace {

using i128 = __int128;

std::int64_t checked_narrow(i128 v) {
    if (v > INT64_MAX || v < INT64_MIN) {
        throw Error(ErrorCode::ParseError, "rational overflow");
    }
    return static_cast<std::int64_t>(v);
}

// Normalizes in place: den > 0, gcd(|num|, den) == 1.
void normalize_i128(i128& num, i128& den) {
    if (den == 0) {
        throw Error(ErrorCode::DivisionByZero, "zero denominator");
    }
    if (den < 0) {
        num = -num;
        den = -den;
    }
    i128 a = num < 0 ? -num : num;
    i128 b = den;
    while (b != 0) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    if (a != 0) {
        num /= a;
        den /= a;
    }
}

Rational from_i128(i128 num, i128 den) {
    normalize_i128(num, den);
    return Rational(checked_narrow(num), checked_narrow(den));
}

} // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
    i128 n = num, d = den;
    normalize_i128(n, d);
    num_ = checked_narrow(n);
    den_ = checked_narrow(d);
}

Rational Rational::operator+(const Rational& o) const {
    return from_i128(i128(num_) * o.den_ + i128(o.num_) * den_, i128(den_) * o.den_);
}

Rational Rational::operator-(const Rational& o) const {
    return from_i128(i128(num_) * o.den_ - i128(o.num_) * den_, i128(den_) * o.den_);
}

Rational Rational::operator*(const Rational& o) const {
    return from_i128(i128(num_) * o.num_, i128(den_) * o.den_);
}

Rational Rational::operator/(const Rational& o) const {
    if (o.num_ == 0) {
        throw Error(ErrorCode::DivisionByZero, "division by zero");
    }
    return from_i128(i128(num_) * o.den_, i128(den_) * o.num_);
}

bool Rational::operator<(const Rational& o) const {
    return i128(num_) * o.den_ < i128(o.num_) * den_;
}

std::string Rational::to_string() const {
    if (den_ == 1) {
        return std::to_string(num_);
    }
    return std::to_string(num_) + "/" + std::to_string(den_);
}

std::string Rational::to_decimal_string() const {
    if (den_ == 1) {
        return std::to_string(num_);
    }
    // Exact decimal when den = 2^a * 5^b.
    std::int64_t d = den_;
    int twos = 0, fives = 0;
    while (d % 2 == 0) { d /= 2; ++twos; }
    while (d % 5 == 0) { d /= 5; ++fives; }
    if (d == 1) {
        int digits = twos > fives ? twos : fives;
        i128 scale = 1;
        for (int i = 0; i < digits; ++i) scale *= 10;
        i128 scaled = i128(num_) * scale / den_;
        bool neg = scaled < 0;
        if (neg) scaled = -scaled;
        std::string raw;
        if (scaled == 0) raw = "0";
        while (scaled > 0) {
            raw.insert(raw.begin(), char('0' + int(scaled % 10)));
            scaled /= 10;
        }
        while (static_cast<int>(raw.size()) <= digits) raw.insert(raw.begin(), '0');
        raw.insert(raw.size() - digits, ".");
        while (raw.back() == '0') raw.pop_back();
        if (raw.back() == '.') raw.pop_back();
        return (neg ? "-" : "") + raw;
    }
    return shortest_double(to_double());
}

Rational Rational::parse(const std::string& text) {
    auto bad = [&] { throw Error(ErrorCode::ParseError, "bad rational: " + text); };
    if (text.empty()) bad();
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        std::int64_t n = 0, d = 0;
        auto r1 = std::from_chars(text.data(), text.data() + slash, n);
        auto r2 = std::from_chars(text.data() + slash + 1, text.data() + text.size(), d);
        if (r1.ec != std::errc() || r1.ptr != text.data() + slash ||
            r2.ec != std::errc() || r2.ptr != text.data() + text.size()) {
            bad();
        }
        return Rational(n, d);
    }
    auto dot = text.find('.');
    if (dot != std::string::npos) {
        std::string digits = text.substr(0, dot) + text.substr(dot + 1);
        std::int64_t n = 0;
        auto r = std::from_chars(digits.data(), digits.data() + digits.size(), n);
        if (r.ec != std::errc() || r.ptr != digits.data() + digits.size()) bad();
        std::int64_t den = 1;
        for (size_t i = dot + 1; i < text.size(); ++i) den *= 10;
        return Rational(n, den);
    }
    std::int64_t n = 0;
    auto r = std::from_chars(text.data(), text.data() + text.size(), n);
    if (r.ec != std::errc() || r.ptr != text.data() + text.size()) bad();
    return Rational(n);
}

std::string shortest_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

} // namespace dagex
