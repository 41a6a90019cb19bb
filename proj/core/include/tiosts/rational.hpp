#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <string>
#include <string_view>

// Under C++20 rewritten comparisons, boost's mixed rational/integer
// operator templates recurse forever. Exact overloads take precedence.
namespace boost {
inline bool operator==(const rational<std::int64_t>& a, int b) { return a == rational<std::int64_t>(b); }
inline bool operator!=(const rational<std::int64_t>& a, int b) { return !(a == rational<std::int64_t>(b)); }
inline bool operator<(const rational<std::int64_t>& a, int b) { return a < rational<std::int64_t>(b); }
inline bool operator>(const rational<std::int64_t>& a, int b) { return a > rational<std::int64_t>(b); }
inline bool operator<=(const rational<std::int64_t>& a, int b) { return !(a > rational<std::int64_t>(b)); }
inline bool operator>=(const rational<std::int64_t>& a, int b) { return !(a < rational<std::int64_t>(b)); }
}  // namespace boost

namespace tiosts {

using Rational = boost::rational<std::int64_t>;

// Accepts "5", "-3", "1.25" and "1/2".
[[nodiscard]] Rational parse_rational(std::string_view text);

// "5", "-3" or "1/2".
[[nodiscard]] std::string format_rational(const Rational& r);

// Finite decimal expansion ("1.25"); throws if the denominator has
// prime factors other than 2 and 5.
[[nodiscard]] std::string format_decimal(const Rational& r);

[[nodiscard]] inline bool is_integral(const Rational& r) { return r.denominator() == 1; }

}  // namespace tiosts
