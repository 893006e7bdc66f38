#ifndef RBFFD_CSV_HPP
#define RBFFD_CSV_HPP

#include <iosfwd>
#include <string>

namespace rbffd {

/// Shortest decimal string that round-trips the double (to_chars).
std::string format_double(double v);

/// Shortest round-trip form for both parts of a complex pair.
std::string format_complex_csv(double re, double im);

} // namespace rbffd

#endif
