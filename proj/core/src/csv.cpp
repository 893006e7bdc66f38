#include "rbffd/csv.hpp"

#include <charconv>
#include <system_error>

namespace rbffd {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string format_complex_csv(double re, double im) {
    return format_double(re) + "," + format_double(im);
}

} // namespace rbffd
