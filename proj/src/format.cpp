#include "waveduo/format.hpp"

#include "waveduo/model.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace waveduo {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

double parse_number(std::string_view text, std::string_view what) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && text.front() == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != last)
        throw ValidationError("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
    return v;
}

long parse_integer(std::string_view text, std::string_view what) {
    long v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw ValidationError("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
    return v;
}

}  // namespace waveduo
