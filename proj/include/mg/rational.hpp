#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mg {

using Q = boost::rational<std::int64_t>;

inline std::string to_string(const Q& q) {
    if (q.denominator() == 1) return std::to_string(q.numerator());
    return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

inline Q parse_q(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Q(std::stoll(s));
        return Q(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    } catch (const std::exception&) {
        throw std::invalid_argument("bad rational: " + s);
    }
}

inline double to_double(const Q& q) {
    return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator());
}

}  // namespace mg
