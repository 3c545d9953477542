#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace smw {

/// Arbitrary-precision signed integer for dominant-power energies.
using ExactInteger = boost::multiprecision::cpp_int;

/// Sum of 2^r over the given bit positions, built limb-wise so that large
/// active sets do not pay for repeated big-integer additions. Positions must be
/// distinct.
template <class Range>
ExactInteger sum_of_powers_of_two(const Range& positions) {
    std::vector<std::uint64_t> limbs;
    for (std::uint64_t r : positions) {
        const std::size_t limb = r / 64;
        if (limb >= limbs.size()) limbs.resize(limb + 1, 0);
        limbs[limb] |= std::uint64_t{1} << (r % 64);
    }
    ExactInteger out = 0;
    if (!limbs.empty())
        boost::multiprecision::import_bits(out, limbs.begin(), limbs.end(), 64, false);
    return out;
}

inline ExactInteger power_of_two(std::uint64_t r) {
    ExactInteger out = 1;
    out <<= static_cast<unsigned>(r);
    return out;
}

inline std::string to_decimal(const ExactInteger& x) { return x.str(); }

} // namespace smw
