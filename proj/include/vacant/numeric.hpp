#pragma once

#include <cmath>
#include <cstdint>

namespace vacant {

namespace detail {

// Integer-valued powers such as 1000^(4/3) come out of pow() a few ulps low;
// snap to the nearest integer when within relative 1e-9.
inline bool near_integer(long double v, long double& rounded) noexcept
{
    rounded = std::round(v);
    return std::fabs(v - rounded) <= 1e-9L * std::fmax(1.0L, std::fabs(v));
}

} // namespace detail

/// [x] for x >= 0, robust against pow/log round-off at exact integers.
inline std::int64_t floor_real(long double v) noexcept
{
    long double r = 0;
    if (detail::near_integer(v, r))
        return static_cast<std::int64_t>(r);
    return static_cast<std::int64_t>(std::floor(v));
}

/// [N^e].
inline std::int64_t floor_pow(double base, double exponent) noexcept
{
    return floor_real(std::pow(static_cast<long double>(base), static_cast<long double>(exponent)));
}

/// Number of integers m >= 0 with m < N^e.
inline std::int64_t count_below_pow(double base, double exponent) noexcept
{
    const long double v = std::pow(static_cast<long double>(base), static_cast<long double>(exponent));
    long double r = 0;
    if (detail::near_integer(v, r))
        return static_cast<std::int64_t>(r);
    return static_cast<std::int64_t>(std::floor(v)) + 1;
}

/// [c * ln N], natural logarithm.
inline std::int64_t log_length(double c, double n) noexcept
{
    return floor_real(static_cast<long double>(c) * std::log(static_cast<long double>(n)));
}

} // namespace vacant
