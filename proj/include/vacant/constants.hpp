#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <numbers>
#include <queue>
#include <random>
#include <vector>

#include "vacant/errors.hpp"
#include "vacant/numeric.hpp"
#include "vacant/rng.hpp"

namespace vacant {

/// e^{-z} I_0(z) for z >= 0.
inline double bessel_i0_scaled(double z)
{
    if (z < 0)
        z = -z;
    if (z <= 25.0) {
        const double q = z * z / 4.0;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 500; ++k) {
            term *= q / (static_cast<double>(k) * k);
            sum += term;
            if (term < 1e-17 * sum)
                break;
        }
        return sum * std::exp(-z);
    }
    // I_0(z) ~ e^z / sqrt(2 pi z) * sum_k ((2k-1)!!)^2 / (k! (8z)^k)
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double next = term * (2.0 * k - 1) * (2.0 * k - 1) / (8.0 * k * z);
        if (next > term)
            break;
        term = next;
        sum += term;
        if (term < 1e-17 * sum)
            break;
    }
    return sum / std::sqrt(2.0 * std::numbers::pi * z);
}

namespace detail {

struct KronrodPiece {
    double a, b, value, error;
    bool operator<(const KronrodPiece& o) const noexcept { return error < o.error; }
};

template <class F>
KronrodPiece gauss_kronrod15(F& f, double a, double b)
{
    static constexpr std::array<double, 8> xgk{
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.0};
    static constexpr std::array<double, 8> wgk{
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr std::array<double, 4> wg{
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = wgk[7] * fc, gauss = wg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = h * xgk[static_cast<std::size_t>(j)];
        const double s = f(c - dx) + f(c + dx);
        kron += wgk[static_cast<std::size_t>(j)] * s;
        if (j % 2 == 1)
            gauss += wg[static_cast<std::size_t>(j / 2)] * s;
    }
    return {a, b, kron * h, std::fabs((kron - gauss) * h)};
}

} // namespace detail

/// Globally adaptive G7-K15 quadrature on [a, b], starting from `pieces` equal panels.
template <class F>
double integrate_adaptive(F f, double a, double b, double rel_tol = 1e-12, int pieces = 100,
                          int max_panels = 20000)
{
    std::priority_queue<detail::KronrodPiece> queue;
    double total = 0, err = 0;
    for (int i = 0; i < pieces; ++i) {
        const double lo = a + (b - a) * i / pieces, hi = a + (b - a) * (i + 1) / pieces;
        auto p = detail::gauss_kronrod15(f, lo, hi);
        total += p.value;
        err += p.error;
        queue.push(p);
    }
    while (err > rel_tol * std::fabs(total) && static_cast<int>(queue.size()) < max_panels) {
        const auto worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const auto left = detail::gauss_kronrod15(f, worst.a, mid);
        const auto right = detail::gauss_kronrod15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
    }
    return total;
}

/// G_d = int_0^inf e^{-t} I_0(t/d)^d dt, the expected number of visits to the
/// origin of simple random walk on Z^d (finite for d >= 3).
inline double green_at_origin(int d)
{
    if (d < 3)
        throw ParameterError("the walk is recurrent for d <= 2");
    const double dd = d;
    auto integrand = [dd](double s) {
        const double t = std::exp(s);
        return std::pow(bessel_i0_scaled(t / dd), dd) * t;
    };
    constexpr double s_lo = -40.0, s_hi = 60.0;
    const double head = std::exp(s_lo); // integrand ~ 1 near t = 0
    const double t_hi = std::exp(s_hi);
    const double tail = std::pow(dd / (2 * std::numbers::pi), dd / 2) * std::pow(t_hi, 1 - dd / 2) / (dd / 2 - 1);
    return head + integrate_adaptive(integrand, s_lo, s_hi) + tail;
}

/// Probability that simple random walk on Z^d ever returns to its start.
inline double return_prob_q(int d)
{
    if (d <= 0)
        throw ParameterError("dimension must be >= 1");
    if (d <= 2)
        return 1.0;
    return 1.0 - 1.0 / green_at_origin(d);
}

/// 49 (2/d + (1 - 2/d) q(d - 2)); the threshold condition asks for a value < 1.
inline double d0_predicate_value(int d)
{
    if (d < 3)
        throw ParameterError("threshold predicate needs d >= 3");
    const double dd = d;
    return 49.0 * (2.0 / dd + (1.0 - 2.0 / dd) * return_prob_q(d - 2));
}

struct ThresholdTrace {
    int d0 = 0;
    std::vector<std::pair<int, double>> trace; // (d, predicate value) from d = 5
};

/// Smallest d >= 5 whose predicate holds for every dimension in d..d+band.
/// The trace covers 5..d0+band.
inline ThresholdTrace compute_d0(int band = 50, int d_max = 1000)
{
    ThresholdTrace out;
    int run = 0; // consecutive dimensions ending at d where the predicate holds
    for (int d = 5; d <= d_max; ++d) {
        const double v = d0_predicate_value(d);
        out.trace.emplace_back(d, v);
        run = v < 1.0 ? run + 1 : 0;
        if (run == band + 1) {
            out.d0 = d - band;
            return out;
        }
    }
    throw ResourceError("threshold dimension not found below the search limit");
}

// ---------------------------------------------------------------------------
// Monte Carlo return frequency

struct ReturnFrequency {
    std::uint64_t walks = 0;
    std::uint64_t returns = 0;
    std::uint64_t cap = 0;
    double estimate = 0;
    double std_error = 0;
    double tail_bound = 0; // expected visits to the origin after the cap, asymptotically
};

/// (d / 2 pi)^{d/2} T^{1 - d/2} / (d/2 - 1): asymptotic count of visits to the
/// origin after time T, which bounds the returns a cap at T can miss.
inline double return_tail_bound(int d, double cap)
{
    const double dd = d;
    return std::pow(dd / (2 * std::numbers::pi), dd / 2) * std::pow(cap, 1 - dd / 2) / (dd / 2 - 1);
}

namespace detail {

/// Bin(n, 1/2) from n random bits.
template <class Rng>
std::int64_t binomial_half(Rng& rng, std::int64_t n)
{
    if (n > 4096)
        return std::binomial_distribution<std::int64_t>(n, 0.5)(rng);
    std::int64_t k = 0;
    for (; n >= 64; n -= 64)
        k += std::popcount(rng());
    if (n > 0)
        k += std::popcount(rng() & ((std::uint64_t{1} << n) - 1));
    return k;
}

/// Bin(n, 1/3), bit-sliced: two bits per trial give success 1/4, retry 1/4, failure 1/2.
template <class Rng>
std::int64_t binomial_third(Rng& rng, std::int64_t n)
{
    if (n > 4096)
        return std::binomial_distribution<std::int64_t>(n, 1.0 / 3.0)(rng);
    std::int64_t k = 0;
    while (n > 0) {
        std::int64_t retry = 0;
        for (std::int64_t left = n; left > 0; left -= 64) {
            const std::uint64_t mask = left >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << left) - 1;
            const std::uint64_t w1 = rng(), w2 = rng();
            k += std::popcount(~w1 & ~w2 & mask);
            retry += std::popcount(~w1 & w2 & mask);
        }
        n = retry;
    }
    return k;
}

template <class Rng>
std::int64_t binomial_split(Rng& rng, std::int64_t n, int ways)
{
    if (ways == 2)
        return binomial_half(rng, n);
    if (ways == 3)
        return binomial_third(rng, n);
    return std::binomial_distribution<std::int64_t>(n, 1.0 / ways)(rng);
}

/// One walk on Z^d from the origin; returns its weight if it is back at the
/// origin by step `cap`, else 0.
///
/// At l1 distance D the origin is out of reach for D - 1 steps, so that many
/// steps are drawn at once from their exact multinomial-binomial law. With
/// roulette > 0, each time the distance first reaches roulette * 2^k the walk
/// is dropped with probability 1/2 and otherwise doubles its weight, which
/// keeps the estimator unbiased.
template <class Rng>
double returns_within(int d, std::uint64_t cap, std::int64_t roulette, Rng& rng, std::vector<std::int64_t>& pos)
{
    pos.assign(static_cast<std::size_t>(d), 0);
    std::int64_t dist = 0;
    std::uint64_t t = 0;
    double weight = 1.0;
    std::int64_t next = roulette > 0 ? roulette : std::numeric_limits<std::int64_t>::max();
    while (t < cap) {
        while (dist >= next) {
            next *= 2;
            if (rng() >> 63)
                return 0.0;
            weight *= 2;
        }
        if (dist <= 8) {
            const auto axis = static_cast<std::size_t>(uniform_below(rng, static_cast<std::uint64_t>(2 * d)));
            auto& c = pos[axis / 2];
            const std::int64_t before = std::abs(c);
            c += (axis & 1U) ? 1 : -1;
            dist += std::abs(c) - before;
            ++t;
            if (dist == 0)
                return weight;
            continue;
        }
        auto m = static_cast<std::int64_t>(std::min<std::uint64_t>(static_cast<std::uint64_t>(dist - 1), cap - t));
        t += static_cast<std::uint64_t>(m);
        dist = 0;
        for (int i = 0; i < d; ++i) {
            const std::int64_t n_i = i + 1 < d ? binomial_split(rng, m, d - i) : m;
            m -= n_i;
            auto& c = pos[static_cast<std::size_t>(i)];
            c += 2 * binomial_half(rng, n_i) - n_i;
            dist += std::abs(c);
        }
    }
    return 0.0;
}

} // namespace detail

/// Frequency of return to the origin within `cap` steps over `walks`
/// independent walks on Z^d. roulette = 0 gives the plain frequency.
inline ReturnFrequency return_frequency_mc(int d, std::uint64_t walks, std::uint64_t cap, std::uint64_t seed,
                                           std::int64_t roulette = 0)
{
    if (d < 1)
        throw ParameterError("dimension must be >= 1");
    if (walks == 0)
        throw ParameterError("need at least one walk");
    if (roulette < 0)
        throw ParameterError("roulette distance must be >= 0");
    Xoshiro256ss rng(seed);
    std::vector<std::int64_t> pos;
    ReturnFrequency out;
    out.walks = walks;
    out.cap = cap;
    double sum = 0, sum_sq = 0;
    for (std::uint64_t w = 0; w < walks; ++w) {
        const double v = detail::returns_within(d, cap, roulette, rng, pos);
        out.returns += v > 0 ? 1 : 0;
        sum += v;
        sum_sq += v * v;
    }
    const double n = static_cast<double>(walks);
    out.estimate = sum / n;
    out.std_error = std::sqrt(std::max(0.0, sum_sq / n - out.estimate * out.estimate) / n);
    out.tail_bound = d >= 3 ? return_tail_bound(d, static_cast<double>(cap)) : 1.0;
    return out;
}

// ---------------------------------------------------------------------------
// Scales

struct ScaleSet {
    std::int64_t N = 0;
    int d = 0;
    double u = 0, nu = 0, c2 = 0;

    double beta0 = 0, alpha0 = 0, beta1 = 0, alpha1 = 0;
    std::int64_t b0 = 0, a0 = 0, b1 = 0, a1 = 0;

    std::int64_t l = 0;         // [(300 d ln 2d)^{-1} ln N]
    std::int64_t L = 0;         // [(ln N)^2]
    std::int64_t r_default = 0; // [(L^d N^nu)^{1/(d+1)}]
    std::int64_t r_upper = 0;   // [N^{nu/d}]
    bool r_shape_holds = false; // 10 L <= r_default <= r_upper
    std::int64_t l_star = 0;    // [c2 u L^{d-2}]
    std::optional<std::uint64_t> horizon; // [u N^d], empty when it overflows the time type
    bool nu_admissible = false; // nu < (alpha1 - beta1) / 2
};

inline constexpr double kAlpha0 = 4.0 / 3.0;
inline constexpr double kBeta1 = 4.0 / 3.0 + 0.01;
inline constexpr double kAlpha1 = 2.0 - 0.1;

inline std::int64_t l_star(double u, double c2, std::int64_t L, int d)
{
    return floor_real(static_cast<long double>(c2) * u * std::pow(static_cast<long double>(L), d - 2));
}

/// [u N^d]; throws if it does not fit the time type.
inline std::uint64_t time_horizon(double u, std::int64_t n, int d)
{
    const long double h = static_cast<long double>(u) * std::pow(static_cast<long double>(n), d);
    if (!(h >= 0) || h >= 1.8e19L)
        throw ParameterError("horizon u N^d does not fit in 64 bits");
    return static_cast<std::uint64_t>(floor_real(h));
}

inline ScaleSet derive_scales(std::int64_t n, int d, double u, double nu, double c2 = 1.0)
{
    if (n < 3)
        throw ParameterError("N must be >= 3");
    if (d < 3)
        throw ParameterError("scales need d >= 3");
    if (!(u > 0))
        throw ParameterError("u must be positive");
    if (!(nu > 0 && nu < 1))
        throw ParameterError("nu must lie in (0, 1)");
    if (!(c2 > 0))
        throw ParameterError("c2 must be positive");
    ScaleSet s;
    s.N = n;
    s.d = d;
    s.u = u;
    s.nu = nu;
    s.c2 = c2;
    const double nd = static_cast<double>(n);
    s.beta0 = 1.0 / (3.0 * (d - 2));
    s.alpha0 = kAlpha0;
    s.beta1 = kBeta1;
    s.alpha1 = kAlpha1;
    s.b0 = floor_pow(nd, s.beta0);
    s.a0 = floor_pow(nd, s.alpha0);
    s.b1 = floor_pow(nd, s.beta1);
    s.a1 = floor_pow(nd, s.alpha1);
    const long double ln_n = std::log(static_cast<long double>(n));
    s.l = floor_real(ln_n / (300.0L * d * std::log(2.0L * d)));
    s.L = floor_real(ln_n * ln_n);
    if (s.L >= 1)
        s.r_default = floor_real(std::exp((d * std::log(static_cast<long double>(s.L)) + nu * ln_n) / (d + 1)));
    s.r_upper = floor_pow(nd, nu / d);
    s.r_shape_holds = 10 * s.L <= s.r_default && s.r_default <= s.r_upper;
    s.l_star = l_star(u, c2, s.L, d);
    try {
        s.horizon = time_horizon(u, n, d);
    } catch (const ParameterError&) {
    }
    s.nu_admissible = nu < (s.alpha1 - s.beta1) / 2;
    return s;
}

} // namespace vacant
