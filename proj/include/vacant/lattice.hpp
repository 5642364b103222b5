#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "vacant/errors.hpp"

namespace vacant {

/// Linear index of a torus site. Row-major with axis 0 varying fastest:
/// index = c_0 + c_1 N + c_2 N^2 + ...
using Site = std::uint64_t;
using Coord = std::vector<std::int64_t>;

/// Largest supported site count; keeps two 64-bit visit maps addressable.
inline constexpr std::uint64_t kMaxVolume = std::uint64_t{1} << 36;

/// Bit-packed membership over all sites of a torus.
class BitSet {
public:
    BitSet() = default;
    explicit BitSet(std::uint64_t size, bool value = false)
        : size_(size), words_((size + 63) / 64, value ? ~std::uint64_t{0} : 0)
    {
        trim();
    }

    std::uint64_t size() const noexcept { return size_; }

    bool test(std::uint64_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1U; }
    void set(std::uint64_t i) noexcept { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void reset(std::uint64_t i) noexcept { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
    void assign(std::uint64_t i, bool v) noexcept { v ? set(i) : reset(i); }

    std::uint64_t count() const noexcept
    {
        std::uint64_t c = 0;
        for (auto w : words_)
            c += static_cast<std::uint64_t>(std::popcount(w));
        return c;
    }

    /// Calls f(i) for every set bit in increasing order.
    template <class F>
    void for_each(F&& f) const
    {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits) {
                const int b = std::countr_zero(bits);
                f(static_cast<std::uint64_t>(w) * 64 + static_cast<std::uint64_t>(b));
                bits &= bits - 1;
            }
        }
    }

    BitSet& flip() noexcept
    {
        for (auto& w : words_)
            w = ~w;
        trim();
        return *this;
    }

    friend bool operator==(const BitSet&, const BitSet&) = default;

private:
    void trim() noexcept
    {
        if (size_ % 64 != 0 && !words_.empty())
            words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
    }

    std::uint64_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Small set of sites, stored as a sorted list of distinct indices.
class SiteSet {
public:
    SiteSet() = default;
    SiteSet(std::initializer_list<Site> sites) : sites_(sites) { normalize(); }
    explicit SiteSet(std::vector<Site> sites) : sites_(std::move(sites)) { normalize(); }

    std::size_t size() const noexcept { return sites_.size(); }
    bool empty() const noexcept { return sites_.empty(); }
    bool contains(Site s) const noexcept { return std::binary_search(sites_.begin(), sites_.end(), s); }

    /// Position of `s` in sorted order, or size() when absent.
    std::size_t index_of(Site s) const noexcept
    {
        auto it = std::lower_bound(sites_.begin(), sites_.end(), s);
        return (it != sites_.end() && *it == s) ? static_cast<std::size_t>(it - sites_.begin()) : sites_.size();
    }

    auto begin() const noexcept { return sites_.begin(); }
    auto end() const noexcept { return sites_.end(); }
    Site operator[](std::size_t i) const noexcept { return sites_[i]; }
    std::span<const Site> view() const noexcept { return sites_; }

    bool is_subset_of(const SiteSet& other) const
    {
        return std::includes(other.sites_.begin(), other.sites_.end(), sites_.begin(), sites_.end());
    }

    friend bool operator==(const SiteSet&, const SiteSet&) = default;

private:
    void normalize()
    {
        std::sort(sites_.begin(), sites_.end());
        sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
    }

    std::vector<Site> sites_;
};

/// The discrete torus (Z/NZ)^d.
class Torus {
public:
    Torus(int d, std::int64_t n) : d_(d), n_(n)
    {
        if (d < 1)
            throw ParameterError("torus dimension must be >= 1");
        if (n < 3)
            throw ParameterError("torus side length must be >= 3");
        std::uint64_t v = 1;
        strides_.reserve(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) {
            strides_.push_back(v);
            if (v > kMaxVolume / static_cast<std::uint64_t>(n))
                throw ParameterError("torus volume N^d exceeds the addressable limit");
            v *= static_cast<std::uint64_t>(n);
        }
        volume_ = v;
    }

    int dim() const noexcept { return d_; }
    std::int64_t side() const noexcept { return n_; }
    std::uint64_t volume() const noexcept { return volume_; }
    std::uint64_t stride(int axis) const noexcept { return strides_[static_cast<std::size_t>(axis)]; }
    int degree() const noexcept { return 2 * d_; }

    bool valid(Site x) const noexcept { return x < volume_; }

    std::int64_t coordinate(Site x, int axis) const noexcept
    {
        return static_cast<std::int64_t>((x / strides_[static_cast<std::size_t>(axis)]) % static_cast<std::uint64_t>(n_));
    }

    Coord decode(Site x) const
    {
        Coord c(static_cast<std::size_t>(d_));
        for (int i = 0; i < d_; ++i) {
            c[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(x % static_cast<std::uint64_t>(n_));
            x /= static_cast<std::uint64_t>(n_);
        }
        return c;
    }

    /// Coordinates are reduced mod N, so negative offsets are accepted.
    Site encode(std::span<const std::int64_t> c) const
    {
        if (c.size() != static_cast<std::size_t>(d_))
            throw ParameterError("coordinate tuple has wrong dimension");
        Site x = 0;
        for (int i = d_ - 1; i >= 0; --i)
            x = x * static_cast<std::uint64_t>(n_) + static_cast<std::uint64_t>(wrap(c[static_cast<std::size_t>(i)]));
        return x;
    }
    Site encode(std::initializer_list<std::int64_t> c) const { return encode(std::span<const std::int64_t>(c.begin(), c.size())); }

    std::int64_t wrap(std::int64_t c) const noexcept
    {
        c %= n_;
        return c < 0 ? c + n_ : c;
    }

    /// x + sign * e_axis mod N.
    Site step(Site x, int axis, bool positive) const noexcept
    {
        const auto s = strides_[static_cast<std::size_t>(axis)];
        const auto c = static_cast<std::int64_t>((x / s) % static_cast<std::uint64_t>(n_));
        if (positive)
            return c == n_ - 1 ? x - static_cast<std::uint64_t>(n_ - 1) * s : x + s;
        return c == 0 ? x + static_cast<std::uint64_t>(n_ - 1) * s : x - s;
    }

    /// x + k * e_axis mod N for any integer k.
    Site shift(Site x, int axis, std::int64_t k) const noexcept
    {
        const auto s = strides_[static_cast<std::size_t>(axis)];
        const auto c = static_cast<std::int64_t>((x / s) % static_cast<std::uint64_t>(n_));
        const auto nc = wrap(c + k);
        return x - static_cast<std::uint64_t>(c) * s + static_cast<std::uint64_t>(nc) * s;
    }

    /// The j-th neighbor in the fixed order -e_1, +e_1, -e_2, +e_2, ...
    Site neighbor(Site x, int j) const noexcept { return step(x, j / 2, (j & 1) != 0); }

    /// Per-axis torus distance min(|a-b|, N-|a-b|).
    std::int64_t axis_distance(std::int64_t a, std::int64_t b) const noexcept
    {
        const auto diff = a > b ? a - b : b - a;
        return std::min(diff, n_ - diff);
    }

    std::int64_t linf_distance(Site x, Site y) const noexcept
    {
        std::int64_t m = 0;
        for (int i = 0; i < d_; ++i) {
            m = std::max(m, axis_distance(static_cast<std::int64_t>(x % static_cast<std::uint64_t>(n_)),
                                          static_cast<std::int64_t>(y % static_cast<std::uint64_t>(n_))));
            x /= static_cast<std::uint64_t>(n_);
            y /= static_cast<std::uint64_t>(n_);
        }
        return m;
    }

    friend bool operator==(const Torus& a, const Torus& b) noexcept { return a.d_ == b.d_ && a.n_ == b.n_; }

private:
    int d_;
    std::int64_t n_;
    std::uint64_t volume_ = 0;
    std::vector<std::uint64_t> strides_;
};

/// The 2d neighbors of x in the order -e_1, +e_1, -e_2, +e_2, ...
inline std::vector<Site> neighbors(const Torus& g, Site x)
{
    std::vector<Site> out;
    out.reserve(static_cast<std::size_t>(g.degree()));
    for (int j = 0; j < g.degree(); ++j)
        out.push_back(g.neighbor(x, j));
    return out;
}

/// {x + k e_axis : k = 0..l}; has min(l + 1, N) elements.
inline SiteSet segment_sites(const Torus& g, Site x, int axis, std::int64_t l)
{
    if (axis < 0 || axis >= g.dim())
        throw ParameterError("segment axis out of range");
    if (l < 0)
        throw ParameterError("segment length must be >= 0");
    std::vector<Site> s;
    const auto count = std::min<std::int64_t>(l + 1, g.side());
    s.reserve(static_cast<std::size_t>(count));
    Site y = x;
    for (std::int64_t k = 0; k < count; ++k) {
        s.push_back(y);
        y = g.step(y, axis, true);
    }
    return SiteSet(std::move(s));
}

/// Sites outside A with at least one neighbor in A. Empty A gives an empty set.
inline SiteSet boundary(const Torus& g, const SiteSet& a)
{
    std::vector<Site> out;
    for (Site x : a)
        for (int j = 0; j < g.degree(); ++j) {
            const Site y = g.neighbor(x, j);
            if (!a.contains(y))
                out.push_back(y);
        }
    return SiteSet(std::move(out));
}

/// Closed l-infinity ball of radius r; the whole torus once 2r + 1 >= N.
inline SiteSet linf_ball(const Torus& g, Site x, std::int64_t r)
{
    if (r < 0)
        throw ParameterError("ball radius must be >= 0");
    const auto span = std::min<std::int64_t>(2 * r + 1, g.side());
    const auto lo = (2 * r + 1 >= g.side()) ? std::int64_t{0} : -r;
    std::vector<Site> out;
    Coord offset(static_cast<std::size_t>(g.dim()), 0);
    const Coord center = g.decode(x);
    // odometer over the per-axis offsets
    for (;;) {
        Coord c(center);
        for (int i = 0; i < g.dim(); ++i) {
            const auto k = static_cast<std::size_t>(i);
            c[k] = (2 * r + 1 >= g.side()) ? offset[k] : center[k] + lo + offset[k];
        }
        out.push_back(g.encode(c));
        int i = 0;
        for (; i < g.dim(); ++i) {
            auto& o = offset[static_cast<std::size_t>(i)];
            if (++o < span)
                break;
            o = 0;
        }
        if (i == g.dim())
            break;
    }
    return SiteSet(std::move(out));
}

inline bool in_linf_ball(const Torus& g, Site center, std::int64_t r, Site y) noexcept
{
    return g.linf_distance(center, y) <= r;
}

/// min over pairs of the torus l-infinity distance.
inline std::int64_t set_distance(const Torus& g, const SiteSet& a, const SiteSet& b)
{
    if (a.empty() || b.empty())
        throw ParameterError("undefined distance");
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (Site x : a)
        for (Site y : b) {
            best = std::min(best, g.linf_distance(x, y));
            if (best == 0)
                return 0;
        }
    return best;
}

inline std::string format_coords(const Torus& g, Site x)
{
    std::string s = "(";
    const auto c = g.decode(x);
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (i)
            s += ' ';
        s += std::to_string(c[i]);
    }
    s += ')';
    return s;
}

} // namespace vacant
