#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <new>
#include <ostream>
#include <span>
#include <vector>

#include "vacant/errors.hpp"
#include "vacant/lattice.hpp"

namespace vacant {

inline constexpr std::size_t kMaxGreenUnknowns = 100000;
inline constexpr double kDefaultSolverTol = 1e-10;
inline constexpr std::size_t kMaxDenseGreenSites = 10000; // |B|^2 doubles in the full table

/// I - P_D on a domain D: the walk restricted to D, killed when it leaves.
/// Symmetric positive definite whenever D is a proper subset of the torus.
class KilledOperator {
public:
    KilledOperator(const Torus& g, const SiteSet& domain) : domain_(domain), degree_(g.degree())
    {
        if (domain.size() > kMaxGreenUnknowns)
            throw ResourceError("domain exceeds the solver size guard");
        if (domain.size() == g.volume())
            throw ParameterError("walk is not killed");
        try {
            nbr_.assign(domain.size() * static_cast<std::size_t>(degree_), kOutside);
        } catch (const std::bad_alloc&) {
            throw ResourceError("cannot allocate the killed-walk operator");
        }
        for (std::size_t i = 0; i < domain.size(); ++i)
            for (int j = 0; j < degree_; ++j) {
                const auto k = domain.index_of(g.neighbor(domain[i], j));
                if (k < domain.size())
                    nbr_[i * static_cast<std::size_t>(degree_) + static_cast<std::size_t>(j)] = k;
            }
    }

    std::size_t size() const noexcept { return domain_.size(); }
    const SiteSet& domain() const noexcept { return domain_; }

    void apply(std::span<const double> v, std::span<double> out) const noexcept
    {
        const double w = 1.0 / degree_;
        for (std::size_t i = 0; i < size(); ++i) {
            double s = 0;
            for (int j = 0; j < degree_; ++j) {
                const auto k = nbr_[i * static_cast<std::size_t>(degree_) + static_cast<std::size_t>(j)];
                if (k != kOutside)
                    s += v[k];
            }
            out[i] = v[i] - w * s;
        }
    }

    /// Conjugate gradients until the true residual is below `tol` in max norm.
    std::vector<double> solve(std::span<const double> rhs, double tol = kDefaultSolverTol) const
    {
        const std::size_t n = size();
        std::vector<double> x(n, 0.0), r(rhs.begin(), rhs.end()), p(r), ap(n);
        const std::size_t max_iter = 50 * n + 1000;
        double rr = dot(r, r);
        for (std::size_t it = 0; it < max_iter; ++it) {
            if (max_abs(r) <= tol) {
                // guard against drift of the recursive residual
                apply(x, ap);
                for (std::size_t i = 0; i < n; ++i)
                    r[i] = rhs[i] - ap[i];
                if (max_abs(r) <= tol)
                    return x;
                p = r;
                rr = dot(r, r);
            }
            apply(p, ap);
            const double alpha = rr / dot(p, ap);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            const double rr_next = dot(r, r);
            const double beta = rr_next / rr;
            rr = rr_next;
            for (std::size_t i = 0; i < n; ++i)
                p[i] = r[i] + beta * p[i];
        }
        throw ResourceError("linear solve did not reach the residual tolerance");
    }

private:
    static constexpr std::size_t kOutside = static_cast<std::size_t>(-1);

    static double dot(std::span<const double> a, std::span<const double> b) noexcept
    {
        double s = 0;
        for (std::size_t i = 0; i < a.size(); ++i)
            s += a[i] * b[i];
        return s;
    }
    static double max_abs(std::span<const double> a) noexcept
    {
        double m = 0;
        for (double v : a)
            m = std::max(m, std::fabs(v));
        return m;
    }

    SiteSet domain_;
    int degree_;
    std::vector<std::size_t> nbr_;
};

/// g^B(x, y): expected visits to y before leaving B, from x. Dense |B| x |B|.
class KilledGreen {
public:
    KilledGreen(SiteSet domain, std::vector<double> values) : domain_(std::move(domain)), values_(std::move(values)) {}

    const SiteSet& domain() const noexcept { return domain_; }
    std::size_t size() const noexcept { return domain_.size(); }

    double at(std::size_t i, std::size_t j) const noexcept { return values_[i * size() + j]; }

    double operator()(Site x, Site y) const
    {
        const auto i = domain_.index_of(x), j = domain_.index_of(y);
        if (i == size() || j == size())
            throw ParameterError("site outside the Green function domain");
        return at(i, j);
    }

    double row_sum(std::size_t i) const noexcept
    {
        double s = 0;
        for (std::size_t j = 0; j < size(); ++j)
            s += at(i, j);
        return s;
    }

private:
    SiteSet domain_;
    std::vector<double> values_;
};

inline KilledGreen green_killed(const Torus& g, const SiteSet& b, double tol = kDefaultSolverTol)
{
    if (b.empty())
        throw ParameterError("Green function domain is empty");
    if (b.size() > kMaxDenseGreenSites)
        throw ResourceError("dense Green table is limited to 1e4 sites");
    const KilledOperator op(g, b);
    const std::size_t n = b.size();
    std::vector<double> values;
    try {
        values.assign(n * n, 0.0);
    } catch (const std::bad_alloc&) {
        throw ResourceError("cannot allocate the dense Green matrix");
    }
    std::vector<double> e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        const auto col = op.solve(e, tol);
        e[j] = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            values[i * n + j] = col[i];
    }
    return KilledGreen(b, std::move(values));
}

/// E_x[T_B] as the row sum of g^B.
inline double expected_exit_time(const KilledGreen& kg, Site x)
{
    const auto i = kg.domain().index_of(x);
    if (i == kg.size())
        throw ParameterError("start site is outside B");
    return kg.row_sum(i);
}

/// E_x[T_B] from one solve of (I - P_B) w = 1, without the dense table.
inline double expected_exit_time(const Torus& g, const SiteSet& b, Site x, double tol = kDefaultSolverTol)
{
    if (!b.contains(x))
        throw ParameterError("start site is outside B");
    const KilledOperator op(g, b);
    return op.solve(std::vector<double>(b.size(), 1.0), tol)[b.index_of(x)];
}

namespace detail {

inline void check_hitting_instance(const Torus& g, const SiteSet& a, const SiteSet& b, Site x)
{
    if (a.empty())
        throw ParameterError("target set A is empty");
    if (!a.is_subset_of(b))
        throw ParameterError("A must be a subset of B");
    if (b.size() == g.volume())
        throw ParameterError("walk is not killed");
    if (!b.contains(x))
        throw ParameterError("start site is outside B");
}

} // namespace detail

/// P_x[H_A <= T_B], from the harmonic extension of 1_A on B \ A.
inline double hit_prob_exact(const Torus& g, const SiteSet& a, const SiteSet& b, Site x,
                             double tol = kDefaultSolverTol)
{
    detail::check_hitting_instance(g, a, b, x);
    if (a.contains(x))
        return 1.0;
    std::vector<Site> rest;
    std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(rest));
    const SiteSet free(std::move(rest));
    const KilledOperator op(g, free);
    std::vector<double> rhs(free.size(), 0.0);
    for (std::size_t i = 0; i < free.size(); ++i) {
        int hits = 0;
        for (int j = 0; j < g.degree(); ++j)
            hits += a.contains(g.neighbor(free[i], j)) ? 1 : 0;
        rhs[i] = static_cast<double>(hits) / g.degree();
    }
    const auto h = op.solve(rhs, tol);
    return std::clamp(h[free.index_of(x)], 0.0, 1.0);
}

struct SandwichBounds {
    double lower = 0;
    double exact = 0;
    double upper = 0;
    double gap() const noexcept { return upper - lower; }
};

/// Two-sided bound on P_x[H_A <= T_B] by the A-mass of g^B(x, .) over the
/// largest and smallest A-row sums. All sums come from one solve of
/// (I - P_B) w = 1_A, using the symmetry of g^B.
inline SandwichBounds sandwich(const Torus& g, const SiteSet& a, const SiteSet& b, Site x,
                               double tol = kDefaultSolverTol)
{
    detail::check_hitting_instance(g, a, b, x);
    const KilledOperator op(g, b);
    std::vector<double> ind(b.size(), 0.0);
    for (Site y : a)
        ind[b.index_of(y)] = 1.0;
    const auto w = op.solve(ind, tol);
    double sup = 0, inf = std::numeric_limits<double>::infinity();
    for (Site y : a) {
        const double s = w[b.index_of(y)];
        sup = std::max(sup, s);
        inf = std::min(inf, s);
    }
    const double num = w[b.index_of(x)];
    SandwichBounds out;
    out.lower = num / sup;
    out.upper = num / inf;
    out.exact = hit_prob_exact(g, a, b, x, tol);
    return out;
}

/// Columns: x_index, y_index, g_value.
inline void write_green_csv(std::ostream& os, const KilledGreen& kg)
{
    os << "x_index,y_index,g_value\n";
    os.precision(17);
    for (std::size_t i = 0; i < kg.size(); ++i)
        for (std::size_t j = 0; j < kg.size(); ++j)
            os << kg.domain()[i] << ',' << kg.domain()[j] << ',' << kg.at(i, j) << '\n';
}

/// Columns: lower, exact, upper, gap.
inline void write_bounds_csv(std::ostream& os, std::span<const SandwichBounds> rows)
{
    os << "lower,exact,upper,gap\n";
    os.precision(17);
    for (const auto& r : rows)
        os << r.lower << ',' << r.exact << ',' << r.upper << ',' << r.gap() << '\n';
}

} // namespace vacant
