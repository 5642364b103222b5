#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vacant/errors.hpp"
#include "vacant/lattice.hpp"
#include "vacant/numeric.hpp"
#include "vacant/union_find.hpp"
#include "vacant/walk.hpp"

namespace vacant {

/// The vacant set E \ X_[0,t] of one recorded trajectory.
class VacancyView {
public:
    VacancyView(const VisitRecord& rec, Time t) : rec_(&rec), t_(t) {}

    const Torus& geometry() const noexcept { return rec_->geometry; }
    Time time() const noexcept { return t_; }
    bool vacant(Site s) const noexcept { return rec_->first_visit[s] > t_; }

    BitSet mask() const
    {
        BitSet b(rec_->first_visit.size());
        for (std::size_t s = 0; s < rec_->first_visit.size(); ++s)
            if (rec_->first_visit[s] > t_)
                b.set(s);
        return b;
    }

private:
    const VisitRecord* rec_;
    Time t_;
};

// ---------------------------------------------------------------------------
// Line helpers. A line along `axis` is base + k * stride(axis), k = 0..N-1,
// where base has coordinate 0 on that axis.

template <class F>
void for_each_line(const Torus& g, int axis, F&& f)
{
    const std::uint64_t stride = g.stride(axis);
    const std::uint64_t block = stride * static_cast<std::uint64_t>(g.side());
    for (std::uint64_t hi = 0; hi < g.volume(); hi += block)
        for (std::uint64_t lo = 0; lo < stride; ++lo)
            f(hi + lo);
}

namespace detail {

/// run[k]: consecutive vacant sites from position k in the + direction, capped at N.
inline void cyclic_runs(const BitSet& vacant, Site base, std::uint64_t stride, std::int64_t n,
                        std::vector<std::int64_t>& run)
{
    run.assign(static_cast<std::size_t>(n), 0);
    std::int64_t blocked = -1;
    for (std::int64_t k = 0; k < n; ++k)
        if (!vacant.test(base + static_cast<std::uint64_t>(k) * stride)) {
            blocked = k;
            break;
        }
    if (blocked < 0) {
        std::fill(run.begin(), run.end(), n);
        return;
    }
    std::int64_t next = 0; // run length at position k + 1
    for (std::int64_t i = 1; i <= n; ++i) {
        const std::int64_t k = (blocked - i + n) % n;
        const bool v = vacant.test(base + static_cast<std::uint64_t>(k) * stride);
        run[static_cast<std::size_t>(k)] = v ? next + 1 : 0;
        next = run[static_cast<std::size_t>(k)];
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Cluster labeling

struct ComponentLabeling {
    static constexpr std::int64_t kNone = -1;

    std::vector<std::int64_t> label;    // component id per site, kNone if visited
    std::vector<std::uint64_t> sizes;   // per component
    std::vector<Site> representatives;  // smallest site index per component

    std::size_t count() const noexcept { return sizes.size(); }
    std::uint64_t vacant_sites() const noexcept
    {
        std::uint64_t s = 0;
        for (auto z : sizes)
            s += z;
        return s;
    }
};

/// Union-find labeling of the vacant set under nearest-neighbor adjacency.
/// Ids are assigned in increasing order of each component's smallest site.
inline ComponentLabeling components(const Torus& g, const BitSet& vacant)
{
    DisjointSet<std::uint64_t> uf(g.volume());
    for (int axis = 0; axis < g.dim(); ++axis)
        vacant.for_each([&](Site x) {
            const Site y = g.step(x, axis, true);
            if (vacant.test(y))
                uf.unite(x, y);
        });

    ComponentLabeling out;
    out.label.assign(g.volume(), ComponentLabeling::kNone);
    std::vector<std::int64_t> root_id(g.volume(), ComponentLabeling::kNone);
    vacant.for_each([&](Site x) {
        const auto root = uf.find(x);
        auto& id = root_id[root];
        if (id == ComponentLabeling::kNone) {
            id = static_cast<std::int64_t>(out.sizes.size());
            out.sizes.push_back(0);
            out.representatives.push_back(x);
        }
        out.label[x] = id;
        ++out.sizes[static_cast<std::size_t>(id)];
    });
    return out;
}

inline ComponentLabeling components(const VacancyView& view)
{
    return components(view.geometry(), view.mask());
}

struct SizeHistogram {
    std::map<std::uint64_t, std::uint64_t> counts; // size -> number of components
    std::uint64_t largest = 0;
    std::uint64_t second_largest = 0;
};

inline SizeHistogram component_size_histogram(const ComponentLabeling& labeling)
{
    SizeHistogram h;
    for (auto s : labeling.sizes) {
        ++h.counts[s];
        if (s > h.largest) {
            h.second_largest = h.largest;
            h.largest = s;
        } else if (s > h.second_largest) {
            h.second_largest = s;
        }
    }
    return h;
}

// ---------------------------------------------------------------------------
// Segment components

struct SegmentComponentRecord {
    Site anchor = 0;
    int axis = 0;
    std::int64_t length = 0;
    friend bool operator==(const SegmentComponentRecord&, const SegmentComponentRecord&) = default;
};

/// True iff the vacant component containing `anchor` is exactly [anchor, anchor + l e_axis].
inline bool is_segment_component(const Torus& g, const BitSet& vacant, Site anchor, int axis, std::int64_t l)
{
    if (!vacant.test(anchor))
        return false;
    const auto limit = static_cast<std::size_t>(l + 1);
    std::vector<Site> seen{anchor};
    std::vector<Site> stack{anchor};
    while (!stack.empty()) {
        const Site x = stack.back();
        stack.pop_back();
        for (int j = 0; j < g.degree(); ++j) {
            const Site y = g.neighbor(x, j);
            if (!vacant.test(y) || std::find(seen.begin(), seen.end(), y) != seen.end())
                continue;
            if (seen.size() == limit)
                return false;
            seen.push_back(y);
            stack.push_back(y);
        }
    }
    return SiteSet(seen) == segment_sites(g, anchor, axis, l);
}

/// Anchors x with [x, x + l e_axis] vacant and its whole boundary visited.
inline std::vector<SegmentComponentRecord> segment_components_along(const Torus& g, const BitSet& vacant,
                                                                    std::int64_t l, int axis)
{
    if (l < 0 || l + 2 > g.side())
        throw ParameterError("segment components need 0 <= l and l + 2 <= N");
    if (axis < 0 || axis >= g.dim())
        throw ParameterError("segment axis out of range");
    const auto n = g.side();
    const auto stride = g.stride(axis);
    std::vector<SegmentComponentRecord> out;
    std::vector<std::int64_t> run;
    for_each_line(g, axis, [&](Site base) {
        detail::cyclic_runs(vacant, base, stride, n, run);
        for (std::int64_t k = 0; k < n; ++k) {
            const auto prev = static_cast<std::size_t>((k - 1 + n) % n);
            if (run[static_cast<std::size_t>(k)] != l + 1 || run[prev] != 0)
                continue;
            const Site anchor = base + static_cast<std::uint64_t>(k) * stride;
            bool closed = true;
            Site y = anchor;
            for (std::int64_t m = 0; m <= l && closed; ++m, y = g.step(y, axis, true))
                for (int j = 0; j < g.dim() && closed; ++j) {
                    if (j == axis)
                        continue;
                    closed = !vacant.test(g.step(y, j, true)) && !vacant.test(g.step(y, j, false));
                }
            if (!closed)
                continue;
            if (!is_segment_component(g, vacant, anchor, axis, l))
                throw std::logic_error("segment component failed the component-shape check");
            out.push_back({anchor, axis, l});
        }
    });
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.anchor < b.anchor; });
    return out;
}

/// The set J_t: e_1-segments of length l that form a whole vacant component.
inline std::vector<SegmentComponentRecord> segment_components(const Torus& g, const BitSet& vacant, std::int64_t l)
{
    return segment_components_along(g, vacant, l, 0);
}

inline std::vector<SegmentComponentRecord> segment_components(const VacancyView& view, std::int64_t l)
{
    return segment_components(view.geometry(), view.mask(), l);
}

/// Isolated segments of length l along every axis.
inline std::vector<SegmentComponentRecord> segment_components_any_axis(const Torus& g, const BitSet& vacant,
                                                                       std::int64_t l)
{
    std::vector<SegmentComponentRecord> out;
    for (int axis = 0; axis < g.dim(); ++axis) {
        auto part = segment_components_along(g, vacant, l, axis);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Giant component

/// Exact multi-source l-infinity distance to the marked sites, by one
/// min-max relaxation pass per axis. Unreachable (no sources) gives N.
inline std::vector<std::int64_t> linf_distance_transform(const Torus& g, const BitSet& sources)
{
    const auto n = g.side();
    std::vector<std::int64_t> dist(g.volume(), n);
    sources.for_each([&](Site s) { dist[s] = 0; });
    std::vector<std::int64_t> line(static_cast<std::size_t>(n));
    for (int axis = 0; axis < g.dim(); ++axis) {
        const auto stride = g.stride(axis);
        for_each_line(g, axis, [&](Site base) {
            for (std::int64_t k = 0; k < n; ++k)
                line[static_cast<std::size_t>(k)] = dist[base + static_cast<std::uint64_t>(k) * stride];
            for (std::int64_t p = 0; p < n; ++p) {
                std::int64_t best = line[static_cast<std::size_t>(p)];
                for (std::int64_t off = 1; off <= n / 2 && off < best; ++off) {
                    const auto fwd = line[static_cast<std::size_t>((p + off) % n)];
                    const auto bwd = line[static_cast<std::size_t>((p - off + n) % n)];
                    best = std::min({best, std::max(fwd, off), std::max(bwd, off)});
                }
                dist[base + static_cast<std::uint64_t>(p) * stride] = best;
            }
        });
    }
    return dist;
}

enum class GiantOutcome { EventHolds, NotUnique, NoQualifyingSegment, NotDense };

inline const char* to_string(GiantOutcome o) noexcept
{
    switch (o) {
    case GiantOutcome::EventHolds: return "EVENT_HOLDS";
    case GiantOutcome::NotUnique: return "NOT_UNIQUE";
    case GiantOutcome::NoQualifyingSegment: return "NO_QUALIFYING_SEGMENT";
    case GiantOutcome::NotDense: return "NOT_DENSE";
    }
    return "?";
}

struct GiantReport {
    std::uint64_t qualifying_segment_count = 0; // (anchor, axis) pairs
    bool unique = false;
    std::optional<std::int64_t> component_id;
    std::uint64_t size = 0;
    bool beta_dense = false;
    std::int64_t density_radius = 0; // [N^beta]
    std::int64_t max_distance = -1;  // max over sites of the distance to O
    GiantOutcome outcome = GiantOutcome::NoQualifyingSegment;
};

/// Giant-component event: a unique vacant component O contains every vacant
/// segment [x, x + l0 e_i] (any axis) and lies within N^beta of every site.
inline GiantReport giant_component(const Torus& g, const BitSet& vacant, const ComponentLabeling& labeling,
                                   std::int64_t l0, double beta)
{
    if (l0 < 1 || l0 > g.side())
        throw ParameterError("giant length l0 must satisfy 1 <= l0 <= N");
    if (!(beta > 0.0 && beta < 1.0))
        throw ParameterError("beta must lie in (0, 1)");
    GiantReport rep;
    rep.density_radius = floor_pow(static_cast<double>(g.side()), beta);
    const auto need = std::min<std::int64_t>(l0 + 1, g.side());
    std::set<std::int64_t> ids;
    std::vector<std::int64_t> run;
    for (int axis = 0; axis < g.dim(); ++axis) {
        const auto stride = g.stride(axis);
        for_each_line(g, axis, [&](Site base) {
            detail::cyclic_runs(vacant, base, stride, g.side(), run);
            for (std::int64_t k = 0; k < g.side(); ++k)
                if (run[static_cast<std::size_t>(k)] >= need) {
                    ++rep.qualifying_segment_count;
                    ids.insert(labeling.label[base + static_cast<std::uint64_t>(k) * stride]);
                }
        });
    }
    if (rep.qualifying_segment_count == 0) {
        rep.outcome = GiantOutcome::NoQualifyingSegment;
        return rep;
    }
    rep.unique = ids.size() == 1;
    if (!rep.unique) {
        rep.outcome = GiantOutcome::NotUnique;
        return rep;
    }
    const auto id = *ids.begin();
    rep.component_id = id;
    rep.size = labeling.sizes[static_cast<std::size_t>(id)];
    BitSet giant(g.volume());
    for (Site s = 0; s < g.volume(); ++s)
        if (labeling.label[s] == id)
            giant.set(s);
    const auto dist = linf_distance_transform(g, giant);
    rep.max_distance = *std::max_element(dist.begin(), dist.end());
    rep.beta_dense = rep.max_distance <= rep.density_radius;
    rep.outcome = rep.beta_dense ? GiantOutcome::EventHolds : GiantOutcome::NotDense;
    return rep;
}

inline GiantReport giant_component(const Torus& g, const BitSet& vacant, std::int64_t l0, double beta)
{
    return giant_component(g, vacant, components(g, vacant), l0, beta);
}

inline GiantReport giant_component(const VacancyView& view, std::int64_t l0, double beta)
{
    return giant_component(view.geometry(), view.mask(), l0, beta);
}

/// Some vacant [x, x + l e_1] lies outside component `giant_id`.
inline bool vacant_segment_outside(const Torus& g, const BitSet& vacant, const ComponentLabeling& labeling,
                                   std::int64_t giant_id, std::int64_t l)
{
    const auto need = std::min<std::int64_t>(l + 1, g.side());
    const auto stride = g.stride(0);
    std::vector<std::int64_t> run;
    bool found = false;
    for_each_line(g, 0, [&](Site base) {
        if (found)
            return;
        detail::cyclic_runs(vacant, base, stride, g.side(), run);
        for (std::int64_t k = 0; k < g.side() && !found; ++k) {
            const Site x = base + static_cast<std::uint64_t>(k) * stride;
            found = run[static_cast<std::size_t>(k)] >= need && labeling.label[x] != giant_id;
        }
    });
    return found;
}

// ---------------------------------------------------------------------------
// Ubiquity

/// For every site x and axis j there is an integer 0 <= m < N^beta with
/// x + (m + [0, K_len]) e_j entirely vacant. O(d N^d).
inline bool ubiquity(const Torus& g, const BitSet& vacant, std::int64_t k_len, double beta)
{
    if (k_len < 1)
        throw ParameterError("ubiquity segment length must be >= 1");
    const auto n = g.side();
    const auto window = count_below_pow(static_cast<double>(n), beta); // admissible offsets m
    const auto need = std::min<std::int64_t>(k_len + 1, n);
    std::vector<std::int64_t> run;
    std::vector<std::int64_t> gap(static_cast<std::size_t>(n));
    for (int axis = 0; axis < g.dim(); ++axis) {
        const auto stride = g.stride(axis);
        bool ok = true;
        for_each_line(g, axis, [&](Site base) {
            if (!ok)
                return;
            detail::cyclic_runs(vacant, base, stride, n, run);
            // gap[k]: offset from k to the nearest admissible segment start ahead of it
            std::int64_t anchor = -1;
            for (std::int64_t k = 0; k < n; ++k)
                if (run[static_cast<std::size_t>(k)] >= need)
                    anchor = k;
            if (anchor < 0) {
                ok = false;
                return;
            }
            std::int64_t next = 0;
            for (std::int64_t i = 0; i < n; ++i) {
                const auto k = static_cast<std::size_t>((anchor - i + n) % n);
                next = run[k] >= need ? 0 : next + 1;
                gap[k] = next;
                if (gap[k] >= window) {
                    ok = false;
                    return;
                }
            }
        });
        if (!ok)
            return false;
    }
    return true;
}

inline bool ubiquity(const VacancyView& view, std::int64_t k_len, double beta)
{
    return ubiquity(view.geometry(), view.mask(), k_len, beta);
}

// ---------------------------------------------------------------------------
// Surround events A_{i,E}

enum class AnchorScan { Restricted, All };

struct SurroundResult {
    std::uint64_t windows = 0;                  // [horizon / b1]
    std::vector<std::uint64_t> indices;         // 1-based window indices i in I_E
    std::vector<std::vector<Site>> witnesses;   // anchors per reported index, ascending
};

/// Streaming detector for the events A_{i,E}: during [(i-1)b1, (i-1)b1 + [b1/2]]
/// the walk visits all of the boundary of some [x, x + l e_1], and the segment
/// stays unvisited during [0, i b1].
///
/// Window coverage is read off the running last-visit map at the half-window
/// instant. With AnchorScan::Restricted only anchors whose x - e_1 was visited
/// in the window are examined; x - e_1 is a boundary site, so nothing is lost.
class SurroundProbe {
public:
    /// Visits after `limit` are ignored, so the windows end at [limit / b1] b1.
    SurroundProbe(const Torus& g, Time b1, std::int64_t l, AnchorScan scan = AnchorScan::Restricted,
                  Time limit = kNever)
        : g_(&g), b1_(b1), scan_(scan), limit_(limit), last_seen_(g.volume(), kNever),
          first_seen_(g.volume(), kNever)
    {
        if (b1 < 1)
            throw ParameterError("window length b1 must be >= 1");
        if (l < 0 || l + 2 > g.side())
            throw ParameterError("surround events need l + 2 <= N");
        segment_offsets_ = l + 1;
    }

    void on_visit(Time t, Site x)
    {
        if (t > limit_)
            return;
        const Time start = (t / b1_) * b1_;
        if (start != window_start_) {
            window_start_ = start;
            window_sites_.clear();
        }
        if (last_seen_[x] == kNever || last_seen_[x] < start)
            window_sites_.push_back(x);
        if (first_seen_[x] == kNever)
            first_seen_[x] = t;
        last_seen_[x] = t;
        final_time_ = t;
        if (t == start + b1_ / 2)
            evaluate_half_window(t / b1_ + 1, start);
    }

    SurroundResult result() const
    {
        SurroundResult res;
        res.windows = final_time_ == kNever ? 0 : final_time_ / b1_;
        for (const auto& [index, anchors] : candidates_) {
            if (index > res.windows)
                continue;
            const Time end = index * b1_;
            std::vector<Site> kept;
            for (Site a : anchors)
                if (segment_unvisited_until(a, end))
                    kept.push_back(a);
            if (!kept.empty()) {
                res.indices.push_back(index);
                res.witnesses.push_back(std::move(kept));
            }
        }
        return res;
    }

private:
    bool segment_unvisited_until(Site a, Time end) const
    {
        Site y = a;
        for (std::int64_t m = 0; m < segment_offsets_; ++m, y = g_->step(y, 0, true)) {
            const Time f = first_seen_[y];
            if (f != kNever && f <= end)
                return false;
        }
        return true;
    }

    bool visited_in_window(Site s, Time start) const { return last_seen_[s] != kNever && last_seen_[s] >= start; }

    bool surrounded_now(Site a, Time start) const
    {
        Site y = a;
        for (std::int64_t m = 0; m < segment_offsets_; ++m, y = g_->step(y, 0, true)) {
            if (last_seen_[y] != kNever)
                return false;
            for (int j = 1; j < g_->dim(); ++j)
                if (!visited_in_window(g_->step(y, j, true), start) || !visited_in_window(g_->step(y, j, false), start))
                    return false;
        }
        return visited_in_window(g_->step(a, 0, false), start) && visited_in_window(y, start);
    }

    void evaluate_half_window(std::uint64_t index, Time start)
    {
        std::vector<Site> found;
        if (scan_ == AnchorScan::Restricted) {
            for (Site s : window_sites_) {
                const Site a = g_->step(s, 0, true);
                if (surrounded_now(a, start))
                    found.push_back(a);
            }
            std::sort(found.begin(), found.end());
            found.erase(std::unique(found.begin(), found.end()), found.end());
        } else {
            for (Site a = 0; a < g_->volume(); ++a)
                if (surrounded_now(a, start))
                    found.push_back(a);
        }
        if (!found.empty())
            candidates_.push_back({index, std::move(found)});
    }

    const Torus* g_;
    Time b1_;
    AnchorScan scan_;
    Time limit_;
    std::int64_t segment_offsets_ = 1;
    std::vector<Time> last_seen_;
    std::vector<Time> first_seen_;
    std::vector<Site> window_sites_;
    Time window_start_ = kNever;
    Time final_time_ = kNever;
    std::vector<std::pair<std::uint64_t, std::vector<Site>>> candidates_;
};

inline SurroundResult detect_A_events(const Torus& g, const WalkConfig& cfg, Time b1, std::int64_t l,
                                      AnchorScan scan = AnchorScan::Restricted)
{
    if (cfg.horizon < b1)
        throw ParameterError("horizon must be >= b1");
    SurroundProbe probe(g, b1, l, scan);
    simulate(g, cfg, probe);
    return probe.result();
}

inline SurroundResult detect_A_events(const Torus& g, std::span<const Site> path, Time b1, std::int64_t l,
                                      AnchorScan scan = AnchorScan::Restricted)
{
    SurroundProbe probe(g, b1, l, scan);
    record_path(g, path, probe);
    return probe.result();
}

// ---------------------------------------------------------------------------
// Covering path around [0, l e_1]

namespace detail {

/// Closed loop of 2l + 8 sites around [0, l e_1] in the (e_1, e_axis) plane,
/// starting at -e_1. Offsets relative to the segment's anchor.
inline std::vector<Coord> surround_loop(int d, int axis, std::int64_t l)
{
    std::vector<Coord> loop;
    auto at = [&](std::int64_t a, std::int64_t b) {
        Coord c(static_cast<std::size_t>(d), 0);
        c[0] = a;
        c[static_cast<std::size_t>(axis)] = b;
        loop.push_back(c);
    };
    at(-1, 0);
    at(-1, 1);
    for (std::int64_t k = 0; k <= l + 1; ++k)
        at(k, 1);
    at(l + 1, 0);
    for (std::int64_t k = l + 1; k >= -1; --k)
        at(k, -1);
    return loop;
}

} // namespace detail

/// Walk that starts at `start` (a boundary site of [anchor, anchor + l e_1]),
/// connects to anchor - e_1 along one loop, then runs the loops around the
/// segment in each (e_1, e_i) plane, i = 2..d. Never touches the segment and
/// visits all of its boundary in at most d(2l + 8) steps.
inline std::vector<Site> covering_path(const Torus& g, Site anchor, std::int64_t l, std::optional<Site> start = {})
{
    if (g.dim() < 2)
        throw ParameterError("covering path needs d >= 2");
    if (l < 0 || l + 2 > g.side())
        throw ParameterError("covering path needs l + 2 <= N");
    const int d = g.dim();
    const Coord base = g.decode(anchor);
    auto place = [&](const Coord& off) {
        Coord c(base);
        for (std::size_t i = 0; i < c.size(); ++i)
            c[i] += off[i];
        return g.encode(c);
    };

    std::vector<std::vector<Site>> loops;
    for (int axis = 1; axis < d; ++axis) {
        std::vector<Site> loop;
        for (const auto& off : detail::surround_loop(d, axis, l))
            loop.push_back(place(off));
        loops.push_back(std::move(loop));
    }

    std::vector<Site> path;
    const Site origin = loops.front().front();
    const Site s = start.value_or(origin);
    bool connected = false;
    for (const auto& loop : loops) {
        auto it = std::find(loop.begin(), loop.end(), s);
        if (it == loop.end())
            continue;
        const auto j = static_cast<std::size_t>(it - loop.begin());
        const auto len = loop.size();
        if (j <= len - j) {
            for (std::size_t k = j; k > 0; --k)
                path.push_back(loop[k]);
        } else {
            for (std::size_t k = j; k < len; ++k)
                path.push_back(loop[k]);
        }
        connected = true;
        break;
    }
    if (!connected)
        throw ParameterError("covering path start is not on the segment's boundary");
    for (const auto& loop : loops) {
        path.insert(path.end(), loop.begin(), loop.end());
    }
    path.push_back(origin);
    return path;
}

// ---------------------------------------------------------------------------
// CSV

/// Columns: anchor_index, anchor_coords, direction (1-based axis), length.
inline void write_segment_csv(std::ostream& os, const Torus& g, std::span<const SegmentComponentRecord> recs)
{
    os << "anchor_index,anchor_coords,direction,length\n";
    for (const auto& r : recs)
        os << r.anchor << ',' << format_coords(g, r.anchor) << ',' << (r.axis + 1) << ',' << r.length << '\n';
}

/// Columns: size, count.
inline void write_histogram_csv(std::ostream& os, const SizeHistogram& h)
{
    os << "size,count\n";
    for (const auto& [size, count] : h.counts)
        os << size << ',' << count << '\n';
}

} // namespace vacant
