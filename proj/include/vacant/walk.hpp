#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <new>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "vacant/errors.hpp"
#include "vacant/lattice.hpp"
#include "vacant/rng.hpp"

namespace vacant {

using Time = std::uint64_t;

/// Reserved timestamp for "not visited" / "did not happen within the horizon".
inline constexpr Time kNever = std::numeric_limits<Time>::max();

/// Trajectories are only kept in debug mode and only up to this many steps.
inline constexpr Time kMaxStoredTrajectory = 1'000'000;

struct WalkConfig {
    std::uint64_t seed = 0;
    /// Fixed start (law P_x); nullopt draws the start uniformly (law P).
    std::optional<Site> start;
    Time horizon = 0;
    bool store_trajectory = false;
};

/// One step of simple random walk: each of the 2d neighbors with probability 1/(2d).
template <class Rng>
Site sample_step(Rng& rng, const Torus& g, Site x) noexcept
{
    const auto j = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(g.degree())));
    return g.neighbor(x, j);
}

/// Seeded walker. The uniform start (if any) is the first draw of the stream.
class Walker {
public:
    Walker(const Torus& g, std::uint64_t seed, std::optional<Site> start) : g_(&g), rng_(seed)
    {
        if (start) {
            if (!g.valid(*start))
                throw ParameterError("start site outside the torus");
            pos_ = *start;
        } else {
            pos_ = uniform_below(rng_, g.volume());
        }
    }

    Site position() const noexcept { return pos_; }
    Time time() const noexcept { return t_; }

    Site step() noexcept
    {
        pos_ = sample_step(rng_, *g_, pos_);
        ++t_;
        return pos_;
    }

private:
    const Torus* g_;
    Xoshiro256ss rng_;
    Site pos_ = 0;
    Time t_ = 0;
};

/// First and last visit times per site for one trajectory X_0..X_T.
///
/// A site s is in X_[0,t] iff first_visit[s] <= t. Unvisited sites carry kNever
/// in both maps.
struct VisitRecord {
    Torus geometry;
    std::uint64_t seed = 0;
    std::vector<Time> first_visit;
    std::vector<Time> last_visit;
    Time final_time = 0;
    Site start_site = 0;
    Site end_site = 0;
    std::vector<Site> trajectory; // debug mode only

    explicit VisitRecord(const Torus& g) : geometry(g) {}

    bool visited_by(Site s, Time t) const noexcept { return first_visit[s] <= t; }
    std::uint64_t visited_count() const noexcept
    {
        std::uint64_t c = 0;
        for (auto f : first_visit)
            c += f != kNever;
        return c;
    }
};

namespace detail {

inline VisitRecord allocate_record(const Torus& g)
{
    VisitRecord rec(g);
    try {
        rec.first_visit.assign(g.volume(), kNever);
        rec.last_visit.assign(g.volume(), kNever);
    } catch (const std::bad_alloc&) {
        throw ResourceError("cannot allocate visit maps for " + std::to_string(g.volume()) + " sites");
    }
    return rec;
}

inline void touch(VisitRecord& rec, Time t, Site x) noexcept
{
    if (rec.first_visit[x] == kNever)
        rec.first_visit[x] = t;
    rec.last_visit[x] = t;
}

template <class... Probes>
void notify([[maybe_unused]] Time t, [[maybe_unused]] Site x, Probes&... probes)
{
    (probes.on_visit(t, x), ...);
}

} // namespace detail

/// Runs exactly cfg.horizon steps, recording visits and feeding every probe
/// each (time, site) pair in order. A probe is any object with on_visit(Time, Site).
template <class... Probes>
VisitRecord simulate(const Torus& g, const WalkConfig& cfg, Probes&... probes)
{
    if (cfg.store_trajectory && cfg.horizon > kMaxStoredTrajectory)
        throw ParameterError("trajectory storage is limited to 1e6 steps");
    VisitRecord rec = detail::allocate_record(g);
    rec.seed = cfg.seed;
    Walker w(g, cfg.seed, cfg.start);
    rec.start_site = w.position();
    if (cfg.store_trajectory)
        rec.trajectory.reserve(static_cast<std::size_t>(cfg.horizon) + 1);

    Site x = w.position();
    for (Time t = 0;; ++t) {
        detail::touch(rec, t, x);
        if (cfg.store_trajectory)
            rec.trajectory.push_back(x);
        detail::notify(t, x, probes...);
        if (t == cfg.horizon)
            break;
        x = w.step();
    }
    rec.final_time = cfg.horizon;
    rec.end_site = x;
    return rec;
}

/// Builds a record from a scripted nearest-neighbor path; path[t] is X_t.
template <class... Probes>
VisitRecord record_path(const Torus& g, std::span<const Site> path, Probes&... probes)
{
    if (path.empty())
        throw ParameterError("scripted path is empty");
    VisitRecord rec = detail::allocate_record(g);
    for (std::size_t t = 0; t < path.size(); ++t) {
        const Site x = path[t];
        if (!g.valid(x))
            throw ParameterError("scripted path leaves the torus");
        if (t > 0) {
            bool adjacent = false;
            for (int j = 0; j < g.degree() && !adjacent; ++j)
                adjacent = g.neighbor(path[t - 1], j) == x;
            if (!adjacent)
                throw ParameterError("scripted path takes a non-neighbor step");
        }
        detail::touch(rec, t, x);
        detail::notify(static_cast<Time>(t), x, probes...);
    }
    rec.final_time = path.size() - 1;
    rec.start_site = path.front();
    rec.end_site = path.back();
    rec.trajectory.assign(path.begin(), path.end());
    return rec;
}

enum class FirstTimeMode { Enter, Exit };

/// Enter: H_A = inf{n >= 0 : X_n in A}. Exit: T_A = inf{n >= 0 : X_n not in A}.
/// Returns kNever when the horizon elapses first. `member(site)` decides A.
template <class Predicate>
Time first_time(const Torus& g, const WalkConfig& cfg, Predicate&& member, FirstTimeMode mode)
{
    Walker w(g, cfg.seed, cfg.start);
    const bool want = mode == FirstTimeMode::Enter;
    Site x = w.position();
    for (Time t = 0;; ++t) {
        if (static_cast<bool>(member(x)) == want)
            return t;
        if (t == cfg.horizon)
            return kNever;
        x = w.step();
    }
}

// ---------------------------------------------------------------------------
// Excursions between C(x) = B(x, L) and its enclosing box B(x, r).

struct ExcursionPair {
    Time entry;     // R_k
    Time departure; // D_k
    friend bool operator==(const ExcursionPair&, const ExcursionPair&) = default;
};

struct ExcursionSchedule {
    Site center = 0;
    std::int64_t inner_radius = 0;
    std::int64_t outer_radius = 0;
    std::vector<ExcursionPair> pairs;
    bool truncated = false;
};

inline void check_excursion_radii(const Torus& g, std::int64_t inner, std::int64_t outer)
{
    if (inner < 1 || inner >= outer)
        throw ParameterError("excursion radii need 1 <= L < r");
    if (2 * outer >= g.side())
        throw ParameterError("outer excursion radius must satisfy r < N/2");
}

/// Streaming state machine: seek entry into B(center, L), then seek exit from
/// B(center, r), and repeat until k_max departures are recorded.
class ExcursionTracker {
public:
    ExcursionTracker(const Torus& g, Site center, std::int64_t inner, std::int64_t outer, std::size_t k_max)
        : g_(&g), center_(center), inner_(inner), outer_(outer), k_max_(k_max)
    {
        check_excursion_radii(g, inner, outer);
        if (k_max < 1)
            throw ParameterError("k_max must be >= 1");
    }

    void on_visit(Time t, Site x)
    {
        if (complete())
            return;
        const auto dist = g_->linf_distance(center_, x);
        if (seeking_entry_) {
            if (dist <= inner_) {
                entry_ = t;
                seeking_entry_ = false;
            }
        } else if (dist > outer_) {
            pairs_.push_back({entry_, t});
            seeking_entry_ = true;
        }
    }

    bool complete() const noexcept { return pairs_.size() >= k_max_; }
    bool seeking_entry() const noexcept { return seeking_entry_; }
    std::size_t departures() const noexcept { return pairs_.size(); }

    ExcursionSchedule schedule() const
    {
        return ExcursionSchedule{center_, inner_, outer_, pairs_, !complete()};
    }

private:
    const Torus* g_;
    Site center_;
    std::int64_t inner_;
    std::int64_t outer_;
    std::size_t k_max_;
    bool seeking_entry_ = true;
    Time entry_ = 0;
    std::vector<ExcursionPair> pairs_;
};

/// Up to k_max pairs (R_k, D_k) for a seeded walk; truncated if the horizon ends first.
inline ExcursionSchedule excursion_schedule(const Torus& g, const WalkConfig& cfg, Site center, std::int64_t inner,
                                            std::int64_t outer, std::size_t k_max)
{
    ExcursionTracker tracker(g, center, inner, outer, k_max);
    Walker w(g, cfg.seed, cfg.start);
    Site x = w.position();
    for (Time t = 0;; ++t) {
        tracker.on_visit(t, x);
        if (tracker.complete() || t == cfg.horizon)
            break;
        x = w.step();
    }
    return tracker.schedule();
}

inline ExcursionSchedule excursion_schedule(const Torus& g, std::span<const Site> path, Site center,
                                            std::int64_t inner, std::int64_t outer, std::size_t k_max)
{
    ExcursionTracker tracker(g, center, inner, outer, k_max);
    for (std::size_t t = 0; t < path.size() && !tracker.complete(); ++t)
        tracker.on_visit(static_cast<Time>(t), path[t]);
    return tracker.schedule();
}

// ---------------------------------------------------------------------------

/// The event that X_[0,n] and X_[n+a0, T] are disjoint for every n in [0, T - a0],
/// with T = rec.final_time. Holds iff no site has last - first >= a0; vacuous if a0 > T.
inline bool disjoint_ranges(const VisitRecord& rec, Time a0)
{
    if (a0 > rec.final_time)
        return true;
    for (std::size_t s = 0; s < rec.first_visit.size(); ++s) {
        const Time f = rec.first_visit[s];
        if (f != kNever && rec.last_visit[s] - f >= a0)
            return false;
    }
    return true;
}

/// Marks every site visited during the closed window [from, to].
class WindowVisitProbe {
public:
    WindowVisitProbe(const Torus& g, Time from, Time to) : from_(from), to_(to), visited_(g.volume()) {}

    void on_visit(Time t, Site x) noexcept
    {
        if (t >= from_ && t <= to_)
            visited_.set(x);
    }

    Time from() const noexcept { return from_; }
    Time to() const noexcept { return to_; }
    const BitSet& visited() const noexcept { return visited_; }

private:
    Time from_;
    Time to_;
    BitSet visited_;
};

/// Sites visited during [0, t], from the first-visit map.
inline BitSet visited_until(const VisitRecord& rec, Time t)
{
    BitSet b(rec.first_visit.size());
    for (std::size_t s = 0; s < rec.first_visit.size(); ++s)
        if (rec.first_visit[s] <= t)
            b.set(s);
    return b;
}

/// FNV-1a over the little-endian site indices X_0..X_T.
inline std::uint64_t trajectory_hash(const Torus& g, const WalkConfig& cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](Site x) {
        for (int b = 0; b < 8; ++b) {
            h ^= (x >> (8 * b)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    Walker w(g, cfg.seed, cfg.start);
    mix(w.position());
    for (Time t = 0; t < cfg.horizon; ++t)
        mix(w.step());
    return h;
}

// ---------------------------------------------------------------------------
// Binary dump:
//   bytes 0..7   magic "VACANTVR"
//   u32          format version (1)
//   u32          d
//   u64          N
//   u64          seed
//   u64          horizon (final time)
//   u64[N^d]     first-visit times, site-index order
//   u64[N^d]     last-visit times, site-index order
// All integers little-endian; kNever (2^64 - 1) marks unvisited sites.

inline constexpr std::array<char, 8> kVisitRecordMagic{'V', 'A', 'C', 'A', 'N', 'T', 'V', 'R'};
inline constexpr std::uint32_t kVisitRecordVersion = 1;

namespace detail {

template <class T>
void put_le(std::ostream& os, T v)
{
    std::array<char, sizeof(T)> b{};
    for (std::size_t i = 0; i < sizeof(T); ++i)
        b[i] = static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff);
    os.write(b.data(), static_cast<std::streamsize>(b.size()));
}

template <class T>
T get_le(std::istream& is)
{
    std::array<unsigned char, sizeof(T)> b{};
    if (!is.read(reinterpret_cast<char*>(b.data()), static_cast<std::streamsize>(b.size())))
        throw ParameterError("truncated visit record");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return static_cast<T>(v);
}

} // namespace detail

inline void write_visit_record(std::ostream& os, const VisitRecord& rec)
{
    os.write(kVisitRecordMagic.data(), kVisitRecordMagic.size());
    detail::put_le<std::uint32_t>(os, kVisitRecordVersion);
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(rec.geometry.dim()));
    detail::put_le<std::uint64_t>(os, static_cast<std::uint64_t>(rec.geometry.side()));
    detail::put_le<std::uint64_t>(os, rec.seed);
    detail::put_le<std::uint64_t>(os, rec.final_time);
    for (auto t : rec.first_visit)
        detail::put_le<std::uint64_t>(os, t);
    for (auto t : rec.last_visit)
        detail::put_le<std::uint64_t>(os, t);
}

inline VisitRecord read_visit_record(std::istream& is)
{
    std::array<char, 8> magic{};
    if (!is.read(magic.data(), magic.size()) || magic != kVisitRecordMagic)
        throw ParameterError("not a visit record (bad magic)");
    if (detail::get_le<std::uint32_t>(is) != kVisitRecordVersion)
        throw ParameterError("unsupported visit record version");
    const auto d = detail::get_le<std::uint32_t>(is);
    const auto n = detail::get_le<std::uint64_t>(is);
    Torus g(static_cast<int>(d), static_cast<std::int64_t>(n));
    VisitRecord rec = detail::allocate_record(g);
    rec.seed = detail::get_le<std::uint64_t>(is);
    rec.final_time = detail::get_le<std::uint64_t>(is);
    for (auto& t : rec.first_visit)
        t = detail::get_le<std::uint64_t>(is);
    for (auto& t : rec.last_visit)
        t = detail::get_le<std::uint64_t>(is);
    for (std::size_t s = 0; s < rec.first_visit.size(); ++s) {
        if (rec.first_visit[s] == 0)
            rec.start_site = s;
        if (rec.last_visit[s] == rec.final_time)
            rec.end_site = s;
    }
    return rec;
}

} // namespace vacant
