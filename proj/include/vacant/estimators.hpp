#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "vacant/constants.hpp"
#include "vacant/errors.hpp"
#include "vacant/lattice.hpp"
#include "vacant/numeric.hpp"
#include "vacant/rng.hpp"
#include "vacant/vacancy.hpp"
#include "vacant/walk.hpp"

namespace vacant {

// ---------------------------------------------------------------------------
// Interval estimates

inline constexpr double kWilsonZ95 = 1.959963984540054;

struct Interval {
    double low = 0;
    double high = 1;
};

/// Wilson score interval at 95%; the bounds are exact at 0 and 1 when s = 0 or s = n.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kWilsonZ95)
{
    if (trials == 0)
        return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1 + z2 / n;
    const double center = (p + z2 / (2 * n)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
    Interval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
    if (successes == 0)
        ci.low = 0.0;
    if (successes == trials)
        ci.high = 1.0;
    ci.low = std::min(ci.low, p);
    ci.high = std::max(ci.high, p);
    return ci;
}

// ---------------------------------------------------------------------------
// Experiment description

enum class StartMode { Uniform, Origin };

struct ExperimentSpec {
    int d = 3;
    std::int64_t N = 10;
    double u = 1.0;
    double nu = 0.1;
    std::int64_t l = 1;  // explicit at desk scale
    std::int64_t l0 = 2; // giant-segment length
    double beta = 0.5;
    double c2 = 1.0;
    std::uint64_t replications = 100;
    std::uint64_t master_seed = 1;
    StartMode start = StartMode::Uniform;
    std::uint64_t replica_begin = 0; // first replica index of this shard

    Torus geometry() const { return Torus(d, N); }
    Time horizon() const { return time_horizon(u, N, d); }
    std::optional<Site> start_site() const
    {
        return start == StartMode::Origin ? std::optional<Site>(0) : std::nullopt;
    }

    void validate() const
    {
        if (d < 1)
            throw ConfigError("d", "d must be >= 1");
        if (N < 3)
            throw ConfigError("N", "N must be >= 3");
        try {
            (void)geometry();
        } catch (const ParameterError& e) {
            throw ConfigError("N", e.what());
        }
        if (!(u > 0))
            throw ConfigError("u", "u must be positive");
        if (!(nu > 0 && nu < 1))
            throw ConfigError("nu", "nu must lie in (0, 1)");
        if (!(beta > 0 && beta < 1))
            throw ConfigError("beta", "beta must lie in (0, 1)");
        if (!(c2 > 0))
            throw ConfigError("c2", "c2 must be positive");
        if (l < 0 || l + 2 > N)
            throw ConfigError("l", "l must satisfy 0 <= l and l + 2 <= N");
        if (l0 < 1 || l0 > N)
            throw ConfigError("l0", "l0 must satisfy 1 <= l0 <= N");
        if (replications < 1)
            throw ConfigError("replications", "replications must be >= 1");
        try {
            (void)horizon();
        } catch (const ParameterError& e) {
            throw ConfigError("u", e.what());
        }
    }
};

/// Non-fatal remarks about a spec.
inline std::vector<std::string> spec_warnings(const ExperimentSpec& s)
{
    std::vector<std::string> out;
    if (s.nu >= (kAlpha1 - kBeta1) / 2)
        out.push_back("nu >= (alpha1 - beta1) / 2; the surround-event count has no guarantee in this range");
    return out;
}

/// a0 = [N^{4/3}], b1 = [N^{4/3 + 1/100}], a1 = [N^{2 - 1/10}]; independent of d.
struct WindowScales {
    Time a0 = 0, b1 = 0, a1 = 0;
};

inline WindowScales window_scales(std::int64_t n)
{
    const double nd = static_cast<double>(n);
    return {static_cast<Time>(floor_pow(nd, kAlpha0)), static_cast<Time>(floor_pow(nd, kBeta1)),
            static_cast<Time>(floor_pow(nd, kAlpha1))};
}

/// A fixed random anchor set, drawn from the master seed alone so every replica sees the same J.
inline std::vector<Site> random_anchor_set(const Torus& g, std::uint64_t count, std::uint64_t master_seed)
{
    if (count > g.volume())
        throw ParameterError("more anchors requested than sites");
    Xoshiro256ss rng(splitmix64_mix(master_seed ^ 0x4a5f6e7d8c9b0a1fULL));
    std::vector<Site> out;
    std::vector<bool> taken(g.volume(), false);
    while (out.size() < count) {
        const Site s = uniform_below(rng, g.volume());
        if (!taken[s]) {
            taken[s] = true;
            out.push_back(s);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Survival counts

/// Gamma^J_[s,t]: anchors x in J whose segment [x, x + l e_1] has no visit in [s, t].
/// With s = 0 the first-visit map decides; otherwise `window` must hold the
/// sites visited during [s, t], or the record must carry its trajectory.
inline std::uint64_t count_gamma(const VisitRecord& rec, Time s, Time t, std::span<const Site> anchors,
                                 std::int64_t l, const BitSet* window = nullptr)
{
    const auto& g = rec.geometry;
    if (s > t || t > rec.final_time)
        throw ParameterError("count window needs s <= t <= final time");
    if (l < 0 || l + 1 > g.side())
        throw ParameterError("segment length needs l + 1 <= N");
    BitSet from_path;
    if (s > 0 && window == nullptr) {
        if (rec.trajectory.empty())
            throw ParameterError("a window probe or stored trajectory is required for s > 0");
        from_path = BitSet(g.volume());
        for (Time k = s; k <= t; ++k)
            from_path.set(rec.trajectory[k]);
        window = &from_path;
    }
    std::uint64_t count = 0;
    for (Site x : anchors) {
        bool untouched = true;
        Site y = x;
        for (std::int64_t m = 0; m <= l && untouched; ++m, y = g.step(y, 0, true))
            untouched = s == 0 ? rec.first_visit[y] > t : !window->test(y);
        count += untouched ? 1 : 0;
    }
    return count;
}

// ---------------------------------------------------------------------------
// Events

enum class EventKind { JCountGe, DisjointRanges, Ubiquity, ACountGe, GammaGe1, Giant, Theorem, Predicate };
enum class JSource { Explicit, RandomFixed, ComponentsAtA1 };

inline const char* to_string(EventKind k) noexcept
{
    switch (k) {
    case EventKind::JCountGe: return "J_COUNT_GE";
    case EventKind::DisjointRanges: return "DISJOINT_RANGES";
    case EventKind::Ubiquity: return "UBIQUITY";
    case EventKind::ACountGe: return "A_COUNT_GE";
    case EventKind::GammaGe1: return "GAMMA_GE_1";
    case EventKind::Giant: return "GIANT";
    case EventKind::Theorem: return "THEOREM";
    case EventKind::Predicate: return "PREDICATE";
    }
    return "?";
}

inline const char* to_string(JSource s) noexcept
{
    switch (s) {
    case JSource::Explicit: return "explicit";
    case JSource::RandomFixed: return "random";
    case JSource::ComponentsAtA1: return "components";
    }
    return "?";
}

/// What one replica sees when a predicate event is evaluated.
struct ReplicaContext {
    const ExperimentSpec& spec;
    const Torus& geometry;
    const VisitRecord& record;
};

/// One event to estimate. Unset optional fields take their defaults from the
/// spec: thresholds [N^nu], times [u N^d], windows from window_scales().
struct EventSpec {
    EventKind kind = EventKind::GammaGe1;
    std::optional<std::uint64_t> k;        // J_COUNT_GE, A_COUNT_GE
    std::optional<Time> a0, a1;            // DISJOINT_RANGES
    std::optional<std::int64_t> k_len;     // UBIQUITY; defaults to l0
    std::optional<double> beta;            // UBIQUITY, GIANT, THEOREM
    std::optional<Time> at;                // UBIQUITY, GIANT evaluation time
    JSource j_source = JSource::ComponentsAtA1;
    std::vector<Site> j_sites;             // JSource::Explicit
    std::uint64_t j_random_count = 1;      // JSource::RandomFixed
    std::optional<Time> horizon;           // GAMMA_GE_1 end of window
    std::function<bool(const ReplicaContext&)> predicate;
    std::string label = "PREDICATE";

    std::string name() const { return kind == EventKind::Predicate ? label : to_string(kind); }
};

/// Event parameters with every default filled in.
struct ResolvedEvent {
    EventSpec spec;
    std::uint64_t k = 0;
    Time a0 = 0, a1 = 0, b1 = 0;
    std::int64_t k_len = 0;
    double beta = 0;
    Time at = 0;
    Time horizon = 0;
    std::vector<Site> anchors; // fixed J for explicit / random sources
};

inline ResolvedEvent resolve_event(const ExperimentSpec& spec, const EventSpec& ev)
{
    ResolvedEvent r;
    r.spec = ev;
    const auto g = spec.geometry();
    const auto scales = window_scales(spec.N);
    const Time h = spec.horizon();
    r.k = ev.k.value_or(static_cast<std::uint64_t>(floor_pow(static_cast<double>(spec.N), spec.nu)));
    r.a0 = ev.a0.value_or(scales.a0);
    r.a1 = ev.a1.value_or(scales.a1);
    r.b1 = scales.b1;
    r.k_len = ev.k_len.value_or(spec.l0);
    r.beta = ev.beta.value_or(spec.beta);
    r.at = ev.at.value_or(h);
    r.horizon = ev.horizon.value_or(h);
    if (!(r.beta > 0 && r.beta < 1))
        throw ParameterError("event beta must lie in (0, 1)");
    switch (ev.kind) {
    case EventKind::Ubiquity:
        if (r.k_len < 1)
            throw ParameterError("ubiquity length must be >= 1");
        break;
    case EventKind::ACountGe:
        if (r.b1 < 1 || r.a1 < r.b1)
            throw ParameterError("surround windows need a1 >= b1 >= 1");
        break;
    case EventKind::GammaGe1:
        if (ev.j_source == JSource::Explicit) {
            for (Site x : ev.j_sites)
                if (!g.valid(x))
                    throw ParameterError("anchor outside the torus");
            const SiteSet js(ev.j_sites);
            r.anchors.assign(js.begin(), js.end());
        } else if (ev.j_source == JSource::RandomFixed) {
            r.anchors = random_anchor_set(g, ev.j_random_count, spec.master_seed);
        } else if (r.horizon < r.a1) {
            throw ParameterError("component-sourced J needs a horizon >= a1");
        }
        break;
    case EventKind::Predicate:
        if (!ev.predicate)
            throw ParameterError("predicate event without a predicate");
        break;
    default:
        break;
    }
    return r;
}

/// Streaming check of the disjoint-ranges event on [0, a1]: fails once a site
/// is revisited a0 or more steps after its first visit.
class DisjointRangesProbe {
public:
    DisjointRangesProbe(const Torus& g, Time a0, Time a1) : a0_(a0), a1_(a1), first_(g.volume(), kNever) {}

    void on_visit(Time t, Site x)
    {
        if (t > a1_ || violated_)
            return;
        if (first_[x] == kNever)
            first_[x] = t;
        else if (t - first_[x] >= a0_)
            violated_ = true;
    }

    bool holds() const noexcept { return !violated_; }

private:
    Time a0_, a1_;
    bool violated_ = false;
    std::vector<Time> first_;
};

/// Outcome of one replica: a success flag and a summary statistic per event.
struct ReplicaOutcome {
    std::uint64_t replica = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint8_t> success;
    std::vector<std::int64_t> value;
    friend bool operator==(const ReplicaOutcome&, const ReplicaOutcome&) = default;
};

/// Extra outcome code for THEOREM when the giant exists but every vacant segment lies in it.
inline constexpr std::int64_t kTheoremNoOutsideSegment = 4;

inline std::string value_label(EventKind kind, std::int64_t v)
{
    if (kind == EventKind::Giant || kind == EventKind::Theorem) {
        if (v == kTheoremNoOutsideSegment)
            return "NO_OUTSIDE_SEGMENT";
        return to_string(static_cast<GiantOutcome>(v));
    }
    return std::to_string(v);
}

namespace detail {

struct ReplicaProbes {
    std::vector<DisjointRangesProbe> disjoint;
    std::vector<WindowVisitProbe> windows;
    std::vector<SurroundProbe> surround;

    void on_visit(Time t, Site x)
    {
        for (auto& p : disjoint)
            p.on_visit(t, x);
        for (auto& p : windows)
            p.on_visit(t, x);
        for (auto& p : surround)
            p.on_visit(t, x);
    }
};

} // namespace detail

/// Simulates replica `replica` once and evaluates every event on that trajectory.
inline ReplicaOutcome run_replica(const ExperimentSpec& spec, std::span<const ResolvedEvent> events,
                                  std::uint64_t replica)
{
    const Torus g = spec.geometry();
    ReplicaOutcome out;
    out.replica = replica;
    out.seed = derive_stream_seed(spec.master_seed, replica);

    Time run_to = spec.horizon();
    detail::ReplicaProbes probes;
    std::vector<std::size_t> probe_slot(events.size(), 0);
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& ev = events[i];
        switch (ev.spec.kind) {
        case EventKind::JCountGe:
            run_to = std::max(run_to, ev.a1);
            break;
        case EventKind::DisjointRanges:
            run_to = std::max(run_to, ev.a1);
            probe_slot[i] = probes.disjoint.size();
            probes.disjoint.emplace_back(g, ev.a0, ev.a1);
            break;
        case EventKind::Ubiquity:
        case EventKind::Giant:
            run_to = std::max(run_to, ev.at);
            break;
        case EventKind::ACountGe:
            run_to = std::max(run_to, ev.a1);
            probe_slot[i] = probes.surround.size();
            probes.surround.emplace_back(g, ev.b1, spec.l, AnchorScan::Restricted, ev.a1);
            break;
        case EventKind::GammaGe1:
            run_to = std::max(run_to, ev.horizon);
            if (ev.spec.j_source == JSource::ComponentsAtA1) {
                probe_slot[i] = probes.windows.size();
                probes.windows.emplace_back(g, ev.a1, ev.horizon);
            }
            break;
        default:
            break;
        }
    }

    WalkConfig cfg;
    cfg.seed = out.seed;
    cfg.start = spec.start_site();
    cfg.horizon = run_to;
    const VisitRecord rec = simulate(g, cfg, probes);

    std::optional<ComponentLabeling> final_labels;
    std::optional<BitSet> final_mask;
    auto labels_at_horizon = [&]() -> const ComponentLabeling& {
        if (!final_labels) {
            final_mask = VacancyView(rec, spec.horizon()).mask();
            final_labels = components(g, *final_mask);
        }
        return *final_labels;
    };

    out.success.resize(events.size());
    out.value.resize(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& ev = events[i];
        bool ok = false;
        std::int64_t value = 0;
        switch (ev.spec.kind) {
        case EventKind::JCountGe: {
            const auto j = segment_components(VacancyView(rec, ev.a1), spec.l);
            value = static_cast<std::int64_t>(j.size());
            ok = j.size() >= ev.k;
            break;
        }
        case EventKind::DisjointRanges:
            ok = probes.disjoint[probe_slot[i]].holds();
            value = ok ? 1 : 0;
            break;
        case EventKind::Ubiquity:
            ok = ubiquity(VacancyView(rec, ev.at), ev.k_len, ev.beta);
            value = ok ? 1 : 0;
            break;
        case EventKind::ACountGe: {
            const auto res = probes.surround[probe_slot[i]].result();
            value = static_cast<std::int64_t>(res.indices.size());
            ok = res.indices.size() >= ev.k;
            break;
        }
        case EventKind::GammaGe1: {
            std::uint64_t gamma = 0;
            if (ev.spec.j_source == JSource::ComponentsAtA1) {
                std::vector<Site> anchors;
                for (const auto& s : segment_components(VacancyView(rec, ev.a1), spec.l))
                    anchors.push_back(s.anchor);
                gamma = count_gamma(rec, ev.a1, ev.horizon, anchors, spec.l, &probes.windows[probe_slot[i]].visited());
            } else {
                gamma = count_gamma(rec, 0, ev.horizon, ev.anchors, spec.l);
            }
            value = static_cast<std::int64_t>(gamma);
            ok = gamma >= 1;
            break;
        }
        case EventKind::Giant: {
            if (ev.at == spec.horizon()) {
                const auto& labels = labels_at_horizon();
                const auto rep = giant_component(g, *final_mask, labels, spec.l0, ev.beta);
                value = static_cast<std::int64_t>(rep.outcome);
            } else {
                value = static_cast<std::int64_t>(giant_component(VacancyView(rec, ev.at), spec.l0, ev.beta).outcome);
            }
            ok = value == static_cast<std::int64_t>(GiantOutcome::EventHolds);
            break;
        }
        case EventKind::Theorem: {
            const auto& labels = labels_at_horizon();
            const auto rep = giant_component(g, *final_mask, labels, spec.l0, ev.beta);
            value = static_cast<std::int64_t>(rep.outcome);
            if (rep.outcome == GiantOutcome::EventHolds) {
                ok = vacant_segment_outside(g, *final_mask, labels, *rep.component_id, spec.l);
                if (!ok)
                    value = kTheoremNoOutsideSegment;
            }
            break;
        }
        case EventKind::Predicate:
            ok = ev.spec.predicate(ReplicaContext{spec, g, rec});
            value = ok ? 1 : 0;
            break;
        }
        out.success[i] = ok ? 1 : 0;
        out.value[i] = value;
    }
    return out;
}

/// Replicas [begin, end) on `workers` threads; the result is ordered by replica
/// and independent of the worker count. `on_done` is called under a lock.
inline std::vector<ReplicaOutcome> run_replicas(const ExperimentSpec& spec, std::span<const ResolvedEvent> events,
                                                std::uint64_t begin, std::uint64_t end, unsigned workers = 1,
                                                const std::function<void(const ReplicaOutcome&)>& on_done = {})
{
    std::vector<ReplicaOutcome> out(static_cast<std::size_t>(end - begin));
    std::atomic<std::uint64_t> next{begin};
    std::mutex lock;
    std::exception_ptr failure;
    auto work = [&] {
        for (;;) {
            const auto r = next.fetch_add(1);
            if (r >= end)
                return;
            try {
                auto res = run_replica(spec, events, r);
                std::lock_guard guard(lock);
                if (on_done)
                    on_done(res);
                out[static_cast<std::size_t>(r - begin)] = std::move(res);
            } catch (...) {
                std::lock_guard guard(lock);
                if (!failure)
                    failure = std::current_exception();
                next = end;
                return;
            }
        }
    };
    workers = std::max(1U, workers);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(work);
        for (auto& t : pool)
            t.join();
    }
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

// ---------------------------------------------------------------------------
// Reports

struct EstimateReport {
    std::string event;
    std::uint64_t successes = 0;
    std::uint64_t trials = 0;
    double estimate = 0;
    double ci_low = 0;
    double ci_high = 1;
    std::uint64_t seeds_digest = 0;                               // sum of mixed seeds mod 2^64
    std::vector<std::pair<std::uint64_t, std::uint64_t>> replicas; // half-open ranges
    std::map<std::string, std::uint64_t> distribution;           // per-run statistic -> runs
    double wall_clock_seconds = 0;

    void finalize()
    {
        estimate = trials ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0;
        const auto ci = wilson_interval(successes, trials);
        ci_low = ci.low;
        ci_high = ci.high;
        normalize_ranges();
    }

    void normalize_ranges()
    {
        std::sort(replicas.begin(), replicas.end());
        std::vector<std::pair<std::uint64_t, std::uint64_t>> merged;
        for (const auto& r : replicas) {
            if (!merged.empty() && r.first <= merged.back().second)
                merged.back().second = std::max(merged.back().second, r.second);
            else
                merged.push_back(r);
        }
        replicas = std::move(merged);
    }
};

inline std::uint64_t seed_digest_term(std::uint64_t seed) noexcept { return splitmix64_mix(seed); }

/// One report per event from per-replica outcomes (any order).
inline std::vector<EstimateReport> aggregate(std::span<const ResolvedEvent> events,
                                             std::span<const ReplicaOutcome> outcomes)
{
    std::vector<EstimateReport> reports(events.size());
    for (std::size_t i = 0; i < events.size(); ++i)
        reports[i].event = events[i].spec.name();
    for (const auto& o : outcomes)
        for (std::size_t i = 0; i < events.size(); ++i) {
            auto& r = reports[i];
            r.successes += o.success[i];
            ++r.trials;
            r.seeds_digest += seed_digest_term(o.seed);
            r.replicas.emplace_back(o.replica, o.replica + 1);
            ++r.distribution[value_label(events[i].spec.kind, o.value[i])];
        }
    for (auto& r : reports)
        r.finalize();
    return reports;
}

/// Associative, commutative combination of two reports on the same event.
inline EstimateReport merge(const EstimateReport& a, const EstimateReport& b)
{
    if (a.event != b.event)
        throw ParameterError("cannot merge reports on different events: event");
    EstimateReport m = a;
    m.successes += b.successes;
    m.trials += b.trials;
    m.seeds_digest += b.seeds_digest;
    m.replicas.insert(m.replicas.end(), b.replicas.begin(), b.replicas.end());
    for (const auto& [k, v] : b.distribution)
        m.distribution[k] += v;
    m.wall_clock_seconds += b.wall_clock_seconds;
    m.finalize();
    return m;
}

inline std::vector<ResolvedEvent> resolve_events(const ExperimentSpec& spec, std::span<const EventSpec> events)
{
    std::vector<ResolvedEvent> out;
    for (const auto& e : events)
        out.push_back(resolve_event(spec, e));
    return out;
}

/// Estimates all events on the same `spec.replications` trajectories.
inline std::vector<EstimateReport> estimate_events(const ExperimentSpec& spec, std::span<const EventSpec> events,
                                                   unsigned workers = 1)
{
    spec.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const auto resolved = resolve_events(spec, events);
    const auto outcomes =
        run_replicas(spec, resolved, spec.replica_begin, spec.replica_begin + spec.replications, workers);
    auto reports = aggregate(resolved, outcomes);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (auto& r : reports)
        r.wall_clock_seconds = wall;
    return reports;
}

inline EstimateReport estimate_event(const ExperimentSpec& spec, const EventSpec& event, unsigned workers = 1)
{
    return estimate_events(spec, std::span<const EventSpec>(&event, 1), workers).front();
}

// ---------------------------------------------------------------------------
// Survival of one segment through k excursions

struct SurvivalReport {
    std::int64_t k_target = 0;              // l*(u)
    std::vector<EstimateReport> by_k;       // k = 0..k_max
    std::optional<std::vector<double>> exact;
};

namespace detail {

inline void check_survival_instance(const Torus& g, Site start, Site anchor, std::int64_t l, std::int64_t inner,
                                    std::int64_t outer)
{
    check_excursion_radii(g, inner, outer);
    if (l < 0 || l + 2 > g.side())
        throw ParameterError("segment length needs l + 2 <= N");
    if (segment_sites(g, anchor, 0, l).contains(start))
        throw ParameterError("start lies on the segment");
}

} // namespace detail

inline constexpr std::uint64_t kMaxExactSurvivalSites = 10000;

/// Exact P_start[H_seg > D_k] for k = 0..k_max, where D_k is the k-th departure
/// from B(anchor, r) after entering B(anchor, L); D_0 = 0. Value iteration over
/// (site, phase) states, one layer per departure count, solved by Gauss-Seidel.
inline std::vector<double> survival_exact(const Torus& g, Site start, Site anchor, std::int64_t l,
                                          std::int64_t inner, std::int64_t outer, std::int64_t k_max,
                                          double tol = 1e-14)
{
    detail::check_survival_instance(g, start, anchor, l, inner, outer);
    if (g.volume() > kMaxExactSurvivalSites)
        throw ResourceError("exact survival chain is limited to 1e4 sites");
    const auto n = static_cast<std::size_t>(g.volume());
    const auto seg = segment_sites(g, anchor, 0, l);
    std::vector<std::uint8_t> in_seg(n, 0), in_inner(n, 0), in_outer(n, 0);
    for (Site s : seg)
        in_seg[s] = 1;
    for (Site s = 0; s < n; ++s) {
        const auto dist = g.linf_distance(anchor, s);
        in_inner[s] = dist <= inner;
        in_outer[s] = dist <= outer;
    }
    const double w = 1.0 / g.degree();
    // entry[s]: seeking B(anchor, L); exit[s]: inside, seeking to leave B(anchor, r)
    std::vector<double> prev_entry(n, 1.0), entry(n, 0.0), exit(n, 0.0);
    std::vector<double> out{1.0};
    for (std::int64_t k = 1; k <= k_max; ++k) {
        std::fill(entry.begin(), entry.end(), 0.0);
        std::fill(exit.begin(), exit.end(), 0.0);
        for (int sweep = 0;; ++sweep) {
            double change = 0;
            for (Site s = 0; s < n; ++s) {
                if (in_seg[s])
                    continue;
                double e = 0, x = 0;
                for (int j = 0; j < g.degree(); ++j) {
                    const Site z = g.neighbor(s, j);
                    if (in_seg[z])
                        continue;
                    e += in_inner[z] ? exit[z] : entry[z];
                    x += in_outer[z] ? exit[z] : prev_entry[z];
                }
                e *= w;
                x *= w;
                change = std::max({change, std::fabs(e - entry[s]), std::fabs(x - exit[s])});
                entry[s] = e;
                exit[s] = x;
            }
            if (change <= tol)
                break;
            if (sweep > 10'000'000)
                throw ResourceError("survival chain did not converge");
        }
        out.push_back(in_inner[start] ? exit[start] : entry[start]);
        prev_entry = entry;
    }
    return out;
}

/// Monte Carlo P_0[H_seg > D_k] for k = 0..k_max (k_max defaults to l*(u) = [c2 u L^{d-2}]),
/// with all k read from the same runs, plus the exact value on small tori.
inline SurvivalReport survival_probability(const ExperimentSpec& spec, Site anchor, std::int64_t l,
                                           std::int64_t inner, std::int64_t outer,
                                           std::optional<std::int64_t> k_max = {})
{
    spec.validate();
    const Torus g = spec.geometry();
    const Site start = 0;
    detail::check_survival_instance(g, start, anchor, l, inner, outer);
    SurvivalReport rep;
    rep.k_target = l_star(spec.u, spec.c2, inner, spec.d);
    const std::int64_t kk = k_max.value_or(rep.k_target);
    if (kk < 0)
        throw ParameterError("k must be >= 0");
    const auto t0 = std::chrono::steady_clock::now();
    const auto seg = segment_sites(g, anchor, 0, l);
    std::vector<std::uint64_t> survived(static_cast<std::size_t>(kk) + 1, 0);
    std::uint64_t digest = 0;
    for (std::uint64_t r = spec.replica_begin; r < spec.replica_begin + spec.replications; ++r) {
        const auto seed = derive_stream_seed(spec.master_seed, r);
        digest += seed_digest_term(seed);
        std::size_t departures = 0;
        if (kk > 0) {
            ExcursionTracker tracker(g, anchor, inner, outer, static_cast<std::size_t>(kk));
            Walker w(g, seed, start);
            Site x = w.position();
            for (Time t = 0;; ++t) {
                if (seg.contains(x))
                    break;
                tracker.on_visit(t, x);
                if (tracker.complete())
                    break;
                x = w.step();
            }
            departures = tracker.departures();
        }
        for (std::size_t k = 0; k <= departures && k < survived.size(); ++k)
            ++survived[k];
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (std::int64_t k = 0; k <= kk; ++k) {
        EstimateReport e;
        e.event = "SURVIVAL_K" + std::to_string(k);
        e.successes = survived[static_cast<std::size_t>(k)];
        e.trials = spec.replications;
        e.seeds_digest = digest;
        e.replicas.emplace_back(spec.replica_begin, spec.replica_begin + spec.replications);
        e.wall_clock_seconds = wall;
        e.finalize();
        rep.by_k.push_back(std::move(e));
    }
    if (g.volume() <= kMaxExactSurvivalSites)
        rep.exact = survival_exact(g, start, anchor, l, inner, outer, kk);
    return rep;
}

// ---------------------------------------------------------------------------
// Second moment of the excursion survival count

struct SecondMomentReport {
    std::int64_t k = 0;                 // departures each segment must survive
    std::uint64_t replications = 0;
    double mean = 0;                    // of Gamma-tilde
    double variance = 0;                // sample variance (n - 1)
    std::vector<double> site_probability;
    std::vector<std::vector<double>> covariance; // indicator covariances, |J| <= 32 only
    double covariance_first_pair = 0;
    double covariance_first_pair_se = 0;
    double shape = 0;                   // r^d |J| + u |J|^2 L^d / r
    double shape_constant = 0;          // least-squares fit of variance against shape
};

/// Least-squares C in variance ~ C * shape over the given points.
inline double fit_shape_constant(std::span<const std::pair<double, double>> shape_and_variance)
{
    double num = 0, den = 0;
    for (const auto& [s, v] : shape_and_variance) {
        num += s * v;
        den += s * s;
    }
    return den > 0 ? num / den : 0.0;
}

inline SecondMomentReport second_moment_report(const ExperimentSpec& spec, std::span<const Site> centers,
                                               std::int64_t l, std::int64_t inner, std::int64_t outer)
{
    spec.validate();
    if (centers.empty())
        throw ParameterError("J must be nonempty");
    const Torus g = spec.geometry();
    check_excursion_radii(g, inner, outer);
    const std::size_t m = centers.size();
    SecondMomentReport rep;
    rep.k = l_star(spec.u, spec.c2, inner, spec.d);
    rep.replications = spec.replications;

    // CSR buckets: centers whose outer box contains a site, and centers whose segment does
    auto build = [&](auto&& sites_of) {
        std::vector<std::vector<std::uint32_t>> lists(g.volume());
        for (std::size_t c = 0; c < m; ++c)
            for (Site s : sites_of(centers[c]))
                lists[s].push_back(static_cast<std::uint32_t>(c));
        std::vector<std::uint64_t> offset(g.volume() + 1, 0);
        std::vector<std::uint32_t> items;
        for (Site s = 0; s < g.volume(); ++s) {
            offset[s] = items.size();
            items.insert(items.end(), lists[s].begin(), lists[s].end());
        }
        offset[g.volume()] = items.size();
        return std::pair{std::move(offset), std::move(items)};
    };
    const auto [box_off, box_items] = build([&](Site c) { return linf_ball(g, c, outer); });
    const auto [seg_off, seg_items] = build([&](Site c) { return segment_sites(g, c, 0, l); });

    std::vector<double> sum_ind(m, 0.0);
    std::vector<std::vector<double>> sum_pair(m <= 32 ? m : 0, std::vector<double>(m <= 32 ? m : 0, 0.0));
    double sum_gamma = 0, sum_gamma_sq = 0;
    double sum_01 = 0, sum_01_sq = 0;

    for (std::uint64_t r = spec.replica_begin; r < spec.replica_begin + spec.replications; ++r) {
        const auto seed = derive_stream_seed(spec.master_seed, r);
        std::vector<std::uint8_t> alive(m, 1), done(m, rep.k == 0 ? 1 : 0);
        std::vector<ExcursionTracker> trackers;
        if (rep.k > 0)
            for (Site c : centers)
                trackers.emplace_back(g, c, inner, outer, static_cast<std::size_t>(rep.k));
        std::vector<std::uint64_t> stamp(m, ~std::uint64_t{0});
        std::size_t open = 0;
        for (std::size_t c = 0; c < m; ++c)
            open += done[c] ? 0 : 1;
        Walker w(g, seed, spec.start_site());
        Site x = w.position();
        Site prev = x;
        auto kill = [&](Site s) {
            for (auto i = seg_off[s]; i < seg_off[s + 1]; ++i) {
                const auto c = seg_items[i];
                if (alive[c] && !done[c]) {
                    alive[c] = 0;
                    done[c] = 1;
                    --open;
                }
            }
        };
        // at t = 0 a segment containing the start fails even when k = 0
        for (auto i = seg_off[x]; i < seg_off[x + 1]; ++i)
            alive[seg_items[i]] = 0;
        for (Time t = 0; open > 0; ++t) {
            if (t > 0) {
                prev = x;
                x = w.step();
            }
            kill(x);
            for (Site s : {prev, x})
                for (auto i = box_off[s]; i < box_off[s + 1]; ++i) {
                    const auto c = box_items[i];
                    if (done[c] || stamp[c] == t)
                        continue;
                    stamp[c] = t;
                    trackers[c].on_visit(t, x);
                    if (trackers[c].complete()) {
                        done[c] = 1;
                        --open;
                    }
                }
        }
        double gamma = 0;
        for (std::size_t c = 0; c < m; ++c) {
            gamma += alive[c];
            sum_ind[c] += alive[c];
            for (std::size_t c2 = 0; c2 < sum_pair.size(); ++c2)
                sum_pair[c][c2] += alive[c] * alive[c2];
        }
        sum_gamma += gamma;
        sum_gamma_sq += gamma * gamma;
        if (m >= 2) {
            const double prod = static_cast<double>(alive[0]) * alive[1];
            sum_01 += prod;
            sum_01_sq += prod * prod;
        }
    }
    const double n = static_cast<double>(spec.replications);
    rep.mean = sum_gamma / n;
    rep.variance = n > 1 ? (sum_gamma_sq - n * rep.mean * rep.mean) / (n - 1) : 0.0;
    for (std::size_t c = 0; c < m; ++c)
        rep.site_probability.push_back(sum_ind[c] / n);
    rep.covariance.assign(sum_pair.size(), std::vector<double>(sum_pair.size(), 0.0));
    for (std::size_t a = 0; a < sum_pair.size(); ++a)
        for (std::size_t b = 0; b < sum_pair.size(); ++b)
            rep.covariance[a][b] = sum_pair[a][b] / n - rep.site_probability[a] * rep.site_probability[b];
    if (m >= 2) {
        const double mean_prod = sum_01 / n;
        rep.covariance_first_pair = mean_prod - rep.site_probability[0] * rep.site_probability[1];
        const double var_prod = n > 1 ? (sum_01_sq - n * mean_prod * mean_prod) / (n - 1) : 0.0;
        rep.covariance_first_pair_se = std::sqrt(std::max(0.0, var_prod) / n);
    }
    const double J = static_cast<double>(m);
    rep.shape = std::pow(static_cast<double>(outer), spec.d) * J +
                spec.u * J * J * std::pow(static_cast<double>(inner), spec.d) / static_cast<double>(outer);
    const std::pair<double, double> point{rep.shape, rep.variance};
    rep.shape_constant = fit_shape_constant(std::span(&point, 1));
    return rep;
}

// ---------------------------------------------------------------------------
// Monte Carlo cross-checks for the potential-theory module

struct MeanEstimate {
    double mean = 0;
    double std_error = 0;
    std::uint64_t samples = 0;
};

/// Frequency of H_A <= T_B from x over `walks` seeded walks.
inline EstimateReport estimate_hit_probability(const Torus& g, const SiteSet& a, const SiteSet& b, Site x,
                                               std::uint64_t walks, std::uint64_t master_seed)
{
    if (!a.is_subset_of(b) || !b.contains(x) || b.size() == g.volume())
        throw ParameterError("need A subset of B, x in B, B a proper subset");
    EstimateReport rep;
    rep.event = "HIT_BEFORE_EXIT";
    for (std::uint64_t r = 0; r < walks; ++r) {
        const auto seed = derive_stream_seed(master_seed, r);
        rep.seeds_digest += seed_digest_term(seed);
        Walker w(g, seed, x);
        Site y = x;
        for (;;) {
            if (a.contains(y)) {
                ++rep.successes;
                break;
            }
            if (!b.contains(y))
                break;
            y = w.step();
        }
    }
    rep.trials = walks;
    rep.replicas.emplace_back(0, walks);
    rep.finalize();
    return rep;
}

/// Sample mean of T_B from x.
inline MeanEstimate estimate_exit_time(const Torus& g, const SiteSet& b, Site x, std::uint64_t walks,
                                       std::uint64_t master_seed)
{
    if (!b.contains(x) || b.size() == g.volume())
        throw ParameterError("need x in B and B a proper subset");
    double sum = 0, sum_sq = 0;
    for (std::uint64_t r = 0; r < walks; ++r) {
        Walker w(g, derive_stream_seed(master_seed, r), x);
        Time t = 0;
        for (Site y = x; b.contains(y); y = w.step())
            ++t;
        const double v = static_cast<double>(t);
        sum += v;
        sum_sq += v * v;
    }
    MeanEstimate m;
    m.samples = walks;
    m.mean = sum / static_cast<double>(walks);
    const double var = walks > 1 ? (sum_sq - static_cast<double>(walks) * m.mean * m.mean) / static_cast<double>(walks - 1) : 0.0;
    m.std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(walks));
    return m;
}

/// Empirical P_x[T_B >= threshold] from `walks` seeded walks.
inline double exit_time_tail(const Torus& g, const SiteSet& b, Site x, Time threshold, std::uint64_t walks,
                             std::uint64_t master_seed)
{
    std::uint64_t hits = 0;
    for (std::uint64_t r = 0; r < walks; ++r) {
        Walker w(g, derive_stream_seed(master_seed, r), x);
        Time t = 0;
        for (Site y = x; b.contains(y) && t < threshold; y = w.step())
            ++t;
        hits += t >= threshold ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(walks);
}

} // namespace vacant
