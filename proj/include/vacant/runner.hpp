#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vacant/config.hpp"
#include "vacant/constants.hpp"
#include "vacant/estimators.hpp"
#include "vacant/greenfn.hpp"
#include "vacant/report.hpp"
#include "vacant/vacancy.hpp"
#include "vacant/walk.hpp"

namespace vacant::cli {

inline constexpr const char* kToolName = "vacantlab";
inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigInvalid = 2, kResourceGuard = 3 };

namespace fs = std::filesystem;

/// Reads typed values from a FlatConfig and remembers the effective value of
/// every key it was asked about, defaults included, for the manifest.
class Resolver {
public:
    explicit Resolver(const FlatConfig& cfg) : cfg_(cfg) {}

    template <class Int>
    Int integer(const std::string& key, Int fallback)
    {
        const Int v = cfg_.get_int<Int>(key, fallback);
        resolved_.set(key, std::to_string(v));
        return v;
    }
    double number(const std::string& key, double fallback)
    {
        const double v = cfg_.get_double(key, fallback);
        resolved_.set(key, format_double(v));
        return v;
    }
    bool flag(const std::string& key, bool fallback)
    {
        const bool v = cfg_.get_bool(key, fallback);
        resolved_.set(key, v ? "true" : "false");
        return v;
    }
    std::string text(const std::string& key, const std::string& fallback)
    {
        const auto v = cfg_.get_string(key, fallback);
        resolved_.set(key, v);
        return v;
    }
    std::vector<std::string> list(const std::string& key, const std::string& fallback)
    {
        FlatConfig tmp;
        tmp.set(key, cfg_.get_string(key, fallback));
        auto v = tmp.get_list(key);
        resolved_.set(key, join(v));
        return v;
    }
    std::vector<double> numbers(const std::string& key, const std::string& fallback)
    {
        FlatConfig tmp;
        tmp.set(key, cfg_.get_string(key, fallback));
        auto v = tmp.get_double_list(key);
        std::vector<std::string> s;
        for (double x : v)
            s.push_back(format_double(x));
        resolved_.set(key, join(s));
        return v;
    }
    template <class Int>
    std::vector<Int> integers(const std::string& key, const std::string& fallback)
    {
        FlatConfig tmp;
        tmp.set(key, cfg_.get_string(key, fallback));
        auto v = tmp.get_int_list<Int>(key);
        std::vector<std::string> s;
        for (auto x : v)
            s.push_back(std::to_string(x));
        resolved_.set(key, join(s));
        return v;
    }
    /// Keys that must not appear in the resolved config (operational only).
    void forget(const std::string& key) { resolved_.erase(key); }

    const FlatConfig& resolved() const noexcept { return resolved_; }

private:
    static std::string join(const std::vector<std::string>& v)
    {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i)
            out += (i ? "," : "") + v[i];
        return out;
    }

    const FlatConfig& cfg_;
    FlatConfig resolved_;
};

struct Context {
    fs::path out_dir = ".";
    std::ostream* log = &std::cout;
    unsigned default_workers = 1;
};

inline unsigned workers_from_env()
{
    if (const char* v = std::getenv("VACANT_WORKERS")) {
        try {
            const long w = std::stol(v);
            if (w >= 1)
                return static_cast<unsigned>(w);
        } catch (const std::exception&) {
        }
    }
    return 1;
}

inline void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ResourceError("cannot write " + path.string());
    out << text;
}

inline Json manifest(const std::string& subcommand, const FlatConfig& resolved, double wall_clock)
{
    Json cfg = Json::object();
    for (const auto& [k, v] : resolved.values())
        cfg[k] = v;
    return Json{{"tool", kToolName},
                {"version", kToolVersion},
                {"subcommand", subcommand},
                {"created_utc", utc_timestamp()},
                {"wall_clock_seconds", wall_clock},
                {"config", cfg}};
}

inline void write_report(const Context& ctx, const Json& report)
{
    write_text(ctx.out_dir / "report.json", report.dump(2) + "\n");
}

inline std::optional<Site> parse_start(const Torus& g, const std::string& v)
{
    if (v == "uniform")
        return std::nullopt;
    if (v == "origin")
        return Site{0};
    FlatConfig tmp;
    tmp.set("start", v);
    const auto s = tmp.get_int<std::uint64_t>("start", 0);
    if (!g.valid(s))
        throw ConfigError("start", "start site outside the torus");
    return s;
}

inline Torus make_torus(Resolver& r)
{
    const int d = r.integer<int>("d", 3);
    const auto n = r.integer<std::int64_t>("N", 10);
    if (d < 1)
        throw ConfigError("d", "d must be >= 1");
    if (n < 3)
        throw ConfigError("N", "N must be >= 3");
    try {
        return Torus(d, n);
    } catch (const ParameterError& e) {
        throw ConfigError("N", e.what());
    }
}

inline WalkConfig make_walk(Resolver& r, const Torus& g)
{
    WalkConfig w;
    const double u = r.number("u", 1.0);
    if (!(u > 0))
        throw ConfigError("u", "u must be positive");
    Time h = 0;
    try {
        h = time_horizon(u, g.side(), g.dim());
    } catch (const ParameterError& e) {
        throw ConfigError("u", e.what());
    }
    w.horizon = r.integer<Time>("horizon", h);
    w.seed = r.integer<std::uint64_t>("seed", 1);
    w.start = parse_start(g, r.text("start", "uniform"));
    return w;
}

// ---------------------------------------------------------------------------

inline int run_simulate(const FlatConfig& cfg, const Context& ctx)
{
    cfg.require_known({"d", "N", "u", "horizon", "seed", "start", "trajectory", "dump"});
    Resolver r(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const Torus g = make_torus(r);
    auto w = make_walk(r, g);
    w.store_trajectory = r.flag("trajectory", false);
    const bool dump = r.flag("dump", false);
    const auto rec = simulate(g, w);
    const auto hash = trajectory_hash(g, w);
    if (dump) {
        std::ofstream out(ctx.out_dir / "record.bin", std::ios::binary);
        write_visit_record(out, rec);
    }
    if (w.store_trajectory) {
        std::ostringstream csv;
        csv << "t,site\n";
        for (std::size_t t = 0; t < rec.trajectory.size(); ++t)
            csv << t << ',' << rec.trajectory[t] << '\n';
        write_text(ctx.out_dir / "trajectory.csv", csv.str());
    }
    Json spec = Json::object();
    for (const auto& [k, v] : r.resolved().values())
        spec[k] = v;
    Json results{{"start_site", rec.start_site},
                 {"end_site", rec.end_site},
                 {"final_time", rec.final_time},
                 {"visited_sites", rec.visited_count()},
                 {"vacant_sites", g.volume() - rec.visited_count()},
                 {"trajectory_hash", hash}};
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_report(ctx, Json{{"manifest", manifest("simulate", r.resolved(), wall)}, {"spec", spec}, {"results", results}});
    write_text(ctx.out_dir / "run.cfg", r.resolved().render());
    *ctx.log << results.dump() << "\n";
    return kOk;
}

inline int run_components(const FlatConfig& cfg, const Context& ctx)
{
    cfg.require_known({"d", "N", "u", "horizon", "seed", "start", "t", "l", "l0", "beta", "ubiquity_len"});
    Resolver r(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const Torus g = make_torus(r);
    const auto w = make_walk(r, g);
    const Time t = r.integer<Time>("t", w.horizon);
    if (t > w.horizon)
        throw ConfigError("t", "t must not exceed the horizon");
    const auto l = r.integer<std::int64_t>("l", 1);
    if (l < 0 || l + 2 > g.side())
        throw ConfigError("l", "l must satisfy 0 <= l and l + 2 <= N");
    const auto l0 = r.integer<std::int64_t>("l0", 2);
    if (l0 < 1 || l0 > g.side())
        throw ConfigError("l0", "l0 must satisfy 1 <= l0 <= N");
    const double beta = r.number("beta", 0.5);
    if (!(beta > 0 && beta < 1))
        throw ConfigError("beta", "beta must lie in (0, 1)");
    const auto k_len = r.integer<std::int64_t>("ubiquity_len", l0);
    if (k_len < 1)
        throw ConfigError("ubiquity_len", "ubiquity_len must be >= 1");

    const auto rec = simulate(g, w);
    const VacancyView view(rec, t);
    const auto mask = view.mask();
    const auto labels = components(g, mask);
    const auto hist = component_size_histogram(labels);
    const auto segs = segment_components(g, mask, l);
    const auto giant = giant_component(g, mask, labels, l0, beta);
    const bool ubi = ubiquity(g, mask, k_len, beta);

    std::ostringstream seg_csv, hist_csv;
    write_segment_csv(seg_csv, g, segs);
    write_histogram_csv(hist_csv, hist);
    write_text(ctx.out_dir / "segments.csv", seg_csv.str());
    write_text(ctx.out_dir / "histogram.csv", hist_csv.str());

    Json spec = Json::object();
    for (const auto& [k, v] : r.resolved().values())
        spec[k] = v;
    Json giant_json{{"outcome", to_string(giant.outcome)},
                    {"qualifying_segments", giant.qualifying_segment_count},
                    {"unique", giant.unique},
                    {"size", giant.size},
                    {"beta_dense", giant.beta_dense},
                    {"density_radius", giant.density_radius},
                    {"max_distance", giant.max_distance}};
    Json results{{"vacant_sites", labels.vacant_sites()},
                 {"components", labels.count()},
                 {"largest", hist.largest},
                 {"second_largest", hist.second_largest},
                 {"segment_components", segs.size()},
                 {"giant", giant_json},
                 {"ubiquity", ubi}};
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_report(ctx, Json{{"manifest", manifest("components", r.resolved(), wall)}, {"spec", spec}, {"results", results}});
    write_text(ctx.out_dir / "run.cfg", r.resolved().render());
    *ctx.log << results.dump() << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------
// estimate

inline EventKind parse_event_kind(const std::string& name)
{
    static const std::map<std::string, EventKind> kinds{
        {"J_COUNT_GE", EventKind::JCountGe}, {"DISJOINT_RANGES", EventKind::DisjointRanges},
        {"UBIQUITY", EventKind::Ubiquity},   {"A_COUNT_GE", EventKind::ACountGe},
        {"GAMMA_GE_1", EventKind::GammaGe1}, {"GIANT", EventKind::Giant},
        {"THEOREM", EventKind::Theorem}};
    auto it = kinds.find(name);
    if (it == kinds.end())
        throw ConfigError("events", "unknown event '" + name + "'");
    return it->second;
}

struct EstimatePlan {
    ExperimentSpec base;
    std::vector<double> u_grid;
    std::vector<EventSpec> events;
    Json spec_json;
    unsigned workers = 1;
    bool resume = false;
    std::uint64_t stop_after = 0;
    FlatConfig resolved;
};

inline const std::set<std::string>& estimate_keys()
{
    static const std::set<std::string> keys{
        "d", "N", "u", "u_grid", "nu", "l", "l0", "beta", "c2", "replications", "seed", "start",
        "replica_begin", "events", "k", "a0", "a1", "ubiquity_len", "at", "j_source", "j_sites", "j_count",
        "gamma_horizon", "workers", "resume", "stop_after"};
    return keys;
}

inline EstimatePlan plan_estimate(const FlatConfig& cfg, const Context& ctx)
{
    cfg.require_known(estimate_keys());
    Resolver r(cfg);
    EstimatePlan p;
    auto& s = p.base;
    s.d = r.integer<int>("d", 3);
    s.N = r.integer<std::int64_t>("N", 10);
    s.nu = r.number("nu", 0.1);
    s.l = r.integer<std::int64_t>("l", 1);
    s.l0 = r.integer<std::int64_t>("l0", 2);
    s.beta = r.number("beta", 0.5);
    s.c2 = r.number("c2", 1.0);
    s.replications = r.integer<std::uint64_t>("replications", 100);
    s.master_seed = r.integer<std::uint64_t>("seed", 1);
    s.replica_begin = r.integer<std::uint64_t>("replica_begin", 0);
    const auto start = r.text("start", "uniform");
    if (start == "uniform")
        s.start = StartMode::Uniform;
    else if (start == "origin")
        s.start = StartMode::Origin;
    else
        throw ConfigError("start", "start must be uniform or origin");
    if (cfg.has("u_grid") && cfg.has("u"))
        throw ConfigError("u_grid", "give either u or u_grid, not both");
    if (cfg.has("u_grid")) {
        p.u_grid = r.numbers("u_grid", "");
        if (p.u_grid.empty())
            throw ConfigError("u_grid", "u_grid is empty");
    } else {
        p.u_grid = {r.number("u", 1.0)};
    }
    for (double u : p.u_grid) {
        s.u = u;
        s.validate();
    }
    s.u = p.u_grid.front();

    const auto names = r.list("events", "GAMMA_GE_1");
    if (names.empty())
        throw ConfigError("events", "no events requested");
    const auto j_source = r.text("j_source", "components");
    JSource src = JSource::ComponentsAtA1;
    if (j_source == "explicit")
        src = JSource::Explicit;
    else if (j_source == "random")
        src = JSource::RandomFixed;
    else if (j_source != "components")
        throw ConfigError("j_source", "j_source must be components, explicit or random");
    const auto j_sites = r.integers<std::uint64_t>("j_sites", "");
    if (src == JSource::Explicit && j_sites.empty())
        throw ConfigError("j_sites", "explicit J needs j_sites");
    const auto j_count = r.integer<std::uint64_t>("j_count", 1);
    Json params = Json::object();
    for (const auto& name : names) {
        EventSpec e;
        e.kind = parse_event_kind(name);
        if (cfg.has("k"))
            e.k = r.integer<std::uint64_t>("k", 0);
        if (cfg.has("a0"))
            e.a0 = r.integer<Time>("a0", 0);
        if (cfg.has("a1"))
            e.a1 = r.integer<Time>("a1", 0);
        if (cfg.has("ubiquity_len"))
            e.k_len = r.integer<std::int64_t>("ubiquity_len", 1);
        if (cfg.has("at"))
            e.at = r.integer<Time>("at", 0);
        if (cfg.has("gamma_horizon"))
            e.horizon = r.integer<Time>("gamma_horizon", 0);
        e.j_source = src;
        e.j_sites = j_sites;
        e.j_random_count = j_count;
        try {
            for (double u : p.u_grid) {
                ExperimentSpec probe = s;
                probe.u = u;
                (void)resolve_event(probe, e);
            }
        } catch (const ParameterError& err) {
            throw ConfigError("events", name + ": " + err.what());
        }
        p.events.push_back(std::move(e));
    }
    p.workers = r.integer<unsigned>("workers", ctx.default_workers);
    if (p.workers < 1)
        throw ConfigError("workers", "workers must be >= 1");
    p.resume = r.flag("resume", false);
    p.stop_after = r.integer<std::uint64_t>("stop_after", 0);

    // canonical spec: what the numbers mean, not how or where they were computed
    p.resolved = r.resolved();
    Json spec = Json::object();
    for (const auto& [k, v] : p.resolved.values())
        spec[k] = v;
    for (const char* op : {"replications", "replica_begin", "workers", "resume", "stop_after"})
        spec.erase(op);
    p.spec_json = spec;
    p.resolved.erase("resume");
    p.resolved.erase("stop_after");
    return p;
}

inline Json point_json(double u, Time horizon, const std::vector<EstimateReport>& reports)
{
    Json evs = Json::array();
    for (const auto& r : reports)
        evs.push_back(to_json(r));
    return Json{{"u", u}, {"horizon", horizon}, {"events", evs}};
}

inline std::string sweep_csv(const Json& results)
{
    std::ostringstream csv;
    csv << "u,horizon,event,successes,trials,estimate,ci_low,ci_high\n";
    for (const auto& p : results.at("points"))
        for (const auto& e : p.at("events"))
            csv << format_double(p.at("u").get<double>()) << ',' << p.at("horizon").get<Time>() << ','
                << e.at("event").get<std::string>() << ',' << e.at("successes").get<std::uint64_t>() << ','
                << e.at("trials").get<std::uint64_t>() << ',' << format_double(e.at("estimate").get<double>())
                << ',' << format_double(e.at("ci_low").get<double>()) << ','
                << format_double(e.at("ci_high").get<double>()) << '\n';
    return csv.str();
}

inline Json outcome_json(std::size_t point, const ReplicaOutcome& o)
{
    return Json{{"point", point}, {"replica", o.replica}, {"seed", o.seed}, {"success", o.success}, {"value", o.value}};
}

inline int run_estimate(const FlatConfig& cfg, const Context& ctx)
{
    auto plan = plan_estimate(cfg, ctx);
    const auto t0 = std::chrono::steady_clock::now();
    const auto ckpt_path = ctx.out_dir / "checkpoint.jsonl";
    const std::string header = Json{{"spec", plan.spec_json},
                                    {"replications", plan.base.replications},
                                    {"replica_begin", plan.base.replica_begin}}
                                   .dump();

    // replica outcomes per grid point, keyed by replica index
    std::vector<std::map<std::uint64_t, ReplicaOutcome>> done(plan.u_grid.size());
    if (plan.resume && fs::exists(ckpt_path)) {
        std::ifstream in(ckpt_path);
        std::string line;
        if (!std::getline(in, line) || line != header)
            throw ConfigError("resume", "checkpoint belongs to a different configuration");
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            Json j;
            try {
                j = Json::parse(line);
            } catch (const Json::exception&) {
                break; // torn final line from an interrupted write
            }
            ReplicaOutcome o;
            o.replica = j.at("replica").get<std::uint64_t>();
            o.seed = j.at("seed").get<std::uint64_t>();
            o.success = j.at("success").get<std::vector<std::uint8_t>>();
            o.value = j.at("value").get<std::vector<std::int64_t>>();
            const auto point = j.at("point").get<std::size_t>();
            if (point < done.size())
                done[point][o.replica] = std::move(o);
        }
    }
    std::ofstream ckpt;
    if (plan.resume && fs::exists(ckpt_path)) {
        ckpt.open(ckpt_path, std::ios::app);
    } else {
        ckpt.open(ckpt_path, std::ios::trunc);
        ckpt << header << '\n';
    }
    if (!ckpt)
        throw ResourceError("cannot write " + ckpt_path.string());

    std::uint64_t budget = plan.stop_after;
    const std::uint64_t begin = plan.base.replica_begin, end = begin + plan.base.replications;
    Json points = Json::array();
    bool stopped = false;
    for (std::size_t pi = 0; pi < plan.u_grid.size() && !stopped; ++pi) {
        ExperimentSpec spec = plan.base;
        spec.u = plan.u_grid[pi];
        const auto resolved = resolve_events(spec, plan.events);
        for (std::uint64_t r = begin; r < end && !stopped;) {
            if (done[pi].count(r)) {
                ++r;
                continue;
            }
            std::uint64_t stop = r;
            while (stop < end && !done[pi].count(stop))
                ++stop;
            if (plan.stop_after > 0)
                stop = std::min(stop, r + budget);
            auto chunk = run_replicas(spec, resolved, r, stop, plan.workers, [&](const ReplicaOutcome& o) {
                ckpt << outcome_json(pi, o).dump() << '\n';
                ckpt.flush();
            });
            for (auto& o : chunk)
                done[pi][o.replica] = std::move(o);
            if (plan.stop_after > 0) {
                budget -= stop - r;
                if (budget == 0 && (stop < end || pi + 1 < plan.u_grid.size()))
                    stopped = true;
            }
            r = stop;
        }
        if (stopped)
            break;
        std::vector<ReplicaOutcome> outs;
        for (auto& [k, o] : done[pi])
            if (k >= begin && k < end)
                outs.push_back(o);
        points.push_back(point_json(spec.u, spec.horizon(), aggregate(resolved, outs)));
    }
    if (stopped) {
        *ctx.log << "stopped after " << plan.stop_after << " replicas; rerun with --resume true to continue\n";
        return kOk;
    }

    Json warnings = Json::array();
    for (const auto& w : spec_warnings(plan.base))
        warnings.push_back(w);
    Json results{{"points", points}, {"warnings", warnings}};
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Json m = manifest("estimate", plan.resolved, wall);
    m["workers"] = plan.workers;
    m["master_seed"] = plan.base.master_seed;
    const Json report{{"manifest", m}, {"spec", plan.spec_json}, {"results", results}};
    write_report(ctx, report);
    write_text(ctx.out_dir / "sweep.csv", sweep_csv(results));
    write_text(ctx.out_dir / "run.cfg", plan.resolved.render());
    *ctx.log << sweep_csv(results);
    return kOk;
}

// ---------------------------------------------------------------------------
// merge

/// Combines shard reports that share a spec section.
inline Json merge_reports(const std::vector<Json>& reports)
{
    if (reports.empty())
        throw ParameterError("nothing to merge");
    const Json& spec = reports.front().at("spec");
    for (std::size_t i = 1; i < reports.size(); ++i) {
        const Json& other = reports[i].at("spec");
        std::set<std::string> keys;
        for (const auto& [k, v] : spec.items())
            keys.insert(k);
        for (const auto& [k, v] : other.items())
            keys.insert(k);
        for (const auto& k : keys)
            if (!spec.contains(k) || !other.contains(k) || spec.at(k) != other.at(k))
                throw ConfigError(k, "reports differ in spec field '" + k + "'");
    }
    Json points = Json::array();
    const auto& first = reports.front().at("results").at("points");
    for (std::size_t pi = 0; pi < first.size(); ++pi) {
        std::vector<EstimateReport> merged;
        for (const auto& e : first[pi].at("events"))
            merged.push_back(estimate_report_from_json(e));
        for (std::size_t i = 1; i < reports.size(); ++i) {
            const auto& pts = reports[i].at("results").at("points");
            if (pts.size() != first.size() || pts[pi].at("u") != first[pi].at("u"))
                throw ConfigError("u_grid", "reports differ in their u grid");
            const auto& evs = pts[pi].at("events");
            if (evs.size() != merged.size())
                throw ConfigError("events", "reports differ in their event lists");
            for (std::size_t k = 0; k < merged.size(); ++k)
                merged[k] = merge(merged[k], estimate_report_from_json(evs[k]));
        }
        points.push_back(point_json(first[pi].at("u").get<double>(), first[pi].at("horizon").get<Time>(), merged));
    }
    return Json{{"spec", spec}, {"results", {{"points", points}, {"warnings", reports.front().at("results").at("warnings")}}}};
}

inline int run_merge(const std::vector<fs::path>& inputs, const Context& ctx)
{
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Json> reports;
    for (const auto& p : inputs) {
        std::ifstream in(p);
        if (!in)
            throw ResourceError("cannot read " + p.string());
        try {
            reports.push_back(Json::parse(in));
        } catch (const Json::exception& e) {
            throw ConfigError(p.string(), std::string("not a report: ") + e.what());
        }
    }
    Json merged = merge_reports(reports);
    FlatConfig resolved;
    std::string list;
    for (std::size_t i = 0; i < inputs.size(); ++i)
        list += (i ? "," : "") + inputs[i].string();
    resolved.set("inputs", list);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    merged["manifest"] = manifest("merge", resolved, wall);
    write_report(ctx, merged);
    write_text(ctx.out_dir / "sweep.csv", sweep_csv(merged.at("results")));
    *ctx.log << sweep_csv(merged.at("results"));
    return kOk;
}

// ---------------------------------------------------------------------------
// constants

inline int run_constants(const FlatConfig& cfg, const Context& ctx)
{
    cfg.require_known({"dims", "d0", "band", "N", "d", "u", "nu", "c2", "mc_walks", "mc_cap", "mc_roulette", "seed"});
    Resolver r(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const auto dims = r.integers<int>("dims", "3,4,5");
    for (int d : dims)
        if (d < 1)
            throw ConfigError("dims", "dimensions must be >= 1");
    Json rows = Json::array();
    for (int d : dims) {
        Json row{{"d", d}, {"q", return_prob_q(d)}};
        row["d0_predicate"] = d >= 3 ? Json(d0_predicate_value(d)) : Json(nullptr);
        rows.push_back(row);
        *ctx.log << row.dump() << "\n";
    }
    Json results{{"return_probabilities", rows}};
    if (r.flag("d0", false)) {
        const auto band = r.integer<int>("band", 50);
        if (band < 0)
            throw ConfigError("band", "band must be >= 0");
        const auto tr = compute_d0(band);
        Json trace = Json::array();
        for (const auto& [d, v] : tr.trace)
            trace.push_back({d, v});
        results["d0"] = {{"value", tr.d0}, {"band", band}, {"trace", trace}};
        *ctx.log << Json{{"d0", tr.d0}}.dump() << "\n";
    }
    if (cfg.has("N")) {
        const auto n = r.integer<std::int64_t>("N", 0);
        const int d = r.integer<int>("d", 5);
        const double u = r.number("u", 1.0), nu = r.number("nu", 0.1), c2 = r.number("c2", 1.0);
        ScaleSet s;
        try {
            s = derive_scales(n, d, u, nu, c2);
        } catch (const ParameterError& e) {
            throw ConfigError("N", e.what());
        }
        Json sj{{"N", s.N}, {"d", s.d}, {"u", s.u}, {"nu", s.nu}, {"c2", s.c2},
                {"beta0", s.beta0}, {"alpha0", s.alpha0}, {"beta1", s.beta1}, {"alpha1", s.alpha1},
                {"b0", s.b0}, {"a0", s.a0}, {"b1", s.b1}, {"a1", s.a1},
                {"l", s.l}, {"L", s.L}, {"r_default", s.r_default}, {"r_upper", s.r_upper},
                {"r_shape_holds", s.r_shape_holds}, {"l_star", s.l_star}, {"horizon", s.horizon ? Json(*s.horizon) : Json(nullptr)},
                {"nu_admissible", s.nu_admissible}};
        results["scales"] = sj;
        *ctx.log << sj.dump() << "\n";
    }
    const auto walks = r.integer<std::uint64_t>("mc_walks", 0);
    if (walks > 0) {
        const auto cap = r.integer<std::uint64_t>("mc_cap", 1000000);
        const auto roulette = r.integer<std::int64_t>("mc_roulette", 16);
        const auto seed = r.integer<std::uint64_t>("seed", 1);
        const int d = dims.empty() ? 3 : dims.front();
        const auto mc = return_frequency_mc(d, walks, cap, seed, roulette);
        results["monte_carlo"] = {{"d", d}, {"walks", mc.walks}, {"cap", mc.cap}, {"estimate", mc.estimate},
                                  {"std_error", mc.std_error}, {"tail_bound", mc.tail_bound}};
        *ctx.log << results["monte_carlo"].dump() << "\n";
    }
    Json spec = Json::object();
    for (const auto& [k, v] : r.resolved().values())
        spec[k] = v;
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_report(ctx, Json{{"manifest", manifest("constants", r.resolved(), wall)}, {"spec", spec}, {"results", results}});
    write_text(ctx.out_dir / "run.cfg", r.resolved().render());
    return kOk;
}

// ---------------------------------------------------------------------------
// greenfn

inline int run_greenfn(const FlatConfig& cfg, const Context& ctx)
{
    cfg.require_known({"d", "N", "b_radius", "a_radius", "x", "tol", "table"});
    Resolver r(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const Torus g = make_torus(r);
    const auto b_radius = r.integer<std::int64_t>("b_radius", 2);
    const auto a_radius = r.integer<std::int64_t>("a_radius", 0);
    if (b_radius < 0 || 2 * b_radius + 1 >= g.side())
        throw ConfigError("b_radius", "B(0, b_radius) must be a proper subset of the torus");
    if (a_radius < 0 || a_radius > b_radius)
        throw ConfigError("a_radius", "a_radius must satisfy 0 <= a_radius <= b_radius");
    const auto x = r.integer<std::uint64_t>("x", 0);
    const auto b = linf_ball(g, 0, b_radius);
    const auto a = linf_ball(g, 0, a_radius);
    if (!b.contains(x))
        throw ConfigError("x", "x must lie in B");
    const double tol = r.number("tol", kDefaultSolverTol);
    if (!(tol > 0))
        throw ConfigError("tol", "tol must be positive");
    const bool table = r.flag("table", false);

    const auto bounds = sandwich(g, a, b, x, tol);
    if (table) {
        std::ostringstream csv;
        write_green_csv(csv, green_killed(g, b, tol));
        write_text(ctx.out_dir / "green.csv", csv.str());
    }
    std::ostringstream bcsv;
    write_bounds_csv(bcsv, std::span(&bounds, 1));
    write_text(ctx.out_dir / "bounds.csv", bcsv.str());
    Json spec = Json::object();
    for (const auto& [k, v] : r.resolved().values())
        spec[k] = v;
    Json results{{"domain_size", b.size()},
                 {"exit_time", expected_exit_time(g, b, x, tol)},
                 {"lower", bounds.lower},
                 {"exact", bounds.exact},
                 {"upper", bounds.upper},
                 {"gap", bounds.gap()}};
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_report(ctx, Json{{"manifest", manifest("greenfn", r.resolved(), wall)}, {"spec", spec}, {"results", results}});
    write_text(ctx.out_dir / "run.cfg", r.resolved().render());
    *ctx.log << results.dump() << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------

/// Runs one subcommand and maps failures to exit codes, naming the bad key.
inline int dispatch(const std::string& sub, const FlatConfig& cfg, const std::vector<fs::path>& inputs,
                    const Context& ctx, std::ostream& err)
{
    try {
        fs::create_directories(ctx.out_dir);
        if (sub == "simulate")
            return run_simulate(cfg, ctx);
        if (sub == "components")
            return run_components(cfg, ctx);
        if (sub == "estimate")
            return run_estimate(cfg, ctx);
        if (sub == "constants")
            return run_constants(cfg, ctx);
        if (sub == "greenfn")
            return run_greenfn(cfg, ctx);
        if (sub == "merge")
            return run_merge(inputs, ctx);
        err << "unknown subcommand '" << sub << "'\n";
        return kConfigInvalid;
    } catch (const ConfigError& e) {
        err << "config error [" << e.key() << "]: " << e.what() << "\n";
        return kConfigInvalid;
    } catch (const ParameterError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigInvalid;
    } catch (const ResourceError& e) {
        err << "resource limit: " << e.what() << "\n";
        return kResourceGuard;
    } catch (const std::bad_alloc&) {
        err << "resource limit: out of memory\n";
        return kResourceGuard;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
}

} // namespace vacant::cli
