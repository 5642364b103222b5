#pragma once

#include <charconv>
#include <chrono>
#include <ctime>
#include <string>
#include <vector>

#include <json.hpp>

#include "vacant/estimators.hpp"

namespace vacant {

using Json = nlohmann::json;

/// Shortest round-trip text for a double.
inline std::string format_double(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, ptr) : std::to_string(v);
}

inline Json to_json(const EstimateReport& r)
{
    Json ranges = Json::array();
    for (const auto& [b, e] : r.replicas)
        ranges.push_back({b, e});
    Json dist = Json::object();
    for (const auto& [k, v] : r.distribution)
        dist[k] = v;
    return Json{{"event", r.event},
                {"successes", r.successes},
                {"trials", r.trials},
                {"estimate", r.estimate},
                {"ci_low", r.ci_low},
                {"ci_high", r.ci_high},
                {"seeds_digest", r.seeds_digest},
                {"replicas", ranges},
                {"distribution", dist}};
}

inline EstimateReport estimate_report_from_json(const Json& j)
{
    EstimateReport r;
    r.event = j.at("event").get<std::string>();
    r.successes = j.at("successes").get<std::uint64_t>();
    r.trials = j.at("trials").get<std::uint64_t>();
    r.seeds_digest = j.at("seeds_digest").get<std::uint64_t>();
    for (const auto& range : j.at("replicas"))
        r.replicas.emplace_back(range.at(0).get<std::uint64_t>(), range.at(1).get<std::uint64_t>());
    for (const auto& [k, v] : j.at("distribution").items())
        r.distribution[k] = v.get<std::uint64_t>();
    r.finalize();
    return r;
}

inline std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// The byte-stable part of a report: everything except the manifest.
inline std::string canonical_section(const Json& report)
{
    Json c = Json::object();
    c["spec"] = report.at("spec");
    c["results"] = report.at("results");
    return c.dump(2);
}

} // namespace vacant
