#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "vacant/vacancy.hpp"

using namespace vacant;

namespace {

std::set<std::vector<Site>> partition(const ComponentLabeling& lab)
{
    std::vector<std::vector<Site>> parts(lab.count());
    for (Site s = 0; s < lab.label.size(); ++s)
        if (lab.label[s] != ComponentLabeling::kNone)
            parts[static_cast<std::size_t>(lab.label[s])].push_back(s);
    return {parts.begin(), parts.end()};
}

BitSet only_segment(const Torus& g, Site anchor, int axis, std::int64_t l)
{
    BitSet b(g.volume());
    for (Site s : segment_sites(g, anchor, axis, l))
        b.set(s);
    return b;
}

WalkConfig config(std::uint64_t seed, Time horizon)
{
    WalkConfig c;
    c.seed = seed;
    c.horizon = horizon;
    return c;
}

} // namespace

TEST(Components, SingleVisitedSite)
{
    Torus g(2, 6);
    WalkConfig c = config(1, 0);
    c.start = 10;
    const auto rec = simulate(g, c);
    const auto lab = components(VacancyView(rec, 0));
    ASSERT_EQ(lab.count(), 1u);
    EXPECT_EQ(lab.sizes[0], g.volume() - 1);
    EXPECT_EQ(lab.representatives[0], 0u);
}

TEST(Components, FullyCovered)
{
    Torus g(2, 5);
    EXPECT_EQ(components(g, BitSet(g.volume())).count(), 0u);
    EXPECT_TRUE(component_size_histogram(components(g, BitSet(g.volume()))).counts.empty());
}

TEST(Components, MatchesFloodFill)
{
    Xoshiro256ss rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 2 + trial % 2;
        Torus g(d, 3 + static_cast<std::int64_t>(uniform_below(rng, 8)));
        const auto b = oracle::random_bitmap(g, 0.3 + 0.4 * uniform_unit(rng), rng);
        const auto lab = components(g, b);
        ASSERT_EQ(partition(lab), oracle::flood_fill(g, b));
        const auto h = component_size_histogram(lab);
        std::uint64_t mass = 0;
        for (const auto& [size, count] : h.counts)
            mass += size * count;
        EXPECT_EQ(mass, b.count());
        for (std::size_t id = 0; id < lab.count(); ++id)
            EXPECT_EQ(lab.label[lab.representatives[id]], static_cast<std::int64_t>(id));
    }
}

TEST(Components, MonotoneInTime)
{
    Torus g(2, 9);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto rec = simulate(g, config(seed, 150));
        const auto early = components(VacancyView(rec, 40)), late = components(VacancyView(rec, 120));
        for (const auto& part : partition(late)) {
            const auto id = early.label[part.front()];
            ASSERT_NE(id, ComponentLabeling::kNone);
            for (Site s : part)
                EXPECT_EQ(early.label[s], id);
        }
    }
}

TEST(SegmentComponents, HandBuilt)
{
    Torus g(2, 8);
    const Site anchor = g.encode({2, 3});
    auto b = only_segment(g, anchor, 0, 3);
    auto found = segment_components(g, b, 3);
    ASSERT_EQ(found.size(), 1u);
    EXPECT_EQ(found[0].anchor, anchor);
    b.set(g.encode({3, 4}));
    EXPECT_TRUE(segment_components(g, b, 3).empty());
    EXPECT_THROW(segment_components(g, b, 7), ParameterError);
}

TEST(SegmentComponents, MatchComponentShapes)
{
    Xoshiro256ss rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        Torus g(2 + trial % 2, 4 + static_cast<std::int64_t>(uniform_below(rng, 6)));
        const std::int64_t l = static_cast<std::int64_t>(uniform_below(rng, 3));
        const auto b = oracle::random_bitmap(g, 0.15 + 0.2 * uniform_unit(rng), rng);
        std::vector<Site> want;
        for (const auto& part : oracle::flood_fill(g, b))
            for (Site a : part)
                if (SiteSet(part) == segment_sites(g, a, 0, l) && static_cast<std::int64_t>(part.size()) == l + 1)
                    want.push_back(a);
        std::sort(want.begin(), want.end());
        std::vector<Site> got;
        for (const auto& r : segment_components(g, b, l))
            got.push_back(r.anchor);
        ASSERT_EQ(got, want);
    }
}

TEST(SegmentComponents, CsvColumns)
{
    Torus g(2, 6);
    const auto recs = segment_components(g, only_segment(g, 7, 0, 1), 1);
    std::ostringstream os;
    write_segment_csv(os, g, recs);
    EXPECT_EQ(os.str(), "anchor_index,anchor_coords,direction,length\n7,(1 1),1,1\n");
}

TEST(Giant, Outcomes)
{
    Torus g(2, 8);
    const auto full = giant_component(g, BitSet(g.volume(), true), 8, 0.3);
    EXPECT_EQ(full.outcome, GiantOutcome::EventHolds);
    EXPECT_EQ(full.size, g.volume());

    BitSet two = only_segment(g, g.encode({0, 1}), 0, 3);
    for (Site s : segment_sites(g, g.encode({0, 5}), 0, 3))
        two.set(s);
    EXPECT_EQ(giant_component(g, two, 3, 0.5).outcome, GiantOutcome::NotUnique);
    EXPECT_EQ(giant_component(g, two, 4, 0.5).outcome, GiantOutcome::NoQualifyingSegment);

    const auto one = giant_component(g, only_segment(g, 0, 0, 3), 3, 0.3);
    EXPECT_EQ(one.outcome, GiantOutcome::NotDense);
    EXPECT_TRUE(one.unique);
}

TEST(Giant, DenseWhenBallCoversTorus)
{
    Torus g(2, 9);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto rec = simulate(g, config(seed, 60));
        const auto rep = giant_component(VacancyView(rec, 60), 1, 0.99);
        if (rep.component_id)
            EXPECT_TRUE(rep.beta_dense);
    }
}

TEST(DistanceTransform, MatchesBruteForce)
{
    Xoshiro256ss rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        Torus g(2 + trial % 2, 5 + static_cast<std::int64_t>(uniform_below(rng, 4)));
        const auto src = oracle::random_bitmap(g, 0.05, rng);
        if (src.count() == 0)
            continue;
        const auto dist = linf_distance_transform(g, src);
        for (Site x = 0; x < g.volume(); ++x) {
            std::int64_t best = g.side();
            src.for_each([&](Site s) { best = std::min(best, g.linf_distance(x, s)); });
            ASSERT_EQ(dist[x], best);
        }
    }
}

TEST(Ubiquity, Trivial)
{
    Torus g(2, 7);
    EXPECT_TRUE(ubiquity(g, BitSet(g.volume(), true), 7, 0.5));
    EXPECT_FALSE(ubiquity(g, BitSet(g.volume()), 1, 0.5));
    EXPECT_THROW(ubiquity(g, BitSet(g.volume()), 0, 0.5), ParameterError);
}

TEST(Ubiquity, MatchesTripleLoop)
{
    Xoshiro256ss rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        Torus g(2, 3 + static_cast<std::int64_t>(uniform_below(rng, 8)));
        const auto b = oracle::random_bitmap(g, 0.6 + 0.4 * uniform_unit(rng), rng);
        const std::int64_t k = 1 + static_cast<std::int64_t>(uniform_below(rng, 3));
        const double beta = 0.2 + 0.7 * uniform_unit(rng);
        const auto offsets = count_below_pow(static_cast<double>(g.side()), beta);
        ASSERT_EQ(ubiquity(g, b, k, beta), oracle::ubiquity(g, b, k, offsets));
    }
}

TEST(Ubiquity, MonotoneInTime)
{
    Torus g(2, 10);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto rec = simulate(g, config(seed, 400));
        bool was = true;
        for (Time t = 0; t <= 400; t += 20) {
            const bool now = ubiquity(VacancyView(rec, t), 2, 0.6);
            EXPECT_FALSE(now && !was);
            was = now;
        }
    }
}

TEST(CoveringPath, SmallCase)
{
    Torus g(2, 9);
    const auto path = covering_path(g, 0, 1);
    EXPECT_LE(path.size() - 1, 20u);
    const auto seg = segment_sites(g, 0, 0, 1);
    std::set<Site> seen(path.begin(), path.end());
    for (Site y : boundary(g, seg))
        EXPECT_TRUE(seen.count(y));
    for (Site y : path)
        EXPECT_FALSE(seg.contains(y));
    for (std::size_t k = 1; k < path.size(); ++k)
        EXPECT_EQ(g.linf_distance(path[k - 1], path[k]), 1);
}

TEST(CoveringPath, StepBounds)
{
    Torus g3(3, 12);
    EXPECT_LE(covering_path(g3, 0, 8).size() - 1, 72u);
    Torus g(2, 12);
    const auto seg = segment_sites(g, 0, 0, 3);
    for (Site start : boundary(g, seg)) {
        const auto path = covering_path(g, 0, 3, start);
        EXPECT_EQ(path.front(), start);
        EXPECT_LE(path.size() - 1, static_cast<std::size_t>(2 * (2 * 3 + 8)));
    }
    EXPECT_THROW(covering_path(g, 0, 11), ParameterError);
}

TEST(SurroundEvents, ScriptedWalkIsDetected)
{
    Torus g(2, 15);
    const Site anchor = g.encode({7, 7});
    const auto path = oracle::scripted_surround(g, anchor, 2, 5, 200);
    const auto res = detect_A_events(g, path, 80, 2);
    ASSERT_EQ(res.indices, std::vector<std::uint64_t>{1});
    EXPECT_NE(std::find(res.witnesses[0].begin(), res.witnesses[0].end(), anchor), res.witnesses[0].end());
}

TEST(SurroundEvents, FarWalkReportsNothing)
{
    Torus g(2, 15);
    std::vector<Site> path;
    for (int k = 0; k <= 200; ++k)
        path.push_back(k % 2 ? 1 : 0);
    EXPECT_TRUE(detect_A_events(g, path, 40, 2).indices.empty());
}

TEST(SurroundEvents, RestrictedScanMatchesBruteForce)
{
    std::size_t detected = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const int d = seed % 4 == 3 ? 3 : 2;
        Torus g(d, d == 3 ? 6 : 8 + static_cast<std::int64_t>(seed % 2) * 2);
        const std::int64_t l = seed % 5 == 0 ? 1 : 0;
        const auto c = config(seed, 800);
        const auto path = oracle::trajectory(g, c);
        const auto fast = detect_A_events(g, c, 80, l, AnchorScan::Restricted);
        const auto all = detect_A_events(g, c, 80, l, AnchorScan::All);
        EXPECT_EQ(fast.indices, all.indices);
        EXPECT_EQ(fast.witnesses, all.witnesses);
        EXPECT_EQ(fast.indices, oracle::surround_indices(g, path, 80, l));
        detected += fast.indices.size();
    }
    EXPECT_GT(detected, 10u);
}
