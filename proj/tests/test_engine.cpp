#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "chasm/engine.hpp"
#include "chasm/rng.hpp"
#include "oracles.hpp"

using namespace chasm;

namespace {

double red_group_degree_share(const BipartiteNetwork& n)
{
    const auto& t = n.tallies();
    return static_cast<double>(t.group_size[0]) / static_cast<double>(n.t());
}

GrowthParams asymmetric()
{
    GrowthParams p;
    p.alpha = 0.5;
    p.eta = 0.2;
    p.r = 0.3;
    p.xi = 0.7;
    p.rho_p_red = 0.6;
    p.rho_p_blue = 0.8;
    p.rho_u_red = 0.9;
    p.rho_u_blue = 0.7;
    return p;
}

// Five groups, two members; sizes chosen so that every weight differs.
BipartiteNetwork small_state(Rng& rng)
{
    BipartiteNetwork n;
    const auto red = n.add_member(Color::Red);
    const auto blue = n.add_member(Color::Blue);
    const int groups = 3 + static_cast<int>(rng.below(4));
    for (int g = 0; g < groups; ++g) {
        const bool is_red = g == 0 || (g != 1 && rng.bernoulli(0.5));
        const auto m = is_red ? red : blue;
        const auto id = n.add_group(is_red ? Color::Red : Color::Blue, m);
        const auto extra = rng.below(6);
        for (std::uint64_t i = 0; i < extra; ++i) n.add_edge(rng.bernoulli(0.5) ? red : blue, id);
    }
    return n;
}

}  // namespace

TEST_CASE("t_max = 2 returns the seed network")
{
    const auto n = grow(GrowthParams{}, {2, 5});
    CHECK(n == BipartiteNetwork::seed_pairs());
}

TEST_CASE("same seed gives the same run, other seeds differ")
{
    GrowthParams p = asymmetric();
    RunConfig cfg{50000, 42};
    cfg.record_events = true;
    const auto a = grow_run(p, cfg);
    const auto b = grow_run(p, cfg);
    CHECK(a.network == b.network);
    std::ostringstream ea, eb;
    write_events_jsonl(ea, a.events);
    write_events_jsonl(eb, b.events);
    CHECK(ea.str() == eb.str());
    CHECK(a.events.size() == 50000 - 2);
    cfg.seed = 43;
    CHECK_FALSE(grow(p, cfg) == a.network);

    cfg.sampling = SamplingMode::LiteralRejection;
    CHECK(grow(p, cfg) == grow(p, cfg));
}

TEST_CASE("event log matches the network")
{
    RunConfig cfg{3000, 9};
    cfg.record_events = true;
    const auto run = grow_run(asymmetric(), cfg);
    const auto& edges = run.network.edges();
    for (const auto& e : run.events) {
        const Edge& edge = edges[e.t - 1];
        CHECK(edge.member == e.member);
        CHECK((e.created_group.has_value() != e.joined_group.has_value()));
        CHECK(edge.group == (e.created_group ? *e.created_group : *e.joined_group));
        CHECK((e.created_group.has_value() == (e.mechanism == Mechanism::None)));
    }
    std::ostringstream os;
    write_events_jsonl(os, {run.events.front()});
    CHECK(os.str().find("\"action\"") != std::string::npos);
}

TEST_CASE("conservation holds at every prefix")
{
    const auto p = asymmetric();
    for (std::uint64_t t : {3u, 10u, 101u, 1000u, 4321u}) {
        const auto n = grow(p, {t, 1});
        const auto& s = n.tallies();
        CHECK(n.t() == t);
        CHECK(s.member_degree[0] + s.member_degree[1] == t);
        CHECK(s.group_size[0] + s.group_size[1] == t);
    }
}

TEST_CASE("without homophily the red shares settle at r")
{
    GrowthParams p;
    p.r = 0.35;
    const auto n = grow(p, {1000000, 17});
    const auto& t = n.tallies();
    const double member_share = static_cast<double>(t.members[0]) / static_cast<double>(n.members().size());
    CHECK(std::abs(member_share - 0.35) < 0.01);
    CHECK(std::abs(red_group_degree_share(n) - 0.35) < 0.01);
}

TEST_CASE("red group-degree share approaches the fixed point")
{
    const auto p = asymmetric();
    const double a = oracle::alpha_star(oracle::from(p));
    const auto n = grow(p, {1000000, 23});
    CHECK(std::abs(red_group_degree_share(n) - a) < 0.01);
}

TEST_CASE("step distribution without rejection")
{
    Rng rng(1, 0);
    const auto n = small_state(rng);
    GrowthParams p;
    p.xi = 0.6;
    const auto d = step_distribution(n, p, 0);
    REQUIRE(d.size() == n.groups().size());
    for (std::size_t g = 0; g < d.size(); ++g) {
        const double expect = 0.6 * n.groups()[g].size / static_cast<double>(n.t()) + 0.4 / static_cast<double>(d.size());
        CHECK(d[g] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("step distribution with full rejection of cross-color size picks")
{
    Rng rng(2, 0);
    const auto n = small_state(rng);
    GrowthParams p;
    p.xi = 1.0;
    p.rho_p_red = 0.0;
    const auto d = step_distribution(n, p, 0);
    double red_mass = 0;
    for (std::size_t g = 0; g < d.size(); ++g)
        if (n.groups()[g].color == Color::Red) red_mass += n.groups()[g].size;
    for (std::size_t g = 0; g < d.size(); ++g) {
        if (n.groups()[g].color == Color::Blue) CHECK(d[g] == 0.0);
        else CHECK(d[g] == doctest::Approx(n.groups()[g].size / red_mass).epsilon(1e-12));
    }
}

TEST_CASE("literal rejection matches the exact mixture (chi-square)")
{
    Rng states(77, 0);
    int passed = 0;
    const int cases = 5;
    for (int c = 0; c < cases; ++c) {
        const auto n = small_state(states);
        GrowthParams p;
        p.xi = states.uniform();
        p.rho_p_red = 0.3;
        p.rho_p_blue = states.uniform();
        p.rho_u_red = states.uniform();
        p.rho_u_blue = states.uniform();
        const Color color = c % 2 ? Color::Blue : Color::Red;
        const MemberId m = color == Color::Red ? 0 : 1;
        const auto probs = step_distribution(n, p, m);
        GrowthState state(n);
        Rng rng(1000 + c, 0);
        std::vector<std::uint64_t> literal(probs.size()), exact(probs.size());
        for (int i = 0; i < 200000; ++i) {
            ++literal[state.sample_join_literal(p, color, rng).group];
            ++exact[state.sample_join_exact(p, color, rng).group];
        }
        const double p_literal = oracle::chi2_test(literal, probs);
        const double p_exact = oracle::chi2_test(exact, probs);
        passed += p_literal > 0.01 && p_exact > 0.01;
    }
    CHECK(passed >= cases - 1);
}

TEST_CASE("literal rejection gives up on an unreachable target")
{
    BipartiteNetwork n;
    n.add_member(Color::Red);
    const auto b = n.add_member(Color::Blue);
    n.add_group(Color::Blue, b);
    GrowthParams p;
    p.rho_p_red = p.rho_u_red = 0.0;
    GrowthState state(n);
    Rng rng(0, 0);
    CHECK_THROWS_AS(state.sample_join_literal(p, Color::Red, rng), PathologicalParameters);
}

TEST_CASE("replicas use consecutive streams")
{
    const auto p = asymmetric();
    RunConfig cfg{5000, 8};
    cfg.stream = 3;
    const auto reps = grow_replicas(p, cfg, 3);
    REQUIRE(reps.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        RunConfig one = cfg;
        one.stream = 3 + i;
        CHECK(reps[i] == grow(p, one));
    }
    CHECK_FALSE(reps[0] == reps[1]);
}

TEST_CASE("rng streams and helpers")
{
    Rng a(5, 0), b(5, 0), c(5, 1);
    CHECK(a() == b());
    CHECK(Rng(5, 0)() != c());
    Rng r(9, 0);
    std::vector<int> hits(7);
    for (int i = 0; i < 70000; ++i) ++hits[r.below(7)];
    for (int h : hits) CHECK(std::abs(h - 10000) < 500);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform();
        CHECK((u >= 0.0 && u < 1.0));
    }
}

TEST_CASE("unipartite growth")
{
    UnipartiteParams u;
    const auto two = grow_unipartite(u, 2, 1);
    CHECK(two.members().size() == 2);
    CHECK(two.edges().size() == 1);
    CHECK(two.members()[0].color != two.members()[1].color);

    const auto n = grow_unipartite(u, 5000, 4);
    CHECK(n.edges().size() == 4999);
    CHECK(grow_unipartite(u, 5000, 4) == n);
    for (const auto& e : n.edges()) CHECK(e.a != e.b);
}

namespace {

double red_degree_share(const UnipartiteNetwork& n)
{
    double red = 0, all = 0;
    for (const auto& m : n.members()) {
        all += m.degree;
        if (m.color == Color::Red) red += m.degree;
    }
    return red / all;
}

}  // namespace

TEST_CASE("symmetric one-mode growth splits degree evenly")
{
    UnipartiteParams u;
    u.r = 0.5;
    u.rho_p_red = u.rho_p_blue = u.rho_u_red = u.rho_u_blue = 0.4;
    CHECK(std::abs(red_degree_share(grow_unipartite(u, 1000000, 12)) - 0.5) < 0.01);
}

TEST_CASE("asymmetric one-mode growth reaches its fixed point")
{
    const auto g = asymmetric();
    const auto u = UnipartiteParams::from(g);
    const double target = oracle::alpha_u_star(oracle::from(g));
    CHECK(std::abs(red_degree_share(grow_unipartite(u, 1000000, 13)) - target) < 0.01);
    CHECK(std::abs(red_degree_share(grow_unipartite(u, 200000, 14, SamplingMode::LiteralRejection)) - target) < 0.015);
}
