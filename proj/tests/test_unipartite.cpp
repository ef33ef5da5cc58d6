#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "chasm/analytic.hpp"
#include "chasm/engine.hpp"
#include "chasm/unipartite.hpp"

using namespace chasm;

namespace {

GrowthParams homophilous()
{
    GrowthParams p;
    p.alpha = 0.5;
    p.eta = 0.3;
    p.r = 0.35;
    p.xi = 0.6;
    p.rho_p_red = 0.4;
    p.rho_p_blue = 0.7;
    p.rho_u_red = 0.5;
    p.rho_u_blue = 0.8;
    return p;
}

}  // namespace

TEST_CASE("projection of small networks")
{
    BipartiteNetwork n;
    const auto a = n.add_member(Color::Red);
    const auto b = n.add_member(Color::Blue);
    const auto c = n.add_member(Color::Blue);
    const auto g = n.add_group(Color::Red, a);
    n.add_edge(b, g);
    n.add_edge(c, g);
    CHECK(project(n).edges().size() == 3);
    CHECK(projected_edge_count(n) == 3);

    BipartiteNetwork two;
    const auto x = two.add_member(Color::Red);
    const auto y = two.add_member(Color::Blue);
    two.add_edge(y, two.add_group(Color::Red, x));
    two.add_edge(y, two.add_group(Color::Blue, x));
    const auto u = project(two);
    REQUIRE(u.edges().size() == 2);
    CHECK(u.edges()[0] == u.edges()[1]);
    CHECK(project(two, {.deduplicate = true}).edges().size() == 1);

    BipartiteNetwork twice;
    const auto m = twice.add_member(Color::Red);
    const auto gg = twice.add_group(Color::Red, m);
    twice.add_edge(m, gg);
    CHECK(project(twice).edges().empty());
}

TEST_CASE("projected degree is the sum of co-member counts")
{
    const auto n = grow(homophilous(), {100000, 8});
    std::vector<std::set<MemberId>> groups(n.groups().size());
    for (const auto& e : n.edges()) groups[e.group].insert(e.member);
    std::vector<std::uint64_t> expect(n.members().size(), 0);
    std::uint64_t pairs = 0;
    for (const auto& s : groups) {
        for (MemberId m : s) expect[m] += s.size() - 1;
        pairs += s.size() * (s.size() - 1) / 2;
    }
    const auto u = project(n);
    REQUIRE(u.members().size() == n.members().size());
    CHECK(u.edges().size() == pairs);
    std::size_t mismatches = 0;
    for (MemberId m = 0; m < expect.size(); ++m) {
        mismatches += u.members()[m].degree != expect[m];
        CHECK(u.members()[m].color == n.members()[m].color);
    }
    CHECK(mismatches == 0);
}

TEST_CASE("projection respects the edge cap")
{
    const auto n = grow(homophilous(), {20000, 8});
    const auto need = projected_edge_count(n);
    try {
        project(n, {.edge_cap = need - 1});
        FAIL("no throw");
    } catch (const ProjectionTooLarge& e) {
        CHECK(e.required() == need);
        CHECK(std::string(e.what()).find(std::to_string(need)) != std::string::npos);
    }
    CHECK_NOTHROW(project(n, {.edge_cap = need}));
}

TEST_CASE("symmetric native growth has a flat connection ratio")
{
    UnipartiteParams u;
    u.r = 0.5;
    u.rho_p_red = u.rho_p_blue = u.rho_u_red = u.rho_u_blue = 0.3;
    const auto s = connection_ratio_by_degree(grow_unipartite(u, 1000000, 5));
    std::size_t checked = 0;
    for (const auto& p : s.points) {
        if (p.support < 1000) continue;
        ++checked;
        CHECK(std::abs(p.ratio - 0.5) < 0.02);
    }
    CHECK(checked >= 5);
}

TEST_CASE("connection ratio follows the analytic curve")
{
    const auto u = UnipartiteParams::from(homophilous());
    const auto net = grow_unipartite(u, 1000000, 6);
    const auto s = connection_ratio_by_degree(net, Binning::unit());
    const auto a = unipartite_analytics(u, 200);
    double worst = 0;
    for (const auto& p : s.points) {
        if (p.support < 1000 || p.lo > 200) continue;
        worst = std::max(worst, std::abs(p.ratio - a.ratio[p.lo - 1]));
    }
    CHECK(worst < 0.03);
}

TEST_CASE("degree counts follow the analytic U_k")
{
    const auto u = UnipartiteParams::from(homophilous());
    const std::uint64_t n = 2000000;
    const auto net = grow_unipartite(u, n, 7);
    const auto a = unipartite_analytics(u, 500);
    double worst_z = 0, worst_rel = 0;
    std::size_t cells = 0;
    for (Color c : {Color::Red, Color::Blue}) {
        const auto counts = net.degree_counts(c);
        for (std::size_t k = 1; k <= 500; ++k) {
            const double expect = a.degrees.value(c, k) * static_cast<double>(n);
            if (expect < 1000) continue;
            const double got = k < counts.size() ? static_cast<double>(counts[k]) : 0.0;
            worst_z = std::max(worst_z, std::abs(got - expect) / std::sqrt(expect));
            if (expect >= 10000) worst_rel = std::max(worst_rel, std::abs(got - expect) / expect);
            ++cells;
        }
    }
    CHECK(cells >= 10);
    CHECK(worst_z < 4.5);
    CHECK(worst_rel < 0.05);
}

TEST_CASE("connection ratio of an empty network")
{
    UnipartiteNetwork u;
    u.add_member(Color::Red);
    CHECK(connection_ratio_by_degree(u).points.empty());
}
