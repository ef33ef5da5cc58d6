#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "chasm/analytic.hpp"
#include "chasm/engine.hpp"
#include "chasm/metrics.hpp"
#include "chasm/rng.hpp"
#include "oracles.hpp"

using namespace chasm;

namespace {

GrowthParams chasm_instance()
{
    GrowthParams p;
    p.alpha = 0.5;
    p.eta = 0.3;
    p.r = 0.45;
    p.xi = 0.45;
    p.rho_p_red = 0.7;
    p.rho_p_blue = 0.1;
    p.rho_u_red = 0.03;
    p.rho_u_blue = 0.6;
    return p;
}

BipartiteNetwork single_color(Color c, std::uint64_t t)
{
    GrowthParams p;
    auto n = grow(p, {t, 3});
    BipartiteNetwork out;
    for (std::size_t i = 0; i < n.members().size(); ++i) out.add_member(c);
    for (const auto& e : n.edges()) {
        if (e.group == out.groups().size()) out.add_group(c, e.member);
        else out.add_edge(e.member, e.group);
    }
    return out;
}

std::vector<std::uint64_t> member_degrees(const BipartiteNetwork& n)
{
    std::vector<std::uint64_t> v;
    for (const auto& m : n.members()) v.push_back(m.degree);
    return v;
}

}  // namespace

TEST_CASE("binning covers every size exactly once")
{
    for (const Binning& b : {Binning{}, Binning::unit(), Binning{10, 1.5}}) {
        for (std::uint64_t k_max : {1u, 7u, 100u, 101u, 5000u}) {
            const auto bins = b.bins(k_max);
            REQUIRE_FALSE(bins.empty());
            CHECK(bins.front().first == 1);
            CHECK(bins.back().second >= k_max);
            for (std::size_t i = 0; i < bins.size(); ++i) {
                CHECK(bins[i].first <= bins[i].second);
                if (i) CHECK(bins[i].first == bins[i - 1].second + 1);
            }
        }
    }
    CHECK(Binning{}.bins(100).size() == 100);
    CHECK(Binning::unit().describe() == "unit");
}

TEST_CASE("merging keeps total support and the weighted mean")
{
    const auto n = grow(chasm_instance(), {50000, 1});
    const auto s = member_ratio_by_size(n);
    for (std::size_t w : {1u, 2u, 3u, 7u}) {
        const auto m = merge_adjacent(s, w);
        std::uint64_t a = 0, b = 0;
        double ma = 0, mb = 0;
        for (const auto& p : s.points) {
            a += p.support;
            ma += p.ratio * p.support;
        }
        for (const auto& p : m.points) {
            b += p.support;
            mb += p.ratio * p.support;
        }
        CHECK(a == b);
        CHECK(ma == doctest::Approx(mb).epsilon(1e-12));
        CHECK(m.points.size() == (s.points.size() + w - 1) / w);
    }
    CHECK_THROWS_AS(merge_adjacent(s, 0), std::invalid_argument);
}

TEST_CASE("ratio series lie in [0, 1] and count every group")
{
    const auto n = grow(chasm_instance(), {100000, 2});
    for (const auto& s : {group_ratio_by_size(n), member_ratio_by_size(n), member_ratio_by_size(n, Binning::unit())}) {
        std::uint64_t total = 0;
        for (const auto& p : s.points) {
            CHECK((p.ratio >= 0.0 && p.ratio <= 1.0));
            CHECK(p.support > 0);
            total += p.support;
        }
        CHECK(total == n.groups().size());
    }
}

TEST_CASE("coloring groups by member share")
{
    const auto reds = single_color(Color::Red, 2000);
    const auto all = color_groups_by_ratio(reds, 0.5);
    CHECK(all.tallies().groups[1] == 0);

    const auto n = grow(chasm_instance(), {20000, 4});
    const auto colored = color_groups_by_ratio(n, 0.425);
    const auto red = n.red_members_per_group();
    for (GroupId g = 0; g < red.size(); ++g) {
        const bool expect = static_cast<double>(red[g]) / n.groups()[g].size > 0.425;
        CHECK((colored.groups()[g].color == Color::Red) == expect);
    }
    CHECK(colored.tallies() == recount(colored));
    CHECK(colored.edges().size() == n.edges().size());
}

TEST_CASE("pair test")
{
    const auto reds = single_color(Color::Red, 5000);
    CHECK(homophily_pair_test(reds).observed_cross_share == 0.0);

    GrowthParams p;
    p.r = 0.4;
    const auto neutral = homophily_pair_test(grow(p, {300000, 5}));
    CHECK(neutral.expected_cross_share == doctest::Approx(2 * neutral.r * (1 - neutral.r)));
    CHECK(std::abs(neutral.observed_cross_share - neutral.expected_cross_share) < 0.02);

    const auto h = homophily_pair_test(grow(chasm_instance(), {300000, 5}));
    CHECK(h.homophilous);
    CHECK(h.observed_cross_share < h.expected_cross_share);

    BipartiteNetwork lonely;
    lonely.add_group(Color::Red, lonely.add_member(Color::Red));
    CHECK_THROWS_AS(homophily_pair_test(lonely), std::invalid_argument);
}

TEST_CASE("discrete MLE recovers a synthetic exponent")
{
    const auto v = oracle::power_law_sample(2.5, 1, 100000, 8);
    const auto fit = power_law_exponent(v);
    CHECK(fit.beta > 2.45);
    CHECK(fit.beta < 2.55);
    CHECK(fit.n_tail >= 50);
    const auto fixed = power_law_exponent(v, PowerLawMethod::DiscreteMLE, {.k_min = 1});
    CHECK(fixed.k_min == 1);
    CHECK(std::abs(fixed.beta - 2.5) < 0.02);
    const auto ls = power_law_exponent(v, PowerLawMethod::LogBinnedLS, {.k_min = 1});
    CHECK(std::abs(ls.beta - 2.5) < 0.2);
}

TEST_CASE("member degree exponent of a grown network")
{
    GrowthParams p;
    p.alpha = 0.5;
    const auto fit = power_law_exponent(member_degrees(grow(p, {1000000, 6})));
    CHECK(std::abs(fit.beta - 3.0) < 0.15);
}

TEST_CASE("power-law fits reject degenerate input")
{
    std::vector<std::uint64_t> flat(500, 4);
    CHECK_THROWS_AS(power_law_exponent(flat), std::invalid_argument);
    std::vector<std::uint64_t> few(99);
    for (std::size_t i = 0; i < few.size(); ++i) few[i] = i + 1;
    CHECK_THROWS_AS(power_law_exponent(few), std::invalid_argument);
}

TEST_CASE("Hurwitz zeta in log space")
{
    CHECK(std::exp(log_hurwitz_zeta(2.0, 1)) == doctest::Approx(M_PI * M_PI / 6).epsilon(1e-10));
    double direct = 0;
    for (int k = 3; k < 2000000; ++k) direct += std::pow(k, -3.5);
    CHECK(std::exp(log_hurwitz_zeta(3.5, 3)) == doctest::Approx(direct).epsilon(1e-9));
    CHECK(std::isfinite(log_hurwitz_zeta(2.5, 1000000000)));
    CHECK_THROWS_AS(log_hurwitz_zeta(1.0, 1), std::domain_error);
}

TEST_CASE("isotonic fit is monotone and keeps the weighted mean")
{
    Rng rng(3, 0);
    for (int draw = 0; draw < 50; ++draw) {
        std::vector<double> y(1 + rng.below(30)), w(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            y[i] = rng.uniform();
            w[i] = 0.1 + rng.uniform();
        }
        const auto f = isotonic_increasing(y, w);
        REQUIRE(f.size() == y.size());
        double a = 0, b = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (i) CHECK(f[i] >= f[i - 1] - 1e-12);
            a += w[i] * y[i];
            b += w[i] * f[i];
        }
        CHECK(a == doctest::Approx(b).epsilon(1e-10));
    }
    const std::vector<double> up{0.1, 0.2, 0.5}, ones(3, 1.0);
    CHECK(isotonic_increasing(up, ones) == up);
}

TEST_CASE("chasm detector on exact series")
{
    RatioSeries down;
    for (std::uint64_t k = 1; k <= 30; ++k) down.points.push_back({k, k, 0.5 - 0.01 * k, 1000});
    const auto d = detect_chasm(down);
    CHECK_FALSE(d.decided);
    CHECK(d.shape == TrendShape::Decreasing);
    CHECK_FALSE(d.turning_point.has_value());

    const auto p = chasm_instance();
    const auto sol = solve(p);
    REQUIRE(sol.threshold.chasm);
    const double ks = *sol.threshold.k_star;
    REQUIRE(ks > 2);
    const auto g = group_size_distribution(p, 60);
    RatioSeries exact;
    for (std::uint64_t k = 1; k <= 60; ++k) {
        const double red = g.value(Color::Red, k), blue = g.value(Color::Blue, k);
        exact.points.push_back({k, k, red / (red + blue), 100000});
    }
    const auto f = detect_chasm(exact);
    CHECK(f.decided);
    CHECK(f.shape == TrendShape::Unimodal);
    CHECK(f.turning_point == static_cast<std::uint64_t>(std::floor(ks)));

    RatioSeries thin = exact;
    for (auto& pt : thin.points) pt.support = 10;
    CHECK_THROWS_AS(detect_chasm(thin), InsufficientSupport);
}

TEST_CASE("no chasm is found without homophily")
{
    GrowthParams p;
    p.r = 0.5;
    const auto n = grow(p, {1000000, 9});
    const auto f = detect_chasm(group_ratio_by_size(n));
    CHECK_FALSE(f.decided);
}

TEST_CASE("tail ratio")
{
    GrowthParams p;
    p.r = 0.5;
    const auto n = grow(p, {1000000, 10});
    const auto tr = top_k_tail_ratio(n, {1, 10});
    REQUIRE(tr.size() == 2);
    CHECK(tr[0].red + tr[0].blue == n.groups().size());
    CHECK(std::abs(tr[0].ratio - 1.0) < 0.02);
    CHECK(std::abs(tr[1].ratio - 1.0) < 0.1);

    const auto reds = single_color(Color::Red, 1000);
    CHECK(top_k_tail_ratio(reds, {1})[0].ratio == std::numeric_limits<double>::infinity());

    CHECK(default_tail_schedule(n, 2.0) == std::vector<std::uint64_t>{1000});
    const auto ks = default_tail_schedule(n, std::nullopt);
    CHECK(ks.front() == 1);
    for (std::size_t i = 1; i < ks.size(); ++i) CHECK(ks[i] == 2 * ks[i - 1]);
}
