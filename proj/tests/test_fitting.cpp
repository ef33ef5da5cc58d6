#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "chasm/analytic.hpp"
#include "chasm/engine.hpp"
#include "chasm/fitting.hpp"

using namespace chasm;

namespace {

GrowthParams truth()
{
    GrowthParams p;
    p.alpha = 0.5;
    p.eta = 0.3;
    p.r = 0.4;
    p.xi = 0.6;
    p.rho_p_red = 0.5;
    p.rho_p_blue = 0.8;
    p.rho_u_red = 0.4;
    p.rho_u_blue = 0.9;
    return p;
}

const BipartiteNetwork& sample()
{
    static const BipartiteNetwork n = grow(truth(), {1000000, 31});
    return n;
}

}  // namespace

TEST_CASE("direct estimates")
{
    const auto d = estimate_direct(sample());
    CHECK(std::abs(d.r - 0.4) < 0.005);
    CHECK(std::abs(d.alpha - 0.5) < 0.005);
    CHECK(std::abs(d.eta - 0.3) < 0.005);
    CHECK_FALSE(d.degenerate);
    CHECK_FALSE(d.small_sample);

    const auto two = estimate_direct(BipartiteNetwork::seed_pairs());
    CHECK(two.r == 0.5);
    CHECK(two.alpha == 1.0);
    CHECK(two.eta == 1.0);
    CHECK(two.small_sample);

    BipartiteNetwork blue;
    blue.add_group(Color::Blue, blue.add_member(Color::Blue));
    const auto b = estimate_direct(blue);
    CHECK(b.r == 0.0);
    CHECK(b.degenerate);
    CHECK_THROWS_AS(estimate_direct(BipartiteNetwork{}), std::invalid_argument);
}

TEST_CASE("objective names and config checks")
{
    CHECK(objective_from_string("per-size-l1") == Objective::PerSizeL1);
    CHECK(objective_from_string(to_string(Objective::PaperSumDifference)) == Objective::PaperSumDifference);
    CHECK_THROWS_AS(objective_from_string("l2"), std::invalid_argument);
    FitConfig c;
    c.K = 1;
    CHECK_THROWS_AS(fit_homophily(sample(), c), std::invalid_argument);
    c = FitConfig{};
    c.free_params = {"alpha"};
    CHECK_THROWS_AS(fit_homophily(sample(), c), std::invalid_argument);
}

TEST_CASE("empirical ratios drop sizes without blue")
{
    const std::vector<std::uint64_t> red{0, 4, 2, 1}, blue{0, 2, 0, 1};
    const auto e = empirical_ratios(red, blue, 5);
    CHECK(e.ratio[0] == 2.0);
    CHECK(e.usable == std::vector<bool>{true, false, true, false, false});
}

TEST_CASE("fit reaches the objective of the true parameters")
{
    FitConfig c;
    c.K = 30;
    c.objective = Objective::PerSizeL1;
    c.seed = 5;
    const auto fit = fit_homophily(sample(), c);
    const auto emp = empirical_ratios(sample().group_size_counts(Color::Red), sample().group_size_counts(Color::Blue), c.K);
    GrowthParams at = truth();
    at.alpha = fit.params_hat.alpha;
    at.eta = fit.params_hat.eta;
    at.r = fit.params_hat.r;
    const double target = homophily_objective(at, emp, Objective::PerSizeL1, fit.K_used);
    CHECK(fit.objective_value <= target + 1e-6);
    CHECK_NOTHROW(validate_params(fit.params_hat));
    CHECK(fit.objective_value == homophily_objective(fit.params_hat, emp, c.objective, fit.K_used));
    CHECK(fit.per_size_l1 == fit.objective_value);
    CHECK(fit.restart_best.size() == 16);
    for (std::size_t i = 1; i < fit.trace.size(); ++i) CHECK(fit.trace[i] <= fit.trace[i - 1]);
}

TEST_CASE("fits are deterministic and improve with restarts")
{
    FitConfig c;
    c.K = 20;
    c.restarts = 4;
    c.evaluations_per_restart = 400;
    c.seed = 2;
    const auto a = fit_homophily(sample(), c);
    const auto b = fit_homophily(sample(), c);
    CHECK(a.params_hat == b.params_hat);
    CHECK(a.trace == b.trace);
    c.restarts = 8;
    const auto more = fit_homophily(sample(), c);
    CHECK(more.objective_value <= a.objective_value);
    for (std::size_t i = 0; i < 4; ++i) CHECK(more.restart_best[i] == a.restart_best[i]);
}

TEST_CASE("eta can be freed")
{
    FitConfig c;
    c.K = 20;
    c.restarts = 2;
    c.evaluations_per_restart = 300;
    c.free_params = kFittableParams;
    const auto fit = fit_homophily(sample(), c);
    CHECK(fit.params_hat.eta > 0.0);
    CHECK(fit.params_hat.eta < 1.0);
}

TEST_CASE("latin hypercube starts")
{
    for (std::size_t j = 0; j < 3; ++j) {
        std::vector<int> hit(16);
        for (std::size_t i = 0; i < 16; ++i) {
            const auto x = fit_start(9, i, 3);
            CHECK((x[j] >= 0.0 && x[j] < 1.0));
            ++hit[static_cast<int>(x[j] * 16)];
        }
        for (int h : hit) CHECK(h == 1);
    }
    CHECK(fit_start(9, 20, 3) == fit_start(9, 20, 3));
}

TEST_CASE("symmetric data fit symmetrically")
{
    GrowthParams p;
    p.r = 0.5;
    p.rho_p_red = p.rho_p_blue = p.rho_u_red = p.rho_u_blue = 0.6;
    const auto n = grow(p, {1000000, 12});
    FitConfig c;
    c.K = 30;
    c.objective = Objective::PerSizeL1;
    c.restarts = 8;
    const auto fit = fit_homophily(n, c);
    const auto s = solve(fit.params_hat);
    CHECK(std::abs(s.c.c_r1 - s.c.c_b1) < 0.05);
}

TEST_CASE("unipartite fit")
{
    UnipartiteParams u;
    u.r = 0.5;
    u.rho_p_red = u.rho_p_blue = u.rho_u_red = u.rho_u_blue = 0.5;
    const auto sym = grow_unipartite(u, 500000, 3);
    FitConfig c;
    c.K = 20;
    c.objective = Objective::PerSizeL1;
    c.restarts = 8;
    c.evaluations_per_restart = 1000;
    const auto fs = fit_unipartite(sym, c);
    UnipartiteParams hat = UnipartiteParams::from(fs.params_hat);
    const auto a = unipartite_analytics(hat, 2);
    CHECK(std::abs(a.cu.c_r1 - a.cu.c_b1) < 0.05);

    UnipartiteParams known;
    known.r = 0.35;
    known.xi = 0.6;
    known.rho_p_red = 0.4;
    known.rho_u_blue = 0.7;
    const auto n = grow_unipartite(known, 500000, 4);
    const auto fit = fit_unipartite(n, c);
    const auto emp = empirical_ratios(n.degree_counts(Color::Red), n.degree_counts(Color::Blue), c.K);
    UnipartiteParams at = known;
    at.r = fit.params_hat.r;
    CHECK(fit.objective_value <= unipartite_objective(at, emp, c.objective, fit.K_used) + 1e-6);

    c.free_params = {"eta"};
    CHECK_THROWS_AS(fit_unipartite(n, c), std::invalid_argument);
}
