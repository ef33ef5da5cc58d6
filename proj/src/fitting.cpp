#include "chasm/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "chasm/analytic.hpp"
#include "chasm/optimize.hpp"
#include "chasm/rng.hpp"

namespace chasm {

namespace {

constexpr std::size_t kStrata = 16;
constexpr double kEtaMargin = 1e-4;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::string_view to_string(Objective o) noexcept
{
    return o == Objective::PerSizeL1 ? "PerSizeL1" : "PaperSumDifference";
}

Objective objective_from_string(std::string_view s)
{
    if (s == "PerSizeL1" || s == "per-size-l1") return Objective::PerSizeL1;
    if (s == "PaperSumDifference" || s == "paper-sum") return Objective::PaperSumDifference;
    throw std::invalid_argument("unknown objective '" + std::string(s) + "'");
}

DirectEstimates estimate_direct(const BipartiteNetwork& network)
{
    const auto& tl = network.tallies();
    if (network.t() == 0 || network.members().empty()) throw std::invalid_argument("empty network");
    const double t = static_cast<double>(network.t());
    const double members = static_cast<double>(network.members().size());
    DirectEstimates d;
    d.r = static_cast<double>(tl.members[0]) / members;
    d.alpha = members / t;
    d.eta = static_cast<double>(network.groups().size()) / t;
    d.degenerate = tl.members[0] == 0 || tl.members[1] == 0;
    d.small_sample = network.t() < 1000;
    return d;
}

EmpiricalRatios empirical_ratios(const std::vector<std::uint64_t>& red, const std::vector<std::uint64_t>& blue, std::size_t K)
{
    EmpiricalRatios e;
    e.ratio.assign(K, 0.0);
    e.usable.assign(K, false);
    for (std::size_t k = 1; k <= K; ++k) {
        const std::uint64_t b = k < blue.size() ? blue[k] : 0;
        const std::uint64_t r = k < red.size() ? red[k] : 0;
        if (b == 0) continue;
        e.usable[k - 1] = true;
        e.ratio[k - 1] = static_cast<double>(r) / static_cast<double>(b);
    }
    return e;
}

namespace {

double score(const LimitDistribution& d, const EmpiricalRatios& emp, Objective objective, std::size_t K)
{
    if (objective == Objective::PerSizeL1) {
        double s = 0.0;
        for (std::size_t k = 1; k <= K; ++k) {
            if (!emp.usable[k - 1]) continue;
            s += std::abs(std::exp(d.log_value(Color::Red, k) - d.log_value(Color::Blue, k)) - emp.ratio[k - 1]);
        }
        return s;
    }
    double model = 0.0, data = 0.0;
    for (std::size_t k = 1; k <= K && emp.usable[k - 1]; ++k) {
        model += std::exp(d.log_value(Color::Red, k) - d.log_value(Color::Blue, k));
        data += emp.ratio[k - 1];
    }
    return std::abs(model - data);
}

std::size_t usable_prefix(const EmpiricalRatios& emp)
{
    std::size_t k = 0;
    while (k < emp.usable.size() && emp.usable[k]) ++k;
    return k;
}

struct RestartSummary {
    std::vector<double> best_x;
    std::vector<double> restart_best;
    std::vector<double> trace;
};

RestartSummary run_restarts(const std::function<double(std::span<const double>)>& f, const Box& box,
                            const FitConfig& config)
{
    const std::size_t dim = box.lo.size();
    const std::size_t n = config.restarts;
    std::vector<NelderMeadResult> results(n);
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) {
                auto start = fit_start(config.seed, i, dim);
                for (std::size_t j = 0; j < dim; ++j) start[j] = box.lo[j] + start[j] * (box.hi[j] - box.lo[j]);
                NelderMeadOptions opt;
                opt.max_evaluations = config.evaluations_per_restart;
                results[i] = nelder_mead_box(f, start, box, opt);
            }
        });
    }
    for (auto& th : pool) th.join();

    RestartSummary s;
    double best = kInf, best_final = kInf;
    for (std::size_t i = 0; i < n; ++i) {
        s.restart_best.push_back(results[i].value);
        for (double v : results[i].trace) {
            best = std::min(best, v);
            s.trace.push_back(best);
        }
        if (s.best_x.empty() || results[i].value < best_final) {
            s.best_x = results[i].x;
            best_final = results[i].value;
        }
    }
    return s;
}

double* field(GrowthParams& p, const std::string& name)
{
    if (name == "xi") return &p.xi;
    if (name == "rho_p_red") return &p.rho_p_red;
    if (name == "rho_p_blue") return &p.rho_p_blue;
    if (name == "rho_u_red") return &p.rho_u_red;
    if (name == "rho_u_blue") return &p.rho_u_blue;
    if (name == "eta") return &p.eta;
    throw std::invalid_argument("parameter '" + name + "' cannot be fitted");
}

double* field(UnipartiteParams& p, const std::string& name)
{
    if (name == "xi") return &p.xi;
    if (name == "rho_p_red") return &p.rho_p_red;
    if (name == "rho_p_blue") return &p.rho_p_blue;
    if (name == "rho_u_red") return &p.rho_u_red;
    if (name == "rho_u_blue") return &p.rho_u_blue;
    throw std::invalid_argument("parameter '" + name + "' cannot be fitted on a unipartite network");
}

void check_config(const FitConfig& c)
{
    if (c.K < 2) throw std::invalid_argument("K must be at least 2");
    if (c.restarts == 0) throw std::invalid_argument("restarts must be positive");
    if (c.free_params.empty()) throw std::invalid_argument("no free parameters");
}

double clamp_open(double x) { return std::clamp(x, kEtaMargin, 1.0 - kEtaMargin); }

void note_dropped(FitResult& out, const EmpiricalRatios& emp, std::size_t K, std::string_view what)
{
    for (std::size_t k = 1; k <= K; ++k)
        if (!emp.usable[k - 1]) out.dropped_k.push_back(k);
    if (!out.dropped_k.empty())
        out.warnings.push_back(fmt::format("{} size(s) with no blue {} dropped from the per-size objective",
                                           out.dropped_k.size(), what));
}

}  // namespace

std::vector<double> fit_start(std::uint64_t seed, std::size_t restart, std::size_t dim)
{
    std::vector<double> x(dim);
    if (restart < kStrata) {
        for (std::size_t j = 0; j < dim; ++j) {
            Rng rng(seed, j);
            std::vector<std::size_t> perm(kStrata);
            std::iota(perm.begin(), perm.end(), 0);
            for (std::size_t i = kStrata - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
            double u = 0.0;
            for (std::size_t i = 0; i <= restart; ++i) u = rng.uniform();
            x[j] = (static_cast<double>(perm[restart]) + u) / static_cast<double>(kStrata);
        }
    } else {
        Rng rng(seed, 1000 + restart);
        for (double& v : x) v = rng.uniform();
    }
    return x;
}

double homophily_objective(const GrowthParams& params, const EmpiricalRatios& emp, Objective objective, std::size_t K)
{
    try {
        return score(group_size_distribution(params, K), emp, objective, K);
    } catch (const std::exception&) {
        return kInf;
    }
}

FitResult fit_homophily(const BipartiteNetwork& network, const FitConfig& config)
{
    check_config(config);
    FitResult out;
    out.objective = config.objective;
    out.direct = estimate_direct(network);
    if (out.direct.degenerate) throw std::invalid_argument("network needs members of both colors");

    GrowthParams base;
    base.alpha = clamp_open(out.direct.alpha);
    base.eta = clamp_open(out.direct.eta);
    base.r = out.direct.r;
    if (base.r > 0.5) {
        base.r = 0.5;
        out.warnings.push_back("red member share exceeds 1/2; r clamped to 0.5");
    }

    const auto emp = empirical_ratios(network.group_size_counts(Color::Red), network.group_size_counts(Color::Blue), config.K);
    note_dropped(out, emp, config.K, "groups");
    out.K_used = config.objective == Objective::PaperSumDifference ? usable_prefix(emp) : config.K;
    if (out.K_used == 0) throw std::invalid_argument("no usable group size: blue count is zero at k = 1");
    if (config.objective == Objective::PaperSumDifference && out.K_used < config.K)
        out.warnings.push_back(fmt::format("K shrunk from {} to {}", config.K, out.K_used));

    Box box;
    for (const auto& name : config.free_params) {
        field(base, name);
        const bool open = name == "eta";
        box.lo.push_back(open ? kEtaMargin : 0.0);
        box.hi.push_back(open ? 1.0 - kEtaMargin : 1.0);
    }
    auto build = [&](std::span<const double> x) {
        GrowthParams p = base;
        for (std::size_t i = 0; i < x.size(); ++i) *field(p, config.free_params[i]) = x[i];
        return p;
    };
    const std::size_t K = out.K_used;
    auto f = [&](std::span<const double> x) { return homophily_objective(build(x), emp, config.objective, K); };

    const auto s = run_restarts(f, box, config);
    out.params_hat = build(s.best_x);
    out.restart_best = s.restart_best;
    out.trace = s.trace;
    out.objective_value = homophily_objective(out.params_hat, emp, config.objective, K);
    out.paper_sum_difference = homophily_objective(out.params_hat, emp, Objective::PaperSumDifference, usable_prefix(emp));
    out.per_size_l1 = homophily_objective(out.params_hat, emp, Objective::PerSizeL1, config.K);
    return out;
}

double unipartite_objective(const UnipartiteParams& params, const EmpiricalRatios& emp, Objective objective, std::size_t K)
{
    try {
        return score(unipartite_analytics(params, K).degrees, emp, objective, K);
    } catch (const std::exception&) {
        return kInf;
    }
}

FitResult fit_unipartite(const UnipartiteNetwork& network, const FitConfig& config)
{
    check_config(config);
    FitResult out;
    out.objective = config.objective;
    std::uint64_t red = 0;
    for (const Member& m : network.members()) red += m.color == Color::Red;
    const auto n = network.members().size();
    if (n == 0 || network.edges().empty()) throw std::invalid_argument("empty network");
    if (red == 0 || red == n) throw std::invalid_argument("network needs members of both colors");

    UnipartiteParams base;
    base.r = static_cast<double>(red) / static_cast<double>(n);
    out.direct.r = base.r;
    out.direct.alpha = 1.0;
    out.direct.small_sample = network.edges().size() < 1000;
    if (base.r > 0.5) {
        base.r = 0.5;
        out.warnings.push_back("red member share exceeds 1/2; r clamped to 0.5");
    }

    const auto emp = empirical_ratios(network.degree_counts(Color::Red), network.degree_counts(Color::Blue), config.K);
    note_dropped(out, emp, config.K, "members");
    out.K_used = config.objective == Objective::PaperSumDifference ? usable_prefix(emp) : config.K;
    if (out.K_used == 0) throw std::invalid_argument("no usable degree: blue count is zero at k = 1");

    std::vector<std::string> names;
    for (const auto& name : config.free_params) {
        if (name == "eta") {
            out.warnings.push_back("eta has no role in the unipartite model; ignored");
            continue;
        }
        field(base, name);
        names.push_back(name);
    }
    if (names.empty()) throw std::invalid_argument("no free parameters");
    Box box{std::vector<double>(names.size(), 0.0), std::vector<double>(names.size(), 1.0)};
    auto build = [&](std::span<const double> x) {
        UnipartiteParams p = base;
        for (std::size_t i = 0; i < x.size(); ++i) *field(p, names[i]) = x[i];
        return p;
    };
    const std::size_t K = out.K_used;
    auto f = [&](std::span<const double> x) { return unipartite_objective(build(x), emp, config.objective, K); };

    const auto s = run_restarts(f, box, config);
    const UnipartiteParams u = build(s.best_x);
    out.params_hat.r = u.r;
    out.params_hat.xi = u.xi;
    out.params_hat.rho_p_red = u.rho_p_red;
    out.params_hat.rho_p_blue = u.rho_p_blue;
    out.params_hat.rho_u_red = u.rho_u_red;
    out.params_hat.rho_u_blue = u.rho_u_blue;
    out.restart_best = s.restart_best;
    out.trace = s.trace;
    out.objective_value = unipartite_objective(u, emp, config.objective, K);
    out.paper_sum_difference = unipartite_objective(u, emp, Objective::PaperSumDifference, usable_prefix(emp));
    out.per_size_l1 = unipartite_objective(u, emp, Objective::PerSizeL1, config.K);
    return out;
}

}  // namespace chasm
