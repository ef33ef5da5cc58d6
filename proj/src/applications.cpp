#include "chasm/applications.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include <boost/random/poisson_distribution.hpp>

#include "chasm/rng.hpp"

namespace chasm {

std::string_view to_string(Counting c) noexcept { return c == Counting::UniqueMembers ? "unique" : "impressions"; }

Counting counting_from_string(std::string_view s)
{
    if (s == "impressions" || s == "Impressions") return Counting::Impressions;
    if (s == "unique" || s == "UniqueMembers") return Counting::UniqueMembers;
    throw std::invalid_argument("unknown counting mode '" + std::string(s) + "'");
}

double ad_reach_ratio(const LimitDistribution& groups, const MemberRatioCurve& members, std::uint64_t k_a)
{
    if (k_a < 1) throw std::invalid_argument("k_A must be at least 1");
    const std::size_t k_max = std::min(groups.k_max(), members.rr.size());
    if (k_a > k_max) throw std::domain_error("no group size reaches the threshold");
    double num = 0.0, den = 0.0;
    for (std::size_t k = k_a; k <= k_max; ++k) {
        const double gr = groups.value(Color::Red, k);
        const double gb = groups.value(Color::Blue, k);
        const double kd = static_cast<double>(k);
        num += kd * (gr * members.rr[k - 1] + gb * members.rb[k - 1]);
        den += kd * (gr + gb);
    }
    if (den == 0.0) throw std::domain_error("no group mass at or above the threshold");
    return num / den;
}

double ad_reach_ratio(const BipartiteNetwork& network, std::uint64_t k_a, Counting counting)
{
    if (k_a < 1) throw std::invalid_argument("k_A must be at least 1");
    const auto& groups = network.groups();
    const auto& members = network.members();
    std::uint64_t red = 0, total = 0;
    if (counting == Counting::Impressions) {
        for (const Edge& e : network.edges()) {
            if (groups[e.group].size < k_a) continue;
            ++total;
            red += members[e.member].color == Color::Red;
        }
    } else {
        std::vector<char> seen(members.size(), 0);
        for (const Edge& e : network.edges()) {
            if (groups[e.group].size < k_a || seen[e.member]) continue;
            seen[e.member] = 1;
            ++total;
            red += members[e.member].color == Color::Red;
        }
    }
    if (total == 0) throw std::domain_error("no group meets the size threshold");
    return static_cast<double>(red) / static_cast<double>(total);
}

std::size_t checked_count(double theta, std::size_t n)
{
    const double c = std::floor(theta * static_cast<double>(n) + 1e-9);
    return static_cast<std::size_t>(std::clamp(c, 0.0, static_cast<double>(n)));
}

namespace {

void check_config(const FactCheckConfig& c)
{
    if (!(c.p > 0.0)) throw std::invalid_argument("report tendency p must be positive");
    if (!(c.P >= 0.0 && c.P <= 100.0)) throw std::invalid_argument("P must lie in [0, 100]");
    if (c.reps < 1) throw std::invalid_argument("reps must be at least 1");
    if (c.items_per_group < 1) throw std::invalid_argument("items_per_group must be at least 1");
}

// Ranking of all flagged items for one repetition: most reports first, then
// larger group, then lower group id.
std::vector<std::uint32_t> rank_items(const BipartiteNetwork& network, const FactCheckConfig& config, std::size_t rep)
{
    const auto& groups = network.groups();
    const std::size_t per = config.items_per_group;
    const std::size_t n = groups.size() * per;
    Rng rng(config.seed, rep);
    std::vector<std::uint64_t> reports(n);
    for (std::size_t i = 0; i < n; ++i) {
        boost::random::poisson_distribution<std::uint64_t, double> pois(config.p * groups[i / per].size);
        reports[i] = pois(rng);
    }
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (reports[a] != reports[b]) return reports[a] > reports[b];
        const auto sa = groups[a / per].size, sb = groups[b / per].size;
        if (sa != sb) return sa > sb;
        return a < b;
    });
    return order;
}

template <class Fn>
void for_each_rep(std::size_t reps, Fn fn)
{
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(reps, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t rep = w; rep < reps; rep += workers) fn(rep);
        });
    for (auto& th : pool) th.join();
}

}  // namespace

FactCheckMetrics factcheck_simulate(const BipartiteNetwork& network, const FactCheckConfig& config)
{
    return factcheck_sweep(network, config, {config.P}).front();
}

std::vector<FactCheckMetrics> factcheck_sweep(const BipartiteNetwork& network, const FactCheckConfig& config,
                                              const std::vector<double>& P_values)
{
    check_config(config);
    for (double P : P_values)
        if (!(P >= 0.0 && P <= 100.0)) throw std::invalid_argument("P must lie in [0, 100]");
    const auto& groups = network.groups();
    const auto red_members = network.red_members_per_group();
    const std::size_t per = config.items_per_group;
    const std::size_t n = groups.size() * per;
    const std::size_t m = P_values.size();

    // per rep and per P: checked items, red checked items, checked groups,
    // red checked groups, members of checked groups, members of checked red
    // groups, red members of checked groups
    struct Row {
        double items = 0, red_items = 0, groups = 0, red_groups = 0, members = 0, members_red_groups = 0, red_in_groups = 0;
    };
    std::vector<std::vector<Row>> rows(config.reps, std::vector<Row>(m));

    for_each_rep(config.reps, [&](std::size_t rep) {
        const auto order = rank_items(network, config, rep);
        std::vector<std::size_t> cut(m);
        for (std::size_t j = 0; j < m; ++j) cut[j] = checked_count(P_values[j] / 100.0, n);
        std::vector<std::size_t> by_cut(m);
        std::iota(by_cut.begin(), by_cut.end(), 0);
        std::sort(by_cut.begin(), by_cut.end(), [&](std::size_t a, std::size_t b) { return cut[a] < cut[b]; });

        std::vector<char> seen(per > 1 ? groups.size() : 0, 0);
        Row acc;
        std::size_t pos = 0;
        for (std::size_t idx : by_cut) {
            for (; pos < cut[idx]; ++pos) {
                const std::size_t g = order[pos] / per;
                const bool red = groups[g].color == Color::Red;
                acc.items += 1;
                acc.red_items += red;
                if (per > 1) {
                    if (seen[g]) continue;
                    seen[g] = 1;
                }
                acc.groups += 1;
                acc.red_groups += red;
                acc.members += groups[g].size;
                acc.members_red_groups += red ? groups[g].size : 0;
                acc.red_in_groups += red_members[g];
            }
            rows[rep][idx] = acc;
        }
    });

    std::vector<FactCheckMetrics> out(m);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t j = 0; j < m; ++j) {
        double a = 0, c = 0, d = 0, items = 0, red_items = 0;
        std::size_t used = 0;
        for (std::size_t rep = 0; rep < config.reps; ++rep) {
            const Row& r = rows[rep][j];
            items += r.items;
            red_items += r.red_items;
            if (r.groups == 0) continue;
            ++used;
            a += r.red_groups / r.groups;
            c += r.members_red_groups / r.members;
            d += r.red_in_groups / r.members;
        }
        FactCheckMetrics& f = out[j];
        f.protected_group_red_share = used ? a / static_cast<double>(used) : nan;
        f.protected_members_red_share = used ? c / static_cast<double>(used) : nan;
        f.protected_red_members_share = used ? d / static_cast<double>(used) : nan;
        f.checked_count_red_share = items > 0 ? red_items / items : nan;
        f.checked_per_rep = checked_count(P_values[j] / 100.0, n);
    }
    return out;
}

HKernel HKernel::user(Fn fn)
{
    HKernel h;
    h.provenance_ = KernelProvenance::UserSupplied;
    h.fn_ = std::move(fn);
    return h;
}

HKernel HKernel::grid(std::vector<std::uint64_t> sizes, std::vector<double> thetas, std::vector<std::vector<double>> values,
                      std::vector<std::uint64_t> samples)
{
    if (sizes.empty() || thetas.empty() || values.size() != sizes.size())
        throw std::invalid_argument("kernel grid shape mismatch");
    HKernel h;
    h.provenance_ = KernelProvenance::SimulationInduced;
    h.sizes_ = std::move(sizes);
    h.thetas_ = std::move(thetas);
    h.values_ = std::move(values);
    h.samples_ = std::move(samples);
    return h;
}

double HKernel::operator()(std::uint64_t k, double theta) const
{
    if (fn_) return fn_(k, theta);
    auto it = std::upper_bound(sizes_.begin(), sizes_.end(), k);
    const std::size_t i = it == sizes_.begin() ? 0 : static_cast<std::size_t>(it - sizes_.begin()) - 1;
    const auto& row = values_[i];
    if (theta <= thetas_.front()) return row.front();
    if (theta >= thetas_.back()) return row.back();
    const std::size_t j = static_cast<std::size_t>(std::upper_bound(thetas_.begin(), thetas_.end(), theta) - thetas_.begin());
    const double w = (theta - thetas_[j - 1]) / (thetas_[j] - thetas_[j - 1]);
    return row[j - 1] + w * (row[j] - row[j - 1]);
}

KernelCheck check_kernel(const HKernel& h, const std::vector<std::uint64_t>& sizes, const std::vector<double>& thetas,
                         double slack)
{
    KernelCheck c;
    for (double th : thetas)
        for (std::size_t i = 1; i < sizes.size(); ++i)
            if (h(sizes[i], th) < h(sizes[i - 1], th) - slack) c.monotone_in_k = false;
    for (std::uint64_t k : sizes) {
        for (std::size_t j = 1; j < thetas.size(); ++j)
            if (h(k, thetas[j]) < h(k, thetas[j - 1]) - slack) c.monotone_in_theta = false;
        if (std::abs(h(k, 0.0)) > slack) c.zero_at_theta_0 = false;
        if (std::abs(h(k, 1.0) - 1.0) > slack) c.one_at_theta_1 = false;
    }
    return c;
}

HKernel induced_h(const BipartiteNetwork& network, const FactCheckConfig& config, const std::vector<double>& thetas)
{
    check_config(config);
    if (thetas.empty()) throw std::invalid_argument("theta grid is empty");
    if (!std::is_sorted(thetas.begin(), thetas.end()) || thetas.front() < 0.0 || thetas.back() > 1.0)
        throw std::invalid_argument("theta grid must be ascending within [0, 1]");
    const auto& groups = network.groups();
    const std::size_t per = config.items_per_group;
    const std::size_t n = groups.size() * per;
    if (n == 0) throw std::invalid_argument("network has no groups");
    // a grid step finer than one item per repetition cannot be resolved
    for (std::size_t j = 1; j < thetas.size(); ++j)
        if ((thetas[j] - thetas[j - 1]) * static_cast<double>(n) * static_cast<double>(config.reps) < 1.0)
            throw std::invalid_argument("insufficient reps for the requested theta resolution");

    std::vector<std::uint64_t> sizes;
    for (const Group& g : groups) sizes.push_back(g.size);
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    std::vector<std::size_t> size_index(groups.size());
    for (GroupId g = 0; g < groups.size(); ++g)
        size_index[g] = static_cast<std::size_t>(std::lower_bound(sizes.begin(), sizes.end(), groups[g].size) - sizes.begin());

    std::vector<std::size_t> cut(thetas.size());
    for (std::size_t j = 0; j < thetas.size(); ++j) cut[j] = checked_count(thetas[j], n);

    // hits[rep][size][first theta index at which the item is checked]
    std::vector<std::vector<std::vector<std::uint64_t>>> hits(
        config.reps, std::vector<std::vector<std::uint64_t>>(sizes.size(), std::vector<std::uint64_t>(thetas.size() + 1, 0)));
    for_each_rep(config.reps, [&](std::size_t rep) {
        const auto order = rank_items(network, config, rep);
        for (std::size_t pos = 0; pos < order.size(); ++pos) {
            const std::size_t first = static_cast<std::size_t>(std::upper_bound(cut.begin(), cut.end(), pos) - cut.begin());
            ++hits[rep][size_index[order[pos] / per]][first];
        }
    });

    std::vector<std::uint64_t> items(sizes.size(), 0);
    for (GroupId g = 0; g < groups.size(); ++g) items[size_index[g]] += per * config.reps;
    std::vector<std::vector<double>> values(sizes.size(), std::vector<double>(thetas.size(), 0.0));
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        std::uint64_t running = 0;
        for (std::size_t j = 0; j < thetas.size(); ++j) {
            for (std::size_t rep = 0; rep < config.reps; ++rep) running += hits[rep][i][j];
            values[i][j] = static_cast<double>(running) / static_cast<double>(items[i]);
        }
    }
    return HKernel::grid(std::move(sizes), thetas, std::move(values), std::move(items));
}

ProtectionRatio protection_ratio(const LimitDistribution& dist, const HKernel& h, double theta)
{
    if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0, 1]");
    ProtectionRatio out;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 1; k <= dist.k_max(); ++k) {
        const double gr = dist.value(Color::Red, k);
        const double gb = dist.value(Color::Blue, k);
        out.covered_mass += gr + gb;
        if (gr + gb == 0.0) continue;
        const double w = h(k, theta);
        num += gr * w;
        den += (gr + gb) * w;
    }
    if (den == 0.0) throw std::domain_error("all protection scores are zero");
    out.value = num / den;
    return out;
}

LimitDistribution empirical_group_distribution(const BipartiteNetwork& network)
{
    LimitDistribution d;
    const double t = static_cast<double>(network.t());
    if (t == 0) throw std::invalid_argument("empty network");
    const auto red = network.group_size_counts(Color::Red);
    const auto blue = network.group_size_counts(Color::Blue);
    const std::size_t k_max = std::max<std::size_t>({red.size(), blue.size(), 2}) - 1;
    for (Color c : {Color::Red, Color::Blue}) {
        const auto& counts = c == Color::Red ? red : blue;
        auto& logs = d.log_values[index(c)];
        logs.assign(k_max, -std::numeric_limits<double>::infinity());
        for (std::size_t k = 1; k < counts.size(); ++k)
            if (counts[k] > 0) logs[k - 1] = std::log(static_cast<double>(counts[k]) / t);
    }
    return d;
}

}  // namespace chasm
