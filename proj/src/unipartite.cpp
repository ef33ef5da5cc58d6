#include "chasm/unipartite.hpp"

#include <algorithm>
#include <unordered_set>

#include <fmt/format.h>

namespace chasm {

ProjectionTooLarge::ProjectionTooLarge(std::uint64_t required, std::uint64_t cap)
    : std::runtime_error(fmt::format("projection needs {} edges, above the cap of {}; raise the cap to at least {}",
                                     required, cap, required)),
      required_(required)
{
}

namespace {

std::vector<std::vector<MemberId>> distinct_members(const BipartiteNetwork& network)
{
    std::vector<std::vector<MemberId>> by_group(network.groups().size());
    for (const Edge& e : network.edges()) by_group[e.group].push_back(e.member);
    for (auto& v : by_group) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return by_group;
}

std::uint64_t pair_count(const std::vector<std::vector<MemberId>>& by_group)
{
    std::uint64_t total = 0;
    for (const auto& v : by_group) total += static_cast<std::uint64_t>(v.size()) * (v.size() - (v.empty() ? 0 : 1)) / 2;
    return total;
}

}  // namespace

std::uint64_t projected_edge_count(const BipartiteNetwork& network) { return pair_count(distinct_members(network)); }

UnipartiteNetwork project(const BipartiteNetwork& network, const ProjectionOptions& options)
{
    const auto by_group = distinct_members(network);
    const std::uint64_t required = pair_count(by_group);
    if (required > options.edge_cap) throw ProjectionTooLarge(required, options.edge_cap);

    UnipartiteNetwork out;
    out.reserve(network.members().size(), required);
    for (const Member& m : network.members()) out.add_member(m.color);
    std::unordered_set<std::uint64_t> seen;
    for (const auto& v : by_group) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            for (std::size_t j = i + 1; j < v.size(); ++j) {
                if (options.deduplicate && !seen.insert((static_cast<std::uint64_t>(v[i]) << 32) | v[j]).second) continue;
                out.add_edge(v[i], v[j]);
            }
        }
    }
    return out;
}

RatioSeries connection_ratio_by_degree(const UnipartiteNetwork& network, const Binning& binning)
{
    const auto& members = network.members();
    std::vector<std::uint64_t> red(members.size(), 0);
    for (const UnipartiteEdge& e : network.edges()) {
        red[e.a] += members[e.b].color == Color::Red;
        red[e.b] += members[e.a].color == Color::Red;
    }
    std::uint64_t k_max = 0;
    for (const Member& m : members) k_max = std::max<std::uint64_t>(k_max, m.degree);

    RatioSeries out;
    out.binning = binning.describe();
    if (k_max == 0) return out;
    const auto bins = binning.bins(k_max);
    std::vector<double> sum(bins.size(), 0.0);
    std::vector<std::uint64_t> count(bins.size(), 0);
    for (MemberId id = 0; id < members.size(); ++id) {
        const auto deg = members[id].degree;
        if (deg == 0) continue;
        const std::size_t b = static_cast<std::size_t>(
            std::lower_bound(bins.begin(), bins.end(), deg, [](const auto& bin, std::uint64_t k) { return bin.second < k; }) -
            bins.begin());
        sum[b] += static_cast<double>(red[id]) / deg;
        ++count[b];
    }
    for (std::size_t b = 0; b < bins.size(); ++b)
        if (count[b] > 0) out.points.push_back({bins[b].first, bins[b].second, sum[b] / static_cast<double>(count[b]), count[b]});
    return out;
}

}  // namespace chasm
