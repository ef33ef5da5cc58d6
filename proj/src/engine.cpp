#include "chasm/engine.hpp"

#include <algorithm>
#include <ostream>
#include <string>
#include <thread>

namespace chasm {

std::string_view to_string(SamplingMode m) noexcept
{
    return m == SamplingMode::ExactMixture ? "exact" : "literal";
}

SamplingMode sampling_from_string(std::string_view s)
{
    if (s == "exact" || s == "ExactMixture") return SamplingMode::ExactMixture;
    if (s == "literal" || s == "LiteralRejection") return SamplingMode::LiteralRejection;
    throw std::invalid_argument("unknown sampling mode '" + std::string(s) + "'");
}

GrowthState::GrowthState(BipartiteNetwork network) : net_(std::move(network))
{
    const auto& groups = net_.groups();
    for (GroupId g = 0; g < groups.size(); ++g) groups_by_color_[index(groups[g].color)].push_back(g);
    for (const Edge& e : net_.edges()) group_endpoints_[index(groups[e.group].color)].push_back(e.group);
}

void GrowthState::reserve(std::size_t edges, std::size_t members, std::size_t groups)
{
    net_.reserve(edges, members, groups);
}

MemberId GrowthState::pick_member_by_degree(Rng& rng) const
{
    const auto& edges = net_.edges();
    return edges[rng.below(edges.size())].member;
}

GrowthState::Join GrowthState::sample_join_exact(const GrowthParams& p, Color c, Rng& rng) const
{
    const Color o = opposite(c);
    const double t = static_cast<double>(net_.t());
    const double n_groups = static_cast<double>(net_.groups().size());
    const auto& tl = net_.tallies();

    // Mass of the four (mechanism, same/other color) outcomes of one pick,
    // after acceptance. Restarts renormalize over their sum.
    const double pref_same = p.xi * static_cast<double>(tl.group_size[index(c)]) / t;
    const double pref_other = p.xi * static_cast<double>(tl.group_size[index(o)]) / t * p.rho_p(c);
    const double unif_same = (1.0 - p.xi) * static_cast<double>(tl.groups[index(c)]) / n_groups;
    const double unif_other = (1.0 - p.xi) * static_cast<double>(tl.groups[index(o)]) / n_groups * p.rho_u(c);

    double u = rng.uniform() * (pref_same + pref_other + unif_same + unif_other);
    if (u < pref_same) {
        const auto& urn = group_endpoints_[index(c)];
        return {urn[rng.below(urn.size())], Mechanism::Pref, 0};
    }
    u -= pref_same;
    if (u < pref_other) {
        const auto& urn = group_endpoints_[index(o)];
        return {urn[rng.below(urn.size())], Mechanism::Pref, 0};
    }
    u -= pref_other;
    if (u < unif_same || unif_other <= 0.0) {
        const auto& pool = groups_by_color_[index(c)];
        return {pool[rng.below(pool.size())], Mechanism::Uniform, 0};
    }
    const auto& pool = groups_by_color_[index(o)];
    return {pool[rng.below(pool.size())], Mechanism::Uniform, 0};
}

GrowthState::Join GrowthState::sample_join_literal(const GrowthParams& p, Color c, Rng& rng) const
{
    const auto& edges = net_.edges();
    const auto& groups = net_.groups();
    for (std::uint64_t rejections = 0; rejections < kRestartGuard; ++rejections) {
        GroupId g;
        Mechanism mech;
        double accept;
        if (rng.uniform() < p.xi) {
            g = edges[rng.below(edges.size())].group;
            mech = Mechanism::Pref;
            accept = p.rho_p(c);
        } else {
            g = static_cast<GroupId>(rng.below(groups.size()));
            mech = Mechanism::Uniform;
            accept = p.rho_u(c);
        }
        if (groups[g].color == c || rng.uniform() < accept) return {g, mech, rejections};
    }
    throw PathologicalParameters("connection growth exceeded " + std::to_string(kRestartGuard) +
                                 " restarts; acceptance probability is effectively zero");
}

GroupId GrowthState::create_group(Color c, MemberId creator)
{
    const GroupId g = net_.add_group(c, creator);
    groups_by_color_[index(c)].push_back(g);
    group_endpoints_[index(c)].push_back(g);
    return g;
}

void GrowthState::join(MemberId m, GroupId g)
{
    net_.add_edge(m, g);
    group_endpoints_[index(net_.groups()[g].color)].push_back(g);
}

GrowthRun grow_run(const GrowthParams& params, const RunConfig& config)
{
    const GrowthParams p = validate_params(params);
    if (config.t_max < 2) throw std::invalid_argument("t_max must be at least 2");

    Rng rng(config.seed, config.stream);
    GrowthState state(BipartiteNetwork::seed_pairs());
    const auto t_max = static_cast<std::size_t>(config.t_max);
    state.reserve(t_max, static_cast<std::size_t>(p.alpha * static_cast<double>(t_max) * 1.05) + 16,
                  static_cast<std::size_t>(p.eta * static_cast<double>(t_max) * 1.05) + 16);

    GrowthRun run;
    if (config.record_events) run.events.reserve(t_max - 2);

    for (std::uint64_t t = 2; t < config.t_max; ++t) {
        GrowthEvent ev{};
        MemberId m;
        if (rng.uniform() < p.alpha) {
            const Color c = rng.bernoulli(p.r) ? Color::Red : Color::Blue;
            m = state.add_member(c);
            ev.new_member = true;
        } else {
            m = state.pick_member_by_degree(rng);
            ev.new_member = false;
        }
        const Color mc = state.network().members()[m].color;
        ev.member = m;

        if (rng.uniform() < p.eta) {
            Color gc = mc;
            if (p.variant == Variant::AdjustedGSHM) gc = rng.bernoulli(p.r) ? Color::Red : Color::Blue;
            ev.created_group = state.create_group(gc, m);
        } else {
            const auto join = config.sampling == SamplingMode::ExactMixture ? state.sample_join_exact(p, mc, rng)
                                                                            : state.sample_join_literal(p, mc, rng);
            state.join(m, join.group);
            ev.joined_group = join.group;
            ev.mechanism = join.mechanism;
            ev.rejections = join.rejections;
        }
        ev.t = t + 1;
        if (config.record_events) run.events.push_back(ev);
    }
    run.network = std::move(state).release();
    return run;
}

BipartiteNetwork grow(const GrowthParams& params, const RunConfig& config)
{
    RunConfig c = config;
    c.record_events = false;
    return grow_run(params, c).network;
}

std::vector<BipartiteNetwork> grow_replicas(const GrowthParams& params, const RunConfig& config,
                                            std::size_t count)
{
    validate_params(params);
    std::vector<BipartiteNetwork> out(count);
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(count, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) {
                RunConfig c = config;
                c.stream = config.stream + i;
                out[i] = grow(params, c);
            }
        });
    }
    for (auto& th : pool) th.join();
    return out;
}

std::vector<double> step_distribution(const BipartiteNetwork& network, const GrowthParams& params, MemberId member)
{
    const auto& groups = network.groups();
    if (member >= network.members().size()) throw ReferenceError("unknown member");
    if (groups.empty()) throw std::invalid_argument("network has no groups");
    const Color c = network.members()[member].color;
    const double t = static_cast<double>(network.t());
    const double n = static_cast<double>(groups.size());

    std::vector<double> w(groups.size());
    double total = 0.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const bool same = groups[g].color == c;
        const double a_p = same ? 1.0 : params.rho_p(c);
        const double a_u = same ? 1.0 : params.rho_u(c);
        w[g] = params.xi * static_cast<double>(groups[g].size) / t * a_p + (1.0 - params.xi) / n * a_u;
        total += w[g];
    }
    for (double& x : w) x /= total;
    return w;
}

UnipartiteNetwork grow_unipartite(const UnipartiteParams& params, std::uint64_t n, std::uint64_t seed,
                                  SamplingMode sampling)
{
    const UnipartiteParams p = validate_params(params);
    if (n < 2) throw std::invalid_argument("unipartite network needs at least 2 members");

    Rng rng(seed);
    UnipartiteNetwork net;
    net.reserve(n, n - 1);
    std::array<std::vector<MemberId>, 2> endpoints;  // one entry per edge endpoint, by endpoint color
    std::array<std::vector<MemberId>, 2> by_color;
    std::vector<MemberId> all_endpoints;

    auto add = [&](Color c) {
        const MemberId id = net.add_member(c);
        by_color[index(c)].push_back(id);
        return id;
    };
    auto connect = [&](MemberId a, MemberId b) {
        net.add_edge(a, b);
        const auto& mem = net.members();
        endpoints[index(mem[a].color)].push_back(a);
        endpoints[index(mem[b].color)].push_back(b);
        if (sampling == SamplingMode::LiteralRejection) {
            all_endpoints.push_back(a);
            all_endpoints.push_back(b);
        }
    };

    connect(add(Color::Red), add(Color::Blue));

    for (std::uint64_t i = 2; i < n; ++i) {
        const Color c = rng.bernoulli(p.r) ? Color::Red : Color::Blue;
        const Color o = opposite(c);
        // existing population, before the newcomer is added
        const double existing = static_cast<double>(net.members().size());
        MemberId target;
        if (sampling == SamplingMode::ExactMixture) {
            const double ends = static_cast<double>(endpoints[0].size() + endpoints[1].size());
            const double pref_same = p.xi * static_cast<double>(endpoints[index(c)].size()) / ends;
            const double pref_other = p.xi * static_cast<double>(endpoints[index(o)].size()) / ends * p.rho_p(c);
            const double unif_same = (1.0 - p.xi) * static_cast<double>(by_color[index(c)].size()) / existing;
            const double unif_other =
                (1.0 - p.xi) * static_cast<double>(by_color[index(o)].size()) / existing * p.rho_u(c);
            double u = rng.uniform() * (pref_same + pref_other + unif_same + unif_other);
            const std::vector<MemberId>* pool;
            if (u < pref_same) {
                pool = &endpoints[index(c)];
            } else if ((u -= pref_same) < pref_other) {
                pool = &endpoints[index(o)];
            } else if ((u -= pref_other) < unif_same || unif_other <= 0.0) {
                pool = &by_color[index(c)];
            } else {
                pool = &by_color[index(o)];
            }
            target = (*pool)[rng.below(pool->size())];
        } else {
            std::uint64_t tries = 0;
            for (;; ++tries) {
                if (tries >= kRestartGuard) throw PathologicalParameters("unipartite connection growth exceeded restart guard");
                double accept;
                if (rng.uniform() < p.xi) {
                    target = all_endpoints[rng.below(all_endpoints.size())];
                    accept = p.rho_p(c);
                } else {
                    target = static_cast<MemberId>(rng.below(net.members().size()));
                    accept = p.rho_u(c);
                }
                if (net.members()[target].color == c || rng.uniform() < accept) break;
            }
        }
        connect(add(c), target);
    }
    return net;
}

void write_events_jsonl(std::ostream& out, const std::vector<GrowthEvent>& events)
{
    for (const GrowthEvent& e : events) {
        out << "{\"t\":" << e.t << ",\"action\":\"" << (e.new_member ? "new_member" : "reuse_member")
            << "\",\"member\":" << e.member;
        if (e.created_group) out << ",\"created_group\":" << *e.created_group;
        if (e.joined_group) {
            out << ",\"joined_group\":" << *e.joined_group << ",\"mechanism\":\""
                << (e.mechanism == Mechanism::Pref ? "pref" : "uniform") << '"';
        }
        out << ",\"rejections\":" << e.rejections << "}\n";
    }
}

}  // namespace chasm
