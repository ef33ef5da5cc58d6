#include "chasm/core.hpp"

#include <cmath>

namespace chasm {

std::string_view to_string(Color c) noexcept { return c == Color::Red ? "red" : "blue"; }

Color color_from_string(std::string_view s)
{
    if (s == "red" || s == "Red" || s == "R") return Color::Red;
    if (s == "blue" || s == "Blue" || s == "B") return Color::Blue;
    throw std::invalid_argument("unknown color '" + std::string(s) + "'");
}

std::string_view to_string(Variant v) noexcept
{
    switch (v) {
    case Variant::GSHM: return "GSHM";
    case Variant::AdjustedGSHM: return "AdjustedGSHM";
    case Variant::SHM_SelectiveOnRich: return "SHM_SelectiveOnRich";
    case Variant::SHM_SelectiveOnEqualChance: return "SHM_SelectiveOnEqualChance";
    case Variant::SHM_General: return "SHM_General";
    }
    return "GSHM";
}

Variant variant_from_string(std::string_view s)
{
    for (Variant v : {Variant::GSHM, Variant::AdjustedGSHM, Variant::SHM_SelectiveOnRich,
                      Variant::SHM_SelectiveOnEqualChance, Variant::SHM_General}) {
        if (to_string(v) == s) return v;
    }
    throw std::invalid_argument("unknown variant '" + std::string(s) + "'");
}

GrowthParams GrowthParams::shm(Variant v, double alpha, double eta, double r, double xi, double rho)
{
    GrowthParams p;
    p.alpha = alpha;
    p.eta = eta;
    p.r = r;
    p.xi = xi;
    p.variant = v;
    switch (v) {
    case Variant::SHM_SelectiveOnRich:
        p.rho_p_red = p.rho_p_blue = rho;
        p.rho_u_red = p.rho_u_blue = 1.0;
        break;
    case Variant::SHM_SelectiveOnEqualChance:
        p.rho_p_red = p.rho_p_blue = 1.0;
        p.rho_u_red = p.rho_u_blue = rho;
        break;
    case Variant::SHM_General:
    case Variant::GSHM:
    case Variant::AdjustedGSHM:
        p.rho_p_red = p.rho_p_blue = p.rho_u_red = p.rho_u_blue = rho;
        break;
    }
    return p;
}

RangeError::RangeError(std::string field)
    : std::invalid_argument("parameter out of range: " + field), field_(std::move(field))
{
}

namespace {

bool open_unit(double x) { return x > 0.0 && x < 1.0; }
bool closed_unit(double x) { return x >= 0.0 && x <= 1.0; }

void check_rhos(double p_red, double p_blue, double u_red, double u_blue)
{
    if (!closed_unit(p_red)) throw RangeError("rho_p_red");
    if (!closed_unit(p_blue)) throw RangeError("rho_p_blue");
    if (!closed_unit(u_red)) throw RangeError("rho_u_red");
    if (!closed_unit(u_blue)) throw RangeError("rho_u_blue");
}

}  // namespace

GrowthParams validate_params(const GrowthParams& p)
{
    if (!open_unit(p.alpha)) throw RangeError("alpha");
    if (!open_unit(p.eta)) throw RangeError("eta");
    if (!(p.r > 0.0 && p.r <= 0.5)) throw RangeError("r");
    if (!closed_unit(p.xi)) throw RangeError("xi");
    check_rhos(p.rho_p_red, p.rho_p_blue, p.rho_u_red, p.rho_u_blue);

    switch (p.variant) {
    case Variant::SHM_SelectiveOnRich:
        if (p.rho_u_red != 1.0 || p.rho_u_blue != 1.0 || p.rho_p_red != p.rho_p_blue)
            throw VariantConstraintError(
                "SHM_SelectiveOnRich requires rho_u_red = rho_u_blue = 1 and rho_p_red = rho_p_blue");
        break;
    case Variant::SHM_SelectiveOnEqualChance:
        if (p.rho_p_red != 1.0 || p.rho_p_blue != 1.0 || p.rho_u_red != p.rho_u_blue)
            throw VariantConstraintError(
                "SHM_SelectiveOnEqualChance requires rho_p_red = rho_p_blue = 1 and rho_u_red = rho_u_blue");
        break;
    case Variant::SHM_General:
        if (p.rho_p_red != p.rho_p_blue || p.rho_p_red != p.rho_u_red || p.rho_p_red != p.rho_u_blue)
            throw VariantConstraintError("SHM_General requires all four rho values to be equal");
        break;
    case Variant::GSHM:
    case Variant::AdjustedGSHM:
        break;
    }
    return p;
}

UnipartiteParams UnipartiteParams::from(const GrowthParams& p)
{
    return {p.r, p.xi, p.rho_p_red, p.rho_p_blue, p.rho_u_red, p.rho_u_blue};
}

UnipartiteParams validate_params(const UnipartiteParams& p)
{
    if (!(p.r > 0.0 && p.r <= 0.5)) throw RangeError("r");
    if (!closed_unit(p.xi)) throw RangeError("xi");
    check_rhos(p.rho_p_red, p.rho_p_blue, p.rho_u_red, p.rho_u_blue);
    return p;
}

MemberId BipartiteNetwork::add_member(Color c)
{
    members_.push_back({c, 0});
    ++tallies_.members[index(c)];
    return static_cast<MemberId>(members_.size() - 1);
}

GroupId BipartiteNetwork::add_group(Color c, MemberId creator)
{
    if (creator >= members_.size()) throw ReferenceError("group creator does not exist");
    groups_.push_back({c, 0, creator, edges_.size() + 1});
    ++tallies_.groups[index(c)];
    const auto g = static_cast<GroupId>(groups_.size() - 1);
    add_edge(creator, g);
    return g;
}

void BipartiteNetwork::add_edge(MemberId m, GroupId g)
{
    if (m >= members_.size() || g >= groups_.size()) throw ReferenceError("edge endpoint does not exist");
    edges_.push_back({m, g});
    Member& mem = members_[m];
    Group& grp = groups_[g];
    ++mem.degree;
    ++grp.size;
    ++tallies_.member_degree[index(mem.color)];
    ++tallies_.group_size[index(grp.color)];
}

std::vector<std::uint32_t> BipartiteNetwork::red_members_per_group() const
{
    std::vector<std::uint32_t> red(groups_.size(), 0);
    for (const Edge& e : edges_) {
        if (members_[e.member].color == Color::Red) ++red[e.group];
    }
    return red;
}

std::vector<std::uint64_t> BipartiteNetwork::group_size_counts(Color c) const
{
    std::vector<std::uint64_t> counts(1, 0);
    for (const Group& g : groups_) {
        if (g.color != c) continue;
        if (g.size >= counts.size()) counts.resize(g.size + 1, 0);
        ++counts[g.size];
    }
    return counts;
}

std::vector<std::uint64_t> BipartiteNetwork::member_degree_counts(Color c) const
{
    std::vector<std::uint64_t> counts(1, 0);
    for (const Member& m : members_) {
        if (m.color != c) continue;
        if (m.degree >= counts.size()) counts.resize(m.degree + 1, 0);
        ++counts[m.degree];
    }
    return counts;
}

BipartiteNetwork BipartiteNetwork::with_group_colors(const std::vector<Color>& colors) const
{
    if (colors.size() != groups_.size()) throw std::invalid_argument("group color vector has the wrong length");
    BipartiteNetwork out = *this;
    for (std::size_t g = 0; g < colors.size(); ++g) out.groups_[g].color = colors[g];
    out.tallies_ = recount(out);
    return out;
}

BipartiteNetwork BipartiteNetwork::seed_pairs()
{
    BipartiteNetwork n;
    const MemberId red = n.add_member(Color::Red);
    n.add_group(Color::Red, red);
    const MemberId blue = n.add_member(Color::Blue);
    n.add_group(Color::Blue, blue);
    return n;
}

void BipartiteNetwork::reserve(std::size_t edges, std::size_t members, std::size_t groups)
{
    edges_.reserve(edges);
    members_.reserve(members);
    groups_.reserve(groups);
}

Tallies recount(const BipartiteNetwork& network)
{
    const auto& members = network.members();
    const auto& groups = network.groups();
    Tallies t;
    for (const Member& m : members) ++t.members[index(m.color)];
    for (const Group& g : groups) ++t.groups[index(g.color)];
    for (const Edge& e : network.edges()) {
        if (e.member >= members.size()) throw ReferenceError("edge references unknown member " + std::to_string(e.member));
        if (e.group >= groups.size()) throw ReferenceError("edge references unknown group " + std::to_string(e.group));
        ++t.member_degree[index(members[e.member].color)];
        ++t.group_size[index(groups[e.group].color)];
    }
    return t;
}

MemberId UnipartiteNetwork::add_member(Color c)
{
    members_.push_back({c, 0});
    return static_cast<MemberId>(members_.size() - 1);
}

void UnipartiteNetwork::add_edge(MemberId a, MemberId b)
{
    if (a >= members_.size() || b >= members_.size()) throw ReferenceError("edge endpoint does not exist");
    if (a == b) throw std::invalid_argument("self-loops are not allowed");
    edges_.push_back({a, b});
    ++members_[a].degree;
    ++members_[b].degree;
}

std::vector<std::uint64_t> UnipartiteNetwork::degree_counts(Color c) const
{
    std::vector<std::uint64_t> counts(1, 0);
    for (const Member& m : members_) {
        if (m.color != c) continue;
        if (m.degree >= counts.size()) counts.resize(m.degree + 1, 0);
        ++counts[m.degree];
    }
    return counts;
}

void UnipartiteNetwork::reserve(std::size_t members, std::size_t edges)
{
    members_.reserve(members);
    edges_.reserve(edges);
}

}  // namespace chasm
