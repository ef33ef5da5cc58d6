#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chasm {

/// Affiliation of a member or group. Red is the minority, Blue the majority.
enum class Color : std::uint8_t { Red = 0, Blue = 1 };

constexpr Color opposite(Color c) noexcept { return c == Color::Red ? Color::Blue : Color::Red; }
constexpr std::size_t index(Color c) noexcept { return static_cast<std::size_t>(c); }

std::string_view to_string(Color c) noexcept;
Color color_from_string(std::string_view s);

/// Growth model selector. The SHM variants are GSHM with tied acceptance
/// probabilities; AdjustedGSHM draws a new group's color independently of
/// its creator.
enum class Variant {
    GSHM,
    AdjustedGSHM,
    SHM_SelectiveOnRich,
    SHM_SelectiveOnEqualChance,
    SHM_General,
};

std::string_view to_string(Variant v) noexcept;
Variant variant_from_string(std::string_view s);

/// Parameter vector of the bipartite growth process.
struct GrowthParams {
    double alpha = 0.5;  ///< probability that a step brings a new member
    double eta = 0.3;    ///< probability that the acting member creates a group
    double r = 0.4;      ///< probability that a new member is red
    double xi = 0.7;     ///< weight of size-proportional group choice
    double rho_p_red = 1.0;
    double rho_p_blue = 1.0;
    double rho_u_red = 1.0;
    double rho_u_blue = 1.0;
    Variant variant = Variant::GSHM;

    /// Cross-color acceptance under size-proportional choice for a member of color c.
    double rho_p(Color c) const noexcept { return c == Color::Red ? rho_p_red : rho_p_blue; }
    /// Cross-color acceptance under uniform choice for a member of color c.
    double rho_u(Color c) const noexcept { return c == Color::Red ? rho_u_red : rho_u_blue; }

    /// Builds one of the single-rho SHM specializations with the rho fields filled in.
    static GrowthParams shm(Variant v, double alpha, double eta, double r, double xi, double rho);

    bool operator==(const GrowthParams&) const = default;
};

class RangeError : public std::invalid_argument {
public:
    explicit RangeError(std::string field);
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class VariantConstraintError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Returns params unchanged when every range and variant constraint holds.
GrowthParams validate_params(const GrowthParams& params);

/// Parameters of the one-mode growth model: every step adds one member and
/// one edge, so there is no arrival or group-creation rate.
struct UnipartiteParams {
    double r = 0.4;
    double xi = 0.7;
    double rho_p_red = 1.0;
    double rho_p_blue = 1.0;
    double rho_u_red = 1.0;
    double rho_u_blue = 1.0;

    double rho_p(Color c) const noexcept { return c == Color::Red ? rho_p_red : rho_p_blue; }
    double rho_u(Color c) const noexcept { return c == Color::Red ? rho_u_red : rho_u_blue; }

    static UnipartiteParams from(const GrowthParams& p);
    bool operator==(const UnipartiteParams&) const = default;
};

UnipartiteParams validate_params(const UnipartiteParams& params);

using MemberId = std::uint32_t;
using GroupId = std::uint32_t;

struct Member {
    Color color;
    std::uint32_t degree = 0;
    bool operator==(const Member&) const = default;
};

struct Group {
    Color color;
    std::uint32_t size = 0;
    MemberId creator = 0;
    std::uint64_t creation_step = 0;
    bool operator==(const Group&) const = default;
};

/// One membership event. The step of edge i is i + 1.
struct Edge {
    MemberId member;
    GroupId group;
    bool operator==(const Edge&) const = default;
};

/// Per-color aggregates, indexed by index(Color).
struct Tallies {
    std::array<std::uint64_t, 2> members{};       ///< M_t(C)
    std::array<std::uint64_t, 2> groups{};        ///< G_t(C)
    std::array<std::uint64_t, 2> member_degree{};  ///< E^(M)_t(C)
    std::array<std::uint64_t, 2> group_size{};     ///< E^(G)_t(C)

    bool operator==(const Tallies&) const = default;
};

class ReferenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Append-only bipartite member/group network. Ids are dense and assigned
/// in creation order.
class BipartiteNetwork {
public:
    MemberId add_member(Color c);
    /// Creates a group whose first member is `creator`; appends that edge.
    GroupId add_group(Color c, MemberId creator);
    void add_edge(MemberId m, GroupId g);

    const std::vector<Member>& members() const noexcept { return members_; }
    const std::vector<Group>& groups() const noexcept { return groups_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const Tallies& tallies() const noexcept { return tallies_; }
    std::uint64_t t() const noexcept { return edges_.size(); }

    /// Number of red member endpoints in each group (edge multiplicity).
    std::vector<std::uint32_t> red_members_per_group() const;

    /// counts[k] = number of groups of color c and size k (index 0 unused).
    std::vector<std::uint64_t> group_size_counts(Color c) const;
    /// counts[k] = number of members of color c and degree k (index 0 unused).
    std::vector<std::uint64_t> member_degree_counts(Color c) const;

    /// Copy of this network with group colors replaced; tallies recomputed.
    BipartiteNetwork with_group_colors(const std::vector<Color>& colors) const;

    /// The initial t = 2 state: a red member in a red group and a blue
    /// member in a blue group.
    static BipartiteNetwork seed_pairs();

    void reserve(std::size_t edges, std::size_t members, std::size_t groups);

    bool operator==(const BipartiteNetwork&) const = default;

private:
    std::vector<Member> members_;
    std::vector<Group> groups_;
    std::vector<Edge> edges_;
    Tallies tallies_;
};

/// Recomputes the per-color tallies from the member, group and edge lists.
/// Throws ReferenceError on a dangling member or group id.
Tallies recount(const BipartiteNetwork& network);

struct UnipartiteEdge {
    MemberId a;
    MemberId b;
    bool operator==(const UnipartiteEdge&) const = default;
};

/// One-mode network. Multi-edges are allowed, self-loops are not.
class UnipartiteNetwork {
public:
    MemberId add_member(Color c);
    void add_edge(MemberId a, MemberId b);

    const std::vector<Member>& members() const noexcept { return members_; }
    const std::vector<UnipartiteEdge>& edges() const noexcept { return edges_; }

    /// counts[k] = number of members of color c with degree k.
    std::vector<std::uint64_t> degree_counts(Color c) const;

    void reserve(std::size_t members, std::size_t edges);

    bool operator==(const UnipartiteNetwork&) const = default;

private:
    std::vector<Member> members_;
    std::vector<UnipartiteEdge> edges_;
};

}  // namespace chasm
