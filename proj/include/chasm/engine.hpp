#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

#include "chasm/core.hpp"
#include "chasm/rng.hpp"

namespace chasm {

/// How Connection Growth picks a group. LiteralRejection replays the
/// pick/accept/restart loop; ExactMixture draws directly from the
/// distribution that loop converges to.
enum class SamplingMode { ExactMixture, LiteralRejection };

std::string_view to_string(SamplingMode m) noexcept;
SamplingMode sampling_from_string(std::string_view s);

struct RunConfig {
    std::uint64_t t_max = 2;
    std::uint64_t seed = 0;
    SamplingMode sampling = SamplingMode::ExactMixture;
    bool record_events = false;
    std::uint64_t stream = 0;
};

/// Restarts allowed per step under LiteralRejection.
inline constexpr std::uint64_t kRestartGuard = 1'000'000;

class PathologicalParameters : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Mechanism : std::uint8_t { None, Pref, Uniform };

struct GrowthEvent {
    std::uint64_t t;
    bool new_member;
    MemberId member;
    std::optional<GroupId> created_group;
    std::optional<GroupId> joined_group;
    Mechanism mechanism = Mechanism::None;
    std::uint64_t rejections = 0;
};

struct GrowthRun {
    BipartiteNetwork network;
    std::vector<GrowthEvent> events;
};

/// Mutable growth state: a network plus the urns that make every draw O(1).
/// group_endpoints_[c] holds one entry per edge into a group of color c, so a
/// uniform entry is a size-proportional group of that color.
class GrowthState {
public:
    explicit GrowthState(BipartiteNetwork network);

    struct Join {
        GroupId group;
        Mechanism mechanism;
        std::uint64_t rejections;
    };

    const BipartiteNetwork& network() const noexcept { return net_; }
    BipartiteNetwork release() && { return std::move(net_); }

    MemberId pick_member_by_degree(Rng& rng) const;
    Join sample_join_exact(const GrowthParams& params, Color member_color, Rng& rng) const;
    Join sample_join_literal(const GrowthParams& params, Color member_color, Rng& rng) const;

    MemberId add_member(Color c) { return net_.add_member(c); }
    GroupId create_group(Color c, MemberId creator);
    void join(MemberId m, GroupId g);

    void reserve(std::size_t edges, std::size_t members, std::size_t groups);

private:
    BipartiteNetwork net_;
    std::array<std::vector<GroupId>, 2> group_endpoints_;
    std::array<std::vector<GroupId>, 2> groups_by_color_;
};

/// Runs the growth process from the t = 2 seed up to config.t_max edges.
GrowthRun grow_run(const GrowthParams& params, const RunConfig& config);
BipartiteNetwork grow(const GrowthParams& params, const RunConfig& config);

/// Independent replicas; replica i uses stream config.stream + i.
std::vector<BipartiteNetwork> grow_replicas(const GrowthParams& params, const RunConfig& config,
                                            std::size_t count);

/// Exact probability that `member` joins each group in one Connection Growth
/// step, counting restarts.
std::vector<double> step_distribution(const BipartiteNetwork& network, const GrowthParams& params,
                                      MemberId member);

/// One-mode growth from a single red-blue edge to n members.
UnipartiteNetwork grow_unipartite(const UnipartiteParams& params, std::uint64_t n, std::uint64_t seed,
                                  SamplingMode sampling = SamplingMode::ExactMixture);

/// JSONL, one object per event.
void write_events_jsonl(std::ostream& out, const std::vector<GrowthEvent>& events);

}  // namespace chasm
