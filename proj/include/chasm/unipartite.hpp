#pragma once

#include <cstdint>
#include <stdexcept>

#include "chasm/core.hpp"
#include "chasm/metrics.hpp"

namespace chasm {

class ProjectionTooLarge : public std::runtime_error {
public:
    ProjectionTooLarge(std::uint64_t required, std::uint64_t cap);
    std::uint64_t required() const noexcept { return required_; }

private:
    std::uint64_t required_;
};

struct ProjectionOptions {
    std::uint64_t edge_cap = 100'000'000;
    /// One edge per member pair however many groups they share.
    bool deduplicate = false;
};

/// Member-member network: every pair of distinct members of a group gets one
/// edge for that group. A member listed twice in a group counts once.
UnipartiteNetwork project(const BipartiteNetwork& network, const ProjectionOptions& options = {});

/// Edges the projection would create, without building it.
std::uint64_t projected_edge_count(const BipartiteNetwork& network);

/// Mean red share of neighbours (with multiplicity) per degree bin.
RatioSeries connection_ratio_by_degree(const UnipartiteNetwork& network, const Binning& binning = {});

}  // namespace chasm
