#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chasm/core.hpp"

namespace chasm {

/// Unit bins up to unit_max, then bins growing by log_factor.
struct Binning {
    std::uint64_t unit_max = 100;
    double log_factor = 1.25;

    static Binning unit() { return {UINT64_MAX, 1.0}; }

    /// Closed intervals [lo, hi] covering 1..k_max.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> bins(std::uint64_t k_max) const;
    std::string describe() const;
};

struct RatioPoint {
    std::uint64_t lo;
    std::uint64_t hi;
    double ratio;
    std::uint64_t support;
};

struct RatioSeries {
    std::vector<RatioPoint> points;
    std::string binning;
};

/// Support-weighted merge of every `width` consecutive points.
RatioSeries merge_adjacent(const RatioSeries& s, std::size_t width);

/// Red iff a group's red-member share is strictly above threshold; the
/// default threshold is the network's red member share.
BipartiteNetwork color_groups_by_ratio(const BipartiteNetwork& network, std::optional<double> threshold = {});

RatioSeries group_ratio_by_size(const BipartiteNetwork& network, const Binning& binning = {});
RatioSeries member_ratio_by_size(const BipartiteNetwork& network, const Binning& binning = {});

struct PairTest {
    double observed_cross_share;
    double expected_cross_share;  ///< 2r(1-r)
    double r;
    double pairs;
    double cross_pairs;
    bool homophilous;
};

PairTest homophily_pair_test(const BipartiteNetwork& network);

enum class PowerLawMethod { DiscreteMLE, LogBinnedLS };

struct PowerLawFit {
    double beta;  ///< positive; the density falls like k^-beta
    std::uint64_t k_min;
    double stderr_beta;
    double ks;  ///< KS distance of the tail (MLE only)
    std::size_t n_tail;
};

struct PowerLawOptions {
    std::optional<std::uint64_t> k_min;  ///< fixed, otherwise scanned by KS distance
    std::size_t min_tail = 50;
    std::size_t max_candidates = 300;
    double bin_factor = 2.0;  ///< LogBinnedLS only
};

PowerLawFit power_law_exponent(std::span<const std::uint64_t> values, PowerLawMethod method = PowerLawMethod::DiscreteMLE,
                               const PowerLawOptions& options = {});

/// log of the Hurwitz zeta function sum_{k >= q} k^-s.
double log_hurwitz_zeta(double s, std::uint64_t q);

enum class TrendShape { Increasing, Decreasing, Unimodal };

struct ChasmFinding {
    std::optional<std::uint64_t> turning_point;
    TrendShape shape = TrendShape::Increasing;
    double sse_unimodal = 0.0;
    double sse_increasing = 0.0;
    double sse_decreasing = 0.0;
    bool decided = false;
    std::size_t bins_used = 0;
};

class InsufficientSupport : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ChasmFinding detect_chasm(const RatioSeries& series, std::uint64_t min_support = 50, double margin = 0.95);

/// Weighted least-squares nondecreasing fit (pool adjacent violators).
std::vector<double> isotonic_increasing(std::span<const double> y, std::span<const double> w);

struct TailRatio {
    std::uint64_t k;
    std::uint64_t red;
    std::uint64_t blue;
    double ratio;  ///< red / blue, +inf when blue is 0
};

std::vector<TailRatio> top_k_tail_ratio(const BipartiteNetwork& network, const std::vector<std::uint64_t>& schedule);
/// k(t) = t^(1/beta_blue) when beta is known, else powers of two up to the largest group.
std::vector<std::uint64_t> default_tail_schedule(const BipartiteNetwork& network, std::optional<double> beta_blue);

}  // namespace chasm
