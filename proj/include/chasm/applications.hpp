#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "chasm/analytic.hpp"
#include "chasm/core.hpp"

namespace chasm {

enum class Counting { Impressions, UniqueMembers };

std::string_view to_string(Counting c) noexcept;
Counting counting_from_string(std::string_view s);

/// Red share of memberships in groups of size >= k_a, from the limit
/// distribution and the member-ratio curve (both truncated at their k_max).
double ad_reach_ratio(const LimitDistribution& groups, const MemberRatioCurve& members, std::uint64_t k_a);
double ad_reach_ratio(const BipartiteNetwork& network, std::uint64_t k_a, Counting counting = Counting::Impressions);

struct FactCheckConfig {
    double p = 0.5;  ///< reports per member
    double P = 10.0;  ///< percent of ranked items checked
    std::size_t reps = 100;
    std::uint64_t seed = 0;
    std::size_t items_per_group = 1;
};

struct FactCheckMetrics {
    double protected_group_red_share = 0.0;  ///< mean over reps of red share among checked groups
    double checked_count_red_share = 0.0;  ///< red share of all checks pooled over reps
    double protected_members_red_share = 0.0;  ///< members of checked red groups over members of checked groups
    double protected_red_members_share = 0.0;  ///< red members in checked groups over members of checked groups
    std::size_t checked_per_rep = 0;
};

FactCheckMetrics factcheck_simulate(const BipartiteNetwork& network, const FactCheckConfig& config);
/// One ranking per repetition, evaluated at every P in the sweep; config.P is ignored.
std::vector<FactCheckMetrics> factcheck_sweep(const BipartiteNetwork& network, const FactCheckConfig& config,
                                              const std::vector<double>& P_values);

/// Items checked when a fraction theta of n ranked items is checked.
std::size_t checked_count(double theta, std::size_t n);

enum class KernelProvenance { SimulationInduced, UserSupplied };

/// Protection score h(k, theta): chance a size-k group's flagged item is checked.
class HKernel {
public:
    using Fn = std::function<double(std::uint64_t, double)>;

    static HKernel user(Fn fn);
    /// Grid kernel: values[i][j] = h(sizes[i], thetas[j]); sizes and thetas ascending.
    static HKernel grid(std::vector<std::uint64_t> sizes, std::vector<double> thetas,
                        std::vector<std::vector<double>> values, std::vector<std::uint64_t> samples);

    double operator()(std::uint64_t k, double theta) const;
    KernelProvenance provenance() const noexcept { return provenance_; }

    const std::vector<std::uint64_t>& sizes() const noexcept { return sizes_; }
    const std::vector<double>& thetas() const noexcept { return thetas_; }
    const std::vector<std::vector<double>>& values() const noexcept { return values_; }
    /// Items observed per size (grid kernels).
    const std::vector<std::uint64_t>& samples() const noexcept { return samples_; }

private:
    KernelProvenance provenance_ = KernelProvenance::UserSupplied;
    Fn fn_;
    std::vector<std::uint64_t> sizes_;
    std::vector<double> thetas_;
    std::vector<std::vector<double>> values_;
    std::vector<std::uint64_t> samples_;
};

struct KernelCheck {
    bool monotone_in_k = true;
    bool monotone_in_theta = true;
    bool zero_at_theta_0 = true;
    bool one_at_theta_1 = true;
};

/// Numerical checks of the kernel assumptions on a grid. `slack` absorbs
/// Monte Carlo noise for induced kernels.
KernelCheck check_kernel(const HKernel& h, const std::vector<std::uint64_t>& sizes, const std::vector<double>& thetas,
                         double slack = 0.0);

HKernel induced_h(const BipartiteNetwork& network, const FactCheckConfig& config, const std::vector<double>& thetas);

struct ProtectionRatio {
    double value = 0.0;
    double covered_mass = 0.0;  ///< sum of G_k over k <= k_max, both colors
};

ProtectionRatio protection_ratio(const LimitDistribution& dist, const HKernel& h, double theta);

/// Group-size counts of a network divided by t, as a distribution over 1..max size.
LimitDistribution empirical_group_distribution(const BipartiteNetwork& network);

}  // namespace chasm
