#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "chasm/core.hpp"

namespace chasm {

class NonConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class GlassCeiling { None, AgainstRed, AgainstBlue };
enum class ChasmStatus { NotPresent, AgainstRed };

std::string_view to_string(GlassCeiling g) noexcept;
std::string_view to_string(ChasmStatus c) noexcept;

/// Result of a scalar fixed-point solve.
struct FixedPoint {
    double value = 0.0;
    double residual = 0.0;  ///< |F(value) - value|
    bool in_hypothesis = true;  ///< false when a rich-get-richer acceptance is 0
    bool used_bisection = false;
    std::size_t iterations = 0;
};

/// Acceptance-normalizing denominators for a red and a blue joiner when red
/// groups hold share x of the pick mass and red members share r of the count.
double denom_red(double r, double xi, double rho_p_red, double rho_u_red, double x);
double denom_blue(double r, double xi, double rho_p_blue, double rho_u_blue, double x);

/// Right-hand side of the bipartite fixed-point equation.
double alpha_map(const GrowthParams& p, double x);
/// (F(x) - x) * D_R(x) * D_B(x); a cubic with the same interior root.
double alpha_cubic(const GrowthParams& p, double x);

FixedPoint solve_alpha_star(const GrowthParams& params);

/// Damped iteration x <- (x + F(x)) / 2 from x0, then bisection on `bracket`.
FixedPoint solve_fixed_point(const std::function<double(double)>& F, const std::function<double(double)>& bracket,
                             double x0);

struct Coefficients {
    double c_r1 = 0.0;
    double c_r2 = 0.0;
    double c_b1 = 0.0;
    double c_b2 = 0.0;

    double c1(Color c) const noexcept { return c == Color::Red ? c_r1 : c_b1; }
    double c2(Color c) const noexcept { return c == Color::Red ? c_r2 : c_b2; }
};

Coefficients coefficients(const GrowthParams& params, double alpha_star);

struct ChasmThreshold {
    std::optional<double> k_star;
    bool chasm = false;
    /// Largest integer strictly below k*, where the ratio sequence turns.
    std::optional<long long> turning_point;
};

ChasmThreshold chasm_threshold(const Coefficients& c);
ChasmThreshold chasm_threshold(const GrowthParams& params);

struct Classification {
    GlassCeiling glass_ceiling = GlassCeiling::None;
    ChasmStatus chasm = ChasmStatus::NotPresent;
};

Classification classify(const GrowthParams& params);

struct AnalyticSolution {
    FixedPoint alpha_star;
    Coefficients c;
    double beta_red = 0.0;
    double beta_blue = 0.0;
    ChasmThreshold threshold;
    Classification classification;
};

AnalyticSolution solve(const GrowthParams& params);

/// Per-color limit densities for k = 1..k_max, stored as natural logs so
/// deep tails stay representable.
struct LimitDistribution {
    std::array<std::vector<double>, 2> log_values;

    std::size_t k_max() const noexcept { return log_values[0].size(); }
    double value(Color c, std::size_t k) const;
    double log_value(Color c, std::size_t k) const { return log_values[index(c)].at(k - 1); }
    std::vector<double> values(Color c) const;
};

struct GroupSizeOptions {
    /// Multiply the blue base case by rho_p_blue (compatibility form).
    bool blue_base_times_rho = false;
};

LimitDistribution group_size_distribution(const GrowthParams& params, std::size_t k_max,
                                          GroupSizeOptions options = {});
LimitDistribution group_size_distribution(const GrowthParams& params, const Coefficients& c, std::size_t k_max,
                                          GroupSizeOptions options = {});
LimitDistribution member_degree_distribution(const GrowthParams& params, std::size_t k_max);

/// log of the (k-1)C1+C2 over 1+kC1+C2 product chain starting at base.
std::vector<double> log_recurrence(double log_base, double c1, double c2, std::size_t k_max);

struct MemberRatioOptions {
    /// Use the joiner weights at size j for the j-th member (j = 2..k) instead
    /// of the size the group has when that member joins.
    bool literal_indexing = false;
    GroupSizeOptions group{};
};

struct MemberRatioCurve {
    std::vector<double> ratio;  ///< k = 1..k_max
    std::vector<double> rr, rb;  ///< red share inside red / blue groups of size k
    std::vector<double> p_rr, p_rb;  ///< joiner red probability at size j
    std::vector<double> p0_rr, p0_br, p0_rb, p0_bb;
    double at_one = 0.0;
    std::optional<double> limit;  ///< present when C_R1 < C_B1
};

MemberRatioCurve member_ratio_curve(const GrowthParams& params, std::size_t k_max,
                                    MemberRatioOptions options = {});
/// k -> infinity value; throws std::domain_error unless C_R1 < C_B1.
double member_ratio_limit(const GrowthParams& params);

struct UnipartiteOptions {
    /// The pu^(0) weights divide the equal-chance term by this value.
    double alpha_factor = 1.0;
    /// Older first-neighbour probabilities, kept for comparison.
    bool legacy_first_edge = false;
    /// Index the neighbour weights j = 2..k instead of by degree at join time.
    bool legacy_indexing = false;
};

struct UnipartiteAnalytics {
    FixedPoint alpha_u_star;
    Coefficients cu;
    LimitDistribution degrees;
    std::vector<double> ratio;  ///< red neighbour share for degree k = 1..k_max
    std::vector<double> rr, rb;
    double first_rr = 0.0, first_rb = 0.0;  ///< red share of a member's first neighbour
    std::vector<double> pu_rr, pu_rb;  ///< red share of the neighbour gained at degree j
    std::vector<double> pu0_rr, pu0_br, pu0_rb, pu0_bb;
};

double unipartite_alpha_map(const UnipartiteParams& p, double x);
FixedPoint solve_alpha_u_star(const UnipartiteParams& params);
Coefficients unipartite_coefficients(const UnipartiteParams& params, double alpha_u_star);
UnipartiteAnalytics unipartite_analytics(const UnipartiteParams& params, std::size_t k_max,
                                         UnipartiteOptions options = {});

/// Weighted mixture a*w + b*(1-w) where w = exp(la) / (exp(la) + exp(lb)).
double log_weighted_mix(double la, double a, double lb, double b);

}  // namespace chasm
