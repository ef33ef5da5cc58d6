#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chasm/core.hpp"

namespace chasm {

enum class Objective { PaperSumDifference, PerSizeL1 };

std::string_view to_string(Objective o) noexcept;
Objective objective_from_string(std::string_view s);

/// Names accepted in FitConfig::free_params.
inline const std::vector<std::string> kFittableParams = {"xi", "rho_p_red", "rho_p_blue", "rho_u_red", "rho_u_blue", "eta"};

struct FitConfig {
    std::size_t K = 50;
    Objective objective = Objective::PaperSumDifference;
    std::vector<std::string> free_params = {"xi", "rho_p_red", "rho_p_blue", "rho_u_red", "rho_u_blue"};
    std::size_t restarts = 16;
    std::size_t evaluations_per_restart = 2000;
    std::uint64_t seed = 0;
};

struct DirectEstimates {
    double r = 0.0;
    double alpha = 0.0;
    double eta = 0.0;  ///< groups per edge, sometimes called gamma
    bool degenerate = false;  ///< no red or no blue members
    bool small_sample = false;  ///< fewer than 1000 edges
};

DirectEstimates estimate_direct(const BipartiteNetwork& network);

/// Empirical red/blue count ratio per size 1..K and the sizes that have to
/// be dropped because no blue entity of that size exists.
struct EmpiricalRatios {
    std::vector<double> ratio;  ///< index k-1
    std::vector<bool> usable;
};

EmpiricalRatios empirical_ratios(const std::vector<std::uint64_t>& red_counts, const std::vector<std::uint64_t>& blue_counts,
                                 std::size_t K);

struct FitResult {
    GrowthParams params_hat;
    Objective objective = Objective::PaperSumDifference;
    double objective_value = 0.0;
    double paper_sum_difference = 0.0;
    double per_size_l1 = 0.0;
    std::size_t K_used = 0;
    std::vector<std::size_t> dropped_k;
    std::vector<double> restart_best;  ///< best value of each restart, in restart order
    std::vector<double> trace;  ///< running best after every simplex iteration
    DirectEstimates direct;
    std::vector<std::string> warnings;
};

/// Objective value of `params` against the empirical ratios (model from the
/// group-size recurrences). Invalid params give +inf.
double homophily_objective(const GrowthParams& params, const EmpiricalRatios& emp, Objective objective, std::size_t K);

FitResult fit_homophily(const BipartiteNetwork& network, const FitConfig& config);

double unipartite_objective(const UnipartiteParams& params, const EmpiricalRatios& emp, Objective objective, std::size_t K);

/// For unipartite fits params_hat.alpha and params_hat.eta are placeholders;
/// only r, xi and the rho fields are meaningful.
FitResult fit_unipartite(const UnipartiteNetwork& network, const FitConfig& config);

/// Starting points: 16 Latin-hypercube strata from the seed, then uniform draws.
std::vector<double> fit_start(std::uint64_t seed, std::size_t restart, std::size_t dim);

}  // namespace chasm
