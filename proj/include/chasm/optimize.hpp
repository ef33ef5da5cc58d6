#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace chasm {

struct Box {
    std::vector<double> lo;
    std::vector<double> hi;
};

std::vector<double> project(std::span<const double> x, const Box& box);

struct NelderMeadOptions {
    std::size_t max_evaluations = 2000;
    double initial_step = 0.1;
    double size_tolerance = 1e-9;
};

struct NelderMeadResult {
    std::vector<double> x;  ///< projected into the box
    double value = 0.0;
    std::size_t evaluations = 0;
    std::vector<double> trace;  ///< best value after each simplex iteration
};

/// Simplex search on f(project(x)); non-finite objective values count as 1e300.
NelderMeadResult nelder_mead_box(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                                 const Box& box, const NelderMeadOptions& options = {});

}  // namespace chasm
