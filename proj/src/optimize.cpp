#include "chasm/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

namespace chasm {

std::vector<double> project(std::span<const double> x, const Box& box)
{
    std::vector<double> out(x.begin(), x.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], box.lo[i], box.hi[i]);
    return out;
}

namespace {

struct Objective {
    const std::function<double(std::span<const double>)>* f;
    const Box* box;
    std::size_t evaluations = 0;
};

double call(const gsl_vector* v, void* data)
{
    auto* o = static_cast<Objective*>(data);
    std::vector<double> x(v->size);
    for (std::size_t i = 0; i < v->size; ++i) x[i] = gsl_vector_get(v, i);
    ++o->evaluations;
    const double y = (*o->f)(project(x, *o->box));
    return std::isfinite(y) ? std::min(y, 1e300) : 1e300;
}

}  // namespace

NelderMeadResult nelder_mead_box(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                                 const Box& box, const NelderMeadOptions& options)
{
    const std::size_t n = x0.size();
    if (n == 0 || box.lo.size() != n || box.hi.size() != n) throw std::invalid_argument("dimension mismatch in simplex search");
    gsl_set_error_handler_off();

    Objective obj{&f, &box};
    gsl_multimin_function fn{&call, n, &obj};
    gsl_vector* x = gsl_vector_alloc(n);
    gsl_vector* step = gsl_vector_alloc(n);
    for (std::size_t i = 0; i < n; ++i) {
        gsl_vector_set(x, i, std::clamp(x0[i], box.lo[i], box.hi[i]));
        gsl_vector_set(step, i, options.initial_step * (box.hi[i] - box.lo[i]));
    }
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
    gsl_multimin_fminimizer_set(s, &fn, x, step);

    NelderMeadResult out;
    while (obj.evaluations < options.max_evaluations) {
        if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
        out.trace.push_back(s->fval);
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), options.size_tolerance) == GSL_SUCCESS) break;
    }
    std::vector<double> best(n);
    for (std::size_t i = 0; i < n; ++i) best[i] = gsl_vector_get(s->x, i);
    out.x = project(best, box);
    out.value = s->fval;
    out.evaluations = obj.evaluations;

    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(step);
    gsl_vector_free(x);
    return out;
}

}  // namespace chasm
