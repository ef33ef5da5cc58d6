#include "chasm/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace chasm {

namespace {

constexpr double kTolerance = 1e-12;
constexpr std::size_t kMaxIterations = 100000;
constexpr double kBracketLo = 1e-9;
constexpr double kBracketHi = 1.0 - 1e-9;

bool nearly_equal(double a, double b)
{
    return std::abs(a - b) <= kTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

void require_k_max(std::size_t k_max)
{
    if (k_max < 1) throw std::invalid_argument("k_max must be at least 1");
}

}  // namespace

std::string_view to_string(GlassCeiling g) noexcept
{
    switch (g) {
    case GlassCeiling::AgainstRed: return "AgainstRed";
    case GlassCeiling::AgainstBlue: return "AgainstBlue";
    case GlassCeiling::None: break;
    }
    return "None";
}

std::string_view to_string(ChasmStatus c) noexcept
{
    return c == ChasmStatus::AgainstRed ? "AgainstRed" : "NotPresent";
}

double denom_red(double r, double xi, double rho_p_red, double rho_u_red, double x)
{
    return 1.0 - (1.0 - rho_p_red) * xi * (1.0 - x) - (1.0 - rho_u_red) * (1.0 - xi) * (1.0 - r);
}

double denom_blue(double r, double xi, double rho_p_blue, double rho_u_blue, double x)
{
    return 1.0 - (1.0 - rho_p_blue) * xi * x - (1.0 - rho_u_blue) * (1.0 - xi) * r;
}

double alpha_map(const GrowthParams& p, double x)
{
    const double dr = denom_red(p.r, p.xi, p.rho_p_red, p.rho_u_red, x);
    const double db = denom_blue(p.r, p.xi, p.rho_p_blue, p.rho_u_blue, x);
    return p.r * p.eta + p.r * (1.0 - p.eta) * (p.xi * x + (1.0 - p.xi) * p.r) / dr +
           (1.0 - p.r) * (1.0 - p.eta) * (p.rho_p_blue * p.xi * x + p.rho_u_blue * (1.0 - p.xi) * p.r) / db;
}

double alpha_cubic(const GrowthParams& p, double x)
{
    const double dr = denom_red(p.r, p.xi, p.rho_p_red, p.rho_u_red, x);
    const double db = denom_blue(p.r, p.xi, p.rho_p_blue, p.rho_u_blue, x);
    return (p.r * p.eta - x) * dr * db + p.r * (1.0 - p.eta) * (p.xi * x + (1.0 - p.xi) * p.r) * db +
           (1.0 - p.r) * (1.0 - p.eta) * (p.rho_p_blue * p.xi * x + p.rho_u_blue * (1.0 - p.xi) * p.r) * dr;
}

FixedPoint solve_fixed_point(const std::function<double(double)>& F, const std::function<double(double)>& bracket,
                             double x0)
{
    FixedPoint out;
    double x = x0;
    for (std::size_t it = 0; it < kMaxIterations; ++it) {
        const double fx = F(x);
        if (!std::isfinite(fx)) break;
        if (std::abs(fx - x) < kTolerance) {
            out.value = x;
            out.residual = std::abs(fx - x);
            out.iterations = it;
            // keep stepping while the residual still shrinks
            for (int extra = 0; extra < 64 && out.residual > 0.0; ++extra) {
                const double y = 0.5 * out.value + 0.5 * F(out.value);
                const double ry = std::abs(F(y) - y);
                if (!(ry < out.residual)) break;
                out.value = y;
                out.residual = ry;
                ++out.iterations;
            }
            return out;
        }
        x = 0.5 * x + 0.5 * fx;
    }

    double lo = kBracketLo, hi = kBracketHi;
    double glo = bracket(lo);
    const double ghi = bracket(hi);
    if (glo == 0.0) hi = lo;
    else if (ghi == 0.0) lo = hi;
    else if ((glo > 0) == (ghi > 0)) throw NonConvergence("fixed point is not bracketed in (0, 1)");
    std::size_t it = 0;
    while (hi - lo > 0.0 && it < 200) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double gm = bracket(mid);
        if (gm == 0.0) {
            lo = hi = mid;
            break;
        }
        if ((gm > 0) == (glo > 0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
        ++it;
    }
    out.value = 0.5 * (lo + hi);
    out.residual = std::abs(F(out.value) - out.value);
    out.used_bisection = true;
    out.iterations = kMaxIterations + it;
    if (!(out.residual < kTolerance)) throw NonConvergence("fixed point residual above tolerance after bisection");
    return out;
}

FixedPoint solve_alpha_star(const GrowthParams& params)
{
    const GrowthParams p = validate_params(params);
    FixedPoint fp = solve_fixed_point([&](double x) { return alpha_map(p, x); },
                                      [&](double x) { return alpha_cubic(p, x); }, p.r);
    fp.in_hypothesis = p.rho_p_red > 0.0 && p.rho_p_blue > 0.0;
    return fp;
}

Coefficients coefficients(const GrowthParams& p, double a)
{
    const double dr = denom_red(p.r, p.xi, p.rho_p_red, p.rho_u_red, a);
    const double db = denom_blue(p.r, p.xi, p.rho_p_blue, p.rho_u_blue, a);
    if (!(dr > 0.0) || !(db > 0.0)) throw std::domain_error("acceptance denominator vanished");
    const double join = 1.0 - p.eta;
    Coefficients c;
    c.c_r1 = join * p.xi * (p.r / dr + (1.0 - p.r) * p.rho_p_blue / db);
    c.c_b1 = join * p.xi * ((1.0 - p.r) / db + p.r * p.rho_p_red / dr);
    c.c_r2 = join * (1.0 - p.xi) / p.eta * (p.r / dr + (1.0 - p.r) * p.rho_u_blue / db);
    c.c_b2 = join * (1.0 - p.xi) / p.eta * ((1.0 - p.r) / db + p.r * p.rho_u_red / dr);
    return c;
}

ChasmThreshold chasm_threshold(const Coefficients& c)
{
    ChasmThreshold out;
    if (nearly_equal(c.c_r1, c.c_b1)) return out;
    const double k = ((1.0 + c.c_r1) * (1.0 + c.c_b2) - (1.0 + c.c_r2) * (1.0 + c.c_b1)) / (c.c_r1 - c.c_b1);
    out.k_star = k;
    out.chasm = c.c_r1 < c.c_b1 && k > 2.0;
    if (k > 1.0 && k < 1e15) out.turning_point = static_cast<long long>(std::ceil(k)) - 1;
    return out;
}

ChasmThreshold chasm_threshold(const GrowthParams& params)
{
    return chasm_threshold(coefficients(params, solve_alpha_star(params).value));
}

namespace {

Classification classify_from(const GrowthParams& p, const Coefficients& c, const ChasmThreshold& t)
{
    Classification out;
    if (p.xi > 0.0 && !nearly_equal(c.c_r1, c.c_b1))
        out.glass_ceiling = c.c_r1 < c.c_b1 ? GlassCeiling::AgainstRed : GlassCeiling::AgainstBlue;
    out.chasm = t.chasm ? ChasmStatus::AgainstRed : ChasmStatus::NotPresent;
    return out;
}

double beta_of(double c1) { return c1 > 0.0 ? 1.0 + 1.0 / c1 : std::numeric_limits<double>::infinity(); }

}  // namespace

Classification classify(const GrowthParams& params) { return solve(params).classification; }

AnalyticSolution solve(const GrowthParams& params)
{
    AnalyticSolution s;
    s.alpha_star = solve_alpha_star(params);
    s.c = coefficients(params, s.alpha_star.value);
    s.beta_red = beta_of(s.c.c_r1);
    s.beta_blue = beta_of(s.c.c_b1);
    s.threshold = chasm_threshold(s.c);
    s.classification = classify_from(params, s.c, s.threshold);
    return s;
}

double LimitDistribution::value(Color c, std::size_t k) const { return std::exp(log_value(c, k)); }

std::vector<double> LimitDistribution::values(Color c) const
{
    std::vector<double> out;
    out.reserve(k_max());
    for (double l : log_values[index(c)]) out.push_back(std::exp(l));
    return out;
}

std::vector<double> log_recurrence(double log_base, double c1, double c2, std::size_t k_max)
{
    std::vector<double> out(k_max);
    if (k_max == 0) return out;
    out[0] = log_base;
    for (std::size_t k = 2; k <= k_max; ++k) {
        const double kd = static_cast<double>(k);
        out[k - 1] = out[k - 2] + std::log((kd - 1.0) * c1 + c2) - std::log(1.0 + kd * c1 + c2);
    }
    return out;
}

LimitDistribution group_size_distribution(const GrowthParams& params, const Coefficients& c, std::size_t k_max,
                                          GroupSizeOptions options)
{
    require_k_max(k_max);
    const GrowthParams p = validate_params(params);
    const double blue_rate = (1.0 - p.r) * p.eta * (options.blue_base_times_rho ? p.rho_p_blue : 1.0);
    LimitDistribution d;
    d.log_values[0] = log_recurrence(std::log(p.r * p.eta / (1.0 + c.c_r1 + c.c_r2)), c.c_r1, c.c_r2, k_max);
    d.log_values[1] = log_recurrence(std::log(blue_rate / (1.0 + c.c_b1 + c.c_b2)), c.c_b1, c.c_b2, k_max);
    return d;
}

LimitDistribution group_size_distribution(const GrowthParams& params, std::size_t k_max, GroupSizeOptions options)
{
    require_k_max(k_max);
    return group_size_distribution(params, coefficients(params, solve_alpha_star(params).value), k_max, options);
}

LimitDistribution member_degree_distribution(const GrowthParams& params, std::size_t k_max)
{
    require_k_max(k_max);
    const GrowthParams p = validate_params(params);
    const double c1 = 1.0 - p.alpha;
    LimitDistribution d;
    d.log_values[0] = log_recurrence(std::log(p.alpha * p.r / (1.0 + c1)), c1, 0.0, k_max);
    d.log_values[1] = log_recurrence(std::log(p.alpha * (1.0 - p.r) / (1.0 + c1)), c1, 0.0, k_max);
    return d;
}

double log_weighted_mix(double la, double a, double lb, double b)
{
    const double m = std::max(la, lb);
    if (m == -std::numeric_limits<double>::infinity()) return std::numeric_limits<double>::quiet_NaN();
    const double wa = std::exp(la - m);
    const double wb = std::exp(lb - m);
    return (a * wa + b * wb) / (wa + wb);
}

namespace {

// r_k = (first + sum of joiner probabilities) / k, joiners taken at sizes
// 1..k-1, or 2..k when literal.
std::vector<double> running_share(double first, const std::vector<double>& p, bool literal)
{
    std::vector<double> out(p.size());
    double sum = first;
    for (std::size_t k = 1; k <= p.size(); ++k) {
        if (literal) {
            if (k >= 2) sum += p[k - 1];
        } else if (k >= 2) {
            sum += p[k - 2];
        }
        out[k - 1] = sum / static_cast<double>(k);
    }
    return out;
}

}  // namespace

MemberRatioCurve member_ratio_curve(const GrowthParams& params, std::size_t k_max, MemberRatioOptions options)
{
    require_k_max(k_max);
    const GrowthParams p = validate_params(params);
    const double a = solve_alpha_star(p).value;
    const Coefficients c = coefficients(p, a);
    const LimitDistribution g = group_size_distribution(p, c, k_max, options.group);
    const double dr = denom_red(p.r, p.xi, p.rho_p_red, p.rho_u_red, a);
    const double db = denom_blue(p.r, p.xi, p.rho_p_blue, p.rho_u_blue, a);
    const double u = (1.0 - p.xi) / p.eta;

    MemberRatioCurve m;
    for (auto* v : {&m.p0_rr, &m.p0_br, &m.p0_rb, &m.p0_bb, &m.p_rr, &m.p_rb}) v->resize(k_max);
    for (std::size_t j = 1; j <= k_max; ++j) {
        const double s = p.xi * static_cast<double>(j);
        const std::size_t i = j - 1;
        m.p0_rr[i] = p.r * (s + u) / dr;
        m.p0_br[i] = (1.0 - p.r) * (p.rho_p_blue * s + p.rho_u_blue * u) / db;
        m.p0_rb[i] = p.r * (p.rho_p_red * s + p.rho_u_red * u) / dr;
        m.p0_bb[i] = (1.0 - p.r) * (s + u) / db;
        m.p_rr[i] = m.p0_rr[i] / (m.p0_rr[i] + m.p0_br[i]);
        m.p_rb[i] = m.p0_rb[i] / (m.p0_rb[i] + m.p0_bb[i]);
    }

    const bool adjusted = p.variant == Variant::AdjustedGSHM;
    m.rr = running_share(adjusted ? p.r : 1.0, m.p_rr, options.literal_indexing);
    m.rb = running_share(adjusted ? p.r : 0.0, m.p_rb, options.literal_indexing);
    m.ratio.resize(k_max);
    for (std::size_t k = 1; k <= k_max; ++k)
        m.ratio[k - 1] = log_weighted_mix(g.log_value(Color::Red, k), m.rr[k - 1], g.log_value(Color::Blue, k), m.rb[k - 1]);
    m.at_one = m.ratio[0];
    if (c.c_r1 < c.c_b1) {
        const double q_rb = p.r * p.rho_p_red * db;
        const double q_bb = (1.0 - p.r) * dr;
        m.limit = q_rb / (q_rb + q_bb);
    }
    return m;
}

double member_ratio_limit(const GrowthParams& params)
{
    const GrowthParams p = validate_params(params);
    const double a = solve_alpha_star(p).value;
    const Coefficients c = coefficients(p, a);
    if (!(c.c_r1 < c.c_b1)) throw std::domain_error("member-ratio limit needs C_R1 < C_B1");
    const double dr = denom_red(p.r, p.xi, p.rho_p_red, p.rho_u_red, a);
    const double db = denom_blue(p.r, p.xi, p.rho_p_blue, p.rho_u_blue, a);
    const double q_rb = p.r * p.rho_p_red * db;
    const double q_bb = (1.0 - p.r) * dr;
    return q_rb / (q_rb + q_bb);
}

double unipartite_alpha_map(const UnipartiteParams& p, double x)
{
    const double dr = denom_red(p.r, p.xi, p.rho_p_red, p.rho_u_red, x);
    const double db = denom_blue(p.r, p.xi, p.rho_p_blue, p.rho_u_blue, x);
    return 0.5 * (p.r + p.r * (p.xi * x + (1.0 - p.xi) * p.r) / dr +
                  (1.0 - p.r) * (p.rho_p_blue * p.xi * x + p.rho_u_blue * (1.0 - p.xi) * p.r) / db);
}

FixedPoint solve_alpha_u_star(const UnipartiteParams& params)
{
    const UnipartiteParams p = validate_params(params);
    auto bracket = [&](double x) {
        return (unipartite_alpha_map(p, x) - x) * denom_red(p.r, p.xi, p.rho_p_red, p.rho_u_red, x) *
               denom_blue(p.r, p.xi, p.rho_p_blue, p.rho_u_blue, x);
    };
    FixedPoint fp = solve_fixed_point([&](double x) { return unipartite_alpha_map(p, x); }, bracket, p.r);
    fp.in_hypothesis = p.rho_p_red > 0.0 && p.rho_p_blue > 0.0;
    return fp;
}

Coefficients unipartite_coefficients(const UnipartiteParams& p, double a)
{
    const double dr = denom_red(p.r, p.xi, p.rho_p_red, p.rho_u_red, a);
    const double db = denom_blue(p.r, p.xi, p.rho_p_blue, p.rho_u_blue, a);
    if (!(dr > 0.0) || !(db > 0.0)) throw std::domain_error("acceptance denominator vanished");
    Coefficients c;
    c.c_r1 = 0.5 * p.xi * (p.r / dr + (1.0 - p.r) * p.rho_p_blue / db);
    c.c_b1 = 0.5 * p.xi * ((1.0 - p.r) / db + p.r * p.rho_p_red / dr);
    c.c_r2 = (1.0 - p.xi) * (p.r / dr + (1.0 - p.r) * p.rho_u_blue / db);
    c.c_b2 = (1.0 - p.xi) * ((1.0 - p.r) / db + p.r * p.rho_u_red / dr);
    return c;
}

UnipartiteAnalytics unipartite_analytics(const UnipartiteParams& params, std::size_t k_max, UnipartiteOptions options)
{
    require_k_max(k_max);
    const UnipartiteParams p = validate_params(params);
    if (!(options.alpha_factor > 0.0)) throw std::invalid_argument("alpha_factor must be positive");
    UnipartiteAnalytics u;
    u.alpha_u_star = solve_alpha_u_star(p);
    const double a = u.alpha_u_star.value;
    u.cu = unipartite_coefficients(p, a);
    const Coefficients& c = u.cu;
    u.degrees.log_values[0] = log_recurrence(std::log(p.r / (1.0 + c.c_r1 + c.c_r2)), c.c_r1, c.c_r2, k_max);
    u.degrees.log_values[1] = log_recurrence(std::log((1.0 - p.r) / (1.0 + c.c_b1 + c.c_b2)), c.c_b1, c.c_b2, k_max);

    const double dr = denom_red(p.r, p.xi, p.rho_p_red, p.rho_u_red, a);
    const double db = denom_blue(p.r, p.xi, p.rho_p_blue, p.rho_u_blue, a);
    const double eq = (1.0 - p.xi) / options.alpha_factor;
    for (auto* v : {&u.pu0_rr, &u.pu0_br, &u.pu0_rb, &u.pu0_bb, &u.pu_rr, &u.pu_rb}) v->resize(k_max);
    for (std::size_t j = 1; j <= k_max; ++j) {
        const double s = p.xi * static_cast<double>(j) / 2.0;
        const std::size_t i = j - 1;
        u.pu0_rr[i] = p.r * (s + eq) / dr;
        u.pu0_br[i] = (1.0 - p.r) * (p.rho_p_blue * s + p.rho_u_blue * eq) / db;
        u.pu0_rb[i] = p.r * (p.rho_p_red * s + p.rho_u_red * eq) / dr;
        u.pu0_bb[i] = (1.0 - p.r) * (s + eq) / db;
        u.pu_rr[i] = u.pu0_rr[i] / (u.pu0_rr[i] + u.pu0_br[i]);
        u.pu_rb[i] = u.pu0_rb[i] / (u.pu0_rb[i] + u.pu0_bb[i]);
    }

    if (options.legacy_first_edge) {
        const double rr = p.r * (p.xi * a + (1.0 - p.xi) * p.r);
        const double br = (1.0 - p.r) * (p.xi * a * p.rho_p_blue + (1.0 - p.xi) * p.r * p.rho_u_blue);
        const double rb = p.r * (p.xi * (1.0 - a) * p.rho_p_red + (1.0 - p.xi) * (1.0 - p.r) * p.rho_u_red);
        const double bb = (1.0 - p.r) * (p.xi * (1.0 - a) + (1.0 - p.xi) * (1.0 - p.r));
        u.first_rr = rr / (rr + br);
        u.first_rb = rb / (rb + bb);
    } else {
        // the newcomer's own edge: chance its target is red
        u.first_rr = (p.xi * a + (1.0 - p.xi) * p.r) / dr;
        u.first_rb = (p.rho_p_blue * p.xi * a + p.rho_u_blue * (1.0 - p.xi) * p.r) / db;
    }

    u.rr = running_share(u.first_rr, u.pu_rr, options.legacy_indexing);
    u.rb = running_share(u.first_rb, u.pu_rb, options.legacy_indexing);
    u.ratio.resize(k_max);
    for (std::size_t k = 1; k <= k_max; ++k)
        u.ratio[k - 1] =
            log_weighted_mix(u.degrees.log_value(Color::Red, k), u.rr[k - 1], u.degrees.log_value(Color::Blue, k), u.rb[k - 1]);
    return u;
}

}  // namespace chasm
