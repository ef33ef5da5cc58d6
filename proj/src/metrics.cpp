#include "chasm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/zeta.hpp>
#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

namespace chasm {

std::vector<std::pair<std::uint64_t, std::uint64_t>> Binning::bins(std::uint64_t k_max) const
{
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
    std::uint64_t k = 1;
    while (k <= k_max) {
        std::uint64_t hi = k;
        if (k > unit_max) {
            const double edge = std::ceil(static_cast<double>(k) * log_factor) - 1.0;
            hi = std::max<std::uint64_t>(k, static_cast<std::uint64_t>(edge));
        }
        out.emplace_back(k, hi);
        k = hi + 1;
    }
    return out;
}

std::string Binning::describe() const
{
    if (unit_max == UINT64_MAX) return "unit";
    return fmt::format("unit<={},log{}", unit_max, log_factor);
}

namespace {

// bin index for every size 0..k_max (index 0 unused)
std::vector<std::size_t> bin_lookup(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& bins, std::uint64_t k_max)
{
    std::vector<std::size_t> idx(k_max + 1, 0);
    for (std::size_t b = 0; b < bins.size(); ++b)
        for (std::uint64_t k = bins[b].first; k <= std::min(bins[b].second, k_max); ++k) idx[k] = b;
    return idx;
}

std::uint64_t max_group_size(const BipartiteNetwork& n)
{
    std::uint64_t m = 0;
    for (const Group& g : n.groups()) m = std::max<std::uint64_t>(m, g.size);
    return m;
}

template <class ValueFn>
RatioSeries binned_mean(const BipartiteNetwork& network, const Binning& binning, ValueFn value)
{
    RatioSeries out;
    out.binning = binning.describe();
    const std::uint64_t k_max = max_group_size(network);
    if (k_max == 0) return out;
    const auto bins = binning.bins(k_max);
    const auto lookup = bin_lookup(bins, k_max);
    std::vector<double> sum(bins.size(), 0.0);
    std::vector<std::uint64_t> count(bins.size(), 0);
    const auto red = network.red_members_per_group();
    const auto& groups = network.groups();
    for (GroupId g = 0; g < groups.size(); ++g) {
        const std::size_t b = lookup[groups[g].size];
        sum[b] += value(groups[g], red[g]);
        ++count[b];
    }
    for (std::size_t b = 0; b < bins.size(); ++b) {
        if (count[b] == 0) continue;
        out.points.push_back({bins[b].first, bins[b].second, sum[b] / static_cast<double>(count[b]), count[b]});
    }
    return out;
}

}  // namespace

RatioSeries merge_adjacent(const RatioSeries& s, std::size_t width)
{
    if (width == 0) throw std::invalid_argument("merge width must be positive");
    RatioSeries out;
    out.binning = s.binning + fmt::format(",merged{}", width);
    for (std::size_t i = 0; i < s.points.size(); i += width) {
        const std::size_t end = std::min(s.points.size(), i + width);
        double num = 0.0;
        std::uint64_t support = 0;
        for (std::size_t j = i; j < end; ++j) {
            num += s.points[j].ratio * static_cast<double>(s.points[j].support);
            support += s.points[j].support;
        }
        out.points.push_back({s.points[i].lo, s.points[end - 1].hi, num / static_cast<double>(support), support});
    }
    return out;
}

BipartiteNetwork color_groups_by_ratio(const BipartiteNetwork& network, std::optional<double> threshold)
{
    const auto& tl = network.tallies();
    const double members = static_cast<double>(tl.members[0] + tl.members[1]);
    const double th = threshold ? *threshold : (members > 0 ? static_cast<double>(tl.members[0]) / members : 0.0);
    const auto red = network.red_members_per_group();
    std::vector<Color> colors(network.groups().size());
    for (GroupId g = 0; g < colors.size(); ++g) {
        const auto size = network.groups()[g].size;
        if (size == 0) throw std::invalid_argument(fmt::format("group {} has no members", g));
        colors[g] = static_cast<double>(red[g]) / size > th ? Color::Red : Color::Blue;
    }
    return network.with_group_colors(colors);
}

RatioSeries group_ratio_by_size(const BipartiteNetwork& network, const Binning& binning)
{
    return binned_mean(network, binning,
                       [](const Group& g, std::uint32_t) { return g.color == Color::Red ? 1.0 : 0.0; });
}

RatioSeries member_ratio_by_size(const BipartiteNetwork& network, const Binning& binning)
{
    return binned_mean(network, binning,
                       [](const Group& g, std::uint32_t red) { return static_cast<double>(red) / g.size; });
}

PairTest homophily_pair_test(const BipartiteNetwork& network)
{
    const auto red = network.red_members_per_group();
    double pairs = 0.0, cross = 0.0;
    for (GroupId g = 0; g < red.size(); ++g) {
        const double s = network.groups()[g].size;
        const double m = red[g];
        pairs += s * (s - 1.0) / 2.0;
        cross += m * (s - m);
    }
    if (pairs == 0.0) throw std::invalid_argument("no group has two or more members");
    const auto& tl = network.tallies();
    PairTest out;
    out.r = static_cast<double>(tl.members[0]) / static_cast<double>(tl.members[0] + tl.members[1]);
    out.pairs = pairs;
    out.cross_pairs = cross;
    out.observed_cross_share = cross / pairs;
    out.expected_cross_share = 2.0 * out.r * (1.0 - out.r);
    out.homophilous = out.observed_cross_share < out.expected_cross_share;
    return out;
}

double log_hurwitz_zeta(double s, std::uint64_t q)
{
    if (!(s > 1.0)) throw std::domain_error("zeta exponent must exceed 1");
    if (q == 0) throw std::domain_error("zeta offset must be positive");
    if (q < 16) {
        double partial = 0.0;
        for (std::uint64_t k = 1; k < q; ++k) partial += std::pow(static_cast<double>(k), -s);
        return std::log(boost::math::zeta(s) - partial);
    }
    // Euler-Maclaurin tail, relative error below 1e-10 for q >= 16
    const double x = static_cast<double>(q);
    const double inv = 1.0 / x;
    const double bracket = 1.0 / (s - 1.0) + 0.5 * inv + s / 12.0 * inv * inv -
                           s * (s + 1) * (s + 2) / 720.0 * std::pow(inv, 4) +
                           s * (s + 1) * (s + 2) * (s + 3) * (s + 4) / 30240.0 * std::pow(inv, 6);
    return (1.0 - s) * std::log(x) + std::log(bracket);
}

namespace {

struct Tail {
    std::vector<std::uint64_t> values;  // distinct, ascending
    std::vector<std::uint64_t> counts;
    std::size_t n = 0;
    double sum_log = 0.0;
};

Tail tail_from(const std::vector<std::uint64_t>& sorted, std::uint64_t k_min)
{
    Tail t;
    auto it = std::lower_bound(sorted.begin(), sorted.end(), k_min);
    for (; it != sorted.end(); ++it) {
        if (t.values.empty() || t.values.back() != *it) {
            t.values.push_back(*it);
            t.counts.push_back(0);
        }
        ++t.counts.back();
        ++t.n;
        t.sum_log += std::log(static_cast<double>(*it));
    }
    return t;
}

double mle_exponent(const Tail& t, std::uint64_t k_min)
{
    const double n = static_cast<double>(t.n);
    auto nll = [&](double s) { return n * log_hurwitz_zeta(s, k_min) + s * t.sum_log; };
    const auto res = boost::math::tools::brent_find_minima(nll, 1.0 + 1e-6, 30.0, 50);
    return res.first;
}

double ks_distance(const Tail& t, std::uint64_t k_min, double s)
{
    const double log_norm = log_hurwitz_zeta(s, k_min);
    const double n = static_cast<double>(t.n);
    double cum = 0.0, d = 0.0;
    for (std::size_t i = 0; i < t.values.size(); ++i) {
        cum += static_cast<double>(t.counts[i]);
        const double model = 1.0 - std::exp(log_hurwitz_zeta(s, t.values[i] + 1) - log_norm);
        d = std::max(d, std::abs(cum / n - model));
    }
    return d;
}

PowerLawFit fit_mle(const std::vector<std::uint64_t>& sorted, const PowerLawOptions& opt)
{
    std::vector<std::uint64_t> candidates;
    if (opt.k_min) {
        candidates.push_back(std::max<std::uint64_t>(1, *opt.k_min));
    } else {
        for (std::size_t i = 0; i < sorted.size() && candidates.size() < opt.max_candidates; ++i) {
            if (sorted.size() - i < opt.min_tail) break;
            if (sorted[i] >= 1 && (candidates.empty() || candidates.back() != sorted[i])) candidates.push_back(sorted[i]);
        }
    }
    if (candidates.empty()) throw std::invalid_argument("no k_min leaves enough tail observations");

    PowerLawFit best{};
    best.ks = std::numeric_limits<double>::infinity();
    for (std::uint64_t k_min : candidates) {
        const Tail t = tail_from(sorted, k_min);
        if (t.values.size() < 2) continue;
        const double s = mle_exponent(t, k_min);
        const double d = ks_distance(t, k_min, s);
        if (d < best.ks) best = {s, k_min, (s - 1.0) / std::sqrt(static_cast<double>(t.n)), d, t.n};
    }
    if (!std::isfinite(best.ks)) throw std::invalid_argument("tail is degenerate for every k_min");
    return best;
}

PowerLawFit fit_log_binned(const std::vector<std::uint64_t>& sorted, const PowerLawOptions& opt)
{
    const std::uint64_t k_min = std::max<std::uint64_t>(1, opt.k_min.value_or(1));
    const Tail t = tail_from(sorted, k_min);
    if (t.values.size() < 2) throw std::invalid_argument("tail is degenerate");
    std::vector<double> xs, ys;
    double lo = static_cast<double>(k_min);
    std::size_t i = 0;
    while (i < t.values.size()) {
        const double hi = std::max(lo + 1.0, std::ceil(lo * opt.bin_factor));
        double c = 0.0;
        while (i < t.values.size() && static_cast<double>(t.values[i]) < hi) c += static_cast<double>(t.counts[i++]);
        if (c > 0) {
            xs.push_back(0.5 * (std::log(lo) + std::log(hi - 1.0)));
            ys.push_back(std::log(c / (static_cast<double>(t.n) * (hi - lo))));
        }
        lo = hi;
    }
    if (xs.size() < 3) throw std::invalid_argument("too few occupied bins for a log-binned fit");
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        sxx += (xs[j] - mx) * (xs[j] - mx);
        sxy += (xs[j] - mx) * (ys[j] - my);
    }
    const double slope = sxy / sxx;
    double rss = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        const double e = ys[j] - my - slope * (xs[j] - mx);
        rss += e * e;
    }
    const double se = xs.size() > 2 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
    return {-slope, k_min, se, std::numeric_limits<double>::quiet_NaN(), t.n};
}

}  // namespace

PowerLawFit power_law_exponent(std::span<const std::uint64_t> values, PowerLawMethod method, const PowerLawOptions& options)
{
    if (values.size() < 100) throw std::invalid_argument("power-law fit needs at least 100 observations");
    std::vector<std::uint64_t> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back()) throw std::invalid_argument("degenerate sequence: all values equal");
    return method == PowerLawMethod::DiscreteMLE ? fit_mle(sorted, options) : fit_log_binned(sorted, options);
}

std::vector<double> isotonic_increasing(std::span<const double> y, std::span<const double> w)
{
    struct Block {
        double mean, weight;
        std::size_t len;
    };
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < y.size(); ++i) {
        blocks.push_back({y[i], w[i], 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
            Block b = blocks.back();
            blocks.pop_back();
            Block& a = blocks.back();
            const double wt = a.weight + b.weight;
            a.mean = (a.mean * a.weight + b.mean * b.weight) / wt;
            a.weight = wt;
            a.len += b.len;
        }
    }
    std::vector<double> fit;
    fit.reserve(y.size());
    for (const Block& b : blocks) fit.insert(fit.end(), b.len, b.mean);
    return fit;
}

namespace {

std::vector<double> isotonic_decreasing(std::span<const double> y, std::span<const double> w)
{
    std::vector<double> neg(y.size());
    std::transform(y.begin(), y.end(), neg.begin(), [](double v) { return -v; });
    auto fit = isotonic_increasing(neg, w);
    for (double& v : fit) v = -v;
    return fit;
}

double sse(std::span<const double> y, std::span<const double> w, std::span<const double> fit)
{
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * (y[i] - fit[i]) * (y[i] - fit[i]);
    return s;
}

}  // namespace

ChasmFinding detect_chasm(const RatioSeries& series, std::uint64_t min_support, double margin)
{
    std::vector<const RatioPoint*> pts;
    for (const auto& p : series.points)
        if (p.support >= min_support) pts.push_back(&p);
    if (pts.size() < 5)
        throw InsufficientSupport(fmt::format("{} bins reach support {}, need 5", pts.size(), min_support));

    const std::size_t n = pts.size();
    std::vector<double> y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = pts[i]->ratio;
        w[i] = static_cast<double>(pts[i]->support);
    }

    ChasmFinding f;
    f.bins_used = n;
    f.sse_increasing = sse(y, w, isotonic_increasing(y, w));
    f.sse_decreasing = sse(y, w, isotonic_decreasing(y, w));

    std::vector<double> best_fit;
    f.sse_unimodal = std::numeric_limits<double>::infinity();
    const std::span<const double> ys(y), ws(w);
    for (std::size_t m = 0; m < n; ++m) {
        auto up = isotonic_increasing(ys.first(m + 1), ws.first(m + 1));
        auto down = isotonic_decreasing(ys.subspan(m + 1), ws.subspan(m + 1));
        up.insert(up.end(), down.begin(), down.end());
        const double e = sse(y, w, up);
        if (e < f.sse_unimodal) {
            f.sse_unimodal = e;
            best_fit = std::move(up);
        }
    }
    const std::size_t peak =
        static_cast<std::size_t>(std::max_element(best_fit.begin(), best_fit.end()) - best_fit.begin());
    const bool interior = peak > 0 && peak + 1 < n;
    f.decided = interior && f.sse_unimodal < margin * std::min(f.sse_increasing, f.sse_decreasing);
    if (f.decided) {
        f.shape = TrendShape::Unimodal;
        f.turning_point = pts[peak]->lo;
    } else {
        f.shape = f.sse_increasing <= f.sse_decreasing ? TrendShape::Increasing : TrendShape::Decreasing;
    }
    return f;
}

std::vector<TailRatio> top_k_tail_ratio(const BipartiteNetwork& network, const std::vector<std::uint64_t>& schedule)
{
    std::array<std::vector<std::uint32_t>, 2> sizes;
    for (const Group& g : network.groups()) sizes[index(g.color)].push_back(g.size);
    for (auto& v : sizes) std::sort(v.begin(), v.end());
    std::vector<TailRatio> out;
    for (std::uint64_t k : schedule) {
        auto at_least = [&](const std::vector<std::uint32_t>& v) {
            return static_cast<std::uint64_t>(v.end() - std::lower_bound(v.begin(), v.end(), k));
        };
        const auto red = at_least(sizes[0]);
        const auto blue = at_least(sizes[1]);
        const double ratio = blue == 0 ? std::numeric_limits<double>::infinity()
                                       : static_cast<double>(red) / static_cast<double>(blue);
        out.push_back({k, red, blue, ratio});
    }
    return out;
}

std::vector<std::uint64_t> default_tail_schedule(const BipartiteNetwork& network, std::optional<double> beta_blue)
{
    if (beta_blue && std::isfinite(*beta_blue))
        return {std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(std::llround(std::pow(static_cast<double>(network.t()), 1.0 / *beta_blue))))};
    std::vector<std::uint64_t> ks;
    const std::uint64_t top = std::max<std::uint64_t>(1, max_group_size(network));
    for (std::uint64_t k = 1; k <= top; k *= 2) ks.push_back(k);
    return ks;
}

}  // namespace chasm
