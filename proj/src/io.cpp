#include "chasm/io.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "chasm/rng.hpp"

namespace chasm {

ParseError::ParseError(const std::string& what, std::size_t line)
    : std::runtime_error(line ? fmt::format("line {}: {}", line, what) : what), line_(line)
{
}

Preset preset_from_string(std::string_view s)
{
    if (s == "none" || s.empty()) return Preset::None;
    if (s == "qq" || s == "QQ") return Preset::QQ;
    if (s == "whatsapp" || s == "WhatsApp") return Preset::WhatsApp;
    throw std::invalid_argument("unknown preset '" + std::string(s) + "'");
}

std::string_view to_string(Preset p) noexcept
{
    switch (p) {
    case Preset::QQ: return "qq";
    case Preset::WhatsApp: return "whatsapp";
    case Preset::None: break;
    }
    return "none";
}

bool preset_keeps(Preset p, std::uint64_t size) noexcept
{
    switch (p) {
    case Preset::QQ: return size <= 100;
    case Preset::WhatsApp: return size >= 52 && size < 165;
    case Preset::None: break;
    }
    return true;
}

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

struct Row {
    std::string member;
    std::string group;
    std::int64_t timestamp = 0;
};

std::vector<Row> read_membership(std::istream& in, bool& timed)
{
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError("membership file is empty", 0);
    ++lineno;
    const auto header = split_csv(line);
    if (header.size() < 2 || header.size() > 3 || header[0] != "member_id" || header[1] != "group_id" ||
        (header.size() == 3 && header[2] != "timestamp"))
        throw ParseError("expected header member_id,group_id[,timestamp]", lineno);
    timed = header.size() == 3;

    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != header.size()) throw ParseError(fmt::format("expected {} fields, found {}", header.size(), f.size()), lineno);
        if (f[0].empty() || f[1].empty()) throw ParseError("empty id", lineno);
        Row r{std::string(f[0]), std::string(f[1]), 0};
        if (timed) {
            const auto [ptr, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), r.timestamp);
            if (ec != std::errc() || ptr != f[2].data() + f[2].size()) throw ParseError("timestamp is not an integer", lineno);
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

struct ColorTable {
    std::unordered_map<std::string, Color> members;
    std::unordered_map<std::string, Color> groups;
};

ColorTable read_colors(std::istream& in)
{
    ColorTable t;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError("colors file is empty", 0);
    ++lineno;
    const auto header = split_csv(line);
    if (header.size() != 3 || header[0] != "entity_id" || header[1] != "kind" || header[2] != "color")
        throw ParseError("expected header entity_id,kind,color", lineno);
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 3) throw ParseError(fmt::format("expected 3 fields, found {}", f.size()), lineno);
        if (f[0].empty()) throw ParseError("empty id", lineno);
        Color c;
        try {
            c = color_from_string(f[2]);
        } catch (const std::invalid_argument&) {
            throw ParseError(fmt::format("unknown color '{}'", f[2]), lineno);
        }
        std::unordered_map<std::string, Color>* table;
        if (f[1] == "member") table = &t.members;
        else if (f[1] == "group") table = &t.groups;
        else throw ParseError(fmt::format("unknown kind '{}'", f[1]), lineno);
        if (!table->emplace(std::string(f[0]), c).second)
            throw ParseError(fmt::format("duplicate color record for {} '{}'", f[1], f[0]), lineno);
    }
    return t;
}

}  // namespace

IngestResult ingest(std::istream& membership, std::istream* colors, Preset preset)
{
    bool timed = false;
    std::vector<Row> rows = read_membership(membership, timed);
    if (timed) std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.timestamp < b.timestamp; });
    const ColorTable table = colors ? read_colors(*colors) : ColorTable{};

    IngestResult out;
    std::unordered_map<std::string, std::uint64_t> size;
    for (const Row& r : rows) ++size[r.group];
    if (preset != Preset::None) {
        for (const auto& [g, s] : size) out.dropped_groups += !preset_keeps(preset, s);
        std::erase_if(rows, [&](const Row& r) { return !preset_keeps(preset, size[r.group]); });
    }

    // member colors: given, or inferred from the colors of the groups joined
    std::unordered_map<std::string, Color> member_color = table.members;
    std::vector<std::string> uncolored;
    {
        std::unordered_map<std::string, bool> listed;
        for (const Row& r : rows)
            if (!member_color.count(r.member) && !listed[r.member]) {
                listed[r.member] = true;
                uncolored.push_back(r.member);
            }
    }
    if (!uncolored.empty()) {
        std::unordered_map<std::string, bool> group_seen;
        std::size_t red_groups = 0, groups = 0;
        for (const Row& r : rows) {
            if (group_seen[r.group]) continue;
            group_seen[r.group] = true;
            const auto it = table.groups.find(r.group);
            if (it == table.groups.end())
                throw ParseError(fmt::format("member '{}' has no color and group '{}' has none to infer it from", uncolored.front(), r.group), 0);
            ++groups;
            red_groups += it->second == Color::Red;
        }
        const double overall = groups ? static_cast<double>(red_groups) / static_cast<double>(groups) : 0.0;
        std::unordered_map<std::string, std::pair<std::uint64_t, std::uint64_t>> joined;  // red, total
        for (const Row& r : rows) {
            auto& j = joined[r.member];
            j.first += table.groups.at(r.group) == Color::Red;
            ++j.second;
        }
        for (const auto& m : uncolored) {
            const auto& j = joined[m];
            member_color[m] = static_cast<double>(j.first) / static_cast<double>(j.second) > overall ? Color::Red : Color::Blue;
        }
        out.member_colors_inferred = true;
    }

    BipartiteNetwork& net = out.network;
    net.reserve(rows.size(), 0, 0);
    std::unordered_map<std::string, MemberId> member_index;
    std::unordered_map<std::string, GroupId> group_index;
    std::vector<std::optional<Color>> given_group_color;
    for (const Row& r : rows) {
        auto mit = member_index.find(r.member);
        if (mit == member_index.end()) {
            mit = member_index.emplace(r.member, net.add_member(member_color.at(r.member))).first;
            out.member_ids.push_back(r.member);
        }
        auto git = group_index.find(r.group);
        if (git == group_index.end()) {
            const auto given = table.groups.find(r.group);
            const Color c = given == table.groups.end() ? Color::Blue : given->second;
            group_index.emplace(r.group, net.add_group(c, mit->second));
            out.group_ids.push_back(r.group);
            given_group_color.push_back(given == table.groups.end() ? std::nullopt : std::optional<Color>(c));
        } else {
            net.add_edge(mit->second, git->second);
        }
    }

    if (std::any_of(given_group_color.begin(), given_group_color.end(), [](const auto& c) { return !c; })) {
        const BipartiteNetwork by_ratio = color_groups_by_ratio(net);
        std::vector<Color> colors(given_group_color.size());
        for (std::size_t g = 0; g < colors.size(); ++g) colors[g] = given_group_color[g].value_or(by_ratio.groups()[g].color);
        net = net.with_group_colors(colors);
        out.group_colors_inferred = true;
    }
    return out;
}

IngestResult ingest_files(const std::filesystem::path& membership, const std::optional<std::filesystem::path>& colors,
                          Preset preset)
{
    std::ifstream m(membership);
    if (!m) throw IoError("cannot read " + membership.string());
    if (colors) {
        std::ifstream c(*colors);
        if (!c) throw IoError("cannot read " + colors->string());
        return ingest(m, &c, preset);
    }
    return ingest(m, nullptr, preset);
}

void write_membership_csv(std::ostream& out, const BipartiteNetwork& network)
{
    out << "member_id,group_id,timestamp\n";
    std::size_t step = 0;
    for (const Edge& e : network.edges()) out << fmt::format("{},{},{}\n", e.member, e.group, ++step);
}

void write_colors_csv(std::ostream& out, const BipartiteNetwork& network)
{
    out << "entity_id,kind,color\n";
    const auto& members = network.members();
    for (MemberId i = 0; i < members.size(); ++i) out << fmt::format("{},member,{}\n", i, to_string(members[i].color));
    const auto& groups = network.groups();
    for (GroupId i = 0; i < groups.size(); ++i) out << fmt::format("{},group,{}\n", i, to_string(groups[i].color));
}

json run_metadata(const std::optional<GrowthParams>& params, std::optional<std::uint64_t> seed, const json& extra)
{
    json m = {{"version", kVersion}, {"prng", Rng::algorithm}};
    m["params"] = params ? to_json(*params) : json(nullptr);
    m["seed"] = seed ? json(*seed) : json(nullptr);
    for (const auto& [k, v] : extra.items()) m[k] = v;
    return m;
}

void write_snapshot(std::ostream& out, const BipartiteNetwork& network, const json& meta)
{
    json head = {{"type", "meta"}, {"format", "chasm-snapshot"}, {"meta", meta}, {"t", network.t()},
                 {"members", network.members().size()}, {"groups", network.groups().size()}};
    out << head.dump() << '\n';
    const auto& members = network.members();
    for (MemberId i = 0; i < members.size(); ++i)
        out << fmt::format("{{\"type\":\"member\",\"id\":{},\"color\":\"{}\"}}\n", i, to_string(members[i].color));
    const auto& groups = network.groups();
    for (GroupId i = 0; i < groups.size(); ++i)
        out << fmt::format("{{\"type\":\"group\",\"id\":{},\"color\":\"{}\",\"creator\":{},\"creation_step\":{}}}\n", i,
                           to_string(groups[i].color), groups[i].creator, groups[i].creation_step);
    for (const Edge& e : network.edges())
        out << fmt::format("{{\"type\":\"edge\",\"member\":{},\"group\":{}}}\n", e.member, e.group);
}

Snapshot read_snapshot(std::istream& in)
{
    Snapshot s;
    std::string line;
    std::size_t lineno = 0;
    std::vector<Group> groups;
    bool have_meta = false;
    std::size_t edges = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(e.what(), lineno);
        }
        const std::string type = j.value("type", "");
        try {
            if (type == "meta") {
                s.meta = j.value("meta", json::object());
                have_meta = true;
            } else if (type == "member") {
                if (j.at("id").get<std::size_t>() != s.network.members().size()) throw ParseError("member ids out of order", lineno);
                s.network.add_member(color_from_string(j.at("color").get<std::string>()));
            } else if (type == "group") {
                if (j.at("id").get<std::size_t>() != groups.size()) throw ParseError("group ids out of order", lineno);
                groups.push_back({color_from_string(j.at("color").get<std::string>()), 0, j.at("creator").get<MemberId>(),
                                  j.at("creation_step").get<std::uint64_t>()});
            } else if (type == "edge") {
                const auto m = j.at("member").get<MemberId>();
                const auto g = j.at("group").get<GroupId>();
                ++edges;
                if (g == s.network.groups().size()) {
                    if (g >= groups.size()) throw ParseError("edge references unknown group", lineno);
                    if (groups[g].creator != m || groups[g].creation_step != edges)
                        throw ParseError("group creation edge does not match its record", lineno);
                    s.network.add_group(groups[g].color, m);
                } else {
                    s.network.add_edge(m, g);
                }
            } else {
                throw ParseError(fmt::format("unknown record type '{}'", type), lineno);
            }
        } catch (const json::exception& e) {
            throw ParseError(e.what(), lineno);
        } catch (const ReferenceError& e) {
            throw ParseError(e.what(), lineno);
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    if (!have_meta) throw ParseError("snapshot has no meta record", 0);
    if (s.network.groups().size() != groups.size()) throw ParseError("some groups never received their creation edge", 0);
    return s;
}

namespace {

void write_meta_comment(std::ostream& out, const json* meta)
{
    if (meta) out << "# " << meta->dump() << '\n';
}

}  // namespace

void write_series_csv(std::ostream& out, const RatioSeries& series, const json* meta)
{
    write_meta_comment(out, meta);
    out << "bin_lo,bin_hi,ratio,support\n";
    for (const auto& p : series.points) out << fmt::format("{},{},{},{}\n", p.lo, p.hi, p.ratio, p.support);
}

void write_distribution_csv(std::ostream& out, const LimitDistribution& dist, const json* meta)
{
    write_meta_comment(out, meta);
    out << "k,value_red,value_blue\n";
    for (std::size_t k = 1; k <= dist.k_max(); ++k)
        out << fmt::format("{},{},{}\n", k, dist.value(Color::Red, k), dist.value(Color::Blue, k));
}

void write_curve_csv(std::ostream& out, const std::vector<double>& values, const json* meta)
{
    write_meta_comment(out, meta);
    out << "k,ratio\n";
    for (std::size_t k = 1; k <= values.size(); ++k) out << fmt::format("{},{}\n", k, values[k - 1]);
}

void write_report(std::ostream& out, const json& report) { out << report.dump(2) << '\n'; }

json to_json(const GrowthParams& p)
{
    return {{"alpha", p.alpha},         {"eta", p.eta},
            {"r", p.r},                 {"xi", p.xi},
            {"rho_p_red", p.rho_p_red}, {"rho_p_blue", p.rho_p_blue},
            {"rho_u_red", p.rho_u_red}, {"rho_u_blue", p.rho_u_blue},
            {"variant", to_string(p.variant)}};
}

GrowthParams growth_params_from_json(const json& j)
{
    GrowthParams p;
    p.alpha = j.value("alpha", p.alpha);
    p.eta = j.value("eta", p.eta);
    p.r = j.value("r", p.r);
    p.xi = j.value("xi", p.xi);
    p.rho_p_red = j.value("rho_p_red", p.rho_p_red);
    p.rho_p_blue = j.value("rho_p_blue", p.rho_p_blue);
    p.rho_u_red = j.value("rho_u_red", p.rho_u_red);
    p.rho_u_blue = j.value("rho_u_blue", p.rho_u_blue);
    if (j.contains("variant")) p.variant = variant_from_string(j.at("variant").get<std::string>());
    return p;
}

json to_json(const AnalyticSolution& s)
{
    json j = {{"alpha_star", s.alpha_star.value},
              {"residual", s.alpha_star.residual},
              {"in_hypothesis", s.alpha_star.in_hypothesis},
              {"c_r1", s.c.c_r1},
              {"c_r2", s.c.c_r2},
              {"c_b1", s.c.c_b1},
              {"c_b2", s.c.c_b2},
              {"beta_red", s.beta_red},
              {"beta_blue", s.beta_blue},
              {"k_star", s.threshold.k_star ? json(*s.threshold.k_star) : json(nullptr)},
              {"turning_point", s.threshold.turning_point ? json(*s.threshold.turning_point) : json(nullptr)},
              {"glass_ceiling", to_string(s.classification.glass_ceiling)},
              {"chasm", to_string(s.classification.chasm)}};
    if (!s.alpha_star.in_hypothesis)
        j["note"] = "outside the uniqueness hypothesis: a rich-get-richer acceptance probability is 0";
    return j;
}

json to_json(const RatioSeries& s)
{
    json pts = json::array();
    for (const auto& p : s.points) pts.push_back({{"bin_lo", p.lo}, {"bin_hi", p.hi}, {"ratio", p.ratio}, {"support", p.support}});
    return {{"binning", s.binning}, {"points", pts}};
}

json to_json(const PairTest& t)
{
    return {{"observed_cross_share", t.observed_cross_share},
            {"expected_cross_share", t.expected_cross_share},
            {"r", t.r},
            {"pairs", t.pairs},
            {"cross_pairs", t.cross_pairs},
            {"verdict", t.homophilous ? "Homophilous" : "NotHomophilous"}};
}

json to_json(const PowerLawFit& f)
{
    return {{"beta", f.beta}, {"power", -f.beta}, {"k_min", f.k_min}, {"stderr", f.stderr_beta}, {"ks", f.ks}, {"n_tail", f.n_tail}};
}

json to_json(const ChasmFinding& f)
{
    const char* shape = f.shape == TrendShape::Unimodal ? "unimodal" : f.shape == TrendShape::Increasing ? "increasing" : "decreasing";
    return {{"turning_point", f.turning_point ? json(*f.turning_point) : json(nullptr)},
            {"decided", f.decided},
            {"shape", shape},
            {"sse_unimodal", f.sse_unimodal},
            {"sse_increasing", f.sse_increasing},
            {"sse_decreasing", f.sse_decreasing},
            {"bins_used", f.bins_used}};
}

json to_json(const FitResult& f)
{
    return {{"params_hat", to_json(f.params_hat)},
            {"objective", to_string(f.objective)},
            {"objective_value", f.objective_value},
            {"paper_sum_difference", f.paper_sum_difference},
            {"per_size_l1", f.per_size_l1},
            {"K_used", f.K_used},
            {"dropped_k", f.dropped_k},
            {"restart_best", f.restart_best},
            {"trace", f.trace},
            {"direct", {{"r", f.direct.r},
                        {"alpha", f.direct.alpha},
                        {"eta", f.direct.eta},
                        {"eta_label", "eta (sometimes called gamma)"},
                        {"degenerate", f.direct.degenerate},
                        {"small_sample", f.direct.small_sample}}},
            {"warnings", f.warnings}};
}

json to_json(const FactCheckMetrics& m)
{
    return {{"protected_group_red_share", m.protected_group_red_share},
            {"checked_count_red_share", m.checked_count_red_share},
            {"protected_members_red_share", m.protected_members_red_share},
            {"protected_red_members_share", m.protected_red_members_share},
            {"checked_per_rep", m.checked_per_rep}};
}

json to_json(const Tallies& t)
{
    return {{"members", {{"red", t.members[0]}, {"blue", t.members[1]}}},
            {"groups", {{"red", t.groups[0]}, {"blue", t.groups[1]}}},
            {"member_degree", {{"red", t.member_degree[0]}, {"blue", t.member_degree[1]}}},
            {"group_size", {{"red", t.group_size[0]}, {"blue", t.group_size[1]}}}};
}

std::map<std::string, std::string> read_kv(std::istream& in)
{
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = line;
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected key=value", lineno);
        const auto key = trim(s.substr(0, eq));
        if (key.empty()) throw ParseError("empty key", lineno);
        kv[std::string(key)] = std::string(trim(s.substr(eq + 1)));
    }
    return kv;
}

std::map<std::string, std::string> read_kv_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    return read_kv(in);
}

GrowthParams apply_kv(GrowthParams p, const std::map<std::string, std::string>& kv)
{
    auto number = [&](const std::string& key, double& target) {
        const auto it = kv.find(key);
        if (it == kv.end()) return;
        const std::string& v = it->second;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), target);
        if (ec != std::errc() || ptr != v.data() + v.size())
            throw std::invalid_argument(fmt::format("{} is not a number: '{}'", key, v));
    };
    number("alpha", p.alpha);
    number("eta", p.eta);
    number("r", p.r);
    number("xi", p.xi);
    if (const auto it = kv.find("rho"); it != kv.end()) {
        double rho = 0.0;
        number("rho", rho);
        p.rho_p_red = p.rho_p_blue = p.rho_u_red = p.rho_u_blue = rho;
    }
    number("rho_p_red", p.rho_p_red);
    number("rho_p_blue", p.rho_p_blue);
    number("rho_u_red", p.rho_u_red);
    number("rho_u_blue", p.rho_u_blue);
    if (const auto it = kv.find("variant"); it != kv.end()) p.variant = variant_from_string(it->second);
    return p;
}

void write_kv(std::ostream& out, const GrowthParams& p)
{
    out << fmt::format("alpha={}\neta={}\nr={}\nxi={}\nrho_p_red={}\nrho_p_blue={}\nrho_u_red={}\nrho_u_blue={}\nvariant={}\n",
                       p.alpha, p.eta, p.r, p.xi, p.rho_p_red, p.rho_p_blue, p.rho_u_red, p.rho_u_blue, to_string(p.variant));
}

std::string sha256_hex(std::string_view bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

std::string sha256_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

}  // namespace chasm
