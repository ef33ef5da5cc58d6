#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "chasm/engine.hpp"
#include "chasm/io.hpp"
#include "chasm/metrics.hpp"

using namespace chasm;

namespace {

GrowthParams homophilous()
{
    GrowthParams p;
    p.alpha = 0.5;
    p.eta = 0.3;
    p.r = 0.35;
    p.xi = 0.6;
    p.rho_p_red = 0.4;
    p.rho_p_blue = 0.7;
    p.rho_u_red = 0.5;
    p.rho_u_blue = 0.8;
    return p;
}

IngestResult ingest_text(const std::string& membership, const std::string& colors, Preset preset = Preset::None)
{
    std::istringstream m(membership), c(colors);
    return ingest(m, colors.empty() ? nullptr : &c, preset);
}

std::size_t parse_error_line(const std::string& membership, const std::string& colors)
{
    try {
        ingest_text(membership, colors);
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

bool same_series(const RatioSeries& a, const RatioSeries& b)
{
    if (a.points.size() != b.points.size()) return false;
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        const auto &x = a.points[i], &y = b.points[i];
        if (x.lo != y.lo || x.hi != y.hi || x.ratio != y.ratio || x.support != y.support) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("two rows with both colorings")
{
    const auto r = ingest_text("member_id,group_id\nalice,g1\nbob,g1\n",
                               "entity_id,kind,color\nalice,member,red\nbob,member,blue\ng1,group,red\n");
    const auto& t = r.network.tallies();
    CHECK(r.network.members().size() == 2);
    CHECK(r.network.groups().size() == 1);
    CHECK(t.members == std::array<std::uint64_t, 2>{1, 1});
    CHECK(t.group_size == std::array<std::uint64_t, 2>{2, 0});
    CHECK(t.member_degree == std::array<std::uint64_t, 2>{1, 1});
    CHECK(r.member_ids == std::vector<std::string>{"alice", "bob"});
    CHECK_FALSE(r.group_colors_inferred);
    CHECK_FALSE(r.member_colors_inferred);
}

TEST_CASE("timestamps order the replay")
{
    const auto r = ingest_text("member_id,group_id,timestamp\nb,g,5\na,g,2\n",
                               "entity_id,kind,color\na,member,red\nb,member,blue\n");
    CHECK(r.member_ids == std::vector<std::string>{"a", "b"});
    CHECK(r.network.groups()[0].creator == 0);
    CHECK(r.group_colors_inferred);
}

TEST_CASE("presets drop groups outside their window")
{
    std::string rows = "member_id,group_id\n";
    for (int i = 0; i < 101; ++i) rows += "m" + std::to_string(i) + ",big\n";
    rows += "m0,small\nm1,small\n";
    std::string colors = "entity_id,kind,color\nbig,group,red\nsmall,group,blue\n";
    for (int i = 0; i < 101; ++i) colors += "m" + std::to_string(i) + ",member," + (i % 2 ? "red" : "blue") + "\n";
    const auto qq = ingest_text(rows, colors, Preset::QQ);
    CHECK(qq.dropped_groups == 1);
    CHECK(qq.network.groups().size() == 1);
    CHECK(qq.network.t() == 2);
    CHECK(ingest_text(rows, colors).dropped_groups == 0);
    const auto wa = ingest_text(rows, colors, Preset::WhatsApp);
    CHECK(wa.dropped_groups == 1);
    CHECK(wa.network.groups()[0].size == 101);

    CHECK(preset_keeps(Preset::QQ, 100));
    CHECK_FALSE(preset_keeps(Preset::QQ, 101));
    CHECK_FALSE(preset_keeps(Preset::WhatsApp, 51));
    CHECK(preset_keeps(Preset::WhatsApp, 164));
    CHECK_FALSE(preset_keeps(Preset::WhatsApp, 165));
    CHECK(preset_from_string(to_string(Preset::WhatsApp)) == Preset::WhatsApp);
    CHECK_THROWS_AS(preset_from_string("facebook"), std::invalid_argument);
}

TEST_CASE("member colors inferred from joined groups")
{
    const auto r = ingest_text("member_id,group_id\nx,g1\nx,g2\ny,g3\ny,g2\n",
                               "entity_id,kind,color\ng1,group,red\ng2,group,red\ng3,group,blue\n");
    CHECK(r.member_colors_inferred);
    CHECK(r.network.members()[0].color == Color::Red);
    CHECK(r.network.members()[1].color == Color::Blue);
    CHECK_THROWS_AS(ingest_text("member_id,group_id\nx,g1\n", ""), ParseError);
}

TEST_CASE("malformed input reports the line")
{
    const std::string colors = "entity_id,kind,color\na,member,red\n";
    CHECK(parse_error_line("member_id,group_id\na,g\na\n", colors) == 3);
    CHECK(parse_error_line("member_id,group_id\n,g\n", colors) == 2);
    CHECK(parse_error_line("member_id,group_id,timestamp\na,g,soon\n", colors) == 2);
    CHECK(parse_error_line("user,group\na,g\n", colors) == 1);
    CHECK(parse_error_line("member_id,group_id\na,g\n", "entity_id,kind,color\na,member,green\n") == 2);
    CHECK(parse_error_line("member_id,group_id\na,g\n", "entity_id,kind,color\na,member,red\na,member,blue\n") == 3);
    CHECK(parse_error_line("member_id,group_id\na,g\n", "entity_id,kind,color\na,person,red\n") == 2);
    std::istringstream empty;
    CHECK_THROWS_AS(ingest(empty, nullptr), ParseError);
    CHECK_THROWS_AS(ingest_files("/nonexistent/membership.csv", std::nullopt), IoError);
}

TEST_CASE("export then ingest preserves a simulated network")
{
    const auto n = grow(homophilous(), {100000, 4});
    std::ostringstream m, c;
    write_membership_csv(m, n);
    write_colors_csv(c, n);
    const auto back = ingest_text(m.str(), c.str());
    CHECK(back.network.tallies() == n.tallies());
    CHECK(back.network == n);
    CHECK(same_series(member_ratio_by_size(back.network), member_ratio_by_size(n)));
    CHECK(same_series(group_ratio_by_size(back.network), group_ratio_by_size(n)));
}

TEST_CASE("snapshot round trip and stability")
{
    const auto n = grow(homophilous(), {20000, 5});
    const json meta = run_metadata(homophilous(), 5);
    std::ostringstream a, b;
    write_snapshot(a, n, meta);
    write_snapshot(b, n, meta);
    CHECK(a.str() == b.str());
    std::istringstream in(a.str());
    const auto s = read_snapshot(in);
    CHECK(s.network == n);
    CHECK(s.meta == meta);
    CHECK(growth_params_from_json(s.meta.at("params")) == homophilous());
    CHECK(s.meta.at("prng") == "mt19937_64+splitmix64");

    std::istringstream bad("{\"type\":\"meta\",\"meta\":{}}\n{\"type\":\"edge\",\"member\":0,\"group\":0}\nnot json\n");
    try {
        read_snapshot(bad);
        FAIL("no throw");
    } catch (const ParseError& e) {
        CHECK(e.line() >= 2);
    }
}

TEST_CASE("series and curve CSVs")
{
    std::ostringstream empty;
    write_series_csv(empty, RatioSeries{});
    CHECK(empty.str() == "bin_lo,bin_hi,ratio,support\n");

    RatioSeries s;
    s.points.push_back({1, 1, 0.25, 4});
    const json meta = {{"seed", 1}};
    std::ostringstream out;
    write_series_csv(out, s, &meta);
    CHECK(out.str() == "# {\"seed\":1}\nbin_lo,bin_hi,ratio,support\n1,1,0.25,4\n");

    std::ostringstream curve;
    write_curve_csv(curve, {0.5, 0.4});
    CHECK(curve.str() == "k,ratio\n1,0.5\n2,0.4\n");
}

TEST_CASE("reports re-parse to the same fields")
{
    const auto n = grow(homophilous(), {50000, 6});
    json report = {{"meta", run_metadata(homophilous(), 6)},
                   {"tallies", to_json(n.tallies())},
                   {"pair_test", to_json(homophily_pair_test(n))},
                   {"series", to_json(member_ratio_by_size(n))}};
    std::ostringstream out;
    write_report(out, report);
    CHECK(json::parse(out.str()) == report);
}

TEST_CASE("key=value params")
{
    std::istringstream in("# comment\nalpha = 0.4\nrho=0.5\nvariant=GSHM\nunused=1\n");
    const auto kv = read_kv(in);
    CHECK(kv.at("alpha") == "0.4");
    const auto p = apply_kv(GrowthParams{}, kv);
    CHECK(p.alpha == 0.4);
    CHECK(p.rho_p_red == 0.5);
    CHECK(p.rho_u_blue == 0.5);
    std::ostringstream out;
    write_kv(out, homophilous());
    std::istringstream back(out.str());
    CHECK(apply_kv(GrowthParams{}, read_kv(back)) == homophilous());
    CHECK_THROWS_AS(apply_kv(GrowthParams{}, {{"r", "abc"}}), std::invalid_argument);
    std::istringstream broken("alpha\n");
    CHECK_THROWS_AS(read_kv(broken), ParseError);
}

TEST_CASE("sha256 and output paths")
{
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    const auto path = std::filesystem::temp_directory_path() / "chasm_io_sha.txt";
    {
        auto f = open_output(path);
        f << "abc";
    }
    CHECK(sha256_file(path) == sha256_hex("abc"));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(open_output("/nonexistent/dir/out.csv"), IoError);
}
