#include "chasm/cli.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "chasm/io.hpp"
#include "chasm/unipartite.hpp"

namespace chasm {
namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr const char* kParamKeys[] = {"alpha",      "eta",       "r",          "xi",      "rho",
                                      "rho_p_red",  "rho_p_blue", "rho_u_red", "rho_u_blue", "variant"};

struct ParamFlags {
    std::string file;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;

    void attach(CLI::App* app)
    {
        app->add_option("--params-file", file, "key=value parameter file")->check(CLI::ExistingFile);
        for (const char* key : kParamKeys) {
            std::string flag = "--" + std::string(key);
            std::replace(flag.begin(), flag.end(), '_', '-');
            options[key] = app->add_option(flag, values[key]);
        }
        options["eta"]->description("group creation probability (sometimes called gamma)");
    }

    bool given() const
    {
        if (!file.empty()) return true;
        return std::any_of(options.begin(), options.end(), [](const auto& o) { return o.second->count() > 0; });
    }

    GrowthParams resolve() const
    {
        try {
            GrowthParams p;
            if (!file.empty()) p = apply_kv(p, read_kv_file(file));
            std::map<std::string, std::string> overrides;
            for (const auto& [key, opt] : options)
                if (opt->count() > 0) overrides[key] = values.at(key);
            p = apply_kv(p, overrides);
            return validate_params(p);
        } catch (const ParseError& e) {
            throw UsageError(fmt::format("{}: {}", file, e.what()));
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
};

struct NetworkFlags {
    std::string network;
    std::string colors;
    std::string preset = "none";

    void attach(CLI::App* app, bool required = true)
    {
        auto* o = app->add_option("--network", network, "snapshot (.jsonl) or membership CSV")->check(CLI::ExistingFile);
        if (required) o->required();
        app->add_option("--colors", colors, "colors CSV for a membership CSV")->check(CLI::ExistingFile);
        app->add_option("--preset", preset, "none | qq | whatsapp");
    }

    struct Loaded {
        BipartiteNetwork network;
        json source;
    };

    Loaded load() const
    {
        Preset p;
        try {
            p = preset_from_string(preset);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        Loaded l;
        l.source = {{"path", network}, {"sha256", sha256_file(network)}};
        if (std::filesystem::path(network).extension() == ".jsonl") {
            std::ifstream in(network);
            Snapshot s = read_snapshot(in);
            l.network = std::move(s.network);
            l.source["meta"] = std::move(s.meta);
        } else {
            IngestResult r = ingest_files(network, colors.empty() ? std::nullopt : std::optional<std::filesystem::path>(colors), p);
            l.network = std::move(r.network);
            l.source["preset"] = std::string(to_string(p));
            l.source["dropped_groups"] = r.dropped_groups;
            l.source["group_colors_inferred"] = r.group_colors_inferred;
            l.source["member_colors_inferred"] = r.member_colors_inferred;
            if (!colors.empty()) l.source["colors_sha256"] = sha256_file(colors);
        }
        return l;
    }
};

Binning binning_from(const std::string& s)
{
    if (s == "log") return Binning{};
    if (s == "unit") return Binning::unit();
    throw UsageError("unknown binning '" + s + "' (log | unit)");
}

template <class T>
std::vector<T> parse_list(const std::string& s, const char* what)
{
    std::vector<T> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::istringstream is(item);
        T v;
        if (!(is >> v) || !(is >> std::ws).eof()) throw UsageError(fmt::format("{}: cannot parse '{}'", what, item));
        out.push_back(v);
    }
    if (out.empty()) throw UsageError(fmt::format("{}: empty list", what));
    return out;
}

void emit(std::ostream& out, const std::string& path, const json& report)
{
    if (path.empty() || path == "-") {
        write_report(out, report);
        return;
    }
    auto f = open_output(path);
    write_report(f, report);
}

json fit_or_error(const std::vector<std::uint64_t>& values)
{
    try {
        return to_json(power_law_exponent(values));
    } catch (const std::exception& e) {
        return {{"error", e.what()}};
    }
}

std::vector<std::uint64_t> expand(const std::vector<std::uint64_t>& counts)
{
    std::vector<std::uint64_t> v;
    for (std::size_t k = 1; k < counts.size(); ++k) v.insert(v.end(), counts[k], k);
    return v;
}

json series_json(const RatioSeries& s) { return to_json(s); }

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Homophilous bipartite group growth: simulation, analytics, metrics and fitting", "chasm"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    bool json_errors = false;
    app.add_flag("--json", json_errors, "machine-readable errors on stderr");

    std::function<void()> action;
    NetworkFlags source;
    std::string out_path;
    std::uint64_t seed = 0;

    // simulate
    auto* sim = app.add_subcommand("simulate", "grow a network and write a snapshot");
    std::uint64_t t_max = 100000;
    std::string sampling = "exact", snapshot_path, events_path;
    ParamFlags sim_params;
    sim_params.attach(sim);
    sim->add_option("--t", t_max, "edges to grow to")->check(CLI::Range(std::uint64_t{2}, std::uint64_t{1} << 40));
    sim->add_option("--seed", seed);
    sim->add_option("--sampling", sampling, "exact | literal");
    sim->add_option("--snapshot", snapshot_path, "snapshot JSONL output");
    sim->add_option("--events", events_path, "event log JSONL output");
    sim->add_option("--out", out_path, "summary JSON (stdout by default)");
    sim->callback([&] {
        action = [&] {
            const GrowthParams p = sim_params.resolve();
            RunConfig cfg;
            cfg.t_max = t_max;
            cfg.seed = seed;
            try {
                cfg.sampling = sampling_from_string(sampling);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            cfg.record_events = !events_path.empty();
            GrowthRun run = grow_run(p, cfg);
            const json meta = run_metadata(p, seed, {{"command", "simulate"}, {"t", t_max}, {"sampling", to_string(cfg.sampling)}});
            json summary = {{"meta", meta},
                            {"t", run.network.t()},
                            {"members", run.network.members().size()},
                            {"groups", run.network.groups().size()},
                            {"tallies", to_json(run.network.tallies())}};
            if (!snapshot_path.empty()) {
                {
                    auto f = open_output(snapshot_path);
                    write_snapshot(f, run.network, meta);
                }
                summary["snapshot"] = snapshot_path;
                summary["snapshot_sha256"] = sha256_file(snapshot_path);
            }
            if (!events_path.empty()) {
                {
                    auto f = open_output(events_path);
                    write_events_jsonl(f, run.events);
                }
                summary["events_sha256"] = sha256_file(events_path);
            }
            emit(out, out_path, summary);
        };
    });

    // analyze
    auto* ana = app.add_subcommand("analyze", "solve the limit model for a parameter vector");
    std::size_t k_max = 1000;
    std::string out_dir;
    ParamFlags ana_params;
    ana_params.attach(ana);
    ana->add_option("--k-max", k_max, "largest size in the distribution CSVs")->check(CLI::Range(std::size_t{2}, std::size_t{100000000}));
    ana->add_option("--out-dir", out_dir, "directory for distribution and curve CSVs");
    ana->add_option("--out", out_path, "report JSON (stdout by default)");
    ana->callback([&] {
        action = [&] {
            const GrowthParams p = ana_params.resolve();
            const AnalyticSolution s = solve(p);
            const MemberRatioCurve curve = member_ratio_curve(p, k_max);
            const json meta = run_metadata(p, std::nullopt, {{"command", "analyze"}, {"k_max", k_max}});
            json report = {{"meta", meta}, {"solution", to_json(s)}};
            report["member_ratio"] = {{"at_one", curve.at_one}, {"limit", curve.limit ? json(*curve.limit) : json(nullptr)}};
            if (!out_dir.empty()) {
                std::filesystem::create_directories(out_dir);
                const std::filesystem::path dir(out_dir);
                {
                    auto f = open_output(dir / "group_sizes.csv");
                    write_distribution_csv(f, group_size_distribution(p, s.c, k_max), &meta);
                }
                {
                    auto f = open_output(dir / "member_degrees.csv");
                    write_distribution_csv(f, member_degree_distribution(p, k_max), &meta);
                }
                {
                    auto f = open_output(dir / "member_ratio.csv");
                    write_curve_csv(f, curve.ratio, &meta);
                }
                report["files"] = {"group_sizes.csv", "member_degrees.csv", "member_ratio.csv"};
            }
            emit(out, out_path, report);
        };
    });

    // metrics
    auto* met = app.add_subcommand("metrics", "measure a network: ratio series, homophily, exponents, chasm");
    std::string binning = "log", series_out;
    std::uint64_t min_support = 50;
    source.attach(met);
    met->add_option("--binning", binning, "log | unit");
    met->add_option("--min-support", min_support, "minimum groups per bin for the chasm finding");
    met->add_option("--series-out", series_out, "group ratio series CSV");
    met->add_option("--out", out_path, "report JSON (stdout by default)");
    met->callback([&] {
        action = [&] {
            const Binning b = binning_from(binning);
            const auto loaded = source.load();
            const BipartiteNetwork& net = loaded.network;
            const RatioSeries groups = group_ratio_by_size(net, b);
            const RatioSeries members = member_ratio_by_size(net, b);
            const json meta = run_metadata(std::nullopt, std::nullopt, {{"command", "metrics"}, {"source", loaded.source}});
            json exps = {{"group_size_red", fit_or_error(expand(net.group_size_counts(Color::Red)))},
                         {"group_size_blue", fit_or_error(expand(net.group_size_counts(Color::Blue)))},
                         {"member_degree_red", fit_or_error(expand(net.member_degree_counts(Color::Red)))},
                         {"member_degree_blue", fit_or_error(expand(net.member_degree_counts(Color::Blue)))}};
            std::optional<double> beta_blue;
            if (exps["group_size_blue"].contains("beta")) beta_blue = exps["group_size_blue"]["beta"].get<double>();
            json tail = json::array();
            for (const TailRatio& tr : top_k_tail_ratio(net, default_tail_schedule(net, beta_blue)))
                tail.push_back({{"k", tr.k}, {"red", tr.red}, {"blue", tr.blue}, {"ratio", std::isfinite(tr.ratio) ? json(tr.ratio) : json(nullptr)}});
            json report = {{"meta", meta},
                           {"tallies", to_json(net.tallies())},
                           {"group_ratio", series_json(groups)},
                           {"member_ratio", series_json(members)},
                           {"pair_test", to_json(homophily_pair_test(net))},
                           {"exponents", exps},
                           {"tail_ratio", tail}};
            try {
                report["chasm"] = to_json(detect_chasm(groups, min_support));
            } catch (const InsufficientSupport& e) {
                report["chasm"] = {{"error", e.what()}};
            }
            if (!series_out.empty()) {
                auto f = open_output(series_out);
                write_series_csv(f, groups, &meta);
            }
            emit(out, out_path, report);
        };
    });

    // fit
    auto* fit = app.add_subcommand("fit", "fit homophily parameters to a network");
    std::string objective = "paper-sum", free_params;
    FitConfig fit_cfg;
    source.attach(fit);
    fit->add_option("--objective", objective, "paper-sum | per-size-l1");
    fit->add_option("--free-params", free_params, "comma list of parameters to fit");
    fit->add_option("--K", fit_cfg.K, "largest group size in the objective");
    fit->add_option("--restarts", fit_cfg.restarts);
    fit->add_option("--evaluations", fit_cfg.evaluations_per_restart, "objective evaluations per restart");
    fit->add_option("--seed", seed);
    fit->add_option("--out", out_path, "report JSON (stdout by default)");
    fit->callback([&] {
        action = [&] {
            try {
                fit_cfg.objective = objective_from_string(objective);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            if (!free_params.empty()) fit_cfg.free_params = parse_list<std::string>(free_params, "--free-params");
            for (const auto& name : fit_cfg.free_params)
                if (std::find(kFittableParams.begin(), kFittableParams.end(), name) == kFittableParams.end())
                    throw UsageError("not a fittable parameter: " + name);
            fit_cfg.seed = seed;
            const auto loaded = source.load();
            const FitResult r = fit_homophily(loaded.network, fit_cfg);
            const json meta = run_metadata(std::nullopt, seed,
                                           {{"command", "fit"}, {"source", loaded.source}, {"K", fit_cfg.K},
                                            {"restarts", fit_cfg.restarts}, {"objective", to_string(fit_cfg.objective)}});
            const auto emp = empirical_ratios(loaded.network.group_size_counts(Color::Red),
                                              loaded.network.group_size_counts(Color::Blue), fit_cfg.K);
            const auto model = group_size_distribution(r.params_hat, fit_cfg.K);
            json table = json::array();
            for (std::size_t k = 1; k <= fit_cfg.K; ++k)
                table.push_back({{"k", k},
                                 {"empirical", emp.usable[k - 1] ? json(emp.ratio[k - 1]) : json(nullptr)},
                                 {"fitted", std::exp(model.log_value(Color::Red, k) - model.log_value(Color::Blue, k))}});
            emit(out, out_path, {{"meta", meta}, {"fit", to_json(r)}, {"ratios", table}});
        };
    });

    // apps-ads
    auto* ads = app.add_subcommand("apps-ads", "red share of ad reach over groups of size >= k_a");
    std::string k_a_sweep = "1,2,3,5,10,20,50,100", counting = "impressions";
    source.attach(ads, false);
    ParamFlags ads_params;
    ads_params.attach(ads);
    ads->add_option("--k-a-sweep", k_a_sweep, "comma list of size thresholds");
    ads->add_option("--counting", counting, "impressions | unique");
    ads->add_option("--k-max", k_max, "truncation for the analytic mode");
    ads->add_option("--out", out_path, "report JSON (stdout by default)");
    ads->callback([&] {
        action = [&] {
            const auto sweep = parse_list<std::uint64_t>(k_a_sweep, "--k-a-sweep");
            Counting c;
            try {
                c = counting_from_string(counting);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            json points = json::array();
            json meta;
            double r = 0.0;
            if (!source.network.empty()) {
                if (ads_params.given()) throw UsageError("apps-ads takes either --network or parameters, not both");
                const auto loaded = source.load();
                const auto& t = loaded.network.tallies();
                r = static_cast<double>(t.members[0]) / static_cast<double>(t.members[0] + t.members[1]);
                for (auto k : sweep) {
                    try {
                        points.push_back({{"k_a", k}, {"r_A", ad_reach_ratio(loaded.network, k, c)}});
                    } catch (const std::domain_error&) {
                        points.push_back({{"k_a", k}, {"r_A", nullptr}});
                    }
                }
                meta = run_metadata(std::nullopt, std::nullopt,
                                    {{"command", "apps-ads"}, {"mode", "empirical"}, {"counting", to_string(c)}, {"source", loaded.source}});
            } else {
                const GrowthParams p = ads_params.resolve();
                r = p.r;
                const auto dist = group_size_distribution(p, k_max);
                const auto curve = member_ratio_curve(p, k_max);
                for (auto k : sweep) {
                    try {
                        points.push_back({{"k_a", k}, {"r_A", ad_reach_ratio(dist, curve, k)}});
                    } catch (const std::domain_error&) {
                        points.push_back({{"k_a", k}, {"r_A", nullptr}});
                    }
                }
                meta = run_metadata(p, std::nullopt, {{"command", "apps-ads"}, {"mode", "analytic"}, {"k_max", k_max}});
            }
            emit(out, out_path, {{"meta", meta}, {"r", r}, {"points", points}});
        };
    });

    // apps-factcheck
    auto* fc = app.add_subcommand("apps-factcheck", "crowd-sourced fact-checking over a network");
    FactCheckConfig fc_cfg;
    std::string P_sweep = "1,2,5,10,20,30,50,75,100";
    source.attach(fc);
    fc->add_option("--p", fc_cfg.p, "reports per member")->check(CLI::PositiveNumber);
    fc->add_option("--P-sweep", P_sweep, "comma list of percentages checked");
    fc->add_option("--reps", fc_cfg.reps)->check(CLI::PositiveNumber);
    fc->add_option("--items-per-group", fc_cfg.items_per_group)->check(CLI::PositiveNumber);
    fc->add_option("--seed", seed);
    fc->add_option("--out", out_path, "report JSON (stdout by default)");
    fc->callback([&] {
        action = [&] {
            const auto sweep = parse_list<double>(P_sweep, "--P-sweep");
            for (double P : sweep)
                if (!(P >= 0.0 && P <= 100.0)) throw UsageError(fmt::format("--P-sweep: {} is outside [0, 100]", P));
            fc_cfg.seed = seed;
            const auto loaded = source.load();
            const auto& t = loaded.network.tallies();
            const double red_group_share = static_cast<double>(t.groups[0]) / static_cast<double>(t.groups[0] + t.groups[1]);
            const auto metrics = factcheck_sweep(loaded.network, fc_cfg, sweep);
            json points = json::array();
            for (std::size_t i = 0; i < sweep.size(); ++i) {
                json m = to_json(metrics[i]);
                m["P"] = sweep[i];
                points.push_back(m);
            }
            const json meta = run_metadata(std::nullopt, seed,
                                           {{"command", "apps-factcheck"}, {"source", loaded.source}, {"p", fc_cfg.p},
                                            {"reps", fc_cfg.reps}, {"items_per_group", fc_cfg.items_per_group}});
            emit(out, out_path, {{"meta", meta}, {"red_group_share", red_group_share}, {"points", points}});
        };
    });

    // project
    auto* proj = app.add_subcommand("project", "member-member projection or native one-mode growth");
    ProjectionOptions proj_opts;
    std::uint64_t native_n = 0;
    std::string edges_out;
    source.attach(proj, false);
    ParamFlags proj_params;
    proj_params.attach(proj);
    proj->add_flag("--dedup", proj_opts.deduplicate, "one edge per member pair");
    proj->add_option("--edge-cap", proj_opts.edge_cap);
    proj->add_option("--native", native_n, "grow a one-mode network to this many members instead");
    proj->add_option("--seed", seed);
    proj->add_option("--binning", binning, "log | unit");
    proj->add_option("--edges-out", edges_out, "edge list CSV");
    proj->add_option("--out", out_path, "report JSON (stdout by default)");
    proj->callback([&] {
        action = [&] {
            const Binning b = binning_from(binning);
            UnipartiteNetwork u;
            json meta, report;
            if (native_n > 0) {
                if (!source.network.empty()) throw UsageError("--native and --network are exclusive");
                const GrowthParams p = proj_params.resolve();
                u = grow_unipartite(UnipartiteParams::from(p), native_n, seed);
                meta = run_metadata(p, seed, {{"command", "project"}, {"mode", "native"}, {"n", native_n}});
            } else {
                if (source.network.empty()) throw UsageError("project needs --network or --native");
                const auto loaded = source.load();
                const std::uint64_t expected = projected_edge_count(loaded.network);
                u = project(loaded.network, proj_opts);
                meta = run_metadata(std::nullopt, std::nullopt,
                                    {{"command", "project"}, {"mode", "projection"}, {"dedup", proj_opts.deduplicate}, {"source", loaded.source}});
                report["expected_edges"] = expected;
            }
            std::uint64_t degree_sum = 0;
            for (Color c : {Color::Red, Color::Blue}) {
                const auto counts = u.degree_counts(c);
                for (std::size_t k = 0; k < counts.size(); ++k) degree_sum += k * counts[k];
            }
            report["meta"] = meta;
            report["members"] = u.members().size();
            report["edges"] = u.edges().size();
            report["degree_sum"] = degree_sum;
            report["connection_ratio"] = series_json(connection_ratio_by_degree(u, b));
            if (!edges_out.empty()) {
                auto f = open_output(edges_out);
                f << "a,b\n";
                for (const auto& e : u.edges()) f << e.a << ',' << e.b << '\n';
            }
            emit(out, out_path, report);
        };
    });

    // export-series
    auto* exp = app.add_subcommand("export-series", "write one ratio series as CSV");
    std::string kind = "group";
    source.attach(exp);
    exp->add_option("--kind", kind, "group | member | connection");
    exp->add_option("--binning", binning, "log | unit");
    exp->add_option("--out", out_path, "CSV path (stdout by default)");
    exp->callback([&] {
        action = [&] {
            const Binning b = binning_from(binning);
            if (kind != "group" && kind != "member" && kind != "connection") throw UsageError("unknown --kind '" + kind + "'");
            const auto loaded = source.load();
            RatioSeries s;
            if (kind == "group") s = group_ratio_by_size(loaded.network, b);
            else if (kind == "member") s = member_ratio_by_size(loaded.network, b);
            else s = connection_ratio_by_degree(project(loaded.network), b);
            const json meta = run_metadata(std::nullopt, std::nullopt, {{"command", "export-series"}, {"kind", kind}, {"source", loaded.source}});
            if (out_path.empty() || out_path == "-") {
                write_series_csv(out, s, &meta);
            } else {
                auto f = open_output(out_path);
                write_series_csv(f, s, &meta);
            }
        };
    });

    auto fail = [&](int code, std::string_view kind, const std::string& message) {
        if (json_errors) err << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
        else err << "error: " << message << '\n';
        return code;
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        json_errors = json_errors || std::any_of(argv, argv + argc, [](const char* a) { return std::string_view(a) == "--json"; });
        return fail(2, "usage", e.what());
    }

    try {
        action();
    } catch (const UsageError& e) {
        return fail(2, "usage", e.what());
    } catch (const ParseError& e) {
        return fail(1, "parse", e.what());
    } catch (const IoError& e) {
        return fail(1, "io", e.what());
    } catch (const std::exception& e) {
        return fail(1, "runtime", e.what());
    }
    return 0;
}

}  // namespace chasm
