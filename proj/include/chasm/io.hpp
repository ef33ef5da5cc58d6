#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "chasm/analytic.hpp"
#include "chasm/applications.hpp"
#include "chasm/core.hpp"
#include "chasm/engine.hpp"
#include "chasm/fitting.hpp"
#include "chasm/metrics.hpp"

namespace chasm {

using nlohmann::json;

inline constexpr std::string_view kVersion = "1.0.0";

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Preset { None, QQ, WhatsApp };

Preset preset_from_string(std::string_view s);
std::string_view to_string(Preset p) noexcept;
/// Whether a group of this size survives the preset's window.
bool preset_keeps(Preset p, std::uint64_t size) noexcept;

struct IngestResult {
    BipartiteNetwork network;
    std::vector<std::string> member_ids;  ///< external id per MemberId
    std::vector<std::string> group_ids;  ///< external id per GroupId
    std::size_t dropped_groups = 0;
    bool group_colors_inferred = false;
    bool member_colors_inferred = false;
};

/// membership: header member_id,group_id[,timestamp]. colors: header
/// entity_id,kind,color with kind member|group. Rows are replayed in
/// timestamp order when timestamps are present, else in file order.
IngestResult ingest(std::istream& membership, std::istream* colors, Preset preset = Preset::None);
IngestResult ingest_files(const std::filesystem::path& membership, const std::optional<std::filesystem::path>& colors,
                          Preset preset = Preset::None);

/// Inverse of ingest for a network: membership rows with the edge step as
/// timestamp, and one color row per member and group.
void write_membership_csv(std::ostream& out, const BipartiteNetwork& network);
void write_colors_csv(std::ostream& out, const BipartiteNetwork& network);

/// Run metadata embedded in every output.
json run_metadata(const std::optional<GrowthParams>& params, std::optional<std::uint64_t> seed,
                  const json& extra = json::object());

void write_snapshot(std::ostream& out, const BipartiteNetwork& network, const json& meta);
struct Snapshot {
    BipartiteNetwork network;
    json meta;
};
Snapshot read_snapshot(std::istream& in);

void write_series_csv(std::ostream& out, const RatioSeries& series, const json* meta = nullptr);
/// Columns k,value_red,value_blue.
void write_distribution_csv(std::ostream& out, const LimitDistribution& dist, const json* meta = nullptr);
/// Columns k,ratio.
void write_curve_csv(std::ostream& out, const std::vector<double>& values, const json* meta = nullptr);

void write_report(std::ostream& out, const json& report);

json to_json(const GrowthParams& p);
GrowthParams growth_params_from_json(const json& j);
json to_json(const AnalyticSolution& s);
json to_json(const RatioSeries& s);
json to_json(const PairTest& t);
json to_json(const PowerLawFit& f);
json to_json(const ChasmFinding& f);
json to_json(const FitResult& f);
json to_json(const FactCheckMetrics& m);
json to_json(const Tallies& t);

/// Flat key=value file; '#' starts a comment.
std::map<std::string, std::string> read_kv(std::istream& in);
std::map<std::string, std::string> read_kv_file(const std::filesystem::path& path);
/// Applies alpha, eta, r, xi, rho_* and variant keys; ignores others.
GrowthParams apply_kv(GrowthParams p, const std::map<std::string, std::string>& kv);
void write_kv(std::ostream& out, const GrowthParams& p);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Opens for writing or throws IoError naming the path.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace chasm
