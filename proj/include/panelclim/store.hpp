#pragma once

#include "panelclim/csv.hpp"
#include "panelclim/estimate.hpp"
#include "panelclim/features.hpp"
#include "panelclim/ingest.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <utility>
#include <vector>

namespace panelclim {

// Normalized intermediate tables. Writers emit canonical column names so a
// later stage (or a user) can read everything back with the identity schema.

CsvTable stations_table(const std::vector<StationRecord>& records);
CsvTable station_meta_table(const std::vector<StationMeta>& all,
                            const std::vector<StationMeta>& retained);
// Returns (all stations, retained subset).
std::pair<std::vector<StationMeta>, std::vector<StationMeta>> read_station_meta(
    const CsvTable& table);

CsvTable econ_table(const std::vector<EconRow>& rows);
CsvTable indices_table(const std::vector<IndexRow>& rows);
CsvTable events_table(const std::vector<EventRecord>& rows);
CsvTable rcp_table(const std::vector<RcpDeltaRow>& rows);
CsvTable coverage_table(const std::vector<ProvinceCoverage>& rows);

CsvTable seasonal_table(const std::vector<SeasonalCell>& cells);
std::vector<SeasonalCell> read_seasonal(const CsvTable& table);

CsvTable anomalies_table(const std::vector<AnomalyRow>& rows);
std::vector<AnomalyRow> read_anomalies(const CsvTable& table);

CsvTable growth_table(const std::vector<GrowthRow>& rows);
std::vector<GrowthRow> read_growth(const CsvTable& table);

CsvTable index_growth_table(const std::vector<IndexGrowthRow>& rows);
std::vector<IndexGrowthRow> read_index_growth(const CsvTable& table);

CsvTable baseline_table(const std::map<BaselineKey, SeasonalBaseline>& baselines);
std::map<BaselineKey, SeasonalBaseline> read_baseline(const CsvTable& table);

nlohmann::json fit_to_json(const FitResult& fit);
FitResult fit_from_json(const nlohmann::json& j);

// Run manifest: per-stage input hash, outputs with content hashes and row
// counts, and free-form stats. A stage whose recorded input hash and output
// hashes still match is current and can be skipped.
class Manifest {
  public:
    static Manifest load(const std::filesystem::path& file);
    void save(const std::filesystem::path& file) const;

    bool stage_is_current(const std::string& stage, const std::string& input_hash,
                          const std::filesystem::path& out_dir) const;
    void record_stage(const std::string& stage, const std::string& input_hash,
                      const std::filesystem::path& out_dir,
                      const std::vector<std::pair<std::string, std::size_t>>& outputs,
                      const nlohmann::json& stats);
    nlohmann::json stage_stats(const std::string& stage) const;

    nlohmann::json json = nlohmann::json::object();
};

}  // namespace panelclim
