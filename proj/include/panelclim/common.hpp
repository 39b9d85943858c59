#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace panelclim {

// Configuration problems (bad run config, unknown preset, ...). CLI exit code 2.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Data problems (unparseable files, violated invariants, empty panels). Exit code 3.
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Numerical failures (rank deficiency, singular covariance, non-convergence). Exit code 4.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// The ten provinces covered by the engine, alphabetical by code.
inline constexpr std::array<std::string_view, 10> kProvinces = {
    "AB", "BC", "MB", "NB", "NL", "NS", "ON", "PE", "QC", "SK"};

bool is_known_province(std::string_view code);

// Expands the literal "All" to the full province set, otherwise validates a single code.
std::vector<std::string> expand_province_field(std::string_view field);

enum class Season { Spring, Summer, Fall, Winter };

inline constexpr std::array<Season, 4> kSeasons = {Season::Spring, Season::Summer,
                                                   Season::Fall, Season::Winter};

std::string_view season_name(Season s);
Season parse_season(std::string_view name);

// Lowercase form used in identifiers such as design column names.
std::string_view season_token(Season s);

// December belongs to next year's winter under the default rule; --winter-same-year
// keeps all three months in the calendar year.
enum class WinterRule { december_of_previous_year, same_calendar_year };

std::string_view winter_rule_name(WinterRule r);
WinterRule parse_winter_rule(std::string_view name);

// Maps a calendar (year, month) to the (year, season) cell it contributes to.
struct SeasonCell {
    int year;
    Season season;
};
SeasonCell season_of_month(int year, int month, WinterRule rule);

// Aggregate GDP plus the fifteen industry sectors.
inline constexpr std::string_view kTotalSector = "TOTAL";
inline constexpr std::array<std::string_view, 15> kSectors = {
    "AGR",  "MIN",    "UTIL", "CONS",  "MFG",   "TRADE", "TRANS", "FIRE",
    "SCI",  "EDU",    "HEALTH", "ICR", "ACCOM", "PUBADM", "OTHER"};

bool is_known_sector(std::string_view code);

struct YearRange {
    int first = 0;
    int last = 0;

    int size() const { return last - first + 1; }
    bool contains(int year) const { return year >= first && year <= last; }
};

// Parses "1998:2017".
YearRange parse_year_range(std::string_view text);

inline constexpr YearRange kDefaultBaseline{1998, 2017};

enum class Scenario { rcp26, rcp45, rcp85 };

std::string_view scenario_name(Scenario s);
Scenario parse_scenario(std::string_view name);

enum class Horizon { near_term, mid_term };  // 2021-2040 and 2041-2060 windows

std::string_view horizon_name(Horizon h);
Horizon parse_horizon(std::string_view name);

}  // namespace panelclim
