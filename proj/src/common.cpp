#include "panelclim/common.hpp"

#include <algorithm>

namespace panelclim {

bool is_known_province(std::string_view code)
{
    return std::find(kProvinces.begin(), kProvinces.end(), code) != kProvinces.end();
}

std::vector<std::string> expand_province_field(std::string_view field)
{
    if (field == "All" || field == "ALL" || field == "all") {
        std::vector<std::string> all;
        all.reserve(kProvinces.size());
        for (auto p : kProvinces) {
            all.emplace_back(p);
        }
        return all;
    }
    if (!is_known_province(field)) {
        throw DataError("unknown province code: " + std::string(field));
    }
    return {std::string(field)};
}

std::string_view season_name(Season s)
{
    switch (s) {
    case Season::Spring: return "Spring";
    case Season::Summer: return "Summer";
    case Season::Fall: return "Fall";
    case Season::Winter: return "Winter";
    }
    return "?";
}

Season parse_season(std::string_view name)
{
    for (auto s : kSeasons) {
        if (season_name(s) == name || season_token(s) == name) {
            return s;
        }
    }
    throw DataError("unknown season: " + std::string(name));
}

std::string_view season_token(Season s)
{
    switch (s) {
    case Season::Spring: return "spring";
    case Season::Summer: return "summer";
    case Season::Fall: return "fall";
    case Season::Winter: return "winter";
    }
    throw std::logic_error("unreachable season");
}

SeasonCell season_of_month(int year, int month, WinterRule rule)
{
    switch (month) {
    case 3: case 4: case 5: return {year, Season::Spring};
    case 6: case 7: case 8: return {year, Season::Summer};
    case 9: case 10: case 11: return {year, Season::Fall};
    case 1: case 2: return {year, Season::Winter};
    case 12:
        if (rule == WinterRule::december_of_previous_year) {
            return {year + 1, Season::Winter};
        }
        return {year, Season::Winter};
    default:
        throw DataError("month out of range: " + std::to_string(month));
    }
}

bool is_known_sector(std::string_view code)
{
    if (code == kTotalSector) {
        return true;
    }
    return std::find(kSectors.begin(), kSectors.end(), code) != kSectors.end();
}

YearRange parse_year_range(std::string_view text)
{
    auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw ConfigError("year range must look like 1998:2017, got '" + std::string(text) + "'");
    }
    YearRange r;
    try {
        r.first = std::stoi(std::string(text.substr(0, colon)));
        r.last  = std::stoi(std::string(text.substr(colon + 1)));
    } catch (const std::exception&) {
        throw ConfigError("unparseable year range '" + std::string(text) + "'");
    }
    if (r.last < r.first) {
        throw ConfigError("year range ends before it starts: " + std::string(text));
    }
    return r;
}

std::string_view winter_rule_name(WinterRule r)
{
    return r == WinterRule::december_of_previous_year ? "previous_december" : "same_year";
}

WinterRule parse_winter_rule(std::string_view name)
{
    if (name == "previous_december") return WinterRule::december_of_previous_year;
    if (name == "same_year") return WinterRule::same_calendar_year;
    throw ConfigError("unknown winter rule '" + std::string(name) +
                      "' (expected previous_december or same_year)");
}

std::string_view scenario_name(Scenario s)
{
    switch (s) {
    case Scenario::rcp26: return "RCP2.6";
    case Scenario::rcp45: return "RCP4.5";
    case Scenario::rcp85: return "RCP8.5";
    }
    return "?";
}

Scenario parse_scenario(std::string_view name)
{
    if (name == "RCP2.6" || name == "rcp26") return Scenario::rcp26;
    if (name == "RCP4.5" || name == "rcp45") return Scenario::rcp45;
    if (name == "RCP8.5" || name == "rcp85") return Scenario::rcp85;
    throw DataError("unknown scenario: " + std::string(name));
}

std::string_view horizon_name(Horizon h)
{
    return h == Horizon::near_term ? "near" : "mid";
}

Horizon parse_horizon(std::string_view name)
{
    if (name == "near") return Horizon::near_term;
    if (name == "mid") return Horizon::mid_term;
    throw DataError("unknown horizon: " + std::string(name));
}

}  // namespace panelclim
