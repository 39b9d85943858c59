#include "panelclim/csv.hpp"

#include "panelclim/common.hpp"
#include "panelclim/util.hpp"

#include <json.hpp>

#include <algorithm>

namespace panelclim {

CsvTable::CsvTable(std::vector<std::string> header, char sep)
    : sep_(sep), header_(std::move(header))
{
}

CsvTable CsvTable::read_string(const std::string& text, char sep)
{
    CsvTable t;
    t.sep_ = sep;
    std::size_t start = 0;
    bool first = true;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        std::string_view line;
        if (nl == std::string::npos) {
            line = std::string_view(text).substr(start);
            start = text.size() + 1;
        } else {
            line = std::string_view(text).substr(start, nl - start);
            start = nl + 1;
        }
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty() && start > text.size()) {
            break;  // trailing newline
        }
        auto fields = split(line, sep);
        if (first) {
            t.header_ = std::move(fields);
            first = false;
        } else {
            if (fields.size() != t.header_.size()) {
                throw DataError("row " + std::to_string(t.rows_.size() + 2) + " has " +
                                std::to_string(fields.size()) + " fields, header has " +
                                std::to_string(t.header_.size()));
            }
            t.rows_.push_back(std::move(fields));
        }
    }
    if (first) {
        throw DataError("empty input, expected a header row");
    }
    return t;
}

CsvTable CsvTable::read_file(const std::filesystem::path& path, char sep)
{
    try {
        return read_string(read_text_file(path), sep);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::size_t CsvTable::column(const std::string& name) const
{
    auto it = std::find(header_.begin(), header_.end(), name);
    if (it == header_.end()) {
        throw DataError("missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header_.begin());
}

bool CsvTable::has_column(const std::string& name) const
{
    return std::find(header_.begin(), header_.end(), name) != header_.end();
}

void CsvTable::add_row(std::vector<std::string> fields)
{
    if (fields.size() != header_.size()) {
        throw DataError("row width " + std::to_string(fields.size()) +
                        " does not match header width " + std::to_string(header_.size()));
    }
    rows_.push_back(std::move(fields));
}

std::string CsvTable::to_string() const
{
    std::string out = join(header_, sep_);
    out.push_back('\n');
    for (const auto& row : rows_) {
        out += join(row, sep_);
        out.push_back('\n');
    }
    return out;
}

void CsvTable::write_file(const std::filesystem::path& path) const
{
    write_text_file(path, to_string());
}

SchemaMap SchemaMap::from_json_text(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("schema map is not valid JSON: ") + e.what());
    }
    SchemaMap map;
    for (auto& [table, entry] : j.items()) {
        for (auto& [field, col] : entry.items()) {
            if (field == "_delimiter") {
                auto d = col.get<std::string>();
                if (d.size() != 1) {
                    throw ConfigError("delimiter for table '" + table + "' must be one character");
                }
                map.delimiters_[table] = d[0];
            } else {
                map.tables_[table][field] = col.get<std::string>();
            }
        }
    }
    return map;
}

SchemaMap SchemaMap::from_json_file(const std::filesystem::path& path)
{
    return from_json_text(read_text_file(path));
}

std::string SchemaMap::column_for(const std::string& table, const std::string& field) const
{
    auto t = tables_.find(table);
    if (t != tables_.end()) {
        auto f = t->second.find(field);
        if (f != t->second.end()) {
            return f->second;
        }
    }
    return field;
}

char SchemaMap::delimiter(const std::string& table) const
{
    auto it = delimiters_.find(table);
    return it == delimiters_.end() ? ',' : it->second;
}

}  // namespace panelclim
