#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace panelclim {

// Delimited text with one header row. No quoting; list-valued fields use '|'
// internally, so the delimiter never appears inside a field.
class CsvTable {
  public:
    CsvTable() = default;
    CsvTable(std::vector<std::string> header, char sep = ',');

    static CsvTable read_file(const std::filesystem::path& path, char sep = ',');
    static CsvTable read_string(const std::string& text, char sep = ',');

    const std::vector<std::string>& header() const { return header_; }
    std::size_t rows() const { return rows_.size(); }
    const std::vector<std::string>& row(std::size_t i) const { return rows_[i]; }

    // Column index for a header name; throws DataError when absent.
    std::size_t column(const std::string& name) const;
    bool has_column(const std::string& name) const;

    const std::string& cell(std::size_t row, std::size_t col) const { return rows_[row][col]; }

    void add_row(std::vector<std::string> fields);

    std::string to_string() const;
    void write_file(const std::filesystem::path& path) const;

  private:
    char sep_ = ',';
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// Binds engine field names to input column headers, per input table.
// Identity when a field has no entry.
class SchemaMap {
  public:
    SchemaMap() = default;

    static SchemaMap from_json_file(const std::filesystem::path& path);
    static SchemaMap from_json_text(const std::string& text);

    std::string column_for(const std::string& table, const std::string& field) const;
    char delimiter(const std::string& table) const;

  private:
    std::map<std::string, std::map<std::string, std::string>> tables_;
    std::map<std::string, char> delimiters_;
};

}  // namespace panelclim
