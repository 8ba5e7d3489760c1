// File plumbing shared by the command layer: text files, a minimal CSV
// reader/writer, and schema-tagged JSON artifacts.
#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace fluxmol {

// Every JSON artifact the tool emits carries this tag; readers reject
// anything else.
inline constexpr const char* artifact_schema = "fluxmol/v1";

// Shortest-ish fixed formatting (%.12g) so repeated runs produce
// byte-identical files.
std::string format_compact(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Comma-separated cells, no quoting (none of our columns ever contain a
// comma), blank lines skipped, first row is the header.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column index by header name, -1 when absent.
    int column(const std::string& name) const;
    std::string to_text() const;
};

CsvTable parse_csv(const std::string& text);

nlohmann::json read_json_file(const std::string& path);

// Artifact wrappers: write stamps the schema tag, read enforces it.
nlohmann::json read_artifact(const std::string& path);
void write_artifact(const std::string& path, nlohmann::json j);

}  // namespace fluxmol
