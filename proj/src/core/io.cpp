#include "core/io.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "core/errors.h"

namespace fluxmol {

std::string format_compact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_failure("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw io_failure("read error on " + path);
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_failure("cannot write " + path);
    out << content;
    out.flush();
    if (!out) throw io_failure("write error on " + path);
}

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> cells;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return cells;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

std::string CsvTable::to_text() const {
    std::ostringstream out;
    for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    return out.str();
}

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto cells = split_cells(line);
        if (!have_header) {
            table.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != table.header.size())
            throw invalid_input("csv row with " + std::to_string(cells.size()) +
                                " cells under a " + std::to_string(table.header.size()) +
                                " column header");
        table.rows.push_back(std::move(cells));
    }
    if (!have_header) throw invalid_input("empty csv input");
    return table;
}

nlohmann::json read_json_file(const std::string& path) {
    std::string text = read_text_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw invalid_input(path + ": " + e.what());
    }
}

nlohmann::json read_artifact(const std::string& path) {
    nlohmann::json j = read_json_file(path);
    if (!j.is_object() || j.value("schema", std::string{}) != artifact_schema)
        throw invalid_input(path + ": missing or unsupported schema tag (want " +
                            std::string(artifact_schema) + ")");
    return j;
}

void write_artifact(const std::string& path, nlohmann::json j) {
    j["schema"] = artifact_schema;
    write_text_file(path, j.dump(2) + "\n");
}

}  // namespace fluxmol
