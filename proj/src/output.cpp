#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "hom/experiment.hpp"

namespace hom {

namespace {

std::string format_cell(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot write '" + path.string() + "'");
    out << text;
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

std::string to_csv(const Table& table) {
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out += ',';
        out += table.columns[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_cell(row[i]);
        }
        out += '\n';
    }
    return out;
}

std::string summary_json(const RunRecord& record, const ScenarioConfig& cfg) {
    nlohmann::json j;
    j["scenario"] = to_string(record.kind);
    j["version"] = record.version;
    j["seed"] = record.seed;
    j["config_hash"] = record.config_hash;
    j["config"] = nlohmann::json::parse(config_to_json(cfg));
    j["columns"] = record.table.columns;
    j["rows"] = record.table.rows.size();
    nlohmann::json summary = nlohmann::json::object();
    for (const auto& [k, v] : record.summary) summary[k] = number_or_null(v);
    j["summary"] = summary;
    if (record.fwhm_table) {
        nlohmann::json fw = nlohmann::json::array();
        const auto& t = *record.fwhm_table;
        for (const auto& row : t.rows) {
            nlohmann::json r;
            for (std::size_t i = 0; i < t.columns.size(); ++i) r[t.columns[i]] = number_or_null(row[i]);
            fw.push_back(r);
        }
        j["fwhm"] = fw;
    }
    double wall = 0.0;
    for (double w : record.wall_time_s) wall += w;
    j["wall_time_s"] = {{"total", wall}, {"per_row", record.wall_time_s}};
    return j.dump(2) + "\n";
}

std::string write_outputs(const RunRecord& record, const ScenarioConfig& cfg) {
    namespace fs = std::filesystem;
    const fs::path dir(cfg.output.dir.empty() ? "." : cfg.output.dir);
    fs::create_directories(dir);
    const std::string stem = cfg.output.stem.empty() ? to_string(record.kind) : cfg.output.stem;
    const fs::path csv = dir / (stem + ".csv");
    write_file(csv, to_csv(record.table));
    write_file(dir / (stem + ".json"), summary_json(record, cfg));
    if (record.fwhm_table) write_file(dir / (stem + "_fwhm.csv"), to_csv(*record.fwhm_table));
    return csv.string();
}

}  // namespace hom
