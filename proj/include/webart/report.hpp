#pragma once
// Turns a completed run directory into plots and one summary table. Reads
// the stable files the pipeline publishes; anything optional that is absent
// is skipped, anything required that is absent is named in the error.

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "webart/catalog.hpp"
#include "webart/common.hpp"
#include "webart/eval.hpp"
#include "webart/image_io.hpp"
#include "webart/mitigation.hpp"
#include "webart/plot.hpp"
#include "webart/serialize.hpp"

namespace webart {

struct ReportOutputs {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<std::vector<double>> score_map_grid(const std::vector<CellScore>& cells,
                                                       const PlacementGrid& grid) {
    std::vector<std::vector<double>> values(
        static_cast<std::size_t>(grid.rows),
        std::vector<double>(static_cast<std::size_t>(grid.cols), std::nan("")));
    for (const auto& cs : cells) {
        if (!cs.skipped) {
            values[static_cast<std::size_t>(cs.cell.row)][static_cast<std::size_t>(cs.cell.col)] =
                cs.score;
        }
    }
    return values;
}

}  // namespace detail

inline ReportOutputs write_reports(const std::filesystem::path& run_dir) {
    ReportOutputs out;
    const auto plots = run_dir / "plots";
    std::filesystem::create_directories(plots);
    auto emit = [&](const std::filesystem::path& p, const Image& img) {
        save_image(p, img);
        out.files.push_back(p);
    };

    const auto catalog_path = run_dir / "catalog_placed.json";
    if (!std::filesystem::exists(catalog_path)) {
        fail(ErrorKind::validation, "report: missing input " + catalog_path.string());
    }
    const ArtifactCatalog catalog = load_catalog(catalog_path);

    std::vector<std::string> csv_rows;  // section,name,metric,value
    csv_rows.push_back("section,name,metric,value");
    json summary = json::object();
    summary["target_class"] = catalog.target_class;
    summary["oracle_identity"] = catalog.oracle_identity;

    // Top impact score per category + placement heatmaps.
    {
        std::vector<std::string> labels;
        std::vector<double> scores;
        for (ArtifactCategory c : {ArtifactCategory::text, ArtifactCategory::graphics_text,
                                   ArtifactCategory::graphics_no_text}) {
            const auto& entries = catalog.category(c);
            if (entries.empty()) continue;
            labels.push_back(category_name(c));
            scores.push_back(entries.front().record.score);
            csv_rows.push_back(std::string("impact,") + category_name(c) + ",top_score," +
                               format_double(entries.front().record.score));
            if (entries.front().score_map) {
                emit(plots / (std::string("placement_") + category_name(c) + ".bmp"),
                     plot::heatmap(detail::score_map_grid(*entries.front().score_map, catalog.grid),
                                   std::string("placement ") + category_name(c)));
            }
        }
        if (!labels.empty()) {
            emit(plots / "category_impact.bmp", plot::bar_chart(labels, scores, "top impact score"));
        }
    }

    // ASR reports (strict vs naive + confidence deltas).
    const auto reports_dir = run_dir / "reports";
    json asr_summary = json::object();
    if (std::filesystem::exists(reports_dir)) {
        std::vector<std::string> tags;
        std::vector<double> strict, naive, deltas;
        std::vector<std::filesystem::path> report_files;
        for (const auto& entry : std::filesystem::directory_iterator(reports_dir)) {
            const std::string name = entry.path().filename().string();
            if (name.rfind("asr_", 0) == 0 && name != "asr_summary.json") {
                report_files.push_back(entry.path());
            }
        }
        std::sort(report_files.begin(), report_files.end());
        for (const auto& path : report_files) {
            const ASRReport report = parse_json_file(path).get<ASRReport>();
            std::string tag = path.stem().string().substr(4);
            tags.push_back(tag);
            strict.push_back(report.asr);
            naive.push_back(report.naive_asr);
            deltas.push_back(report.mean_confidence_delta);
            csv_rows.push_back("asr," + tag + ",strict," + format_double(report.asr));
            csv_rows.push_back("asr," + tag + ",naive," + format_double(report.naive_asr));
            csv_rows.push_back("asr," + tag + ",n_retained," + std::to_string(report.n_retained));
            csv_rows.push_back("asr," + tag + ",n_total," + std::to_string(report.n_total));
            csv_rows.push_back("confidence_delta," + tag + ",mean," +
                               format_double(report.mean_confidence_delta));
            asr_summary[tag] = json{{"asr", report.asr},
                                    {"naive_asr", report.naive_asr},
                                    {"n_retained", report.n_retained},
                                    {"n_total", report.n_total},
                                    {"mean_confidence_delta", report.mean_confidence_delta}};
        }
        if (!tags.empty()) {
            emit(plots / "category_asr.bmp", plot::bar_chart(tags, strict, "strict ASR"));
            emit(plots / "category_asr_naive.bmp", plot::bar_chart(tags, naive, "naive ASR"));
            emit(plots / "confidence_delta.bmp",
                 plot::bar_chart(tags, deltas, "mean confidence delta"));
        }

        // Sweep line plots.
        for (const auto& entry : std::filesystem::directory_iterator(reports_dir)) {
            const std::string name = entry.path().filename().string();
            if (name.rfind("sweep_", 0) != 0) continue;
            const SweepTable table = parse_json_file(entry.path()).get<SweepTable>();
            if (table.rows.empty()) {
                out.warnings.push_back("sweep table " + name + " is empty; plot skipped");
                continue;
            }
            plot::Series series;
            series.name = table.metric_name;
            for (const auto& row : table.rows) {
                series.x.push_back(row.value);
                series.y.push_back(row.metric);
                csv_rows.push_back("sweep_" + table.axis + "," + format_double(row.value) + "," +
                                   table.metric_name + "," + format_double(row.metric));
            }
            emit(plots / ("sweep_" + table.axis + ".bmp"),
                 plot::line_plot({series}, "sweep " + table.axis, table.axis, table.metric_name));
        }

        // Mitigation pair.
        const auto mitigation_path = reports_dir / "mitigation.json";
        if (std::filesystem::exists(mitigation_path)) {
            const MitigationReport mr = parse_json_file(mitigation_path).get<MitigationReport>();
            emit(plots / "mitigation.bmp",
                 plot::bar_chart({"undefended", "defended"}, {mr.undefended.asr, mr.defended.asr},
                                 "artifact-aware prompting"));
            csv_rows.push_back("mitigation,undefended,strict," + format_double(mr.undefended.asr));
            csv_rows.push_back("mitigation,defended,strict," + format_double(mr.defended.asr));
            csv_rows.push_back("mitigation,reduction,absolute," +
                               format_double(mr.absolute_reduction));
            csv_rows.push_back("mitigation,reduction,relative," +
                               format_double(mr.relative_reduction));
            summary["mitigation"] = json{{"undefended_asr", mr.undefended.asr},
                                         {"defended_asr", mr.defended.asr},
                                         {"absolute_reduction", mr.absolute_reduction},
                                         {"relative_reduction", mr.relative_reduction}};
        }
    }
    summary["asr"] = asr_summary;

    // Transfer matrix if the transfer command left one here.
    const auto transfer_path = run_dir / "transfer.json";
    if (std::filesystem::exists(transfer_path)) {
        const TransferMatrix matrix = parse_json_file(transfer_path).get<TransferMatrix>();
        for (const auto& [cat, grid] : matrix.cells) {
            emit(plots / ("transfer_" + cat + ".bmp"),
                 plot::heatmap(grid, "transfer " + cat, matrix.source_identities,
                               matrix.eval_identities));
            for (std::size_t i = 0; i < grid.size(); ++i) {
                for (std::size_t jx = 0; jx < grid[i].size(); ++jx) {
                    csv_rows.push_back("transfer_" + cat + "," + matrix.source_identities[i] +
                                       ">" + matrix.eval_identities[jx] + ",mean_asr," +
                                       format_double(grid[i][jx]));
                }
            }
        }
    }

    // Single summary table.
    const auto csv_path = run_dir / "summary.csv";
    std::string csv;
    for (const auto& row : csv_rows) csv += row + "\n";
    write_file_bytes(csv_path, csv);
    out.files.push_back(csv_path);
    const auto summary_path = run_dir / "summary.json";
    write_json_file(summary_path, summary);
    out.files.push_back(summary_path);
    return out;
}

}  // namespace webart
