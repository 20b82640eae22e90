#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ptspectra/rspe.hpp"
#include "ptspectra/scan.hpp"

namespace ptcli {

using HeaderItems = std::vector<std::pair<std::string, std::string>>;

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double x);

// RFC-4180 style table with leading '#' comment lines. Serialization quotes
// a field only when it contains a comma, quote, or newline, so
// parse -> serialize is byte-identical for files this tool wrote.
struct CsvTable {
    std::vector<std::string> comments; // without the leading "# "
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

std::string serialize_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);

// Comment header lines shared by every output file: tool version plus the
// resolved configuration as key=value pairs.
std::vector<std::string> header_comments(const HeaderItems& items);
nlohmann::ordered_json meta_object(const HeaderItems& items);

// Trajectory emission. CSV columns: label,eps,re_lambda,im_lambda,residual,
// real_flag,trunc (real_flag as 0/1, trunc as the resolved truncation
// string). Rows ordered by (trajectory order, eps ascending).
std::string trajectories_csv(const ptspectra::ScanResult& result, const HeaderItems& items,
                             const std::string& trunc_str);
std::string trajectories_json(const ptspectra::ScanResult& result, const HeaderItems& items,
                              const std::string& trunc_str);

std::string threshold_json(const ptspectra::ThresholdReport& report, const HeaderItems& items);

std::string convergence_json(const ptspectra::ConvergenceTable& table, const HeaderItems& items);
std::string convergence_csv(const ptspectra::ConvergenceTable& table, const HeaderItems& items);

std::string rspe_json(const std::vector<ptspectra::RspeSeries>& series, const HeaderItems& items);
std::string rspe_csv(const std::vector<ptspectra::RspeSeries>& series, const HeaderItems& items);

// Write to the path, or to stdout when the path is empty.
void write_output(const std::string& path, const std::string& content);

} // namespace ptcli
