#include "emit.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "ptspectra/version.hpp"

namespace ptcli {

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

namespace {

bool needs_quoting(const std::string& field) {
    return field.find_first_of(",\"\n\r") != std::string::npos;
}

std::string quote_field(const std::string& field) {
    if (!needs_quoting(field)) {
        return field;
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out += c;
        }
    }
    out += '"';
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) {
        throw std::invalid_argument("parse_csv: unterminated quoted field");
    }
    fields.push_back(cur);
    return fields;
}

std::string join_csv_line(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) {
            out += ',';
        }
        out += quote_field(fields[i]);
    }
    return out;
}

nlohmann::ordered_json complex_json(const ptspectra::Complex& v) {
    return nlohmann::ordered_json::array({v.real(), v.imag()});
}

nlohmann::ordered_json radius_json(double radius) {
    if (std::isinf(radius)) {
        return "inf";
    }
    return radius;
}

std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

std::string trunc_spec_string(const std::vector<std::size_t>& trunc) {
    if (trunc.empty()) {
        return "2";
    }
    std::string out;
    for (std::size_t i = 0; i < trunc.size(); ++i) {
        if (i > 0) {
            out += 'x';
        }
        out += std::to_string(trunc[i]);
    }
    return out;
}

} // namespace

std::string serialize_csv(const CsvTable& table) {
    std::string out;
    for (const std::string& c : table.comments) {
        out += "# " + c + "\n";
    }
    out += join_csv_line(table.columns) + "\n";
    for (const auto& row : table.rows) {
        out += join_csv_line(row) + "\n";
    }
    return out;
}

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::size_t pos = 0;
    bool have_columns = false;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) {
            end = text.size();
        }
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (line[0] == '#') {
            std::size_t start = 1;
            if (start < line.size() && line[start] == ' ') {
                ++start;
            }
            table.comments.push_back(line.substr(start));
            continue;
        }
        if (!have_columns) {
            table.columns = split_csv_line(line);
            have_columns = true;
        } else {
            table.rows.push_back(split_csv_line(line));
        }
    }
    if (!have_columns) {
        throw std::invalid_argument("parse_csv: no header row");
    }
    return table;
}

std::vector<std::string> header_comments(const HeaderItems& items) {
    std::vector<std::string> out;
    out.push_back(std::string("pt-spectra ") + ptspectra::version_string);
    for (const auto& [k, v] : items) {
        out.push_back(k + "=" + v);
    }
    return out;
}

nlohmann::ordered_json meta_object(const HeaderItems& items) {
    nlohmann::ordered_json meta;
    meta["version"] = ptspectra::version_string;
    nlohmann::ordered_json config;
    for (const auto& [k, v] : items) {
        config[k] = v;
    }
    meta["config"] = config;
    return meta;
}

std::string trajectories_csv(const ptspectra::ScanResult& result, const HeaderItems& items,
                             const std::string& trunc_str) {
    CsvTable table;
    table.comments = header_comments(items);
    if (result.resonance_warning) {
        table.comments.push_back(
            "warning=near-resonant frequency ratio; unperturbed levels may be degenerate");
    }
    table.columns = {"label", "eps", "re_lambda", "im_lambda", "residual", "real_flag", "trunc"};
    for (const auto& tr : result.trajectories) {
        for (const auto& p : tr.points) {
            table.rows.push_back({tr.label, format_double(p.eps), format_double(p.lambda.real()),
                                  format_double(p.lambda.imag()), format_double(p.residual),
                                  p.real_flag ? "1" : "0", trunc_str});
        }
    }
    return serialize_csv(table);
}

std::string trajectories_json(const ptspectra::ScanResult& result, const HeaderItems& items,
                              const std::string& trunc_str) {
    nlohmann::ordered_json j;
    j["meta"] = meta_object(items);
    j["trunc"] = trunc_str;
    if (result.resonance_warning) {
        j["resonance_warning"] = true;
    }
    nlohmann::ordered_json trajectories = nlohmann::ordered_json::array();
    for (const auto& tr : result.trajectories) {
        nlohmann::ordered_json points = nlohmann::ordered_json::array();
        for (const auto& p : tr.points) {
            nlohmann::ordered_json point;
            point["eps"] = p.eps;
            point["lambda"] = complex_json(p.lambda);
            point["residual"] = p.residual;
            point["real"] = p.real_flag;
            points.push_back(std::move(point));
        }
        nlohmann::ordered_json entry;
        entry["label"] = tr.label;
        entry["points"] = std::move(points);
        trajectories.push_back(std::move(entry));
    }
    j["trajectories"] = std::move(trajectories);
    return dump(j);
}

std::string threshold_json(const ptspectra::ThresholdReport& report, const HeaderItems& items) {
    nlohmann::ordered_json j;
    j["meta"] = meta_object(items);
    j["pair"] = nlohmann::ordered_json::array({report.label_a, report.label_b});
    j["eps_star"] = report.eps_star;
    j["uncertainty"] = report.uncertainty;
    j["side"] = report.side;
    nlohmann::ordered_json evidence;
    evidence["min_gap"] = report.min_gap;
    evidence["max_im_beyond"] = report.max_im_beyond;
    evidence["truncations_agree"] = report.truncations_agree;
    j["evidence"] = std::move(evidence);
    return dump(j);
}

std::string convergence_json(const ptspectra::ConvergenceTable& table, const HeaderItems& items) {
    nlohmann::ordered_json j;
    j["meta"] = meta_object(items);
    nlohmann::ordered_json sizes = nlohmann::ordered_json::array();
    for (const auto& s : table.sizes) {
        sizes.push_back(trunc_spec_string(s));
    }
    j["sizes"] = std::move(sizes);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : table.rows) {
        nlohmann::ordered_json row;
        row["label"] = r.label;
        nlohmann::ordered_json values = nlohmann::ordered_json::array();
        for (const auto& v : r.values) {
            values.push_back(complex_json(v));
        }
        row["values"] = std::move(values);
        row["diffs"] = r.diffs;
        row["diffs_decreasing"] = r.diffs_decreasing;
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    return dump(j);
}

std::string convergence_csv(const ptspectra::ConvergenceTable& table, const HeaderItems& items) {
    CsvTable csv;
    csv.comments = header_comments(items);
    csv.columns = {"label", "trunc", "re_lambda", "im_lambda", "diff"};
    for (const auto& r : table.rows) {
        for (std::size_t s = 0; s < r.values.size(); ++s) {
            csv.rows.push_back({r.label, trunc_spec_string(table.sizes[s]),
                                format_double(r.values[s].real()),
                                format_double(r.values[s].imag()),
                                s == 0 ? "" : format_double(r.diffs[s - 1])});
        }
    }
    return serialize_csv(csv);
}

std::string rspe_json(const std::vector<ptspectra::RspeSeries>& series, const HeaderItems& items) {
    nlohmann::ordered_json j;
    j["meta"] = meta_object(items);
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& s : series) {
        nlohmann::ordered_json entry;
        entry["label"] = s.label;
        nlohmann::ordered_json coeffs = nlohmann::ordered_json::array();
        for (const auto& c : s.coefficients) {
            coeffs.push_back(complex_json(c));
        }
        entry["coefficients"] = std::move(coeffs);
        entry["radius_estimate"] = radius_json(s.radius_estimate);
        list.push_back(std::move(entry));
    }
    j["series"] = std::move(list);
    return dump(j);
}

std::string rspe_csv(const std::vector<ptspectra::RspeSeries>& series, const HeaderItems& items) {
    CsvTable csv;
    csv.comments = header_comments(items);
    csv.columns = {"label", "order", "re_c", "im_c", "radius_estimate"};
    for (const auto& s : series) {
        const std::string radius =
            std::isinf(s.radius_estimate) ? "inf" : format_double(s.radius_estimate);
        for (std::size_t k = 0; k < s.coefficients.size(); ++k) {
            csv.rows.push_back({s.label, std::to_string(k), format_double(s.coefficients[k].real()),
                                format_double(s.coefficients[k].imag()), radius});
        }
    }
    return serialize_csv(csv);
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::fwrite(content.data(), 1, content.size(), stdout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::invalid_argument("cannot open output file '" + path + "'");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw std::invalid_argument("failed writing output file '" + path + "'");
    }
}

} // namespace ptcli
