#include "rulehaz/csv.hpp"

#include "rulehaz/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>

namespace rulehaz {

namespace {

std::string trim(std::string s) {
    const auto issp = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && issp(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && issp(static_cast<unsigned char>(s[b]))) ++b;
    s.erase(0, b);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_number(const std::string& cell, const std::string& where) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (cell.empty() || ec != std::errc() || ptr != last) {
        throw DataError("non-numeric value '" + cell + "' at " + where);
    }
    return v;
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
    return out;
}

bool is_outcome(const std::string& name) { return name == "time" || name == "event" || name == "treatment"; }

} // namespace

CsvTable read_csv(std::istream& in, const std::string& source) {
    CsvTable t;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        auto cells = split(line);
        if (!have_header) {
            t.header = std::move(cells);
            std::set<std::string> seen;
            for (const auto& h : t.header) {
                if (h.empty()) throw DataError(source + ": empty column name in header");
                if (!seen.insert(h).second) throw DataError(source + ": duplicate column '" + h + "'");
            }
            have_header = true;
            continue;
        }
        if (cells.size() != t.header.size()) {
            throw DataError(fmt::format("{}: line {} has {} fields, header has {}", source, line_no, cells.size(),
                                        t.header.size()));
        }
        std::vector<double> row(cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j) {
            row[j] = parse_number(cells[j], fmt::format("{} line {} column '{}'", source, line_no, t.header[j]));
        }
        t.rows.push_back(std::move(row));
    }
    if (!have_header) throw DataError(source + ": missing header row");
    return t;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return read_csv(in, path);
}

SurvivalDataset survival_from_table(const CsvTable& table) {
    auto col = [&](const char* name) -> std::size_t {
        const auto it = std::find(table.header.begin(), table.header.end(), name);
        if (it == table.header.end()) throw DataError(std::string("required column '") + name + "' is missing");
        return static_cast<std::size_t>(it - table.header.begin());
    };
    const std::size_t ct = col("time"), ce = col("event"), cz = col("treatment");
    std::vector<std::size_t> cov;
    std::vector<std::string> names;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (j != ct && j != ce && j != cz) {
            cov.push_back(j);
            names.push_back(table.header[j]);
        }
    }
    const std::size_t n = table.rows.size();
    std::vector<double> times(n);
    std::vector<int> events(n), treatments(n);
    CovariateMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cov.size()));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = table.rows[i];
        times[i] = r[ct];
        const auto flag = [&](double v, const char* what) {
            if (v != 0.0 && v != 1.0) {
                throw DataError(fmt::format("row {}: {} must be 0 or 1, got {}", i + 1, what, v));
            }
            return static_cast<int>(v);
        };
        events[i] = flag(r[ce], "event");
        treatments[i] = flag(r[cz], "treatment");
        for (std::size_t j = 0; j < cov.size(); ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r[cov[j]];
        }
    }
    return make_dataset(std::move(times), std::move(events), std::move(treatments), std::move(x), std::move(names));
}

SurvivalDataset covariates_from_table(const CsvTable& table, std::span<const std::string> feature_names) {
    std::vector<std::string> missing, extra;
    std::vector<std::size_t> source(feature_names.size());
    for (std::size_t j = 0; j < feature_names.size(); ++j) {
        const auto it = std::find(table.header.begin(), table.header.end(), feature_names[j]);
        if (it == table.header.end()) {
            missing.push_back(feature_names[j]);
        } else {
            source[j] = static_cast<std::size_t>(it - table.header.begin());
        }
    }
    for (const auto& h : table.header) {
        if (!is_outcome(h) && std::find(feature_names.begin(), feature_names.end(), h) == feature_names.end()) {
            extra.push_back(h);
        }
    }
    if (!missing.empty() || !extra.empty()) {
        std::string msg = "covariate columns do not match the model";
        if (!missing.empty()) msg += "; missing: " + join(missing);
        if (!extra.empty()) msg += "; extra: " + join(extra);
        throw DataError(msg);
    }
    SurvivalDataset d;
    const std::size_t n = table.rows.size();
    d.covariates.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(feature_names.size()));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < feature_names.size(); ++j) {
            d.covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = table.rows[i][source[j]];
        }
    }
    d.feature_names.assign(feature_names.begin(), feature_names.end());
    for (std::size_t j = 0; j < feature_names.size(); ++j) {
        std::vector<double> column(n);
        for (std::size_t i = 0; i < n; ++i) column[i] = table.rows[i][source[j]];
        d.feature_kinds.push_back(infer_feature_kind(column));
    }
    d.validate(false);
    return d;
}

std::string dataset_csv(const SurvivalDataset& data) {
    std::string out = "time,event,treatment";
    for (const auto& n : data.feature_names) out += "," + n;
    out += "\n";
    for (std::size_t i = 0; i < data.rows(); ++i) {
        out += fmt::format("{},{},{}", data.times[i], data.events[i], data.treatments[i]);
        for (double v : data.row(i)) out += fmt::format(",{}", v);
        out += "\n";
    }
    return out;
}

std::string predictions_csv(const std::vector<HtePrediction>& predictions, const SurvivalDataset& data) {
    if (predictions.size() != data.rows()) throw DimensionError("one prediction per row is required");
    std::string out = "id,S1,S0,hte,extrapolated";
    for (const auto& n : data.feature_names) out += "," + n;
    out += "\n";
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const auto& p = predictions[i];
        out += fmt::format("{},{},{},{},{}", i + 1, p.survival_treated, p.survival_control, p.hte,
                           p.extrapolated ? 1 : 0);
        for (double v : data.row(i)) out += fmt::format(",{}", v);
        out += "\n";
    }
    return out;
}

} // namespace rulehaz
