#pragma once

#include "rulehaz/dataset.hpp"
#include "rulehaz/hte.hpp"

#include <istream>
#include <span>
#include <string>
#include <vector>

namespace rulehaz {

/// Comma-separated numeric table with a header row.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// Throws DataError on ragged rows, empty cells, or non-numeric values.
CsvTable read_csv(std::istream& in, const std::string& source = "input");
CsvTable read_csv_file(const std::string& path);

/// Columns time, event and treatment are required; every other column is a covariate.
SurvivalDataset survival_from_table(const CsvTable& table);

/// Covariates only, arranged in the order of `feature_names`. Outcome columns
/// (time, event, treatment) are ignored if present. Missing or unexpected
/// columns raise a DataError that lists both.
SurvivalDataset covariates_from_table(const CsvTable& table, std::span<const std::string> feature_names);

std::string dataset_csv(const SurvivalDataset& data);

/// id, S1, S0, hte, extrapolated, then the covariates (input order preserved).
std::string predictions_csv(const std::vector<HtePrediction>& predictions, const SurvivalDataset& data);

} // namespace rulehaz
