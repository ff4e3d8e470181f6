#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "logz/potential.hpp"

namespace logz {

enum class ColumnTransform { kNone, kCenter, kStandardize };

/// Which CSV columns feed a regression and how covariates are prepared.
/// The intercept column, when requested, is prepended and never transformed.
struct CsvDescriptor {
  std::string response_column;
  std::vector<std::string> covariate_columns;
  bool intercept = true;
  ColumnTransform transform = ColumnTransform::kNone;
};

/// Reads a comma-separated file with a header row. Throws ParseError with the
/// 1-based row/column of the offending cell.
RegressionDataset load_dataset(const std::filesystem::path& path, const CsvDescriptor& format);
RegressionDataset parse_dataset(std::istream& in, const CsvDescriptor& format,
                                const std::string& source_name = "<stream>");

/// Radiata pine: strength against density (M1) or resin-adjusted density
/// (M2), intercept plus centered covariate.
CsvDescriptor radiata_descriptor(int variant);

/// Pima: diabetes indicator against NP, PGC, BMI, DP (M1) plus AGE (M2),
/// intercept plus centered and standardized covariates.
CsvDescriptor pima_descriptor(int variant);

}  // namespace logz
