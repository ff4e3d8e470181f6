#include "logz/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "logz/errors.hpp"

namespace logz {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(b, e - b + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string current;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
      current.push_back(c);
    } else if (c == ',' && !quoted) {
      cells.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  cells.push_back(trim(current));
  return cells;
}

}  // namespace

RegressionDataset parse_dataset(std::istream& in, const CsvDescriptor& format,
                                const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source_name + ": empty file, expected a header", 1, 0);
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_row(line);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < header.size(); ++j) index.emplace(header[j], j);

  auto column = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw ParseError(source_name + ": missing column '" + name + "'", 1, 0);
    return it->second;
  };
  const std::size_t response_col = column(format.response_column);
  std::vector<std::size_t> covariate_cols;
  for (const auto& name : format.covariate_columns) covariate_cols.push_back(column(name));

  std::vector<double> responses;
  std::vector<std::vector<double>> covariates;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_row(line);
    if (cells.size() != header.size()) {
      throw ParseError(source_name + ": row " + std::to_string(row) + " has " +
                           std::to_string(cells.size()) + " cells, header has " +
                           std::to_string(header.size()),
                       row, cells.size());
    }
    auto number = [&](std::size_t col) {
      const std::string& cell = cells[col];
      double v = 0.0;
      const auto* first = cell.data();
      const auto* last = cell.data() + cell.size();
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw ParseError(source_name + ": non-numeric cell '" + cell + "' at row " +
                             std::to_string(row) + ", column " + std::to_string(col + 1) + " (" +
                             header[col] + ")",
                         row, col + 1);
      }
      return v;
    };
    responses.push_back(number(response_col));
    std::vector<double> values;
    for (std::size_t col : covariate_cols) values.push_back(number(col));
    covariates.push_back(std::move(values));
  }

  const auto p = static_cast<Eigen::Index>(responses.size());
  const auto raw_q = static_cast<Eigen::Index>(covariate_cols.size());
  const Eigen::Index offset = format.intercept ? 1 : 0;
  RegressionDataset data;
  data.responses = Eigen::Map<const Vector>(responses.data(), p);
  data.covariates.resize(p, raw_q + offset);
  if (format.intercept) {
    data.covariates.col(0).setOnes();
    data.column_names.push_back("intercept");
  }
  for (Eigen::Index j = 0; j < raw_q; ++j) {
    Eigen::VectorXd col(p);
    for (Eigen::Index i = 0; i < p; ++i) col[i] = covariates[i][j];
    if (format.transform != ColumnTransform::kNone && p > 0) {
      col.array() -= col.mean();
      if (format.transform == ColumnTransform::kStandardize) {
        if (p < 2) throw ParseError(source_name + ": cannot standardize a single row", row, 0);
        const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(p - 1));
        if (!(sd > 0.0)) {
          throw ParseError(source_name + ": column '" + format.covariate_columns[j] +
                               "' is constant and cannot be standardized",
                           1, covariate_cols[j] + 1);
        }
        col /= sd;
      }
    }
    data.covariates.col(j + offset) = col;
    data.column_names.push_back(format.covariate_columns[j]);
  }
  return data;
}

RegressionDataset load_dataset(const std::filesystem::path& path, const CsvDescriptor& format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  return parse_dataset(in, format, path.string());
}

CsvDescriptor radiata_descriptor(int variant) {
  if (variant != 1 && variant != 2) throw ConfigError("radiata variant must be 1 or 2");
  CsvDescriptor d;
  d.response_column = "strength";
  d.covariate_columns = {variant == 1 ? "density" : "adjusted_density"};
  d.intercept = true;
  d.transform = ColumnTransform::kCenter;
  return d;
}

CsvDescriptor pima_descriptor(int variant) {
  if (variant != 1 && variant != 2) throw ConfigError("pima variant must be 1 or 2");
  CsvDescriptor d;
  d.response_column = "diabetes";
  d.covariate_columns = {"npreg", "glu", "bmi", "ped"};
  if (variant == 2) d.covariate_columns.push_back("age");
  d.intercept = true;
  d.transform = ColumnTransform::kStandardize;
  return d;
}

}  // namespace logz
