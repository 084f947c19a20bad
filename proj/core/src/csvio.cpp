#include "cpd/csvio.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cpd {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double(const std::string& s, int line_no, const std::string& col) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("line " + std::to_string(line_no) + ": cannot parse '" + s +
                  "' in column " + col);
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp);
    out << contents;
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + path + " (" + ec.message() + ")");
}

void write_dataset_csv(const std::string& path, const TimeSeriesDataset& data) {
  std::ostringstream out;
  out << "t";
  for (int j = 0; j < data.dim(); ++j) out << ",x" << (j + 1);
  out << ",y";
  if (data.eta) out << ",eta";
  out << "\n";
  for (int t = 0; t < data.size(); ++t) {
    out << (t + 1);
    for (int j = 0; j < data.dim(); ++j) out << "," << format_double(data.x(t, j));
    out << "," << format_double(data.y(t));
    if (data.eta) out << "," << format_double((*data.eta)(t));
    out << "\n";
  }
  write_file_atomic(path, out.str());
}

TimeSeriesDataset read_dataset_csv(const std::string& path,
                                   const DatasetSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open input file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty input file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_line(line);

  auto column_index = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw ValidationError("column '" + name + "' not found in header");
    return static_cast<int>(it - header.begin());
  };

  const int target_idx = column_index(schema.target_column);
  const int eta_idx = schema.eta_column.empty() ? -1 : column_index(schema.eta_column);

  // feature columns: explicit old/new partition, or every leftover column
  std::vector<int> feature_idx;
  int old_count;
  if (!schema.old_columns.empty() || !schema.new_columns.empty()) {
    for (const auto& name : schema.old_columns) feature_idx.push_back(column_index(name));
    old_count = static_cast<int>(feature_idx.size());
    for (const auto& name : schema.new_columns) feature_idx.push_back(column_index(name));
    std::vector<int> sorted = feature_idx;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ValidationError("old/new feature partitions overlap");
  } else {
    for (int j = 0; j < static_cast<int>(header.size()); ++j) {
      if (j == target_idx || j == eta_idx || header[j] == "t") continue;
      feature_idx.push_back(j);
    }
    old_count = static_cast<int>(feature_idx.size());
  }
  if (feature_idx.empty()) throw ValidationError("no feature columns");

  std::vector<std::vector<double>> rows;
  std::vector<double> ys, etas;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != header.size())
      throw IoError("line " + std::to_string(line_no) + ": expected " +
                    std::to_string(header.size()) + " fields, got " +
                    std::to_string(fields.size()));
    std::vector<double> row;
    row.reserve(feature_idx.size());
    for (int j : feature_idx) {
      const double v = parse_double(fields[j], line_no, header[j]);
      if (!std::isfinite(v))
        throw ValidationError("line " + std::to_string(line_no) +
                              ": non-finite feature value in column " + header[j]);
      row.push_back(v);
    }
    rows.push_back(std::move(row));
    ys.push_back(parse_double(fields[target_idx], line_no, schema.target_column));
    if (eta_idx >= 0)
      etas.push_back(parse_double(fields[eta_idx], line_no, schema.eta_column));
  }
  if (rows.empty()) throw ValidationError("input file has no data rows");

  TimeSeriesDataset data;
  const int m = static_cast<int>(rows.size());
  const int p = static_cast<int>(feature_idx.size());
  data.x.resize(m, p);
  data.y.resize(m);
  for (int t = 0; t < m; ++t) {
    for (int j = 0; j < p; ++j) data.x(t, j) = rows[t][j];
    data.y(t) = ys[t];
  }
  if (eta_idx >= 0)
    data.eta = Eigen::Map<Eigen::VectorXd>(etas.data(), m);
  data.old_features = old_count;
  data.new_features = p - old_count;
  data.bound = schema.bound;
  data.validate();
  return data;
}

void write_timelines_csv(const std::string& path,
                         const std::vector<DetectionReport>& reports) {
  std::ostringstream out;
  out << "t,method,sq_error,smoothed\n";
  for (const auto& r : reports)
    for (std::size_t t = 0; t < r.errors.size(); ++t)
      out << (t + 1) << "," << r.method << "," << format_double(r.errors[t]) << ","
          << format_double(r.smoothed[t]) << "\n";
  write_file_atomic(path, out.str());
}

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows,
                     const std::string& raw_sidecar_path) {
  std::ostringstream out;
  out << "method,median_ms\n";
  for (const auto& r : rows)
    out << r.method << "," << format_double(r.median_ms) << "\n";
  write_file_atomic(path, out.str());
  if (!raw_sidecar_path.empty()) {
    std::ostringstream raw;
    raw << "method,rep,ms\n";
    for (const auto& r : rows)
      for (std::size_t i = 0; i < r.raw_ms.size(); ++i)
        raw << r.method << "," << (i + 1) << "," << format_double(r.raw_ms[i]) << "\n";
    write_file_atomic(raw_sidecar_path, raw.str());
  }
}

}  // namespace cpd
