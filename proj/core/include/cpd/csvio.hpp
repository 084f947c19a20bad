#pragma once

#include <string>
#include <vector>

#include "cpd/dataset.hpp"
#include "cpd/harness.hpp"

namespace cpd {

// Pinned CSV dialect: UTF-8, comma separators, mandatory header row,
// '.' decimal, numerics unquoted, doubles printed with %.17g so values
// round-trip bit-exactly.

// Maps CSV columns onto a dataset.  Empty old/new lists mean "every
// feature column is old".
struct DatasetSchema {
  std::string target_column = "y";
  std::string eta_column;  // empty = none
  std::vector<std::string> old_columns;
  std::vector<std::string> new_columns;
  double bound = 1.0;
};

// Header: t,x1..xn,y[,eta].  Old columns precede new columns.
void write_dataset_csv(const std::string& path, const TimeSeriesDataset& data);

TimeSeriesDataset read_dataset_csv(const std::string& path,
                                   const DatasetSchema& schema);

// Tidy per-point timelines: t,method,sq_error,smoothed.
void write_timelines_csv(const std::string& path,
                         const std::vector<DetectionReport>& reports);

// method,median_ms table plus an optional raw-timings sidecar
// (method,rep,ms).
void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows,
                     const std::string& raw_sidecar_path = "");

// Writes text through a temp file + rename so outputs appear atomically.
void write_file_atomic(const std::string& path, const std::string& contents);

std::string format_double(double v);

}  // namespace cpd
