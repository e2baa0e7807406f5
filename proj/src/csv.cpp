// Copyright 2026 The nmqtraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nmqt/csv.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "nmqt/errors.hpp"

namespace nmqt {
namespace {

// 17 significant digits round-trip any double exactly.
std::string format_value(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void check_name(const std::string& name) {
  if (name.find_first_of(",\n\r\"") != std::string::npos) {
    throw ConfigError("observable name \"" + name + "\" is not CSV-safe");
  }
}

void check_stream(const std::ostream& os, const char* what) {
  if (!os.good()) throw IoError(std::string("failed while writing ") + what);
}

template <typename Fn>
void write_file(const std::string& path, Fn&& body) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  body(out);
  out.flush();
  if (!out.good()) throw IoError("failed while writing " + path);
}

}  // namespace

void emit_csv(const ObservableSeries& series, std::ostream& os) {
  os << "t";
  for (const auto& name : series.names) {
    check_name(name);
    os << ',' << name << ',' << name << "_se";
  }
  os << ",trace,trace_se,flagged_fraction\n";
  for (std::size_t j = 0; j < series.size(); ++j) {
    os << format_value(series.times[j]);
    for (std::size_t i = 0; i < series.names.size(); ++i) {
      os << ',' << format_value(series.estimates[i][j]) << ','
         << format_value(series.standard_errors[i][j]);
    }
    os << ',' << format_value(series.trace[j]) << ',' << format_value(series.trace_se[j]) << ','
       << format_value(series.flagged_fraction[j]) << '\n';
  }
  check_stream(os, "observable series");
}

void emit_csv(const ObservableSeries& series, const std::string& path) {
  write_file(path, [&](std::ostream& os) { emit_csv(series, os); });
}

void emit_rates_csv(const RateSchedule& rates, std::ostream& os, std::size_t stride) {
  if (stride == 0) throw ConfigError("rates export: stride must be >= 1");
  os << "t,re_f,im_f,gamma_plus,gamma_minus\n";
  for (std::size_t j = 0; j < rates.size(); j += stride) {
    os << format_value(rates.t[j]) << ',' << format_value(rates.f[j].real()) << ','
       << format_value(rates.f[j].imag()) << ',' << format_value(rates.gamma_plus[j]) << ','
       << format_value(rates.gamma_minus[j]) << '\n';
  }
  check_stream(os, "rate schedule");
}

void emit_rates_csv(const RateSchedule& rates, const std::string& path, std::size_t stride) {
  write_file(path, [&](std::ostream& os) { emit_rates_csv(rates, os, stride); });
}

void emit_compare_csv(const ObservableSeries& series, const ObservableSeries& reference,
                      std::ostream& os) {
  if (series.size() != reference.size() || series.names != reference.names) {
    throw ConfigError("comparison: the two series must share grid and observables");
  }
  os << "t";
  for (const auto& name : series.names) {
    check_name(name);
    os << ',' << name << ',' << name << "_se," << name << "_ref," << name << "_dev";
  }
  os << ",trace,trace_se,flagged_fraction\n";
  for (std::size_t j = 0; j < series.size(); ++j) {
    os << format_value(series.times[j]);
    for (std::size_t i = 0; i < series.names.size(); ++i) {
      const double value = series.estimates[i][j];
      const double ref = reference.estimates[i][j];
      os << ',' << format_value(value) << ',' << format_value(series.standard_errors[i][j]) << ','
         << format_value(ref) << ',' << format_value(value - ref);
    }
    os << ',' << format_value(series.trace[j]) << ',' << format_value(series.trace_se[j]) << ','
       << format_value(series.flagged_fraction[j]) << '\n';
  }
  check_stream(os, "comparison");
}

void emit_compare_csv(const ObservableSeries& series, const ObservableSeries& reference,
                      const std::string& path) {
  write_file(path, [&](std::ostream& os) { emit_compare_csv(series, reference, os); });
}

void emit_raw_means_csv(const ObservableSeries& series, std::ostream& os) {
  os << "t";
  for (const auto& name : series.names) {
    check_name(name);
    os << ',' << name << "_raw";
  }
  os << '\n';
  for (std::size_t j = 0; j < series.size(); ++j) {
    os << format_value(series.times[j]);
    for (std::size_t i = 0; i < series.names.size(); ++i) {
      os << ',' << format_value(series.raw_means[i][j]);
    }
    os << '\n';
  }
  check_stream(os, "raw means");
}

void emit_raw_means_csv(const ObservableSeries& series, const std::string& path) {
  write_file(path, [&](std::ostream& os) { emit_raw_means_csv(series, os); });
}

void emit_trajectory_csv(const ObservableSeries& series,
                         const std::vector<Eigen::MatrixXd>& records, std::ostream& os) {
  if (records.size() != series.names.size()) {
    throw ConfigError("trajectory export: records do not match the observable list");
  }
  os << "t";
  for (std::size_t i = 0; i < series.names.size(); ++i) {
    check_name(series.names[i]);
    for (Eigen::Index nu = 0; nu < records[i].rows(); ++nu) {
      os << ',' << series.names[i] << '_' << nu;
    }
  }
  os << '\n';
  for (std::size_t j = 0; j < series.size(); ++j) {
    os << format_value(series.times[j]);
    for (const auto& record : records) {
      if (static_cast<std::size_t>(record.cols()) != series.size()) {
        throw ConfigError("trajectory export: record grid does not match the series");
      }
      for (Eigen::Index nu = 0; nu < record.rows(); ++nu) {
        os << ',' << format_value(record(nu, static_cast<Eigen::Index>(j)));
      }
    }
    os << '\n';
  }
  check_stream(os, "trajectory records");
}

void emit_trajectory_csv(const ObservableSeries& series,
                         const std::vector<Eigen::MatrixXd>& records, const std::string& path) {
  write_file(path, [&](std::ostream& os) { emit_trajectory_csv(series, records, os); });
}

void emit_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
  os << "epsilon,integrated_abs_deviation,combined_se\n";
  for (const auto& row : rows) {
    os << format_value(row.epsilon) << ',' << format_value(row.integrated_abs_deviation) << ','
       << format_value(row.combined_se) << '\n';
  }
  check_stream(os, "sweep table");
}

void emit_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  write_file(path, [&](std::ostream& os) { emit_sweep_csv(rows, os); });
}

}  // namespace nmqt
