#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "effifit/errors.hpp"
#include "effifit/fitters.hpp"
#include "effifit/geometry.hpp"
#include "effifit/kcr.hpp"
#include "effifit/mc.hpp"

namespace effifit {

/// Full round-trip precision (17 significant digits).
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void write_points_csv(std::ostream& os,
                             const std::vector<Point2>& points) {
  os << "x,y\n";
  for (const Point2& p : points) {
    os << format_double(p.x) << ',' << format_double(p.y) << '\n';
  }
}

inline void write_points_csv(const std::string& path,
                             const std::vector<Point2>& points) {
  std::ofstream os(path);
  if (!os) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  write_points_csv(os, points);
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return fields;
}

inline double parse_double_field(const std::string& s, int line_no) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw IoError("line " + std::to_string(line_no) +
                  ": expected a number, got '" + s + "'");
  }
  if (pos != s.size()) {
    throw IoError("line " + std::to_string(line_no) +
                  ": trailing characters in '" + s + "'");
  }
  return v;
}

}  // namespace detail

/// Parse a point list; header must be `x,y`. Errors carry the 1-based line
/// number of the offending row.
inline std::vector<Point2> read_points_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) {
    throw IoError("line 1: empty input, expected header 'x,y'");
  }
  auto header = detail::split_csv_line(line);
  if (header.size() != 2 || header[0] != "x" || header[1] != "y") {
    throw IoError("line 1: expected header 'x,y'");
  }
  std::vector<Point2> points;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 2) {
      throw IoError("line " + std::to_string(line_no) +
                    ": expected 2 fields, got " +
                    std::to_string(fields.size()));
    }
    Point2 p{detail::parse_double_field(fields[0], line_no),
             detail::parse_double_field(fields[1], line_no)};
    if (!is_finite(p)) {
      throw IoError("line " + std::to_string(line_no) + ": non-finite value");
    }
    points.push_back(p);
  }
  return points;
}

inline std::vector<Point2> read_points_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw IoError("cannot open '" + path + "'");
  }
  return read_points_csv(is);
}

inline nlohmann::json to_json(const FitReport& rep) {
  nlohmann::json j;
  j["method"] = to_string(rep.method);
  j["A"] = rep.params.A;
  j["B"] = rep.params.B;
  j["C"] = rep.params.C;
  j["D"] = rep.params.D;
  if (const auto c = rep.circle()) {
    j["a"] = c->a;
    j["b"] = c->b;
    j["R"] = c->R;
  } else {
    j["a"] = nullptr;
    j["b"] = nullptr;
    j["R"] = nullptr;
  }
  j["objective"] = rep.objective;
  j["iterations"] = rep.iterations;
  j["converged"] = rep.converged;
  return j;
}

namespace detail {

inline nlohmann::json matrix_row_major(const Eigen::Matrix3d& M) {
  nlohmann::json arr = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      arr.push_back(M(r, c));
    }
  }
  return arr;
}

}  // namespace detail

inline nlohmann::json to_json(const BoundMatrices& b) {
  nlohmann::json j;
  j["parameter_order"] = {"a", "b", "R"};
  j["d_min"] = detail::matrix_row_major(b.d_min);
  if (b.d2) {
    j["d2"] = detail::matrix_row_major(*b.d2);
  } else {
    j["d2"] = nullptr;
  }
  j["sigma"] = b.sigma;
  j["c_min"] = detail::matrix_row_major(b.c_min());
  return j;
}

inline std::string to_csv(const EfficiencyReport& rep) {
  std::ostringstream os;
  os << "method,E,mse_center,bound,failures,trials_used,suspicious\n";
  for (const MethodEfficiency& m : rep.methods) {
    os << to_string(m.method) << ',' << format_double(m.efficiency) << ','
       << format_double(m.mse) << ',' << format_double(m.bound) << ','
       << m.failures << ',' << m.trials_used << ','
       << (m.suspicious ? 1 : 0) << '\n';
  }
  return os.str();
}

inline nlohmann::json to_json(const EfficiencyReport& rep) {
  nlohmann::json j;
  j["sigma"] = rep.sigma;
  j["arc_deg"] = rep.arc_deg;
  j["trials"] = rep.trials;
  j["target"] =
      rep.target == EfficiencyTarget::Center ? "center" : "A";
  j["methods"] = nlohmann::json::array();
  for (const MethodEfficiency& m : rep.methods) {
    j["methods"].push_back({{"method", to_string(m.method)},
                            {"E", m.efficiency},
                            {"mse", m.mse},
                            {"bound", m.bound},
                            {"failures", m.failures},
                            {"trials_used", m.trials_used},
                            {"suspicious", m.suspicious}});
  }
  return j;
}

inline std::string to_csv(const EfficiencyGrid& grid) {
  std::ostringstream os;
  os << "arc_deg,c,method,E,failures\n";
  for (std::size_t i = 0; i < grid.arc_deg.size(); ++i) {
    for (std::size_t j = 0; j < grid.c_values.size(); ++j) {
      for (std::size_t m = 0; m < grid.methods.size(); ++m) {
        os << format_double(grid.arc_deg[i]) << ','
           << format_double(grid.c_values[j]) << ','
           << to_string(grid.methods[m]) << ','
           << format_double(grid.efficiency[m](static_cast<int>(i),
                                               static_cast<int>(j)))
           << ',' << grid.failures[m](static_cast<int>(i), static_cast<int>(j))
           << '\n';
      }
    }
  }
  return os.str();
}

/// Generic CSV reader (header + string cells); lets outputs be re-read and
/// checked without a dedicated schema per file.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    auto fields = detail::split_csv_line(line);
    if (line_no == 1) {
      t.header = std::move(fields);
    } else {
      if (fields.size() != t.header.size()) {
        throw IoError("line " + std::to_string(line_no) +
                      ": field count differs from header");
      }
      t.rows.push_back(std::move(fields));
    }
  }
  if (t.header.empty()) {
    throw IoError("line 1: empty CSV");
  }
  return t;
}

}  // namespace effifit
