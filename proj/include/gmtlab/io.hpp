#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gmtlab/elliptic.hpp"
#include "gmtlab/error.hpp"
#include "gmtlab/measure.hpp"
#include "gmtlab/polynomial.hpp"

namespace gmtlab {

/// Shortest text that reads back to the same double (17 significant digits).
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------- polynomials

inline nlohmann::json polynomial_to_json(const Polynomial& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [m, c] : p.terms()) {
    std::vector<int> alpha;
    for (int i = 0; i < p.dim(); ++i) alpha.push_back(m[i]);
    terms.push_back({{"alpha", alpha}, {"c", c}});
  }
  return {{"dim", p.dim()}, {"terms", terms}};
}

inline Polynomial polynomial_from_json(const nlohmann::json& j) {
  try {
    const int dim = j.at("dim").get<int>();
    Polynomial p(dim);
    for (const auto& t : j.at("terms")) {
      const auto alpha = t.at("alpha").get<std::vector<int>>();
      require(static_cast<int>(alpha.size()) == dim, "polynomial JSON: alpha length must equal dim");
      p.add_term(MultiIndex::from_range(alpha), t.at("c").get<double>());
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("polynomial JSON: ") + e.what());
  }
}

// ------------------------------------------------------------------- matrices

/// Row-major nested array.
inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r;
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  try {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    require(!rows.empty(), "matrix JSON: empty matrix");
    Eigen::MatrixXd m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      require(rows[i].size() == rows[0].size(), "matrix JSON: ragged rows");
      for (std::size_t k = 0; k < rows[i].size(); ++k) m(i, k) = rows[i][k];
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("matrix JSON: ") + e.what());
  }
}

// ------------------------------------------------------------------- measures

inline void write_measure_csv(std::ostream& os, const DiscreteMeasure& mu) {
  static constexpr const char* kNames[] = {"x", "y", "z", "w"};
  for (int i = 0; i < mu.dim(); ++i) os << kNames[i] << ',';
  os << "weight\n";
  for (const auto& a : mu.atoms()) {
    for (int i = 0; i < mu.dim(); ++i) os << format_double(a.x[i]) << ',';
    os << format_double(a.w) << '\n';
  }
}

inline std::string measure_to_csv(const DiscreteMeasure& mu) {
  std::ostringstream os;
  write_measure_csv(os, mu);
  return os.str();
}

/// Reads one atom per row (coordinates..., weight). A non-numeric first line is
/// taken as a header; the dimension is the column count minus one.
inline DiscreteMeasure read_measure_csv(std::istream& is) {
  std::string line;
  std::vector<Atom> atoms;
  int dim = -1;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) {
        numeric = false;
        break;
      }
      vals.push_back(v);
    }
    if (!numeric) {
      if (atoms.empty() && dim < 0) {
        dim = static_cast<int>(std::count(line.begin(), line.end(), ','));
        continue;
      }
      throw InvalidInput("measure CSV: non-numeric row at line " + std::to_string(lineno));
    }
    const int cols = static_cast<int>(vals.size()) - 1;
    if (dim < 0) dim = cols;
    if (cols != dim) throw InvalidInput("measure CSV: wrong column count at line " + std::to_string(lineno));
    require(dim >= 1 && dim <= kMaxDim, "measure CSV: dimension must be in [1, 4]");
    Atom a;
    for (int i = 0; i < dim; ++i) a.x[i] = vals[i];
    a.w = vals[dim];
    atoms.push_back(a);
  }
  if (dim < 0) throw InvalidInput("measure CSV: no rows");
  return DiscreteMeasure(dim, std::move(atoms));
}

inline DiscreteMeasure measure_from_csv(const std::string& text) {
  std::istringstream is(text);
  return read_measure_csv(is);
}

/// Little-endian layout: uint64 dim, uint64 count, then count records of
/// dim coordinates and one weight, all float64.
inline void write_measure_binary(std::ostream& os, const DiscreteMeasure& mu) {
  const std::uint64_t header[2] = {static_cast<std::uint64_t>(mu.dim()), mu.size()};
  os.write(reinterpret_cast<const char*>(header), sizeof header);
  for (const auto& a : mu.atoms()) {
    os.write(reinterpret_cast<const char*>(a.x.data()), sizeof(double) * mu.dim());
    os.write(reinterpret_cast<const char*>(&a.w), sizeof(double));
  }
}

inline DiscreteMeasure read_measure_binary(std::istream& is) {
  std::uint64_t header[2];
  if (!is.read(reinterpret_cast<char*>(header), sizeof header)) throw InvalidInput("measure binary: truncated header");
  require(header[0] >= 1 && header[0] <= kMaxDim, "measure binary: dimension must be in [1, 4]");
  const int dim = static_cast<int>(header[0]);
  std::vector<Atom> atoms(header[1]);
  for (auto& a : atoms) {
    if (!is.read(reinterpret_cast<char*>(a.x.data()), sizeof(double) * dim) ||
        !is.read(reinterpret_cast<char*>(&a.w), sizeof(double)))
      throw InvalidInput("measure binary: truncated body");
  }
  return DiscreteMeasure(dim, std::move(atoms));
}

// ---------------------------------------------------------------------- files

/// Writes `content` to `path` through a temporary sibling and a rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp.string() + " for writing");
    os << content;
    if (!os) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

/// Loads a measure from .csv or binary (any other extension).
inline DiscreteMeasure load_measure(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("cannot open " + path.string());
  if (path.extension() == ".csv") return read_measure_csv(is);
  return read_measure_binary(is);
}

inline void save_measure(const std::filesystem::path& path, const DiscreteMeasure& mu) {
  std::ostringstream os;
  if (path.extension() == ".csv") {
    write_measure_csv(os, mu);
  } else {
    write_measure_binary(os, mu);
  }
  write_file_atomic(path, os.str());
}

}  // namespace gmtlab
