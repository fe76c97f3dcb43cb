#pragma once

// Loading, encoding and splitting of the five UCI benchmark sets.
//
// Each set has an adapter that knows the published file layout, how to turn
// the raw columns into numeric features and a {0,1} label, and which shape
// the encoded result must have. Shape mismatches are integrity errors.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "chi2nn/errors.hpp"
#include "chi2nn/matrix.hpp"
#include "chi2nn/rng.hpp"

namespace chi2nn {

enum class DatasetId { iris, ilpd, ba, bcw, balloons };

inline constexpr std::array<DatasetId, 5> kAllDatasets = {
    DatasetId::iris, DatasetId::ilpd, DatasetId::ba, DatasetId::bcw,
    DatasetId::balloons};

inline std::string_view to_string(DatasetId id) {
  switch (id) {
    case DatasetId::iris: return "iris";
    case DatasetId::ilpd: return "ilpd";
    case DatasetId::ba: return "ba";
    case DatasetId::bcw: return "bcw";
    case DatasetId::balloons: return "balloons";
  }
  return "?";
}

inline std::optional<DatasetId> parse_dataset_id(std::string_view s) {
  for (auto id : kAllDatasets)
    if (to_string(id) == s) return id;
  return std::nullopt;
}

// Published shape of a set: raw attribute count (class column excluded) and
// class sizes after encoding.
struct DatasetShape {
  std::size_t attributes;
  std::size_t negatives;
  std::size_t positives;
};

inline DatasetShape expected_shape(DatasetId id) {
  switch (id) {
    case DatasetId::iris: return {4, 50, 50};
    case DatasetId::ilpd: return {10, 414, 165};
    case DatasetId::ba: return {4, 762, 610};
    case DatasetId::bcw: return {10, 444, 239};
    case DatasetId::balloons: return {4, 41, 35};
  }
  return {0, 0, 0};
}

struct Dataset {
  DatasetId id{};
  Matrix features;
  std::vector<int> labels;
  std::vector<std::string> feature_names;
  std::size_t raw_attributes = 0;
  std::filesystem::path source;

  std::size_t size() const { return labels.size(); }
  std::size_t dims() const { return features.cols(); }
  std::size_t positives() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  }
};

struct Split {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::uint64_t seed = 0;  // seed actually used, after any re-seeding
  double train_fraction = 0.9;
};

namespace csv {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' ||
                        s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

using Rows = std::vector<std::vector<std::string>>;

enum class Header { detect, none };

// Comma separated, blank lines skipped. With Header::detect the first row is
// treated as a header (and dropped) when none of its fields is numeric.
inline Rows read(const std::filesystem::path& path, Header header = Header::detect) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Rows rows;
  std::string line;
  bool first = header == Header::detect;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::string_view rest(line);
    while (true) {
      auto pos = rest.find(',');
      fields.emplace_back(trim(rest.substr(0, pos)));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
    if (first) {
      first = false;
      bool any_numeric = std::any_of(fields.begin(), fields.end(), [](const auto& f) {
        return parse_number(f).has_value();
      });
      if (!any_numeric) continue;
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace csv

namespace detail {

inline std::string where(const std::filesystem::path& p, std::size_t line) {
  return p.filename().string() + " row " + std::to_string(line + 1);
}

inline double number_or_throw(const std::string& field, const std::filesystem::path& p,
                              std::size_t line) {
  auto v = csv::parse_number(field);
  if (!v) throw IntegrityError(where(p, line) + ": non-numeric field '" + field + "'");
  return *v;
}

inline void check_columns(const csv::Rows& rows, std::size_t expected,
                          const std::filesystem::path& p) {
  if (rows.empty()) throw IntegrityError(p.filename().string() + ": no data rows");
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].size() != expected)
      throw IntegrityError(where(p, i) + ": expected " + std::to_string(expected) +
                           " columns, found " + std::to_string(rows[i].size()));
}

inline std::filesystem::path resolve(const std::filesystem::path& source,
                                     std::string_view canonical) {
  if (std::filesystem::is_directory(source)) return source / canonical;
  return source;
}

inline bool is_missing(const std::string& f) { return f.empty() || f == "?"; }

// Two-level categorical attribute: `one` maps to 1, `zero` to 0.
inline double binary_level(const std::string& f, std::string_view one, std::string_view zero,
                           const std::filesystem::path& p, std::size_t line) {
  auto eq = [](std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
             return std::toupper(static_cast<unsigned char>(x)) ==
                    std::toupper(static_cast<unsigned char>(y));
           });
  };
  if (eq(f, one)) return 1.0;
  if (eq(f, zero)) return 0.0;
  throw IntegrityError(where(p, line) + ": unexpected level '" + f + "' (want " +
                       std::string(one) + "/" + std::string(zero) + ")");
}

struct Encoded {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
};

inline Encoded encode_iris(const std::filesystem::path& file) {
  auto rows = csv::read(file);
  check_columns(rows, 5, file);
  if (rows.size() != 150)
    throw IntegrityError("iris: expected 150 raw rows, found " + std::to_string(rows.size()));
  Encoded e;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& cls = rows[i][4];
    int label;
    if (cls == "Iris-setosa") label = 1;
    else if (cls == "Iris-versicolor") label = 0;
    else if (cls == "Iris-virginica") continue;
    else throw IntegrityError(where(file, i) + ": unknown class '" + cls + "'");
    std::vector<double> r;
    for (int j = 0; j < 4; ++j) r.push_back(number_or_throw(rows[i][j], file, i));
    e.x.push_back(std::move(r));
    e.y.push_back(label);
  }
  return e;
}

inline Encoded encode_ilpd(const std::filesystem::path& file) {
  auto rows = csv::read(file);
  check_columns(rows, 11, file);
  Encoded e;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (std::any_of(r.begin(), r.end(), is_missing)) continue;
    std::vector<double> x;
    x.push_back(number_or_throw(r[0], file, i));
    x.push_back(binary_level(r[1], "Male", "Female", file, i));
    for (int j = 2; j < 10; ++j) x.push_back(number_or_throw(r[j], file, i));
    const double sel = number_or_throw(r[10], file, i);
    // Selector 1 = liver patient (the 414-row class), 2 = non-patient.
    if (sel == 1.0) e.y.push_back(0);
    else if (sel == 2.0) e.y.push_back(1);
    else throw IntegrityError(where(file, i) + ": selector must be 1 or 2");
    e.x.push_back(std::move(x));
  }
  return e;
}

inline Encoded encode_ba(const std::filesystem::path& file) {
  auto rows = csv::read(file);
  check_columns(rows, 5, file);
  Encoded e;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<double> x;
    for (int j = 0; j < 4; ++j) x.push_back(number_or_throw(rows[i][j], file, i));
    const double c = number_or_throw(rows[i][4], file, i);
    if (c != 0.0 && c != 1.0) throw IntegrityError(where(file, i) + ": class must be 0 or 1");
    e.x.push_back(std::move(x));
    e.y.push_back(static_cast<int>(c));
  }
  return e;
}

inline Encoded encode_bcw(const std::filesystem::path& file) {
  auto rows = csv::read(file);
  check_columns(rows, 11, file);
  Encoded e;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (std::any_of(r.begin(), r.end(), is_missing)) continue;
    std::vector<double> x;
    for (int j = 1; j < 10; ++j) x.push_back(number_or_throw(r[j], file, i));
    const double c = number_or_throw(r[10], file, i);
    if (c == 4.0) e.y.push_back(1);
    else if (c == 2.0) e.y.push_back(0);
    else throw IntegrityError(where(file, i) + ": class must be 2 or 4");
    e.x.push_back(std::move(x));
  }
  return e;
}

inline constexpr std::array<std::string_view, 4> kBalloonFiles = {
    "adult+stretch.data", "adult-stretch.data", "yellow-small+adult-stretch.data",
    "yellow-small.data"};

inline Encoded encode_balloons(const std::filesystem::path& source) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(source)) {
    for (auto name : kBalloonFiles) files.push_back(source / name);
  } else {
    files.push_back(source);
  }
  Encoded e;
  for (const auto& file : files) {
    auto rows = csv::read(file, csv::Header::none);
    check_columns(rows, 5, file);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      e.x.push_back({binary_level(r[0], "YELLOW", "PURPLE", file, i),
                     binary_level(r[1], "SMALL", "LARGE", file, i),
                     binary_level(r[2], "STRETCH", "DIP", file, i),
                     binary_level(r[3], "ADULT", "CHILD", file, i)});
      e.y.push_back(static_cast<int>(binary_level(r[4], "T", "F", file, i)));
    }
  }
  return e;
}

inline std::vector<std::string> feature_names(DatasetId id) {
  switch (id) {
    case DatasetId::iris:
      return {"sepal_length", "sepal_width", "petal_length", "petal_width"};
    case DatasetId::ilpd:
      return {"age", "gender_male", "total_bilirubin", "direct_bilirubin",
              "alkaline_phosphotase", "alamine_aminotransferase",
              "aspartate_aminotransferase", "total_proteins", "albumin",
              "albumin_globulin_ratio"};
    case DatasetId::ba: return {"variance", "skewness", "curtosis", "entropy"};
    case DatasetId::bcw:
      return {"clump_thickness", "cell_size_uniformity", "cell_shape_uniformity",
              "marginal_adhesion", "single_epithelial_cell_size", "bare_nuclei",
              "bland_chromatin", "normal_nucleoli", "mitoses"};
    case DatasetId::balloons: return {"color_yellow", "size_small", "act_stretch", "age_adult"};
  }
  return {};
}

}  // namespace detail

/// Canonical file name(s) of the published raw data, relative to data/<id>/.
inline std::vector<std::string> raw_file_names(DatasetId id) {
  switch (id) {
    case DatasetId::iris: return {"iris.data"};
    case DatasetId::ilpd: return {"Indian Liver Patient Dataset (ILPD).csv"};
    case DatasetId::ba: return {"data_banknote_authentication.txt"};
    case DatasetId::bcw: return {"breast-cancer-wisconsin.data"};
    case DatasetId::balloons:
      return {detail::kBalloonFiles.begin(), detail::kBalloonFiles.end()};
  }
  return {};
}

/// Load and encode one set. `source` is either the data/<id>/ directory or,
/// for the single-file sets, the raw file itself.
inline Dataset load_dataset(DatasetId id, const std::filesystem::path& source) {
  if (!std::filesystem::exists(source))
    throw IoError(std::string(to_string(id)) + ": missing " + source.string());
  if (std::filesystem::is_directory(source))
    for (const auto& name : raw_file_names(id))
      if (!std::filesystem::exists(source / name))
        throw IoError(std::string(to_string(id)) + ": missing " + (source / name).string());

  detail::Encoded enc;
  switch (id) {
    case DatasetId::iris: enc = detail::encode_iris(detail::resolve(source, "iris.data")); break;
    case DatasetId::ilpd: enc = detail::encode_ilpd(detail::resolve(source, raw_file_names(id)[0])); break;
    case DatasetId::ba: enc = detail::encode_ba(detail::resolve(source, raw_file_names(id)[0])); break;
    case DatasetId::bcw: enc = detail::encode_bcw(detail::resolve(source, raw_file_names(id)[0])); break;
    case DatasetId::balloons: enc = detail::encode_balloons(source); break;
  }

  const auto shape = expected_shape(id);
  const std::size_t pos = static_cast<std::size_t>(std::count(enc.y.begin(), enc.y.end(), 1));
  const std::size_t neg = enc.y.size() - pos;
  if (neg != shape.negatives || pos != shape.positives) {
    std::ostringstream msg;
    msg << to_string(id) << ": expected " << shape.negatives + shape.positives << " rows ("
        << shape.negatives << " negative / " << shape.positives << " positive), found "
        << enc.y.size() << " (" << neg << " / " << pos << ")";
    throw IntegrityError(msg.str());
  }

  Dataset ds;
  ds.id = id;
  ds.features = Matrix::from_rows(enc.x);
  ds.labels = std::move(enc.y);
  ds.feature_names = detail::feature_names(id);
  ds.raw_attributes = shape.attributes;
  ds.source = source;
  return ds;
}

/// Seeded uniform split. The first round(f*n) entries of a Fisher-Yates
/// permutation go to training. A split whose training part lacks one of the
/// classes is rejected and retried with seed+1.
inline Split split_dataset(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  const std::size_t n = ds.size();
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw DomainError("split_dataset: train_fraction must be in (0,1)");
  if (n < 2) throw DomainError("split_dataset: need at least 2 rows");
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train == n)
    throw DomainError("split_dataset: train_fraction " + std::to_string(train_fraction) +
                      " leaves an empty partition for n=" + std::to_string(n));

  const bool two_classes = ds.positives() > 0 && ds.positives() < n;
  for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
    const std::uint64_t s = seed + attempt;
    Rng rng(s);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);

    Split sp;
    sp.seed = s;
    sp.train_fraction = train_fraction;
    sp.train_indices.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    sp.test_indices.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    if (!two_classes) return sp;
    std::size_t pos = 0;
    for (auto i : sp.train_indices) pos += ds.labels[i] == 1;
    if (pos > 0 && pos < n_train) return sp;
  }
  throw DomainError("split_dataset: no seed produced a two-class training set");
}

/// Encoded matrix as CSV: header row, one row per sample, label last.
inline void write_encoded_csv(const Dataset& ds, std::ostream& out) {
  for (const auto& name : ds.feature_names) out << name << ',';
  out << "label\n";
  char buf[32];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.features.row(i)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << buf << ',';
    }
    out << ds.labels[i] << '\n';
  }
}

}  // namespace chi2nn
