#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sae/special.hpp"

namespace sae {

// One small area: population size n and event count r.
struct CityRecord {
  int id = 0;
  std::int64_t n = 0;
  std::int64_t r = 0;
};

// Immutable two-level count data.  Totals and the per-record binomial
// log-coefficients are computed at construction and never trusted from
// the input; the object is safe to share across threads once built.
class Dataset {
 public:
  static Dataset from_records(std::vector<CityRecord> records) {
    if (records.empty()) throw std::invalid_argument("dataset has no records");
    Dataset d;
    std::unordered_set<int> seen;
    for (const auto& rec : records) {
      if (rec.n < 1)
        throw std::invalid_argument("record id " + std::to_string(rec.id) +
                                    ": population n must be >= 1");
      if (rec.r < 0 || rec.r > rec.n)
        throw std::invalid_argument("record id " + std::to_string(rec.id) +
                                    ": event count r=" + std::to_string(rec.r) +
                                    " must satisfy 0 <= r <= n=" + std::to_string(rec.n));
      if (!seen.insert(rec.id).second)
        throw std::invalid_argument("duplicate record id " + std::to_string(rec.id));
      d.total_events_ += rec.r;
      d.total_population_ += rec.n;
    }
    d.records_ = std::move(records);
    d.log_binom_.reserve(d.records_.size());
    for (const auto& rec : d.records_) {
      const double lc = log_binom_coeff(rec.n, rec.r);
      d.log_binom_.push_back(lc);
      d.log_binom_sum_ += lc;
    }
    return d;
  }

  const std::vector<CityRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  std::int64_t total_events() const { return total_events_; }      // R
  std::int64_t total_population() const { return total_population_; }  // N
  double pooled_rate() const {
    return static_cast<double>(total_events_) / static_cast<double>(total_population_);
  }

  /// log C(n_i, r_i) for record i, and the sum over all records.
  double log_binom(std::size_t i) const { return log_binom_[i]; }
  double log_binom_sum() const { return log_binom_sum_; }

 private:
  Dataset() = default;

  std::vector<CityRecord> records_;
  std::vector<double> log_binom_;
  double log_binom_sum_ = 0.0;
  std::int64_t total_events_ = 0;
  std::int64_t total_population_ = 0;
};

namespace detail {

inline std::int64_t parse_count(const std::string& field, const std::string& what,
                                std::size_t line_no) {
  std::size_t pos = 0;
  std::int64_t value = 0;
  try {
    value = std::stoll(field, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("row " + std::to_string(line_no) + ": cannot parse " +
                                what + " from '" + field + "'");
  }
  if (pos != field.size() || value < 0)
    throw std::invalid_argument("row " + std::to_string(line_no) + ": " + what +
                                " must be a non-negative integer, got '" + field + "'");
  return value;
}

inline std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t");
    const auto e = field.find_last_not_of(" \t");
    fields.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  return fields;
}

}  // namespace detail

/// Loads a dataset from CSV with header `id,n,r`.  Totals are recomputed;
/// record order is preserved.
inline Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file: " + path);

  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  std::vector<CityRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = detail::split_csv_line(line);
    if (fields.empty() || (fields.size() == 1 && fields[0].empty())) continue;
    if (!saw_header) {
      if (fields.size() != 3 || fields[0] != "id" || fields[1] != "n" || fields[2] != "r")
        throw std::invalid_argument(path + ": expected header 'id,n,r', got '" + line + "'");
      saw_header = true;
      continue;
    }
    if (fields.size() != 3)
      throw std::invalid_argument("row " + std::to_string(line_no) +
                                  ": expected 3 columns (id,n,r), got " +
                                  std::to_string(fields.size()));
    CityRecord rec;
    rec.id = static_cast<int>(detail::parse_count(fields[0], "id", line_no));
    rec.n = detail::parse_count(fields[1], "n", line_no);
    rec.r = detail::parse_count(fields[2], "r", line_no);
    records.push_back(rec);
  }
  if (records.empty()) throw std::invalid_argument("empty file: " + path);
  return Dataset::from_records(std::move(records));
}

// Male lung cancer mortality 1972-1981 in 84 Missouri cities: city size n
// and death count r among men aged 45-54.  The classic two-level binomial
// benchmark; embedded so the canonical analysis needs no input file.
inline const Dataset& missouri() {
  static const Dataset data = [] {
    static constexpr struct {
      int id;
      std::int64_t n, r;
    } kTable[] = {
        {1, 1019, 2},    {2, 1512, 8},   {3, 1424, 8},   {4, 54155, 402},
        {5, 447, 1},     {6, 1907, 12},  {7, 1755, 11},  {8, 5756, 42},
        {9, 509, 2},     {10, 350, 1},   {11, 473, 2},   {12, 329, 1},
        {13, 7137, 55},  {14, 430, 2},   {15, 304, 1},   {16, 163, 0},
        {17, 163, 0},    {18, 159, 0},   {19, 281, 1},   {20, 154, 0},
        {21, 889, 6},    {22, 260, 1},   {23, 371, 2},   {24, 232, 1},
        {25, 228, 1},    {26, 343, 2},   {27, 454, 3},   {28, 323, 2},
        {29, 311, 2},    {30, 784, 6},   {31, 426, 3},   {32, 184, 1},
        {33, 181, 1},    {34, 177, 1},   {35, 177, 1},   {36, 291, 2},
        {37, 170, 1},    {38, 158, 1},   {39, 274, 2},   {40, 150, 1},
        {41, 265, 2},    {42, 257, 2},   {43, 254, 2},   {44, 28937, 251},
        {45, 445, 4},    {46, 447, 4},   {47, 329, 3},   {48, 206, 2},
        {49, 313, 3},    {50, 314, 3},   {51, 314, 3},   {52, 202, 2},
        {53, 198, 2},    {54, 183, 2},   {55, 292, 3},   {56, 178, 2},
        {57, 287, 3},    {58, 282, 3},   {59, 164, 2},   {60, 164, 2},
        {61, 1923, 18},  {62, 3672, 34}, {63, 261, 3},   {64, 581, 6},
        {65, 550, 6},    {66, 431, 5},   {67, 399, 5},   {68, 286, 4},
        {69, 592, 7},    {70, 246, 4},   {71, 547, 7},   {72, 438, 6},
        {73, 202, 4},    {74, 790, 10},  {75, 648, 9},   {76, 354, 6},
        {77, 730, 10},   {78, 144, 4},   {79, 1093, 14}, {80, 384, 7},
        {81, 278, 6},    {82, 596, 10},  {83, 1889, 28}, {84, 22514, 334},
    };
    std::vector<CityRecord> records;
    records.reserve(std::size(kTable));
    for (const auto& row : kTable) records.push_back({row.id, row.n, row.r});
    return Dataset::from_records(std::move(records));
  }();
  return data;
}

}  // namespace sae
