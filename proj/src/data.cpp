#include "kantsc/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include "kantsc/errors.hpp"

namespace kantsc {

namespace {

double parse_token(const std::string& token, const std::string& path,
                   std::size_t line_no, std::size_t col_no) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || std::isinf(v)) {
    throw DataError(path + ":" + std::to_string(line_no) + ": column " +
                    std::to_string(col_no) + ": unparsable value '" + token + "'");
  }
  return v;
}

}  // namespace

std::vector<RawSeries> load_ucr_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");

  std::vector<RawSeries> rows;
  std::size_t max_len = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    RawSeries row;
    std::size_t col_no = 0;
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t tab = line.find('\t', start);
      const std::string token =
          line.substr(start, tab == std::string::npos ? std::string::npos
                                                      : tab - start);
      ++col_no;
      if (!token.empty()) {
        const double v = parse_token(token, path, line_no, col_no);
        if (col_no == 1) {
          if (std::isnan(v))
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": label may not be NaN");
          row.label = v;
        } else {
          row.values.push_back(v);
        }
      } else if (col_no == 1) {
        throw DataError(path + ":" + std::to_string(line_no) + ": missing label");
      }
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (row.values.empty())
      throw DataError(path + ":" + std::to_string(line_no) + ": no values");
    max_len = std::max(max_len, row.values.size());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("empty dataset file '" + path + "'");

  for (RawSeries& row : rows)
    row.values.resize(max_len, std::numeric_limits<double>::quiet_NaN());
  return rows;
}

namespace {

void impute(std::vector<double>& v, const std::string& context) {
  const std::size_t n = v.size();
  std::size_t first_finite = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(v[i])) {
      first_finite = i;
      break;
    }
  }
  if (first_finite == n)
    throw DataError(context + ": series is entirely NaN");

  // edge fill
  for (std::size_t i = 0; i < first_finite; ++i) v[i] = v[first_finite];
  std::size_t last_finite = n - 1;
  while (!std::isfinite(v[last_finite])) --last_finite;
  for (std::size_t i = last_finite + 1; i < n; ++i) v[i] = v[last_finite];

  // linear interpolation of interior gaps
  std::size_t i = 0;
  while (i < n) {
    if (std::isfinite(v[i])) {
      ++i;
      continue;
    }
    const std::size_t gap_start = i;  // v[gap_start-1] finite
    std::size_t gap_end = i;
    while (!std::isfinite(v[gap_end])) ++gap_end;  // v[gap_end] finite
    const double a = v[gap_start - 1];
    const double b = v[gap_end];
    const double span = static_cast<double>(gap_end - gap_start + 1);
    for (std::size_t j = gap_start; j < gap_end; ++j)
      v[j] = a + (b - a) * static_cast<double>(j - gap_start + 1) / span;
    i = gap_end;
  }
}

void znormalize(std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double std_dev = std::sqrt(var / n);
  if (std_dev < 1e-8) {
    std::fill(v.begin(), v.end(), 0.0);
    return;
  }
  for (double& x : v) x = (x - mean) / std_dev;
}

}  // namespace

Dataset preprocess(const std::vector<RawSeries>& raw_train,
                   const std::vector<RawSeries>& raw_test,
                   const std::string& name) {
  if (raw_train.empty()) throw DataError(name + ": empty train split");
  if (raw_test.empty()) throw DataError(name + ": empty test split");

  std::size_t d = 0;
  for (const RawSeries& r : raw_train) d = std::max(d, r.values.size());
  for (const RawSeries& r : raw_test) d = std::max(d, r.values.size());

  std::set<double> labels;
  for (const RawSeries& r : raw_train) labels.insert(r.label);
  for (const RawSeries& r : raw_test) labels.insert(r.label);

  Dataset ds;
  ds.name = name;
  ds.d = d;
  ds.m = static_cast<int>(labels.size());
  int next = 0;
  for (double l : labels) ds.label_map[l] = next++;

  auto convert = [&](const std::vector<RawSeries>& raw,
                     std::vector<LabeledSeries>& out, const char* split) {
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      LabeledSeries s;
      s.values = raw[i].values;
      s.values.resize(d, std::numeric_limits<double>::quiet_NaN());
      impute(s.values, name + " " + split + " series " + std::to_string(i));
      znormalize(s.values);
      s.label = ds.label_map.at(raw[i].label);
      out.push_back(std::move(s));
    }
  };
  convert(raw_train, ds.train, "train");
  convert(raw_test, ds.test, "test");
  return ds;
}

Dataset load_dataset(const std::string& root, const std::string& name) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(root) / name;
  const std::string train_path = (dir / (name + "_TRAIN.tsv")).string();
  const std::string test_path = (dir / (name + "_TEST.tsv")).string();
  return preprocess(load_ucr_tsv(train_path), load_ucr_tsv(test_path), name);
}

std::vector<std::string> list_datasets(const std::string& root) {
  namespace fs = std::filesystem;
  std::vector<std::string> names;
  if (!fs::is_directory(root)) throw DataError("data root '" + root + "' not found");
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    if (fs::exists(entry.path() / (name + "_TRAIN.tsv")) &&
        fs::exists(entry.path() / (name + "_TEST.tsv")))
      names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  return names;
}

void Dataset::split_matrix(const std::vector<LabeledSeries>& split, Tensor& x,
                           std::vector<int>& y) {
  const std::size_t n = split.size();
  const std::size_t d = n ? split[0].values.size() : 0;
  x = Tensor({n, d});
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(split[i].values.begin(), split[i].values.end(), &x.data[i * d]);
    y[i] = split[i].label;
  }
}

}  // namespace kantsc
