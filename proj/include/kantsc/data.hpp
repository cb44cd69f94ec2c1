#pragma once

#include <map>
#include <string>
#include <vector>

#include "kantsc/tensor.hpp"

namespace kantsc {

// One parsed series, pre-remap: original label plus values (NaN allowed
// until preprocess imputes them).
struct RawSeries {
  double label = 0.0;
  std::vector<double> values;
};

struct LabeledSeries {
  std::vector<double> values;
  int label = 0;
};

struct Dataset {
  std::string name;
  std::vector<LabeledSeries> train;
  std::vector<LabeledSeries> test;
  std::size_t d = 0;  // common series length after padding
  int m = 0;          // class count
  std::map<double, int> label_map;  // original label -> 0..m-1

  // [n, d] matrix plus label vector for one split.
  static void split_matrix(const std::vector<LabeledSeries>& split, Tensor& x,
                           std::vector<int>& y);
};

// Parses one UCR2018-style TSV: per line a label field then value fields,
// tab-separated, "NaN" tokens allowed. Ragged rows are padded to the file
// maximum with NaN.
std::vector<RawSeries> load_ucr_tsv(const std::string& path);

// Imputation (linear interior interpolation, nearest-edge fill), per-series
// z-normalization (std < 1e-8 collapses the series to zeros), and label
// remapping to 0..m-1 by sorted original label.
Dataset preprocess(const std::vector<RawSeries>& raw_train,
                   const std::vector<RawSeries>& raw_test,
                   const std::string& name);

// Loads <root>/<name>/<name>_TRAIN.tsv and _TEST.tsv and preprocesses.
Dataset load_dataset(const std::string& root, const std::string& name);

// Dataset names = subdirectories of root that carry the expected TSV pair.
std::vector<std::string> list_datasets(const std::string& root);

}  // namespace kantsc
