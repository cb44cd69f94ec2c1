#include <doctest.h>

#include <cmath>
#include <fstream>

#include "kantsc/cbf.hpp"
#include "kantsc/data.hpp"
#include "test_util.hpp"

using namespace kantsc;
using testutil::scratch_dir;

namespace {

std::string write_file(const std::string& dir, const std::string& name,
                       const std::string& content) {
  const std::string path = dir + "/" + name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("tsv parsing: plain rows, NaN tokens, ragged padding") {
  const std::string dir = scratch_dir("tsv");
  const std::string path = write_file(
      dir, "demo.tsv", "1\t0.5\t-0.5\n2\tNaN\t1.0\t2.0\n1\t3.0\n");
  const std::vector<RawSeries> rows = load_ucr_tsv(path);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].label == 1.0);
  CHECK(rows[0].values[0] == 0.5);
  CHECK(rows[0].values[1] == -0.5);
  CHECK(std::isnan(rows[1].values[0]));
  CHECK(rows[1].values[2] == 2.0);
  // ragged rows padded to the max length with NaN
  REQUIRE(rows[0].values.size() == 3);
  CHECK(std::isnan(rows[0].values[2]));
  CHECK(std::isnan(rows[2].values[1]));
}

TEST_CASE("tsv parsing errors carry line and column context") {
  const std::string dir = scratch_dir("tsv_err");
  const std::string bad = write_file(dir, "bad.tsv", "1\t0.5\n2\tx7\t1.0\n");
  CHECK_THROWS_WITH_AS(load_ucr_tsv(bad), doctest::Contains(":2"), DataError);
  const std::string empty = write_file(dir, "empty.tsv", "");
  CHECK_THROWS_AS(load_ucr_tsv(empty), DataError);
  CHECK_THROWS_AS(load_ucr_tsv(dir + "/missing.tsv"), DataError);
}

TEST_CASE("interior NaN is linearly interpolated before normalization") {
  std::vector<RawSeries> train = {{1.0, {1.0, std::nan(""), 3.0}},
                                  {2.0, {0.0, 1.0, 2.0}}};
  std::vector<RawSeries> test = {{1.0, {1.0, 2.0, 3.0}}};
  const Dataset ds = preprocess(train, test, "demo");
  // [1, nan, 3] -> [1, 2, 3] -> z-normalized equals the clean [0,1,2] series
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(ds.train[0].values[i] == doctest::Approx(ds.train[1].values[i]));
}

TEST_CASE("edge NaN uses nearest-finite fill") {
  std::vector<RawSeries> train = {{1.0, {std::nan(""), 2.0, 4.0, std::nan("")}},
                                  {2.0, {2.0, 2.0, 4.0, 4.0}}};
  std::vector<RawSeries> test = train;
  const Dataset ds = preprocess(train, test, "edges");
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(ds.train[0].values[i] == doctest::Approx(ds.train[1].values[i]));
}

TEST_CASE("constant series collapses to zeros") {
  std::vector<RawSeries> train = {{1.0, {5.0, 5.0, 5.0}}, {2.0, {1.0, 2.0, 3.0}}};
  const Dataset ds = preprocess(train, train, "const");
  for (double v : ds.train[0].values) CHECK(v == 0.0);
}

TEST_CASE("entirely-NaN series is a data error") {
  std::vector<RawSeries> train = {
      {1.0, {std::nan(""), std::nan("")}}, {2.0, {1.0, 2.0}}};
  CHECK_THROWS_AS(preprocess(train, train, "allnan"), DataError);
}

TEST_CASE("labels remap to contiguous ids by sorted original value") {
  std::vector<RawSeries> train = {{1.0, {1.0, 2.0}}, {-1.0, {0.0, 1.0}}};
  std::vector<RawSeries> test = {{-1.0, {2.0, 1.0}}};
  const Dataset ds = preprocess(train, test, "labels");
  CHECK(ds.m == 2);
  CHECK(ds.label_map.at(-1.0) == 0);
  CHECK(ds.label_map.at(1.0) == 1);
  CHECK(ds.train[0].label == 1);
  CHECK(ds.test[0].label == 0);
}

TEST_CASE("preprocessed series have zero mean and unit (or zero) deviation") {
  const std::vector<RawSeries> raw = generate_cbf(60, 128, 9);
  const Dataset ds = preprocess(raw, raw, "cbf_check");
  for (const LabeledSeries& s : ds.train) {
    double mean = 0.0;
    for (double v : s.values) mean += v;
    mean /= static_cast<double>(s.values.size());
    CHECK(std::fabs(mean) <= 1e-9);
    double var = 0.0;
    for (double v : s.values) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(s.values.size()));
    CHECK((std::fabs(sd - 1.0) <= 1e-6 || sd == 0.0));
  }
}

TEST_CASE("preprocess is idempotent on already-normalized data") {
  const std::vector<RawSeries> raw = generate_cbf(30, 64, 4);
  const Dataset once = preprocess(raw, raw, "once");
  std::vector<RawSeries> renorm;
  for (const LabeledSeries& s : once.train) {
    RawSeries r;
    r.label = s.label;
    r.values = s.values;
    renorm.push_back(r);
  }
  const Dataset twice = preprocess(renorm, renorm, "twice");
  for (std::size_t i = 0; i < once.train.size(); ++i)
    for (std::size_t j = 0; j < once.d; ++j)
      CHECK(std::fabs(once.train[i].values[j] - twice.train[i].values[j]) <= 1e-9);
}

TEST_CASE("cbf generator matches the UCR layout") {
  const std::string root = scratch_dir("cbf_root");
  write_cbf_dir(root, 30, 90, 128, 2024);
  const Dataset ds = load_dataset(root, "CBF");
  CHECK(ds.train.size() == 30);
  CHECK(ds.test.size() == 90);
  CHECK(ds.d == 128);
  CHECK(ds.m == 3);
  // balanced classes in the train split
  std::vector<int> counts(3, 0);
  for (const LabeledSeries& s : ds.train) ++counts[s.label];
  CHECK(counts == std::vector<int>{10, 10, 10});
  // deterministic regeneration
  const std::string root2 = scratch_dir("cbf_root2");
  write_cbf_dir(root2, 30, 90, 128, 2024);
  const Dataset ds2 = load_dataset(root2, "CBF");
  for (std::size_t i = 0; i < ds.train.size(); ++i)
    CHECK(ds.train[i].values == ds2.train[i].values);

  CHECK(list_datasets(root) == std::vector<std::string>{"CBF"});
}

TEST_CASE("split_matrix lays out rows in order") {
  std::vector<LabeledSeries> split = {{{1.0, 2.0}, 1}, {{3.0, 4.0}, 0}};
  Tensor x;
  std::vector<int> y;
  Dataset::split_matrix(split, x, y);
  CHECK(x.shape == std::vector<std::size_t>{2, 2});
  CHECK(x.data == std::vector<double>{1, 2, 3, 4});
  CHECK(y == std::vector<int>{1, 0});
}
