#include "kantsc/cbf.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "kantsc/errors.hpp"
#include "kantsc/rng.hpp"

namespace kantsc {

std::vector<RawSeries> generate_cbf(std::size_t count, std::size_t length,
                                    std::uint64_t seed) {
  Rng rng(seed);
  std::vector<RawSeries> rows;
  rows.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int cls = static_cast<int>(i % 3);  // balanced classes
    const double a = 16.0 + static_cast<double>(rng.below(17));       // onset
    const double b = a + 32.0 + static_cast<double>(rng.below(65));   // offset
    const double amp = 6.0 + rng.normal();
    RawSeries row;
    row.label = cls + 1;
    row.values.resize(length);
    for (std::size_t t = 0; t < length; ++t) {
      const double tt = static_cast<double>(t + 1);
      double shape = 0.0;
      if (tt >= a && tt <= b) {
        switch (cls) {
          case 0: shape = 1.0; break;                      // cylinder
          case 1: shape = (tt - a) / (b - a); break;       // bell
          case 2: shape = (b - tt) / (b - a); break;       // funnel
        }
      }
      row.values[t] = amp * shape + rng.normal();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_ucr_tsv(const std::string& path, const std::vector<RawSeries>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  char buf[64];
  for (const RawSeries& row : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", row.label);
    out << buf;
    for (double v : row.values) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << '\t' << buf;
    }
    out << '\n';
  }
}

void write_cbf_dir(const std::string& root, std::size_t n_train,
                   std::size_t n_test, std::size_t length, std::uint64_t seed) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(root) / "CBF";
  fs::create_directories(dir);
  Rng seeds(seed);
  write_ucr_tsv((dir / "CBF_TRAIN.tsv").string(),
                generate_cbf(n_train, length, seeds.next_u64()));
  write_ucr_tsv((dir / "CBF_TEST.tsv").string(),
                generate_cbf(n_test, length, seeds.next_u64()));
}

}  // namespace kantsc
