#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "kantsc/errors.hpp"

namespace kantsc {

// Locale-independent double formatting ('.' decimal separator always).
inline std::string fmt_double(double v, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// Minimal CSV emitter: header row, LF line endings, UTF-8 pass-through.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary) {
    if (!out_) throw DataError("cannot write '" + path + "'");
    write_row(header);
  }

  void write_row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

}  // namespace kantsc
