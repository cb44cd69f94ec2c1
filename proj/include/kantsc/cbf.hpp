#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kantsc/data.hpp"

namespace kantsc {

// Synthetic cylinder-bell-funnel series in the UCR layout (labels 1..3,
// length-128 default). The classic generative process: a noisy plateau,
// rising ramp, or falling ramp of random onset and duration on a N(0,1)
// noise floor.
std::vector<RawSeries> generate_cbf(std::size_t count, std::size_t length,
                                    std::uint64_t seed);

// Writes <root>/CBF/CBF_TRAIN.tsv and CBF_TEST.tsv.
void write_cbf_dir(const std::string& root, std::size_t n_train,
                   std::size_t n_test, std::size_t length, std::uint64_t seed);

void write_ucr_tsv(const std::string& path, const std::vector<RawSeries>& rows);

}  // namespace kantsc
