#pragma once

#include <cstdint>
#include <string>

#include "scs/dataset.hpp"

namespace scs::testutil {

// Synthetic corpus: random bytecode with a 2-byte marker planted at a random
// offset with class-dependent probability. The marker is bigram-visible, so
// any n >= 2 pipeline (and any sequence model) can separate the classes.
struct SynthSpec {
    std::size_t benign = 600;
    std::size_t scam = 200;
    std::size_t min_bytes = 30;
    std::size_t max_bytes = 100;
    std::string marker = "dead";  // two bytes
    double scam_marker_prob = 0.95;
    double benign_marker_prob = 0.05;
};

Dataset make_synthetic_corpus(const SynthSpec& spec, std::uint64_t seed);

}  // namespace scs::testutil
