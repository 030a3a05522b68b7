#pragma once

#include <cstdint>
#include <string>

#include "multipde/synthetic_data.hpp"

namespace multipde {

// Single-file dataset formats. Both round-trip bit-exactly: the CSV writer
// uses 17 significant digits, the binary container stores raw doubles.

void save_experiment_csv(const Experiment& exp, const std::string& path);
Experiment load_experiment_csv(const std::string& path);

void save_experiment_binary(const Experiment& exp, const std::string& path);
Experiment load_experiment_binary(const std::string& path);

// dispatch on extension: .csv or .bin
void save_experiment(const Experiment& exp, const std::string& path);
Experiment load_experiment(const std::string& path);

// FNV-1a 64-bit checksum of a file's bytes, used in dataset manifests.
std::uint64_t fnv1a_file(const std::string& path);

}  // namespace multipde
