#pragma once

// On-disk dataset layout: one directory holding manifest.json and one CSV per
// block (bird_1.csv ... penguin_test_m.csv). Each CSV has the header
// `target,x1,...,xq`, no index column, '.' as decimal separator.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ikf/errors.hpp"
#include "ikf/synthdata.hpp"

namespace ikf {

class IoError : public Error {
public:
    using Error::Error;
};

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

void write_block_csv(std::ostream& out, const DataBlock& block);
DataBlock read_block_csv(std::istream& in, const std::string& source_name = "<stream>");

void write_block_csv(const std::filesystem::path& path, const DataBlock& block);
DataBlock read_block_csv(const std::filesystem::path& path);

struct DatasetManifest {
    Eigen::Index n = 0;
    Eigen::Index q = 0;
    std::size_t m = 0;
    double alpha = 0.0;
    PenguinMode mode = PenguinMode::ConvexCombination;
    std::uint64_t master_seed = 0;
    std::uint64_t iteration = 0;
    PopulationSpec bird;
    PopulationSpec fish;
    Vector penguin_weights;
    double penguin_noise_sd = 0.0;
};

struct Dataset {
    DatasetManifest manifest;
    IterationData data;
};

std::string penguin_mode_name(PenguinMode mode);
PenguinMode parse_penguin_mode(const std::string& name);

/// Writes manifest.json and every block CSV into `dir` (created if missing).
/// Throws IoError on any filesystem failure.
void export_dataset(const std::filesystem::path& dir, const Dataset& dataset);

/// Reads a directory written by export_dataset. Throws IoError.
Dataset import_dataset(const std::filesystem::path& dir);

}  // namespace ikf
