// File outputs: metrics CSV, field snapshots, optional PGM heatmaps.
#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "mfd/grid.hpp"
#include "mfd/metrics.hpp"

namespace mfd {

// Shortest round-trip decimal representation; byte-stable for a given build.
std::string format_double(double value);

// ny rows x nx columns of comma-separated values, row iy = 0 first.
void write_field_csv(const std::string& path, const ScalarField& field);
ScalarField read_field_csv(const std::string& path, const GridSpec& grid);

// 8-bit binary PGM, min-max scaled.
void write_field_pgm(const std::string& path, const ScalarField& field);

/// Appends rows to a single metrics CSV with the fixed header
/// t,estimator,l2_err,grad_l2_err,h1_err,mass_dev,min_val,
/// consensus_track_err,input_variation,connected.
class MetricsWriter {
public:
    explicit MetricsWriter(const std::string& path);
    void append(const std::string& estimator, const MetricsRecord& rec);

private:
    std::ofstream out_;
};

void ensure_directory(const std::string& path);

}  // namespace mfd
