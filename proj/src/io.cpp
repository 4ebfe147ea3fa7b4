#include "mfd/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>

namespace mfd {

std::string format_double(double value) {
    char buf[40];
    // %.17g round-trips every double; trim to the shortest form that does.
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
        if (std::strtod(buf, nullptr) == value) break;
    }
    return buf;
}

void write_field_csv(const std::string& path, const ScalarField& field) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("io: cannot write \"" + path + "\"");
    const GridSpec& g = field.grid;
    for (int iy = 0; iy < g.ny; ++iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
            if (ix > 0) out << ',';
            out << format_double(field.at(ix, iy));
        }
        out << '\n';
    }
}

ScalarField read_field_csv(const std::string& path, const GridSpec& grid) {
    std::ifstream in(path);
    if (!in) throw ConfigError("io: cannot read \"" + path + "\"");
    ScalarField field(grid);
    std::string line;
    for (int iy = 0; iy < grid.ny; ++iy) {
        if (!std::getline(in, line)) {
            throw ConfigError("io: \"" + path + "\" has fewer rows than the grid");
        }
        std::istringstream row(line);
        std::string cell;
        for (int ix = 0; ix < grid.nx; ++ix) {
            if (!std::getline(row, cell, ',')) {
                throw ConfigError("io: \"" + path + "\" has fewer columns than the grid");
            }
            field.at(ix, iy) = std::strtod(cell.c_str(), nullptr);
        }
    }
    return field;
}

void write_field_pgm(const std::string& path, const ScalarField& field) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("io: cannot write \"" + path + "\"");
    const GridSpec& g = field.grid;
    const double lo = field.values.minCoeff();
    const double hi = field.values.maxCoeff();
    const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
    out << "P5\n" << g.nx << ' ' << g.ny << "\n255\n";
    for (int iy = g.ny - 1; iy >= 0; --iy) {  // top row first
        for (int ix = 0; ix < g.nx; ++ix) {
            const double v = (field.at(ix, iy) - lo) * scale;
            out.put(static_cast<char>(
                static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 255.0)))));
        }
    }
}

MetricsWriter::MetricsWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("io: cannot write \"" + path + "\"");
    out_ << "t,estimator,l2_err,grad_l2_err,h1_err,mass_dev,min_val,"
            "consensus_track_err,input_variation,connected\n";
}

void MetricsWriter::append(const std::string& estimator, const MetricsRecord& rec) {
    out_ << format_double(rec.t) << ',' << estimator << ','
         << format_double(rec.l2_err) << ',' << format_double(rec.grad_l2_err) << ','
         << format_double(rec.h1_err) << ',' << format_double(rec.mass_dev) << ','
         << format_double(rec.min_val) << ','
         << format_double(rec.consensus_track_err) << ','
         << format_double(rec.input_variation) << ',' << (rec.connected ? 1 : 0)
         << '\n';
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw ConfigError("io: cannot create directory \"" + path + "\"");
}

}  // namespace mfd
