#ifndef PSFLOW_IO_HPP
#define PSFLOW_IO_HPP

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "psflow/field.hpp"

namespace psflow {

/// 17-significant-digit formatting: round-trips any double exactly.
inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/// FNV-1a 64-bit, used for the config hash in run manifests.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace detail {

inline void write_le_double(std::ostream& os, double x) {
    auto bits = std::bit_cast<std::uint64_t>(x);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    os.write(b, 8);
}

inline double read_le_double(std::istream& is) {
    char b[8];
    is.read(b, 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return std::bit_cast<double>(bits);
}

} // namespace detail

/// Field snapshot file: header "PSFLOW1 <mode> <points...> <extent...>",
/// then little-endian 64-bit floats in row-major order.
inline void write_snapshot(const std::string& path, const Field& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw error("write_snapshot: cannot open " + path);
    const Grid& g = f.grid();
    os << "PSFLOW1 " << to_string(g.mode());
    os << ' ' << g.points(0);
    if (g.mode() == GridMode::cartesian_2d) os << ' ' << g.points(1);
    os << ' ' << fmt_g17(g.extent(0));
    if (g.mode() == GridMode::cartesian_2d) os << ' ' << fmt_g17(g.extent(1));
    os << '\n';
    for (int i = 0; i < f.size(); ++i) detail::write_le_double(os, f[i]);
    if (!os) throw error("write_snapshot: write failed on " + path);
}

/// Reads a snapshot; radial files need the equation dimension to rebuild
/// the grid measure (it lives in the params, not the file).
inline Field read_snapshot(const std::string& path, int radial_dim = 0) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw error("read_snapshot: cannot open " + path);
    std::string header;
    std::getline(is, header);
    std::istringstream hs(header);
    std::string magic, mode;
    hs >> magic >> mode;
    if (magic != "PSFLOW1") throw error("read_snapshot: bad magic in " + path);
    GridPtr grid;
    if (mode == "cartesian_1d") {
        int n;
        double e;
        hs >> n >> e;
        grid = std::make_shared<Grid>(Grid::cartesian_1d(e, n));
    } else if (mode == "cartesian_2d") {
        int nx, ny;
        double ex, ey;
        hs >> nx >> ny >> ex >> ey;
        grid = std::make_shared<Grid>(Grid::cartesian_2d(ex, ey, nx, ny));
    } else if (mode == "radial") {
        int n;
        double e;
        hs >> n >> e;
        if (radial_dim < 2) throw error("read_snapshot: radial file needs the equation dimension");
        grid = std::make_shared<Grid>(Grid::radial(e, n, radial_dim));
    } else {
        throw error("read_snapshot: unknown mode '" + mode + "' in " + path);
    }
    if (!hs) throw error("read_snapshot: malformed header in " + path);
    Field f(grid);
    for (int i = 0; i < f.size(); ++i) f[i] = detail::read_le_double(is);
    if (!is) throw error("read_snapshot: truncated data in " + path);
    return f;
}

/// Deterministic CSV emitter with %.17g float formatting.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns) : os_(path) {
        if (!os_) throw error("CsvWriter: cannot open " + path);
        for (std::size_t i = 0; i < columns.size(); ++i)
            os_ << (i ? "," : "") << columns[i];
        os_ << '\n';
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i)
            os_ << (i ? "," : "") << fmt_g17(values[i]);
        os_ << '\n';
    }

    void row_mixed(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            os_ << (i ? "," : "") << cells[i];
        os_ << '\n';
    }

private:
    std::ofstream os_;
};

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path);
    if (!os) throw error("write_text_file: cannot open " + path);
    os << content;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw error("read_text_file: cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace psflow

#endif
