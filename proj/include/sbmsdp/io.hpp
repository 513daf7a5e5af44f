#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sbmsdp/clustering.hpp"
#include "sbmsdp/model.hpp"
#include "sbmsdp/sdp.hpp"

// File formats. All text is UTF-8 with LF line endings; CSV files carry a
// header row; binary integers and doubles are little-endian.

namespace sbmsdp::io {

struct IoError : std::runtime_error {
    explicit IoError(const std::filesystem::path& path, const std::string& what)
        : std::runtime_error(path.string() + ": " + what) {}
};

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) throw IoError(path, "cannot open for writing");
    return f;
}

inline std::ifstream open_in(const std::filesystem::path& path, bool binary = false) {
    std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
    if (!f) throw IoError(path, "cannot open for reading");
    return f;
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Instance description: flat key-value text.

struct InstanceFile {
    ClusterSpec spec;
    double p = 0.0;
    double q = 0.0;
    std::uint64_t seed = 0;
};

inline void write_instance(const std::filesystem::path& path, const InstanceFile& inst) {
    auto f = detail::open_out(path);
    f << "sizes";
    for (int s : inst.spec.sizes) f << ' ' << s;
    f << "\np " << detail::fmt17(inst.p) << "\nq " << detail::fmt17(inst.q) << "\nseed "
      << inst.seed << "\n";
}

inline InstanceFile read_instance(const std::filesystem::path& path) {
    auto f = detail::open_in(path);
    InstanceFile out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "sizes") {
            int v;
            while (ss >> v) out.spec.sizes.push_back(v);
        } else if (key == "p") {
            ss >> out.p;
        } else if (key == "q") {
            ss >> out.q;
        } else if (key == "seed") {
            ss >> out.seed;
        } else {
            throw IoError(path, "unknown key '" + key + "'");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Adjacency matrix, bit-packed: 8-byte little-endian n, then the upper
// triangle (diagonal included) row-major, bits packed LSB-first.

inline void write_adjacency_bits(const std::filesystem::path& path, const SymMatrix& a) {
    auto f = detail::open_out(path, true);
    const int n = a.size();
    detail::put_u64(f, static_cast<std::uint64_t>(n));
    unsigned char byte = 0;
    int nbits = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            if (a(i, j) != 0.0) byte |= static_cast<unsigned char>(1u << nbits);
            if (++nbits == 8) {
                f.put(static_cast<char>(byte));
                byte = 0;
                nbits = 0;
            }
        }
    if (nbits > 0) f.put(static_cast<char>(byte));
}

inline SymMatrix read_adjacency_bits(const std::filesystem::path& path) {
    auto f = detail::open_in(path, true);
    const auto n64 = detail::get_u64(f);
    if (!f || n64 == 0 || n64 > (1u << 20)) throw IoError(path, "bad header");
    const int n = static_cast<int>(n64);
    SymMatrix a(n);
    int nbits = 8;
    unsigned char byte = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            if (nbits == 8) {
                int c = f.get();
                if (c == EOF) throw IoError(path, "truncated payload");
                byte = static_cast<unsigned char>(c);
                nbits = 0;
            }
            if (byte & (1u << nbits)) a.set(i, j, 1.0);
            ++nbits;
        }
    return a;
}

// Plain-text alternative: a "n <count>" header line, then "i j" per edge
// with i <= j in ascending order.

inline void write_edge_list(const std::filesystem::path& path, const SymMatrix& a) {
    auto f = detail::open_out(path);
    f << "n " << a.size() << "\n";
    for (int i = 0; i < a.size(); ++i)
        for (int j = i; j < a.size(); ++j)
            if (a(i, j) != 0.0) f << i << ' ' << j << "\n";
}

inline SymMatrix read_edge_list(const std::filesystem::path& path) {
    auto f = detail::open_in(path);
    std::string tag;
    int n = 0;
    f >> tag >> n;
    if (tag != "n" || n <= 0) throw IoError(path, "bad edge list header");
    SymMatrix a(n);
    int i, j;
    while (f >> i >> j) {
        if (i < 0 || j < 0 || i >= n || j >= n) throw IoError(path, "edge out of range");
        a.set(i, j, 1.0);
    }
    return a;
}

// ---------------------------------------------------------------------------
// Dense solution matrix: CSV with 17 significant digits, and a binary twin
// (8-byte n header, then n*n little-endian doubles, row-major).

inline void write_matrix_csv(const std::filesystem::path& path, const SymMatrix& m) {
    auto f = detail::open_out(path);
    for (int i = 0; i < m.size(); ++i) {
        for (int j = 0; j < m.size(); ++j) {
            if (j) f << ',';
            f << detail::fmt17(m(i, j));
        }
        f << "\n";
    }
}

inline SymMatrix read_matrix_csv(const std::filesystem::path& path) {
    auto f = detail::open_in(path);
    std::vector<double> vals;
    std::string line;
    int rows = 0;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        ++rows;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    }
    if (rows == 0 || vals.size() != static_cast<std::size_t>(rows) * rows)
        throw IoError(path, "ragged csv matrix");
    return SymMatrix::from_rowmajor(rows, std::move(vals));
}

inline void write_matrix_bin(const std::filesystem::path& path, const SymMatrix& m) {
    auto f = detail::open_out(path, true);
    detail::put_u64(f, static_cast<std::uint64_t>(m.size()));
    static_assert(sizeof(double) == 8);
    for (double v : m.data()) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        detail::put_u64(f, bits);
    }
}

inline SymMatrix read_matrix_bin(const std::filesystem::path& path) {
    auto f = detail::open_in(path, true);
    const int n = static_cast<int>(detail::get_u64(f));
    if (!f || n <= 0) throw IoError(path, "bad header");
    std::vector<double> vals(static_cast<std::size_t>(n) * n);
    for (auto& v : vals) {
        const std::uint64_t bits = detail::get_u64(f);
        std::memcpy(&v, &bits, 8);
    }
    if (!f) throw IoError(path, "truncated payload");
    return SymMatrix::from_rowmajor(n, std::move(vals));
}

// ---------------------------------------------------------------------------
// Reports.

inline std::string format_kkt(const KktReport& r) {
    std::ostringstream os;
    os << "box_violation " << detail::fmt17(r.box_violation) << "\n"
       << "min_eigenvalue " << detail::fmt17(r.min_eigenvalue) << "\n"
       << "comp_slack_lower " << detail::fmt17(r.comp_slack_lower) << "\n"
       << "comp_slack_upper " << detail::fmt17(r.comp_slack_upper) << "\n"
       << "stationarity " << detail::fmt17(r.stationarity) << "\n"
       << "dual_feasibility " << detail::fmt17(r.dual_feasibility) << "\n"
       << "dual_negativity " << detail::fmt17(r.dual_negativity) << "\n"
       << "tol " << detail::fmt17(r.tol) << "\n"
       << "pass " << (r.pass ? 1 : 0) << "\n";
    return os.str();
}

inline void write_kkt(const std::filesystem::path& path, const KktReport& r) {
    detail::open_out(path) << format_kkt(r);
}

inline std::string format_cluster_report(const ClusterReport& r) {
    std::ostringstream os;
    for (std::size_t c = 0; c < r.clusters.size(); ++c) {
        os << "cluster " << c << ' ' << block_class_name(r.clusters[c].cls) << " :";
        for (int node : r.clusters[c].nodes) os << ' ' << node;
        os << "\n";
    }
    os << "unassigned :";
    for (int node : r.unassigned) os << ' ' << node;
    os << "\n";
    return os.str();
}

inline void write_cluster_report(const std::filesystem::path& path,
                                 const ClusterReport& r) {
    detail::open_out(path) << format_cluster_report(r);
}

inline void write_recursion_trace(const std::filesystem::path& path,
                                  const RecursionTrace& t) {
    auto f = detail::open_out(path);
    f << "round,n_round,lambda,recovered_sizes\n";
    for (std::size_t r = 0; r < t.rounds.size(); ++r) {
        f << r << ',' << t.rounds[r].active.size() << ','
          << detail::fmt17(t.rounds[r].lambda) << ',';
        for (std::size_t k = 0; k < t.rounds[r].recovered_sizes.size(); ++k) {
            if (k) f << ';';
            f << t.rounds[r].recovered_sizes[k];
        }
        f << "\n";
    }
}

// ---------------------------------------------------------------------------
// Experiment configuration: flat key-value text, duplicate keys rejected.

inline std::map<std::string, std::string> read_key_values(
    const std::filesystem::path& path) {
    auto f = detail::open_in(path);
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto sp = line.find(' ');
        const std::string key = line.substr(0, sp);
        const std::string value = sp == std::string::npos ? "" : line.substr(sp + 1);
        if (!out.emplace(key, value).second) throw IoError(path, "duplicate key " + key);
    }
    return out;
}

inline void write_key_values(const std::filesystem::path& path,
                             const std::vector<std::pair<std::string, std::string>>& kv) {
    auto f = detail::open_out(path);
    for (const auto& [k, v] : kv) f << k << ' ' << v << "\n";
}

// ---------------------------------------------------------------------------
// Heatmap raster: ASCII "width height\n", then width*height bytes row-major,
// pixel = round(255 (1 - clamp(Y_ij, 0, 1))) so white is 0 and black is 1.
// A sidecar "<path>.flags" lists flagged coordinates, one "i j" per line.

inline std::uint8_t heatmap_pixel(double y) {
    const double c = std::min(1.0, std::max(0.0, y));
    return static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - c)));
}

inline void write_heatmap(const std::filesystem::path& path, const SymMatrix& y,
                          const std::vector<std::pair<int, int>>& flagged) {
    {
        auto f = detail::open_out(path, true);
        f << y.size() << ' ' << y.size() << '\n';
        for (int i = 0; i < y.size(); ++i)
            for (int j = 0; j < y.size(); ++j)
                f.put(static_cast<char>(heatmap_pixel(y(i, j))));
    }
    auto side = detail::open_out(path.string() + ".flags");
    for (const auto& [i, j] : flagged) side << i << ' ' << j << "\n";
}

}  // namespace sbmsdp::io
