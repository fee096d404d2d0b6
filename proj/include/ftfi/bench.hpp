#pragma once

#include "ftfi/scalar_map.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ftfi {

struct BenchRecord {
    long long n = 0;
    std::string method;  // FTFI, BTFI, BGFI, RFF
    std::string phase;   // preprocess, integrate
    int repeat = 0;
    double seconds = 0.0;
    std::optional<double> max_abs_diff;  // against BTFI
    bool oracle_skipped = false;
    std::string strategies;  // "label:count;..." for FTFI and RFF
};

struct BenchOptions {
    enum class Kind { Synthetic, Mesh };
    Kind kind = Kind::Synthetic;
    std::vector<long long> sizes = {1024, 4096};
    std::filesystem::path mesh;
    ScalarMap f = Polynomial{{1.0, -0.5, 0.25}};
    int repeats = 1;
    /// Synthetic graphs get round(ratio * n) extra random edges.
    double extra_edge_ratio = 0.75;
    int field_width = 1;
    int leaf_threshold = 32;
    std::uint64_t seed = 0;
    long long oracle_guard = 30000;
    bool force_dense = false;
    /// Also time BGFI (all-pairs Dijkstra).
    bool with_graph_oracle = true;
};

std::vector<BenchRecord> run_bench(const BenchOptions& options);

/// "# schema_version=1" then
/// "n,method,phase,repeat,seconds,max_abs_diff,oracle_skipped,strategies".
void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records);

} // namespace ftfi
