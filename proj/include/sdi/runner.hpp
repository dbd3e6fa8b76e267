#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace sdi {

struct RunOptions {
    std::string config_path;
    std::string out_dir;
    int threads = 1;
    std::optional<std::uint64_t> seed;  // overrides the config seed
};

/// Univariate indices: one CSV per (variable, time scale) plus persisted
/// marginal models. Returns a process exit code: 0 ok, 1 config error,
/// 2 data error, 3 every pixel failed numerically.
int run_si(const RunOptions& options);

/// Multivariate indices: per-method/per-scale CSVs plus persisted marginal
/// and vine models. Same exit-code contract as run_si.
int run_smi(const RunOptions& options);

/// Drought analytics over previously written index CSVs.
int run_analyze(const RunOptions& options);

}  // namespace sdi
