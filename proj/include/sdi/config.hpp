#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sdi/copula.hpp"
#include "sdi/index.hpp"
#include "sdi/ingest.hpp"
#include "sdi/marginal.hpp"

namespace sdi {

struct VariableConfig {
    std::string name;
    Orientation orientation = Orientation::Positive;
    MarginalOptions marginal;
};

struct VineSettings {
    std::optional<std::vector<std::vector<int>>> matrix;
    std::vector<FamilyTag> candidates;  // empty means default_candidates()
    double alpha = 0.05;
};

struct EventWindow {
    std::string name;
    TimeStamp start;
    TimeStamp end;
};

struct AnalyzeSettings {
    std::vector<std::string> index_files;
    std::set<Category> categories{Category::D3, Category::D4};
    std::vector<EventWindow> events;
};

enum class SmiMethod { A, M, N };

std::string to_string(SmiMethod m);

/// Parsed run configuration; shared by the si, smi and analyze subcommands.
struct RunConfig {
    DatasetSpec dataset;  // variables derived from the variable list
    std::vector<VariableConfig> variables;
    std::vector<int> scales{1};
    std::vector<SmiMethod> methods{SmiMethod::A};
    std::optional<std::vector<double>> weights;
    VineSettings vine;
    std::uint64_t seed = 0;
    std::optional<AnalyzeSettings> analyze;
};

/// Loads and validates a JSON run configuration. All problems are collected
/// and reported in one ConfigError.
RunConfig load_config(const std::string& path);

}  // namespace sdi
