#include "sdi/config.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace sdi {

namespace {

using nlohmann::json;

struct Collector {
    std::vector<std::string> problems;

    void add(const std::string& msg) { problems.push_back(msg); }

    [[noreturn]] void fail() const {
        std::string joined = "invalid configuration:";
        for (const auto& p : problems) joined += "\n  - " + p;
        throw ConfigError(joined);
    }
};

TimeStamp parse_stamp_checked(const json& j, const std::string& field, Collector& errs) {
    if (!j.is_string()) {
        errs.add(field + ": expected \"YYYY-MM\" string");
        return {};
    }
    try {
        return parse_time_stamp(j.get<std::string>());
    } catch (const ParseError& e) {
        errs.add(field + ": " + e.what());
        return {};
    }
}

}  // namespace

std::string to_string(SmiMethod m) {
    switch (m) {
        case SmiMethod::A:
            return "a";
        case SmiMethod::M:
            return "m";
        case SmiMethod::N:
            return "n";
    }
    return "?";
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json root;
    try {
        root = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be a JSON object");

    Collector errs;
    RunConfig cfg;

    if (root.contains("dataset")) {
        const json& ds = root["dataset"];
        if (!ds.is_object()) {
            errs.add("dataset: expected an object");
        } else {
            if (ds.contains("files")) {
                if (!ds["files"].is_array() || ds["files"].empty())
                    errs.add("dataset.files: expected a non-empty array of paths");
                else
                    for (const json& f : ds["files"]) {
                        if (!f.is_string())
                            errs.add("dataset.files: entries must be strings");
                        else
                            cfg.dataset.files.push_back(f.get<std::string>());
                    }
            }
            if (ds.contains("variables")) {
                if (!ds["variables"].is_array() || ds["variables"].empty()) {
                    errs.add("dataset.variables: expected a non-empty array");
                } else {
                    for (const json& v : ds["variables"]) {
                        VariableConfig vc;
                        if (v.is_string()) {
                            vc.name = v.get<std::string>();
                        } else if (v.is_object() && v.contains("name") && v["name"].is_string()) {
                            vc.name = v["name"].get<std::string>();
                            if (v.contains("orientation")) {
                                std::string o = v["orientation"].is_string()
                                                    ? v["orientation"].get<std::string>()
                                                    : std::string();
                                if (o == "positive")
                                    vc.orientation = Orientation::Positive;
                                else if (o == "negative")
                                    vc.orientation = Orientation::Negative;
                                else
                                    errs.add("variable '" + vc.name +
                                             "': orientation must be \"positive\" or \"negative\"");
                            }
                            if (v.contains("p")) {
                                if (!v["p"].is_number_integer() || v["p"].get<int>() < 0)
                                    errs.add("variable '" + vc.name + "': p must be a non-negative integer");
                                else
                                    vc.marginal.p = v["p"].get<int>();
                            }
                            if (v.contains("q")) {
                                if (!v["q"].is_number_integer() || v["q"].get<int>() < 0)
                                    errs.add("variable '" + vc.name + "': q must be a non-negative integer");
                                else
                                    vc.marginal.q = v["q"].get<int>();
                            }
                            if (v.contains("lambda")) {
                                if (!v["lambda"].is_number())
                                    errs.add("variable '" + vc.name + "': lambda must be a number");
                                else
                                    vc.marginal.fixed_lambda = v["lambda"].get<double>();
                            }
                        } else {
                            errs.add("dataset.variables: entries must be names or objects with a name");
                            continue;
                        }
                        for (const auto& seen : cfg.variables)
                            if (seen.name == vc.name)
                                errs.add("duplicate variable '" + vc.name + "'");
                        cfg.dataset.variables.push_back(vc.name);
                        cfg.variables.push_back(std::move(vc));
                    }
                }
            }
            if (ds.contains("bbox")) {
                const json& b = ds["bbox"];
                if (!b.is_object() || !b.contains("west") || !b.contains("east") ||
                    !b.contains("south") || !b.contains("north")) {
                    errs.add("dataset.bbox: expected west/east/south/north numbers");
                } else {
                    BoundingBox bb;
                    bb.west = b["west"].get<double>();
                    bb.east = b["east"].get<double>();
                    bb.south = b["south"].get<double>();
                    bb.north = b["north"].get<double>();
                    if (!(bb.west < bb.east) || !(bb.south < bb.north))
                        errs.add("dataset.bbox: empty box (west<east and south<north required)");
                    cfg.dataset.bbox = bb;
                }
            }
            if (ds.contains("time_range")) {
                const json& t = ds["time_range"];
                if (!t.is_object() || !t.contains("start") || !t.contains("end")) {
                    errs.add("dataset.time_range: expected start and end");
                } else {
                    TimeStamp a = parse_stamp_checked(t["start"], "dataset.time_range.start", errs);
                    TimeStamp b = parse_stamp_checked(t["end"], "dataset.time_range.end", errs);
                    if (a > b) errs.add("dataset.time_range: start is after end");
                    cfg.dataset.time_range = {a, b};
                }
            }
        }
    }

    if (root.contains("scales")) {
        cfg.scales.clear();
        if (!root["scales"].is_array() || root["scales"].empty()) {
            errs.add("scales: expected a non-empty array of integers");
        } else {
            for (const json& s : root["scales"]) {
                if (!s.is_number_integer() || s.get<int>() < 1)
                    errs.add("scales: entries must be integers >= 1");
                else
                    cfg.scales.push_back(s.get<int>());
            }
        }
    }

    if (root.contains("methods")) {
        cfg.methods.clear();
        if (!root["methods"].is_array() || root["methods"].empty()) {
            errs.add("methods: expected a non-empty array");
        } else {
            for (const json& m : root["methods"]) {
                std::string s = m.is_string() ? m.get<std::string>() : std::string();
                if (s == "a")
                    cfg.methods.push_back(SmiMethod::A);
                else if (s == "m")
                    cfg.methods.push_back(SmiMethod::M);
                else if (s == "n")
                    cfg.methods.push_back(SmiMethod::N);
                else
                    errs.add("methods: entries must be \"a\", \"m\" or \"n\"");
            }
        }
    }

    if (root.contains("weights")) {
        if (!root["weights"].is_array()) {
            errs.add("weights: expected an array of positive numbers");
        } else {
            std::vector<double> w;
            for (const json& x : root["weights"]) {
                double v = x.is_number() ? x.get<double>() : -1.0;
                if (!(v > 0.0) || !std::isfinite(v)) {
                    errs.add("weights: entries must be positive numbers");
                    break;
                }
                w.push_back(v);
            }
            if (!w.empty()) cfg.weights = std::move(w);
        }
    }

    if (root.contains("vine")) {
        const json& vn = root["vine"];
        if (!vn.is_object()) {
            errs.add("vine: expected an object");
        } else {
            if (vn.contains("matrix")) {
                if (!vn["matrix"].is_array()) {
                    errs.add("vine.matrix: expected an array of integer rows");
                } else {
                    std::vector<std::vector<int>> rows;
                    bool ok = true;
                    for (const json& row : vn["matrix"]) {
                        if (!row.is_array()) {
                            ok = false;
                            break;
                        }
                        std::vector<int> r;
                        for (const json& x : row) {
                            if (!x.is_number_integer()) {
                                ok = false;
                                break;
                            }
                            r.push_back(x.get<int>());
                        }
                        rows.push_back(std::move(r));
                    }
                    if (!ok)
                        errs.add("vine.matrix: rows must be arrays of integers");
                    else
                        cfg.vine.matrix = std::move(rows);
                }
            }
            if (vn.contains("candidates")) {
                if (!vn["candidates"].is_array() || vn["candidates"].empty()) {
                    errs.add("vine.candidates: expected a non-empty array of family tags");
                } else {
                    for (const json& c : vn["candidates"]) {
                        if (!c.is_string()) {
                            errs.add("vine.candidates: entries must be strings");
                            continue;
                        }
                        try {
                            cfg.vine.candidates.push_back(parse_family_tag(c.get<std::string>()));
                        } catch (const ParseError& e) {
                            errs.add(std::string("vine.candidates: ") + e.what());
                        }
                    }
                }
            }
            if (vn.contains("alpha")) {
                double a = vn["alpha"].is_number() ? vn["alpha"].get<double>() : 2.0;
                if (!(a < 1.0) || !std::isfinite(a))
                    errs.add("vine.alpha: must be a number below 1 (values <= 0 disable the pre-test)");
                else
                    cfg.vine.alpha = a;
            }
        }
    }

    if (root.contains("seed")) {
        if (!root["seed"].is_number_unsigned() && !root["seed"].is_number_integer())
            errs.add("seed: expected a non-negative integer");
        else if (root["seed"].is_number_integer() && root["seed"].get<long long>() < 0)
            errs.add("seed: expected a non-negative integer");
        else
            cfg.seed = root["seed"].get<std::uint64_t>();
    }

    if (root.contains("analyze")) {
        const json& an = root["analyze"];
        AnalyzeSettings as;
        if (!an.is_object() || !an.contains("index_files") || !an["index_files"].is_array() ||
            an["index_files"].empty()) {
            errs.add("analyze.index_files: expected a non-empty array of paths");
        } else {
            for (const json& f : an["index_files"]) {
                if (!f.is_string())
                    errs.add("analyze.index_files: entries must be strings");
                else
                    as.index_files.push_back(f.get<std::string>());
            }
        }
        if (an.is_object() && an.contains("categories")) {
            if (!an["categories"].is_array() || an["categories"].empty()) {
                errs.add("analyze.categories: expected a non-empty array");
            } else {
                as.categories.clear();
                for (const json& c : an["categories"]) {
                    try {
                        as.categories.insert(parse_category(c.is_string() ? c.get<std::string>()
                                                                          : std::string()));
                    } catch (const ParseError& e) {
                        errs.add(std::string("analyze.categories: ") + e.what());
                    }
                }
            }
        }
        if (an.is_object() && an.contains("events")) {
            if (!an["events"].is_array()) {
                errs.add("analyze.events: expected an array");
            } else {
                for (const json& ev : an["events"]) {
                    if (!ev.is_object() || !ev.contains("name") || !ev.contains("start") ||
                        !ev.contains("end") || !ev["name"].is_string()) {
                        errs.add("analyze.events: entries need name/start/end");
                        continue;
                    }
                    EventWindow w;
                    w.name = ev["name"].get<std::string>();
                    w.start = parse_stamp_checked(ev["start"], "event '" + w.name + "' start", errs);
                    w.end = parse_stamp_checked(ev["end"], "event '" + w.name + "' end", errs);
                    if (w.start > w.end) errs.add("event '" + w.name + "': start is after end");
                    as.events.push_back(std::move(w));
                }
            }
        }
        cfg.analyze = std::move(as);
    }

    // Cross-field checks.
    if (cfg.weights) {
        if (!cfg.variables.empty() && cfg.weights->size() != cfg.variables.size())
            errs.add("weights: expected one weight per variable (" +
                     std::to_string(cfg.variables.size()) + ")");
        for (SmiMethod m : cfg.methods)
            if (m == SmiMethod::M)
                errs.add("weights: method \"m\" does not support weights");
    }
    if (cfg.vine.matrix && !cfg.variables.empty()) {
        const auto& rows = *cfg.vine.matrix;
        if (rows.size() != cfg.variables.size())
            errs.add("vine.matrix: dimension must match the number of variables");
        for (const auto& r : rows)
            if (r.size() != rows.size()) errs.add("vine.matrix: must be square");
    }

    if (!errs.problems.empty()) errs.fail();
    return cfg;
}

}  // namespace sdi
