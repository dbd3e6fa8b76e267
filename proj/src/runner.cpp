#include "sdi/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include "sdi/analytics.hpp"
#include "sdi/config.hpp"
#include "sdi/io.hpp"
#include "sdi/vine.hpp"

namespace sdi {

namespace fs = std::filesystem;

namespace {

std::string sanitize(const std::string& s) {
    std::string out;
    for (char ch : s)
        out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '.') ? ch : '_';
    return out.empty() ? std::string("_") : out;
}

struct PixelWork {
    bool ok = false;
    std::string error;
    std::vector<MarginalModel> marginals;
    std::optional<VineModel> vine;
    std::map<std::string, IndexSeries> outputs;  // file stem -> series
    std::vector<std::string> warnings;
};

PixelWork process_pixel(const RunConfig& cfg, const PixelGrid& grid, std::size_t pix,
                        bool with_vine) {
    PixelWork w;
    try {
        const std::size_t d = cfg.variables.size();
        w.marginals.reserve(d);
        for (std::size_t v = 0; v < d; ++v) {
            const VariableConfig& vc = cfg.variables[v];
            w.marginals.push_back(fit_marginal(grid.make_series(pix, grid.variable_index(vc.name)),
                                               vc.orientation, vc.marginal));
        }

        if (!with_vine) {
            for (std::size_t v = 0; v < d; ++v)
                for (int l : cfg.scales)
                    w.outputs["si_" + sanitize(cfg.variables[v].name) + "_l" + std::to_string(l)] =
                        si(grid.stamps, w.marginals[v].z, l);
        } else {
            std::vector<std::vector<double>> ucols;
            ucols.reserve(d);
            for (const MarginalModel& m : w.marginals) ucols.push_back(m.u);
            CopulaData udata{ColumnMatrix(std::move(ucols))};

            RVineMatrix structure = cfg.vine.matrix ? RVineMatrix(*cfg.vine.matrix)
                                                    : default_structure(static_cast<int>(d));
            std::vector<FamilyTag> candidates =
                cfg.vine.candidates.empty() ? default_candidates() : cfg.vine.candidates;
            VineFit vf = fit_vine(udata, structure, candidates, cfg.vine.alpha, &w.warnings);
            vf.model.variable_names = cfg.dataset.variables;

            RosenblattData vdata = rosenblatt(vf.model, udata);
            std::vector<double> weights =
                cfg.weights ? *cfg.weights : std::vector<double>(d, 1.0);
            for (SmiMethod m : cfg.methods) {
                for (int l : cfg.scales) {
                    IndexSeries s;
                    switch (m) {
                        case SmiMethod::A:
                            s = smi_a(grid.stamps, vdata, weights, l);
                            break;
                        case SmiMethod::M:
                            s = smi_m(grid.stamps, vdata, l);
                            break;
                        case SmiMethod::N:
                            s = smi_n(grid.stamps, udata, weights, l);
                            break;
                    }
                    w.outputs["smi_" + to_string(m) + "_l" + std::to_string(l)] = std::move(s);
                }
            }
            w.vine = std::move(vf.model);
        }
        w.ok = true;
    } catch (const Error& e) {
        w.error = e.what();
    }
    return w;
}

int run_pixel_command(const RunOptions& opt, bool with_vine) {
    RunConfig cfg;
    try {
        cfg = load_config(opt.config_path);
        if (cfg.dataset.files.empty())
            throw ConfigError("config needs dataset.files for this command");
        if (cfg.variables.empty())
            throw ConfigError("config needs dataset.variables for this command");
        if (cfg.weights && cfg.weights->size() != cfg.variables.size())
            throw ConfigError("weights: expected one weight per variable");
        if (cfg.vine.matrix) RVineMatrix(*cfg.vine.matrix);  // structural validation
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }
    if (opt.seed) cfg.seed = *opt.seed;

    // Data file paths are resolved against the config file's directory.
    const fs::path cfg_dir = fs::path(opt.config_path).parent_path();
    for (std::string& f : cfg.dataset.files)
        if (!fs::path(f).is_absolute()) f = (cfg_dir / f).string();

    PixelGrid grid;
    try {
        grid = load_grid(cfg.dataset);
    } catch (const Error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    }

    const std::size_t np = grid.pixels.size();
    std::vector<PixelWork> work(np);
    const int threads =
        std::clamp<int>(opt.threads, 1, static_cast<int>(std::max<std::size_t>(np, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < np; ++i) work[i] = process_pixel(cfg, grid, i, with_vine);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < np; i = next.fetch_add(1))
                    work[i] = process_pixel(cfg, grid, i, with_vine);
            });
        for (auto& th : pool) th.join();
    }

    std::error_code ec;
    fs::create_directories(fs::path(opt.out_dir) / "models", ec);
    if (ec) {
        std::cerr << "error: cannot create output directory '" << opt.out_dir << "'\n";
        return 2;
    }

    // Collect the output stems in deterministic order.
    std::vector<std::string> stems;
    for (const PixelWork& w : work)
        if (w.ok) {
            for (const auto& [stem, series] : w.outputs) stems.push_back(stem);
            break;
        }

    std::size_t failed = 0;
    std::vector<std::string> warning_lines;
    for (std::size_t i = 0; i < np; ++i) {
        if (!work[i].ok) {
            ++failed;
            warning_lines.push_back("pixel " + grid.pixels[i].id + ": " + work[i].error);
        }
        for (const std::string& msg : work[i].warnings)
            warning_lines.push_back("pixel " + grid.pixels[i].id + ": " + msg);
    }

    try {
        for (const std::string& stem : stems) {
            IndexFile file;
            for (std::size_t i = 0; i < np; ++i) {
                if (!work[i].ok) continue;
                file.pixels.push_back(grid.pixels[i]);
                file.series.push_back(work[i].outputs.at(stem));
            }
            write_index_csv(file, (fs::path(opt.out_dir) / (stem + ".csv")).string());
        }
        for (std::size_t i = 0; i < np; ++i) {
            if (!work[i].ok) continue;
            const std::string pid = sanitize(grid.pixels[i].id);
            for (const MarginalModel& m : work[i].marginals)
                write_marginal_model(m, (fs::path(opt.out_dir) / "models" /
                                         ("marginal_" + pid + "_" + sanitize(m.variable_id) + ".txt"))
                                            .string());
            if (work[i].vine)
                write_vine_model(*work[i].vine,
                                 (fs::path(opt.out_dir) / "models" / ("vine_" + pid + ".txt")).string());
        }
        if (!warning_lines.empty()) {
            std::ofstream wf(fs::path(opt.out_dir) / "warnings.txt");
            for (const std::string& line : warning_lines) wf << line << '\n';
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    if (failed == np) {
        std::cerr << "error: all " << np << " pixels failed; see warnings.txt\n";
        return 3;
    }
    std::cout << "processed " << (np - failed) << "/" << np << " pixels, wrote " << stems.size()
              << " index file(s) to " << opt.out_dir << '\n';
    return 0;
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

}  // namespace

int run_si(const RunOptions& options) { return run_pixel_command(options, false); }

int run_smi(const RunOptions& options) { return run_pixel_command(options, true); }

int run_analyze(const RunOptions& options) {
    RunConfig cfg;
    try {
        cfg = load_config(options.config_path);
        if (!cfg.analyze) throw ConfigError("config has no analyze section");
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }
    const AnalyzeSettings& an = *cfg.analyze;

    const fs::path cfg_dir = fs::path(options.config_path).parent_path();
    std::vector<std::string> paths;
    for (const std::string& f : an.index_files)
        paths.push_back(fs::path(f).is_absolute() ? f : (cfg_dir / f).string());

    std::vector<IndexFile> files;
    try {
        for (const std::string& p : paths) files.push_back(read_index_csv(p));
    } catch (const Error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    }

    std::error_code ec;
    fs::create_directories(options.out_dir, ec);
    if (ec) {
        std::cerr << "error: cannot create output directory '" << options.out_dir << "'\n";
        return 2;
    }

    std::vector<std::string> warning_lines;
    try {
        for (std::size_t f = 0; f < files.size(); ++f) {
            const std::string stem = stem_of(paths[f]);
            AreaSeries area = area_affected(files[f].series, an.categories);
            {
                std::ofstream out(fs::path(options.out_dir) / ("area_" + stem + ".csv"));
                if (!out) throw IoError("cannot write area file");
                out << "year,month,fraction\n";
                for (std::size_t k = 0; k < area.stamps.size(); ++k)
                    out << area.stamps[k].year << ',' << area.stamps[k].month << ','
                        << format_double(area.fraction[k]) << '\n';
            }
            if (!an.events.empty()) {
                std::ofstream out(fs::path(options.out_dir) / ("events_" + stem + ".csv"));
                if (!out) throw IoError("cannot write events file");
                out << "event,year,month,fraction\n";
                for (const EventWindow& ev : an.events) {
                    try {
                        PeakExtent pk = peak_extent(area, ev.start, ev.end);
                        out << ev.name << ',' << pk.stamp.year << ',' << pk.stamp.month << ','
                            << format_double(pk.fraction) << '\n';
                    } catch (const EmptyWindow& e) {
                        out << ev.name << ",NA,NA,NA\n";
                        warning_lines.push_back(stem + " event " + ev.name + ": " + e.what());
                    }
                }
            }
        }

        for (std::size_t i = 0; i < files.size(); ++i)
            for (std::size_t j = i + 1; j < files.size(); ++j) {
                // Align the two files on their common pixels.
                std::map<std::string, std::size_t> by_id;
                for (std::size_t p = 0; p < files[j].pixels.size(); ++p)
                    by_id[files[j].pixels[p].id] = p;
                std::vector<Pixel> common;
                std::vector<IndexSeries> sa, sb;
                for (std::size_t p = 0; p < files[i].pixels.size(); ++p) {
                    auto it = by_id.find(files[i].pixels[p].id);
                    if (it == by_id.end()) continue;
                    common.push_back(files[i].pixels[p]);
                    sa.push_back(files[i].series[p]);
                    sb.push_back(files[j].series[it->second]);
                }
                if (common.empty()) {
                    warning_lines.push_back("tau " + stem_of(paths[i]) + "/" + stem_of(paths[j]) +
                                            ": no common pixels");
                    continue;
                }
                std::vector<double> tau = tau_map(sa, sb);
                std::ofstream out(fs::path(options.out_dir) /
                                  ("tau_" + stem_of(paths[i]) + "__" + stem_of(paths[j]) + ".csv"));
                if (!out) throw IoError("cannot write tau file");
                out << "pixel_id,lon,lat,tau\n";
                for (std::size_t p = 0; p < common.size(); ++p)
                    out << common[p].id << ',' << format_double(common[p].lon) << ','
                        << format_double(common[p].lat) << ',' << format_double(tau[p]) << '\n';
            }

        if (!warning_lines.empty()) {
            std::ofstream wf(fs::path(options.out_dir) / "warnings.txt");
            for (const std::string& line : warning_lines) wf << line << '\n';
        }
    } catch (const Error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    }

    std::cout << "analyzed " << files.size() << " index file(s), output in " << options.out_dir
              << '\n';
    return 0;
}

}  // namespace sdi
