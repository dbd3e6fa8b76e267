#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "sdi/io.hpp"
#include "temp_dir.hpp"

using testutil::TempDir;
using testutil::slurp;

namespace {

int run_cli(const std::string& args, const TempDir& dir, const std::string& log_stem = "last") {
    const std::string cmd = std::string(SDI_CLI_PATH) + " " + args + " >" +
                            (dir / (log_stem + ".out")) + " 2>" + (dir / (log_stem + ".err"));
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

/// Two pixels, two variables, ten years of synthetic monthly data.
std::string dataset_csv() {
    std::string csv = "pixel_id,lon,lat,year,month,variable,value\n";
    int which = 0;
    for (const auto& [id, lon, lat] :
         {std::tuple{"p1", 10.0, 48.0}, std::tuple{"p2", 11.0, 49.0}}) {
        for (const char* var : {"PRE", "TMP"}) {
            auto series = oracle::seasonal_series(9000u + 13u * which, 120, 0.4, {1961, 1}, var);
            ++which;
            for (std::size_t k = 0; k < series.size(); ++k)
                csv += std::string(id) + "," + sdi::format_double(lon) + "," +
                       sdi::format_double(lat) + "," + std::to_string(series.stamps()[k].year) +
                       "," + std::to_string(series.stamps()[k].month) + "," + var + "," +
                       sdi::format_double(series.values()[k]) + "\n";
        }
    }
    return csv;
}

const char* kSiConfig = R"json({
    "dataset": {"files": ["data.csv"], "variables": ["PRE", "TMP"]},
    "scales": [1, 3]
})json";

const char* kSmiConfig = R"json({
    "dataset": {"files": ["data.csv"], "variables": ["PRE", "TMP"]},
    "scales": [1],
    "methods": ["a", "m", "n"]
})json";

}  // namespace

TEST_CASE("si writes one csv per variable and scale") {
    TempDir dir;
    dir.file("data.csv", dataset_csv());
    auto cfg = dir.file("run.json", kSiConfig);
    auto out = dir / "out";

    REQUIRE(run_cli("si --config " + cfg + " --out " + out, dir) == 0);
    CHECK(slurp(dir / "last.out").find("processed 2/2") != std::string::npos);

    for (const char* name :
         {"si_PRE_l1.csv", "si_PRE_l3.csv", "si_TMP_l1.csv", "si_TMP_l3.csv"}) {
        CAPTURE(name);
        sdi::IndexFile f = sdi::read_index_csv(out + "/" + name);
        REQUIRE(f.pixels.size() == 2);
        CHECK(f.pixels[0].id == "p1");
        CHECK(f.series[0].stamps.size() == 120);
    }
    CHECK(sdi::read_index_csv(out + "/si_PRE_l1.csv").series[0].scale == 1);
    CHECK(sdi::read_index_csv(out + "/si_PRE_l3.csv").series[1].scale == 3);

    // Persisted marginal models reload.
    sdi::MarginalModel m = sdi::read_marginal_model(out + "/models/marginal_p1_PRE.txt");
    CHECK(m.variable_id == "PRE");
    CHECK(m.u.size() == 120);
}

TEST_CASE("si output is reproducible byte for byte") {
    TempDir dir;
    dir.file("data.csv", dataset_csv());
    auto cfg = dir.file("run.json", kSiConfig);
    REQUIRE(run_cli("si --config " + cfg + " --out " + dir / "o1", dir) == 0);
    REQUIRE(run_cli("si --config " + cfg + " --out " + dir / "o2", dir) == 0);
    const std::string a = slurp(dir / "o1/si_PRE_l1.csv");
    CHECK(!a.empty());
    CHECK(a == slurp(dir / "o2/si_PRE_l1.csv"));
    CHECK(slurp(dir / "o1/models/marginal_p2_TMP.txt") ==
          slurp(dir / "o2/models/marginal_p2_TMP.txt"));
}

TEST_CASE("smi writes per-method csvs and a vine model") {
    TempDir dir;
    dir.file("data.csv", dataset_csv());
    auto cfg = dir.file("run.json", kSmiConfig);
    auto out = dir / "out";

    REQUIRE(run_cli("smi --config " + cfg + " --out " + out, dir) == 0);
    for (const char* name : {"smi_a_l1.csv", "smi_m_l1.csv", "smi_n_l1.csv"}) {
        CAPTURE(name);
        sdi::IndexFile f = sdi::read_index_csv(out + "/" + name);
        REQUIRE(f.pixels.size() == 2);
        CHECK(f.series[0].scale == 1);
        for (double v : f.series[0].values) CHECK(std::isfinite(v));
    }
    sdi::VineModel vm = sdi::read_vine_model(out + "/models/vine_p1.txt");
    CHECK(vm.structure.dim() == 2);
    CHECK(vm.variable_names == std::vector<std::string>{"PRE", "TMP"});
    REQUIRE(vm.copulas.size() == 1);
}

TEST_CASE("thread count does not change the output") {
    TempDir dir;
    dir.file("data.csv", dataset_csv());
    auto cfg = dir.file("run.json", kSmiConfig);
    REQUIRE(run_cli("smi --config " + cfg + " --out " + dir / "t1" + " --threads 1", dir) == 0);
    REQUIRE(run_cli("smi --config " + cfg + " --out " + dir / "t2" + " --threads 2", dir) == 0);
    for (const char* name : {"smi_a_l1.csv", "smi_m_l1.csv", "smi_n_l1.csv"}) {
        CAPTURE(name);
        CHECK(slurp(dir / ("t1/" + std::string(name))) == slurp(dir / ("t2/" + std::string(name))));
    }
}

TEST_CASE("the seed flag is accepted and keeps the run deterministic") {
    TempDir dir;
    dir.file("data.csv", dataset_csv());
    auto cfg = dir.file("run.json", kSiConfig);
    REQUIRE(run_cli("si --config " + cfg + " --out " + dir / "s1" + " --seed 7", dir) == 0);
    REQUIRE(run_cli("si --config " + cfg + " --out " + dir / "s2" + " --seed 7", dir) == 0);
    CHECK(slurp(dir / "s1/si_TMP_l3.csv") == slurp(dir / "s2/si_TMP_l3.csv"));
}

TEST_CASE("usage and configuration failures exit with 1") {
    TempDir dir;
    dir.file("data.csv", dataset_csv());
    CHECK(run_cli("", dir) == 1);                          // no subcommand
    CHECK(run_cli("bogus --config x --out y", dir) == 1);  // unknown subcommand
    CHECK(run_cli("si --out " + dir / "o", dir) == 1);     // missing --config
    CHECK(run_cli("si --config " + dir / "none.json" + " --out " + dir / "o", dir) == 1);
    CHECK(run_cli("--help", dir) == 0);

    auto bad_json = dir.file("bad.json", "{");
    CHECK(run_cli("si --config " + bad_json + " --out " + dir / "o", dir) == 1);
    auto no_files = dir.file("nf.json", R"json({"dataset": {"variables": ["PRE"]}})json");
    CHECK(run_cli("si --config " + no_files + " --out " + dir / "o", dir) == 1);
    CHECK(slurp(dir / "last.err").find("config error") != std::string::npos);
    // Structurally invalid vine matrix is caught before any data is read.
    auto bad_vine = dir.file("bv.json", R"json({
        "dataset": {"files": ["data.csv"], "variables": ["PRE", "TMP"]},
        "vine": {"matrix": [[1, 0], [1, 1]]}
    })json");
    CHECK(run_cli("smi --config " + bad_vine + " --out " + dir / "o", dir) == 1);
}

TEST_CASE("data problems exit with 2") {
    TempDir dir;
    // A record with a one-month hole.
    std::string csv = "pixel_id,lon,lat,year,month,variable,value\n";
    for (int m = 1; m <= 12; ++m)
        if (m != 7) csv += "p1,0,0,2001," + std::to_string(m) + ",PRE," + std::to_string(m) + "\n";
    dir.file("data.csv", csv);
    auto cfg = dir.file("run.json", R"json({"dataset": {"files": ["data.csv"], "variables": ["PRE"]}})json");
    CHECK(run_cli("si --config " + cfg + " --out " + dir / "o", dir) == 2);
    CHECK(slurp(dir / "last.err").find("data error") != std::string::npos);
}

TEST_CASE("a fully failed grid exits with 3 and reports the pixels") {
    TempDir dir;
    std::string csv = "pixel_id,lon,lat,year,month,variable,value\n";
    for (int k = 0; k < 120; ++k)  // constant record: standardization must fail
        csv += "p1,0,0," + std::to_string(1991 + k / 12) + "," + std::to_string(1 + k % 12) +
               ",PRE,42\n";
    dir.file("data.csv", csv);
    auto cfg = dir.file("run.json", R"json({"dataset": {"files": ["data.csv"], "variables": ["PRE"]}})json");
    auto out = dir / "o";
    CHECK(run_cli("si --config " + cfg + " --out " + out, dir) == 3);
    const std::string warnings = slurp(out + "/warnings.txt");
    CHECK(warnings.find("pixel p1") != std::string::npos);
    CHECK(warnings.find("PRE") != std::string::npos);
}

TEST_CASE("analyze produces area, event and tau files") {
    TempDir dir;
    dir.file("data.csv", dataset_csv());
    auto si_cfg = dir.file("run.json", kSiConfig);
    auto si_out = dir / "six";
    REQUIRE(run_cli("si --config " + si_cfg + " --out " + si_out, dir) == 0);

    auto an_cfg = dir.file("an.json", R"json({
        "analyze": {
            "index_files": ["six/si_PRE_l1.csv", "six/si_TMP_l1.csv"],
            "categories": ["D0", "D1", "D2", "D3", "D4"],
            "events": [
                {"name": "mid", "start": "1965-01", "end": "1966-12"},
                {"name": "outside", "start": "1870-01", "end": "1880-12"}
            ]
        }
    })json");
    auto out = dir / "ana";
    REQUIRE(run_cli("analyze --config " + an_cfg + " --out " + out, dir) == 0);

    const std::string area = slurp(out + "/area_si_PRE_l1.csv");
    REQUIRE(area.rfind("year,month,fraction\n", 0) == 0);
    // Header plus one row per month.
    CHECK(std::count(area.begin(), area.end(), '\n') == 121);
    // Fractions parse and stay inside [0, 1].
    std::size_t pos = area.find('\n') + 1;
    while (pos < area.size()) {
        std::size_t eol = area.find('\n', pos);
        std::size_t comma = area.rfind(',', eol);
        double frac = sdi::parse_double(area.substr(comma + 1, eol - comma - 1));
        CHECK(frac >= 0.0);
        CHECK(frac <= 1.0);
        pos = eol + 1;
    }

    const std::string events = slurp(out + "/events_si_PRE_l1.csv");
    CHECK(events.rfind("event,year,month,fraction\n", 0) == 0);
    CHECK(events.find("mid,196") != std::string::npos);
    CHECK(events.find("outside,NA,NA,NA") != std::string::npos);
    CHECK(slurp(out + "/warnings.txt").find("outside") != std::string::npos);

    const std::string tau = slurp(out + "/tau_si_PRE_l1__si_TMP_l1.csv");
    REQUIRE(tau.rfind("pixel_id,lon,lat,tau\n", 0) == 0);
    CHECK(tau.find("p1,") != std::string::npos);
    CHECK(tau.find("p2,") != std::string::npos);

    // Missing index file is a data problem.
    auto bad = dir.file("bad.json", R"json({"analyze": {"index_files": ["nope.csv"]}})json");
    CHECK(run_cli("analyze --config " + bad + " --out " + dir / "o2", dir) == 2);
    // Config without an analyze section cannot drive the subcommand.
    CHECK(run_cli("analyze --config " + si_cfg + " --out " + dir / "o3", dir) == 1);
}
