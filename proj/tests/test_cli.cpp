#include "qcasim/cli.hpp"
#include "qcasim/engines.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace qcasim;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

}  // namespace

TEST_CASE("kink subcommand prints pairwise energies") {
    const auto r = run({"kink", "--layout", "builtin:inv2"});
    CHECK(r.code == 0);
    CHECK(r.out.find("cell_i,cell_j,kink_energy_J\nin,out,") != std::string::npos);
    CHECK(r.out.rfind("# ", 0) == 0);
}

TEST_CASE("missing layout file is a domain error") {
    const auto r = run({"simulate", "--layout", "missing.qcl"});
    CHECK(r.code == 1);
    CHECK(r.err.find("cannot open layout file") != std::string::npos);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
}

TEST_CASE("usage errors exit with 2") {
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"kink", "--layout", "builtin:inv2", "--bogus"}).code == 2);
    CHECK(run({"kink", "--layout", "builtin:inv2", "--temperature", "warm"}).code == 2);
    CHECK(run({"kink", "--layout", "builtin:inv2", "--engine", "quantum"}).code == 2);
    CHECK(run({"kink", "--layout", "builtin:inv2", "--constants", "si"}).code == 2);
    CHECK(run({"kink"}).code == 2);
}

TEST_CASE("invalid parameter values are domain errors") {
    CHECK(run({"kink", "--layout", "builtin:inv2", "--temperature", "-3"}).code == 1);
    CHECK(run({"kink", "--layout", "builtin:nand"}).code == 1);
    CHECK(run({"simulate", "--layout", "builtin:inv2", "--drive", "out=1"}).code == 1);
}

TEST_CASE("help lists every coherence parameter with its default") {
    for (const char* sub : {"kink", "simulate", "truth", "sweep-temp", "sweep-gap", "layouts"}) {
        const auto r = run({sub, "--help"});
        CHECK(r.code == 0);
        const CoherenceParams d;
        for (const char* name : {"Temperature", "Relaxation Time", "Time Step", "Total Simulation Time", "Clock High",
                                 "Clock Low", "Clock Shift", "Clock Amplitude Factor", "Radius of Effect",
                                 "Layer Separation"}) {
            CHECK(r.out.find(std::string(name) + ":") != std::string::npos);
        }
        CHECK(r.out.find("Relaxation Time: 1.000000e-15 s") != std::string::npos);
        CHECK(r.out.find("Time Step: 1.000000e-16 s") != std::string::npos);
        CHECK(r.out.find("Total Simulation Time: 7.000000e-11 s") != std::string::npos);
        CHECK(r.out.find("Clock High: 9.800000e-22 J") != std::string::npos);
        CHECK(r.out.find("Clock Low: 3.800000e-23 J") != std::string::npos);
        CHECK(r.out.find("Clock Amplitude Factor: 2.000000") != std::string::npos);
        CHECK(r.out.find("Radius of Effect: 80.000000 nm") != std::string::npos);
        CHECK(r.out.find("Layer Separation: 11.500000 nm") != std::string::npos);
        CHECK(d.temperature == 1.0);
    }
}

TEST_CASE("overrides accept scientific notation and are echoed") {
    const auto r = run({"simulate", "--layout", "builtin:inv2", "--engine", "coherence", "--relaxation-time",
                        "1.000000e-015", "--total-time", "1e-13", "--stride", "1000"});
    CHECK(r.code == 0);
    CHECK(r.out.find("# override relaxation-time=1.000000e-015") != std::string::npos);
    CHECK(r.out.find("# override total-time=1e-13") != std::string::npos);
    CHECK(r.out.find("time_s,clock0_J") != std::string::npos);
}

TEST_CASE("truth subcommand") {
    const auto ok = run({"truth", "--layout", "builtin:majority"});
    CHECK(ok.code == 0);
    CHECK(ok.out.find("a,b,c,expected,polarization,pass") != std::string::npos);
    const auto bad = run({"truth", "--layout", "builtin:inv2", "--function", "buffer"});
    CHECK(bad.code == 1);
}

TEST_CASE("layout files round-trip through the layouts subcommand") {
    const auto listed = run({"layouts"});
    CHECK(listed.out.find("builtin:inv3") != std::string::npos);
    const auto text = run({"layouts", "--layout", "builtin:inv3"});
    REQUIRE(text.code == 0);
    const std::string path = "cli_roundtrip.qcl";
    std::ofstream(path) << text.out;
    const auto back = run({"layouts", "--layout", path});
    CHECK(back.out.substr(back.out.find('\n', 6)) == text.out.substr(text.out.find('\n', 6)));
    const auto sim = run({"simulate", "--layout", path});
    CHECK(sim.code == 0);
    std::remove(path.c_str());
}

TEST_CASE("--out writes the same bytes as stdout") {
    const std::string path = "cli_out.csv";
    const auto to_stdout = run({"kink", "--layout", "builtin:majority"});
    const auto to_file = run({"kink", "--layout", "builtin:majority", "--out", path});
    CHECK(to_file.code == 0);
    CHECK(to_file.out.empty());
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == to_stdout.out);
    std::remove(path.c_str());
}

TEST_CASE("sweep subcommands are deterministic across thread counts") {
    const std::vector<std::string> base{"sweep-gap", "--layout", "builtin:inv3", "--engine", "bistable"};
    auto a = base;
    a.insert(a.end(), {"--threads", "1"});
    auto b = base;
    b.insert(b.end(), {"--threads", "3"});
    const auto ra = run(a);
    const auto rb = run(b);
    CHECK(ra.code == 0);
    CHECK(ra.out == rb.out);
    CHECK(ra.out.find("gap_nm,cell_id,polarization,kink_energy_J") != std::string::npos);

    const auto cmp = run({"sweep-gap", "--layout", "builtin:inv3", "--engine", "bistable", "--reference", "inv3_Ek_J"});
    CHECK(cmp.code == 0);
    CHECK(cmp.out.find("# spearman=1.00000e+00") != std::string::npos);

    const auto temp = run({"sweep-temp", "--layout", "builtin:inv2", "--grid", "0,5", "--time-step", "1e-16",
                           "--total-time", "1e-12"});
    CHECK(temp.code == 0);
    CHECK(temp.out.find("temperature_K,cell_id,polarization\n0.00000e+00,out,") != std::string::npos);
    CHECK(run({"sweep-temp", "--layout", "builtin:inv2", "--engine", "bistable"}).code == 2);
}
