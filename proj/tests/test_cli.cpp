#include "doctest.h"

#include "test_support.hpp"
#include "waveduo/cli.hpp"
#include "waveduo/format.hpp"
#include "waveduo/harness.hpp"

#include <cmath>
#include <cstdlib>
#include <regex>
#include <set>
#include <sstream>

using testing::TempDir;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    args.insert(args.begin(), "waveduo");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = waveduo::cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("run prints the summary line") {
    TempDir tmp("cli-run");
    const auto r = cli({"run", "--a", "1", "--N", "100", "--T", "500", "--b", "b4", "--c", "c3", "--out",
                        (tmp / "r1").string()});
    CHECK(r.code == 0);
    CHECK(r.out.starts_with("CLASS=Exponential"));
    CHECK(std::filesystem::exists(tmp / "r1" / "energy.gp"));

    // The offline analyzer reproduces the manifest report.
    const auto m = waveduo::load_manifest(tmp / "r1" / "manifest.json");
    const auto a = cli({"analyze", "--in", (tmp / "r1" / "energy.csv").string()});
    CHECK(a.code == 0);
    CHECK(a.out.substr(0, a.out.find('\n')) == m.report.summary_line());
}

TEST_CASE("exit codes") {
    TempDir tmp("cli-codes");
    CHECK(cli({"run", "--a", "1", "--cfl-factor", "1.5", "--T", "1", "--out", (tmp / "x").string()}).code == 1);
    CHECK(cli({"run", "--a", "-1", "--T", "1", "--out", (tmp / "x").string()}).code == 1);
    CHECK(cli({"run", "--b", "b9", "--T", "1", "--out", (tmp / "x").string()}).code == 1);
    CHECK(cli({"run", "--stride", "zero", "--T", "1", "--out", (tmp / "x").string()}).code == 1);
    CHECK(cli({"run", "--mode", "implicit", "--T", "1", "--out", (tmp / "x").string()}).code == 1);
    CHECK(cli({"run", "--bogus"}).code == 1);
    CHECK(cli({}).code == 1);
    testing::spit(tmp / "file", "x");
    CHECK(cli({"run", "--T", "1", "--out", (tmp / "file" / "sub").string()}).code == 3);
    CHECK(cli({"analyze", "--in", (tmp / "absent.csv").string()}).code == 3);
    // Huge tabulated data overflows on the first step.
    std::string table = "table:0";
    for (int j = 1; j <= 10; ++j) table += j % 2 ? ",1e308" : ",-1e308";
    table += ",0";
    const auto r = cli({"run", "--N", "10", "--T", "1", "--initial", table + ";zero;zero;zero", "--out",
                        (tmp / "blow").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("step 1") != std::string::npos);
}

TEST_CASE("run options") {
    TempDir tmp("cli-opts");
    auto r = cli({"run", "--a", "2", "--T", "20", "--b", "indicator:0.1-0.2", "--c", "c3", "--stride", "3", "--mode",
                  "solve", "--check-dissipation", "--out", (tmp / "a").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("dissipation residual") != std::string::npos);
    auto m = waveduo::load_manifest(tmp / "a" / "manifest.json");
    CHECK(m.spec.stride == 3);
    CHECK(m.spec.mode == waveduo::StepMode::ReferenceSolve);
    CHECK(m.spec.check_dissipation);

    r = cli({"run", "--config", (tmp / "a" / "manifest.json").string(), "--stride", "auto", "--out",
             (tmp / "b").string()});
    CHECK(r.code == 0);
    m = waveduo::load_manifest(tmp / "b" / "manifest.json");
    CHECK(m.spec.a == 2.0);
    CHECK(m.spec.stride == 1);
}

TEST_CASE("default output root comes from the environment") {
    TempDir tmp("cli-env");
    setenv("WAVEDUO_OUT", tmp.path().c_str(), 1);
    const auto r = cli({"run", "--name", "envcase", "--T", "1"});
    unsetenv("WAVEDUO_OUT");
    CHECK(r.code == 0);
    CHECK(std::filesystem::exists(tmp / "envcase" / "manifest.json"));
}

TEST_CASE("analyze") {
    TempDir tmp("cli-analyze");
    std::string csv = std::string(waveduo::kEnergyCsvHeader) + "\n";
    for (int i = 0; i < 1000; ++i) {
        const double t = 10.0 * std::pow(1e4, i / 999.0);
        const double e = 5.0 * std::pow(t, -1.4);
        csv += waveduo::format_number(t) + "," + waveduo::format_number(e) + ",0,0,0,0,,,\n";
    }
    testing::spit(tmp / "p.csv", csv);
    auto r = cli({"analyze", "--in", (tmp / "p.csv").string()});
    CHECK(r.code == 0);
    std::smatch mm;
    REQUIRE(std::regex_search(r.out, mm, std::regex("alpha ([0-9.eE+-]+)")));
    CHECK(std::abs(std::stod(mm[1]) - 1.4) <= 1e-6);
    CHECK(r.out.starts_with("CLASS=Polynomial ALPHA=1.40"));
    CHECK(cli({"analyze", "--in", (tmp / "p.csv").string(), "--window", "0.3"}).code == 0);
    CHECK(cli({"analyze", "--in", (tmp / "p.csv").string(), "--window", "2"}).code == 1);

    std::string flat = std::string(waveduo::kEnergyCsvHeader) + "\n";
    for (int i = 0; i < 100; ++i) flat += std::to_string(i) + ",3.5,0,0,0,0,,,\n";
    testing::spit(tmp / "c.csv", flat);
    CHECK(cli({"analyze", "--in", (tmp / "c.csv").string()}).out.starts_with("CLASS=Conserved"));

    testing::spit(tmp / "t.csv", csv.substr(0, csv.size() - 7));
    r = cli({"analyze", "--in", (tmp / "t.csv").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("line 1001") != std::string::npos);
    CHECK(cli({"analyze"}).code == 1);
}

TEST_CASE("list-cases") {
    const auto r = cli({"list-cases"});
    CHECK(r.code == 0);
    CHECK(r.out.find("b4 = [0.1,0.2]") != std::string::npos);
    CHECK(r.out.find("a=0.5") != std::string::npos);
    CHECK(count_lines(r.out) == waveduo::paper_catalog().size());
}

TEST_CASE("paper subsets") {
    TempDir tmp("cli-paper");
    auto r = cli({"paper", "--only", "b3*", "--out", (tmp / "one").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("Conserved") != std::string::npos);
    std::size_t dirs = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(tmp / "one")) ++dirs;
    CHECK(dirs == 1);

    r = cli({"paper", "--short", "--workers", "4", "--out", (tmp / "all").string()});
    CHECK(r.code == 0);
    dirs = 0;
    for (const auto& e : std::filesystem::directory_iterator(tmp / "all")) {
        ++dirs;
        CHECK(std::filesystem::exists(e.path() / "exponent.gp"));
    }
    CHECK(dirs == 10);
    CHECK(count_lines(r.out) == 11);

    CHECK(cli({"paper", "--only", "nothing*", "--out", (tmp / "none").string()}).code == 1);
    CHECK(cli({"paper", "--workers", "0", "--short", "--out", (tmp / "w").string()}).code == 1);
}

TEST_CASE("help text round trip") {
    const auto top = cli({"--help"});
    CHECK(top.code == 0);
    for (const char* sub : {"run", "paper", "analyze", "list-cases"}) CHECK(top.out.find(sub) != std::string::npos);

    const std::map<std::string, std::set<std::string>> documented{
        {"run",
         {"--config", "--name", "--a", "--N", "--T", "--cfl-factor", "--b", "--c", "--initial", "--stride", "--mode",
          "--check-dissipation", "--out"}},
        {"paper", {"--out", "--only", "--workers", "--short"}},
        {"analyze", {"--in", "--window"}},
        {"list-cases", {}},
    };
    const std::regex flag_re("(--[a-zA-Z][a-zA-Z-]*)");
    for (const auto& [sub, flags] : documented) {
        const auto h = cli({sub, "--help"});
        CHECK(h.code == 0);
        std::set<std::string> in_help;
        for (auto it = std::sregex_iterator(h.out.begin(), h.out.end(), flag_re); it != std::sregex_iterator(); ++it)
            in_help.insert((*it)[1]);
        in_help.erase("--help");
        CHECK_MESSAGE(in_help == flags, sub);
    }
}
