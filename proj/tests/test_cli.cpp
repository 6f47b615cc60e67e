#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "semicap/cli.hpp"
#include "semicap/config.hpp"
#include "semicap/errors.hpp"
#include "semicap/table.hpp"

using namespace semicap;
namespace fs = std::filesystem;

namespace {

const char* kRll10 = R"(; forbid 11
[system]
alphabet = 0,1
dim = 1

[constraint]
type = rll
k = 1
p = 0
)";

const char* kFull = R"([system]
alphabet = 0,1

[constraint]
type = full
shape = segment:2

[solver]
hind_restarts = 2
)";

const char* kRll02 = R"([constraint]
type = rll
k = 1
p = 0.2

[solver]
hind_restarts = 3
seed = 5
)";

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("semicap_cli_" + std::to_string(std::rand()) + "_" +
                                            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }

    std::string write(const std::string& name, const std::string& text) const {
        const auto p = path / name;
        std::ofstream(p) << text;
        return p.string();
    }
};

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "semicap");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

ParsedCsv csv(const std::string& text) {
    std::istringstream in(text);
    return parse_csv(in);
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing") {
    const auto cfg = parse_config(kRll10);
    CHECK(cfg.alphabet.size() == 2);
    CHECK(cfg.dim == 1);
    REQUIRE(cfg.forbidden);
    CHECK(*cfg.forbidden == std::vector<Pattern>{{1, 1}});
    CHECK(cfg.eps == std::vector<double>{0.0});
    CHECK(cfg.hash == fnv1a_hex(kRll10));
    CHECK(cfg.hash.size() == 16);

    const auto lin = parse_config(R"([constraint]
type = linear
shape = segment:2
rows = 0,0,0,1 <= 0.1 | 1,1,1,1 = 1
[epsilon]
values = 0, 0.01
)");
    CHECK(lin.gamma.constraints().size() == 2);
    CHECK(lin.eps == std::vector<double>{0.0, 0.01});

    const auto axial = parse_config(R"([system]
dim = 2
mode = strict
[constraint]
type = forbidden
shape = segment:2
forbidden = 11
)");
    CHECK(axial.axial());
    CHECK(axial.system().dim() == 2);

    CHECK(parse_shape("cube:2", 2).size() == 4);
    CHECK(parse_shape("0,0;1,0", 2) == Shape(2, {{0, 0}, {1, 0}}));
    CHECK_THROWS_AS(parse_shape("ring:3", 1), ConfigError);

    CHECK_THROWS_AS(parse_config(""), ConfigError);
    CHECK_THROWS_AS(parse_config("[system]\ncolour = red\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[extra]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[constraint]\ntype = rll\nk = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[system]\nalphabet = ab,c\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[system]\ndim = 0\n[constraint]\ntype = rll\nk=1\np=0\n"), ConfigError);
}

TEST_CASE("FNV-1a reference values") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("doubles round-trip through text") {
    for (double v : {0.1, 1.0 / 3.0, 0.6942419136306174, 1e-300, -2.5e17, 0.0}) {
        CHECK(parse_double(format_double(v)) == v);
    }
    CHECK(format_double(0.3) == "0.3");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(std::isnan(parse_double("nan")));
}

TEST_CASE("count command") {
    TempDir dir;
    const auto path = dir.write("rll.ini", kRll10);
    const auto r = run({"count", "--config", path, "--n", "5"});
    REQUIRE(r.code == kExitOk);
    const auto t = csv(r.out);
    CHECK(t.comment.find("config_hash=" + fnv1a_hex(kRll10)) != std::string::npos);
    CHECK(t.comment.find("command=count") != std::string::npos);
    CHECK(t.columns == std::vector<std::string>{"n", "count", "rate"});
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][1] == "11");
    CHECK(parse_double(t.rows[0][2]) == doctest::Approx(std::log2(11.0) / 5).epsilon(1e-15));

    const auto range = run({"count", "--config", path, "--n-range", "4..8"});
    const auto rows = csv(range.out).rows;
    REQUIRE(rows.size() == 5);
    for (const auto& row : rows) {
        CHECK(std::stoull(row[1]) == oracle::lucas(std::stoi(row[0])));
    }

    const auto full = dir.write("full.ini", kFull);
    for (const auto& row : csv(run({"count", "--config", full, "--n", "3,6"}).out).rows) {
        CHECK(parse_double(row[2]) == 1.0);
    }
}

TEST_CASE("tables round-trip bit-exactly") {
    TempDir dir;
    const auto path = dir.write("rll.ini", kRll02);
    const auto out = (dir.path / "cap.csv").string();
    REQUIRE(run({"capacity", "--config", path, "--out", out}).code == kExitOk);
    std::ifstream in(out);
    const auto t = parse_csv(in);
    // The written value is the computed one to the last bit.
    const auto direct = run({"capacity", "--config", path});
    CHECK(csv(direct.out).rows == t.rows);
    double cap = NAN;
    for (const auto& row : t.rows) {
        if (row[1] == "capacity") {
            cap = parse_double(row[2]);
            CHECK(format_double(cap) == row[2]);
        }
    }
    CHECK(std::abs(cap - oracle::rll_capacity_dual(1, 0.2)) <= 1e-5);
}

TEST_CASE("JSON lines output") {
    TempDir dir;
    const auto path = dir.write("rll.ini", kRll10);
    const auto r = run({"count", "--config", path, "--n", "4,5", "--format", "jsonl"});
    REQUIRE(r.code == kExitOk);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    const auto meta = nlohmann::json::parse(line);
    CHECK(meta.at("meta").get<std::string>().find("command=count") != std::string::npos);
    std::getline(in, line);
    const auto row = nlohmann::json::parse(line);
    CHECK(row.at("n") == 4);
    CHECK(row.at("count") == 7);
    CHECK(row.at("rate").get<double>() == doctest::Approx(std::log2(7.0) / 4));
}

TEST_CASE("exit codes") {
    TempDir dir;
    const auto empty = dir.write("empty.ini", "");
    CHECK(run({"count", "--config", empty}).code == kExitConfig);
    const auto bad = dir.write("bad.ini", "[system]\nalphabet = 0,1\nflavour = x\n");
    CHECK(run({"count", "--config", bad}).code == kExitConfig);
    CHECK(run({"count"}).code == kExitConfig);
    CHECK(run({"frobnicate"}).code == kExitConfig);
    CHECK(run({"count", "--config", (dir.path / "missing.ini").string()}).code == kExitConfig);

    const auto path = dir.write("rll.ini", kRll10);
    CHECK(run({"count", "--config", path, "--n", "70"}).code == kExitSizeGuard);

    const auto slow = dir.write("slow.ini", std::string(kRll02) + "max_iterations = 1\ngap_tolerance = 1e-15\n");
    const auto r = run({"capacity", "--config", slow});
    CHECK(r.code == kExitNonConvergence);
    CHECK_FALSE(r.out.empty());

    // A 2-D window has no 1-D capacity.
    const auto square = dir.write("sq.ini", "[system]\ndim = 2\n[constraint]\ntype = full\nshape = cube:2\n");
    CHECK(run({"capacity", "--config", square}).code == kExitConfig);
}

TEST_CASE("thread count from the environment") {
    TempDir dir;
    const auto path = dir.write("rll.ini", kRll10);
    ::setenv("SEMICAP_THREADS", "2", 1);
    const auto a = run({"count", "--config", path, "--n", "12"});
    ::setenv("SEMICAP_THREADS", "lots", 1);
    const auto b = run({"count", "--config", path, "--n", "12"});
    ::unsetenv("SEMICAP_THREADS");
    CHECK(a.code == kExitOk);
    CHECK(csv(a.out).rows[0][1] == std::to_string(oracle::lucas(12)));
    CHECK(b.code == kExitConfig);
}

TEST_CASE("curve command") {
    const auto r = run({"curve", "--p", "0.2,0.25"});
    REQUIRE(r.code == kExitOk);
    const auto t = csv(r.out);
    CHECK(t.comment == "config_hash=none seed=0 command=curve");
    REQUIRE(t.rows.size() == 2);
    CHECK(parse_double(t.rows[0][1]) == doctest::Approx(oracle::h2(std::sqrt(0.2))).epsilon(1e-9));
    CHECK(parse_double(t.rows[1][1]) == 1.0);

    const auto grid = csv(run({"curve", "--grid", "50"}).out);
    REQUIRE(grid.rows.size() == 50);
    for (std::size_t i = 1; i < grid.rows.size(); ++i) {
        CHECK(parse_double(grid.rows[i][1]) >= parse_double(grid.rows[i - 1][1]));
    }
    CHECK(run({"curve", "--p", "0"}).code == kExitConfig);
}

TEST_CASE("indentropy command") {
    TempDir dir;
    const auto full = dir.write("full.ini", kFull);
    const auto a = csv(run({"indentropy", "--config", full, "--n", "2,3"}).out);
    for (const auto& row : a.rows) {
        CHECK(parse_double(row[2]) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(row[4] == "true");
    }

    const auto path = dir.write("rll.ini", kRll02);
    const auto r1 = run({"indentropy", "--config", path, "--n", "2", "--threads", "1"});
    const auto r2 = run({"indentropy", "--config", path, "--n", "2", "--threads", "2"});
    REQUIRE(r1.code == kExitOk);
    CHECK(r1.out == r2.out);
    const auto t = csv(r1.out);
    CHECK(std::abs(parse_double(t.rows[0][2]) - oracle::h2(std::sqrt(0.2))) <= 1e-6);
    CHECK(t.comment.find("seed=5") != std::string::npos);
    CHECK(csv(run({"indentropy", "--config", path, "--n", "2", "--seed", "9"}).out)
              .comment.find("seed=9") != std::string::npos);
}

TEST_CASE("report and cyclic commands") {
    TempDir dir;
    const auto path = dir.write("rll.ini", std::string(kRll10) + "[solver]\nhind_restarts = 2\ntrials = 50\n");
    const auto r = run({"report", "--config", path, "--n", "2,3", "--dim", "2", "--threads", "1"});
    REQUIRE(r.code == kExitOk);
    const auto t = csv(r.out);
    int edges = 0, concentration = 0;
    for (const auto& row : t.rows) {
        if (row[0] == "edge") {
            ++edges;
            CHECK(row[4] == "holds");
        }
        if (row[0] == "comparison") {
            CHECK(row[4] == "true");
        }
        concentration += row[0] == "concentration" ? 1 : 0;
    }
    CHECK(edges == 4);
    CHECK(concentration == 3);

    const auto c = run({"cyclic-vs-noncyclic", "--config", path, "--n-range", "4:8"});
    REQUIRE(c.code == kExitOk);
    const auto ct = csv(c.out);
    CHECK(ct.comment.find("decreasing=false") != std::string::npos);
    for (const auto& row : ct.rows) {
        const int n = std::stoi(row[0]);
        CHECK(std::stoull(row[1]) == oracle::lucas(n));
        CHECK(std::stoull(row[2]) == oracle::fibonacci(n + 2));
    }
    const auto needs_forbidden = dir.write("rll2.ini", kRll02);
    CHECK(run({"cyclic-vs-noncyclic", "--config", needs_forbidden}).code == kExitConfig);
}

} // TEST_SUITE
