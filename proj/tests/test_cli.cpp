#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "tg/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path source_dir{TG_SOURCE_DIR};

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "torusgreen");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = tgcli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string config(const char* name) { return (source_dir / "configs" / name).string(); }

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string write(const std::string& file, const std::string& text) const {
        std::ofstream(path / file) << text;
        return (path / file).string();
    }
};

json outputs_of(const Outcome& o) { return json::parse(o.out).at("outputs"); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("census report") {
    TempDir tmp("tg_cli_census");
    const auto r = run_cli({"--cache", (tmp.path / "cache").string(), "--out", (tmp.path / "out").string(), "census",
                            "--basis", config("rhombic.json")});
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc.at("command") == "census");
    CHECK(doc.at("input_digest").get<std::string>().size() == 64);
    const json& o = doc.at("outputs");
    CHECK(o.at("count") == 5);
    CHECK(o.at("points").size() == 5);
    for (const auto& p : o.at("points")) CHECK(p.at("four_torsion") == false);
    CHECK(o.at("extra").is_array());
    CHECK(fs::exists(tmp.path / "out" / "census.json"));
    CHECK(fs::exists(tmp.path / "cache" / "constants.json"));
    const json cache = json::parse(std::ifstream(tmp.path / "cache" / "constants.json"));
    CHECK(cache.at("entries").size() >= 1);
}

TEST_CASE("green eval matches between backends") {
    TempDir tmp("tg_cli_green");
    const auto cache = (tmp.path / "cache").string();
    const auto a = run_cli({"--cache", cache, "green", "eval", "--basis", config("square.json"), "--point", "0.3,0.2"});
    const auto b = run_cli({"--cache", cache, "green", "eval", "--basis", config("square.json"), "--point", "0.3,0.2",
                            "--backend", "ewald"});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(std::abs(outputs_of(a).at("value").get<double>() - outputs_of(b).at("value").get<double>()) < 1e-10);
}

TEST_CASE("verify rejects the half-period configuration") {
    TempDir tmp("tg_cli_verify");
    const auto r = run_cli({"--cache", (tmp.path / "cache").string(), "verify", "--config", config("half_period_square.json")});
    REQUIRE(r.code == 0);
    const json o = outputs_of(r);
    CHECK(o.at("pass").at("cond1") == true);
    CHECK(o.at("pass").at("cond2") == true);
    CHECK(o.at("cond3_sign") == "positive");
    CHECK(o.at("pass").at("verdict") == false);
}

TEST_CASE("configuration errors exit with code 2") {
    TempDir tmp("tg_cli_errors");
    const auto cache = (tmp.path / "cache").string();

    const auto unknown = tmp.write("unknown.json", R"({"omega1": [1, 0], "omega2": [0, 1], "omega3": [1, 1]})");
    auto r = run_cli({"--cache", cache, "census", "--basis", unknown});
    CHECK(r.code == 2);
    CHECK(r.err.find("/omega3") != std::string::npos);

    r = run_cli({"--cache", cache, "census", "--basis", (tmp.path / "missing.json").string()});
    CHECK(r.code == 2);

    r = run_cli({"--cache", cache, "green", "eval", "--basis", config("square.json"), "--point", "0.3;x"});
    CHECK(r.code == 2);

    const auto flipped = tmp.write("flipped.json", R"({"tau": [0.2, -1.0]})");
    r = run_cli({"--cache", cache, "census", "--basis", flipped});
    CHECK(r.code == 2);

    r = run_cli({"--cache", cache, "census", "--no-such-flag"});
    CHECK(r.code == 2);
    CHECK(r.err.rfind("error [config]", 0) == 0);

    const auto no_partition = tmp.write("k2.json", R"({
        "basis": {"tau": [0.5, 0.9]},
        "vortices": {"p1": [[0, 0], [0, 0], [0.5, 0], [0.5, 0]], "p2": [[0, 0], [0, 0], [0.5, 0], [0.5, 0]]},
        "blowup": {"q": [[0.25, 0.45], [0.75, 0.45]]}})");
    r = run_cli({"--cache", cache, "d2func", "--config", no_partition});
    CHECK(r.code == 2);
}

TEST_CASE("numerical failures exit with code 3") {
    const auto r = run_cli({"--cache", (fs::temp_directory_path() / "tg_cli_num").string(), "liouville", "shoot",
                            "--c1", "1", "--c2", "1", "--a1", "0", "--a2", "-1"});
    CHECK(r.code == 3);
    CHECK(r.err.rfind("error [numerical]", 0) == 0);
    fs::remove_all(fs::temp_directory_path() / "tg_cli_num");
}

TEST_CASE("exit code mapping") {
    CHECK(tgcli::exit_code_for(tg::ConfigError("x")) == 2);
    CHECK(tgcli::exit_code_for(tg::InvalidBasis("x")) == 2);
    CHECK(tgcli::exit_code_for(tg::QuadratureError("x")) == 3);
    CHECK(tgcli::exit_code_for(tg::BracketError("x")) == 3);
    CHECK(tgcli::exit_code_for(tg::InternalError("x")) == 4);
    CHECK(tgcli::exit_code_for(std::logic_error("x")) == 4);
    CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("liouville commands") {
    TempDir tmp("tg_cli_liouville");
    const auto cache = (tmp.path / "cache").string();
    auto r = run_cli({"--cache", cache, "liouville", "shoot", "--c1", "1", "--c2", "1", "--a1", "0", "--a2", "0"});
    REQUIRE(r.code == 0);
    CHECK(outputs_of(r).dump().find("M1") != std::string::npos);
    r = run_cli({"--cache", cache, "liouville", "equal-mass", "--c1", "2", "--c2", "1", "--a1", "0"});
    REQUIRE(r.code == 0);
    CHECK(std::abs(outputs_of(r).at("a2").get<double>() - std::log(2.0)) < 1e-8);
}

TEST_CASE("sweeps") {
    TempDir tmp("tg_cli_sweep");
    const auto cache = (tmp.path / "cache").string();
    const auto empty = tmp.write("empty.json", R"({"moduli": []})");
    auto r = run_cli({"--cache", cache, "sweep", "--spec", empty});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("tau_re,tau_im,count,", 0) == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 1);

    const auto path = tmp.write("path.json", R"({"path": {"from": [0.5, 0.3], "to": [0.5, 1.2], "count": 6}, "grid": 64})");
    const auto one = run_cli({"--threads", "1", "--cache", cache, "census", "sweep", "--tau-path", path});
    const auto many = run_cli({"--threads", "8", "--cache", cache, "census", "sweep", "--tau-path", path});
    REQUIRE(one.code == 0);
    CHECK(one.out == many.out);
    CHECK(std::count(one.out.begin(), one.out.end(), '\n') == 7);

    const auto c1 = run_cli({"--threads", "1", "--cache", cache, "census", "--basis", config("rhombic.json")});
    const auto c8 = run_cli({"--threads", "8", "--cache", cache, "census", "--basis", config("rhombic.json")});
    CHECK(outputs_of(c1) == outputs_of(c8));
}

}
