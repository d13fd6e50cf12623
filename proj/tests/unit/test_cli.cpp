#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "globalsdp/cli.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = globalsdp::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("solve prints a certified report") {
    const Result r = run({"solve", "--problem", "fractional"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["problem"] == "fractional");
    CHECK(j["status"] == "optimal");
    CHECK(std::abs(j["y_star"].get<double>()) <= 1e-6);
    CHECK(j["certificate"]["accepted"] == true);
    CHECK_FALSE(j.contains("wall_time"));
    CHECK_FALSE(j.contains("trace"));

    const Result t = run({"solve", "--problem", "fractional", "--trace", "--timing"});
    const auto jt = nlohmann::json::parse(t.out);
    CHECK(jt.contains("wall_time"));
    CHECK(jt["trace"].size() == jt["probes"].get<std::size_t>());
  }

  TEST_CASE("repeated runs are byte-identical") {
    const Result a = run({"solve", "--problem", "truss-2bar"});
    const Result b = run({"solve", "--problem", "truss-2bar"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    const Result c = run({"check-assumptions", "--problem", "sqrt", "--samples", "40"});
    const Result d = run({"check-assumptions", "--problem", "sqrt", "--samples", "40"});
    CHECK(c.out == d.out);
  }

  TEST_CASE("verify-kkt") {
    const Result ok = run({"verify-kkt", "--problem", "fractional", "--x", "0", "--y", "0"});
    CHECK(ok.code == 0);
    CHECK(nlohmann::json::parse(ok.out)["accepted"] == true);

    const Result slack = run({"verify-kkt", "--problem", "fractional", "--x", "1", "--y", "0.9"});
    CHECK(slack.code == 1);
    CHECK(nlohmann::json::parse(slack.out)["reason"] == "empty active set");

    const Result pt = run({"verify-kkt", "--problem", "truss-2bar", "--x", "0.5,0.5", "--y", "-0.2071067811865476",
                           "--summary"});
    CHECK(pt.code == 0);
    CHECK(pt.out.rfind("accepted", 0) == 0);

    CHECK(run({"verify-kkt", "--problem", "fractional", "--x", "1,2", "--y", "0"}).code == 2);
  }

  TEST_CASE("usage errors exit with 2") {
    CHECK(run({"solve", "--problem", "fractional", "--bogus"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"solve"}).code == 2);
    CHECK(run({"solve", "--problem", "fractional", "--input", "x.json"}).code == 2);
    CHECK(run({"solve", "--problem", "nope"}).code == 2);
    CHECK(run({"solve", "--problem", "fractional", "--tol", "-1"}).code == 2);
    CHECK(run({"solve", "--input", "/nonexistent/problem.json"}).code == 2);
    CHECK(run({"oracle", "--problem", "truss-10bar"}).code == 2);
  }

  TEST_CASE("help lists verbs and flags") {
    const Result r = run({"--help"});
    CHECK(r.code == 0);
    for (const char* word : {"catalog", "solve", "check-assumptions", "verify-kkt", "multistart", "oracle",
                             "--problem", "--input", "--tol", "--inner-mu", "--max-iter", "--override-assumptions",
                             "--starts", "--seed", "--samples", "--trace", "--timing", "--out"}) {
      CAPTURE(word);
      CHECK(r.out.find(word) != std::string::npos);
    }
    CHECK(run({"solve", "--help"}).code == 0);
  }

  TEST_CASE("malformed input files give a line diagnostic") {
    const auto path = temp_file("globalsdp_cli_bad.json", "{\n  \"m\": 1,\n  \"nA\": ]\n}\n");
    const Result r = run({"solve", "--input", path.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("line 3") != std::string::npos);
    std::filesystem::remove(path);
  }

  TEST_CASE("input files solve like catalog entries") {
    const auto path = temp_file("globalsdp_cli_frac.json", R"({"m": 1, "nA": 1, "nB": 1, "name": "frac-file",
      "A0": [[0]], "C0": [[1]], "Aj": [[[-1]]], "Cj": [[[1]]],
      "B0": [[0]], "Bj": [[[1]]], "x_box": {"lower": [0], "upper": [10]}, "y_hint": [-1, 2]})");
    const Result r = run({"solve", "--input", path.string()});
    CHECK(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["problem"] == "frac-file");
    std::filesystem::remove(path);
  }

  TEST_CASE("assumption refusal and override") {
    const Result refused = run({"solve", "--problem", "sqrt-relaxed"});
    CHECK(refused.code == 1);
    CHECK(refused.err.find("(b)") != std::string::npos);
    const Result forced = run({"solve", "--problem", "sqrt-relaxed", "--override-assumptions"});
    CHECK(forced.code == 0);
    CHECK_FALSE(nlohmann::json::parse(forced.out)["warnings"].empty());

    CHECK(run({"check-assumptions", "--problem", "sqrt-relaxed", "--samples", "40"}).code == 1);
    CHECK(run({"check-assumptions", "--problem", "fractional", "--samples", "40"}).code == 0);
  }

  TEST_CASE("catalog, multistart, oracle and --out") {
    const Result cat = run({"catalog"});
    CHECK(cat.code == 0);
    CHECK(nlohmann::json::parse(cat.out).size() == 10);
    CHECK(run({"catalog", "--summary"}).out.find("truss-10bar") != std::string::npos);

    const Result ms = run({"multistart", "--problem", "truss-2bar", "--starts", "3"});
    CHECK(ms.code == 0);
    const auto mj = nlohmann::json::parse(ms.out);
    CHECK(mj["accepted"] == 3);
    CHECK(mj["runs"].size() == 3);
    CHECK(run({"multistart", "--problem", "fractional", "--starts", "1"}).code == 2);

    const Result orc = run({"oracle", "--problem", "fractional", "--step", "0.5"});
    CHECK(orc.code == 0);
    const auto oj = nlohmann::json::parse(orc.out);
    CHECK(oj["points"] == 21);
    CHECK(std::abs(oj["oracle_y"].get<double>()) <= 1e-9);

    const auto path = std::filesystem::temp_directory_path() / "globalsdp_cli_out.json";
    const Result written = run({"solve", "--problem", "fractional", "--out", path.string()});
    CHECK(written.code == 0);
    CHECK(written.out.empty());
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    CHECK(nlohmann::json::parse(ss.str())["status"] == "optimal");
    std::filesystem::remove(path);
  }
}
