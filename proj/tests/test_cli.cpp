#include "pmcsens/cli.hpp"

#include <catch_amalgamated.hpp>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pmcsens;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using nlohmann::json;

namespace {

const std::string kModels = PMCSENS_MODELS_DIR;
const std::string kGolden = PMCSENS_GOLDEN_DIR;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string temp_file(const std::string& name, const std::string& text)
{
    const auto path = std::filesystem::temp_directory_path() / ("pmcsens_test_" + name);
    std::ofstream(path) << text;
    return path.string();
}

// Numbers within 1e-12, everything else equal.
bool close(const json& a, const json& b)
{
    if (a.is_number() && b.is_number())
        return std::abs(a.get<double>() - b.get<double>()) <= 1e-12;
    if (a.type() != b.type() || a.size() != b.size())
        return false;
    if (a.is_object()) {
        for (auto it = a.begin(); it != a.end(); ++it)
            if (!b.contains(it.key()) || !close(*it, b[it.key()]))
                return false;
        return true;
    }
    if (a.is_array()) {
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!close(a[i], b[i]))
                return false;
        return true;
    }
    return a == b;
}

} // namespace

TEST_CASE("check prints the referential probability", "[cli]")
{
    const Run r = run({"check", kModels + "/frog.model"});
    CHECK(r.code == kExitOk);
    CHECK_THAT(r.out, ContainsSubstring("0.500000"));
    CHECK(r.err.empty());

    const Run j = run({"check", kModels + "/zeroconf.model", "--format", "json"});
    REQUIRE(j.code == kExitOk);
    CHECK_THAT(json::parse(j.out)["probability"].get<double>(), WithinAbs(0.999024, 5e-7));
}

TEST_CASE("sensitivity reports the condition numbers", "[cli]")
{
    Run r = run({"sensitivity", kModels + "/frog.model", "--format", "json"});
    REQUIRE(r.code == kExitOk);
    json doc = json::parse(r.out);
    CHECK_THAT(doc["parameters"][0]["kappa"].get<double>(), WithinAbs(0.3125, 1e-12));
    CHECK_THAT(doc["kappa_w"].get<double>(), WithinAbs(0.3125, 1e-12));

    r = run({"sensitivity", kModels + "/frog.model"});
    CHECK(r.code == kExitOk);
    CHECK_THAT(r.out, ContainsSubstring("0.312500"));

    const std::string w = temp_file("w.json", R"({"weights": {"x1": 1, "x2": 0, "x3": 0, "x4": 0}})");
    r = run({"sensitivity", kModels + "/zeroconf.model", "--direction", w, "--format", "json"});
    REQUIRE(r.code == kExitOk);
    doc = json::parse(r.out);
    CHECK_THAT(doc["kappa_w"].get<double>(), WithinAbs(doc["parameters"][0]["kappa"].get<double>(), 1e-18));
    CHECK_THAT(doc["kappa_sum"].get<double>(), WithinAbs(7.797e-3, 5e-7));

    r = run({"sensitivity", kModels + "/zeroconf.model", "--direction", "uniform", "--method", "series"});
    CHECK(r.code == kExitOk);
}

TEST_CASE("validate reports violations without failing", "[cli]")
{
    Run r = run({"validate", kModels + "/zeroconf.model", "--per-parameter", "0.006,0.006,0.006,0.006",
                 "--samples", "50", "--seed", "3", "--format", "json"});
    REQUIRE(r.code == kExitOk);
    const json doc = json::parse(r.out);
    CHECK(doc["samples"].size() == 50);
    CHECK(doc["seed"] == 3);
    CHECK(doc["violations"].get<int>() > 0);

    const Run again = run({"validate", kModels + "/zeroconf.model", "--per-parameter", "0.006,0.006,0.006,0.006",
                           "--samples", "50", "--seed", "3", "--format", "json", "--threads", "3"});
    CHECK(again.out == r.out);

    r = run({"validate", kModels + "/frog.model", "--delta", "0.004", "--samples", "20"});
    CHECK(r.code == kExitOk);
    CHECK_THAT(r.out, ContainsSubstring("violations"));
}

TEST_CASE("flags override the stored problem", "[cli]")
{
    const Run r = run({"check", kModels + "/frog.model", "--constraint", "2", "--destination", "4", "--format", "json"});
    REQUIRE(r.code == kExitOk);
    const json doc = json::parse(r.out);
    CHECK(doc["problem"]["constraint"] == json::array({2}));
    const Run s = run({"sensitivity", kModels + "/frog.model", "--constraint", "2", "--destination", "4", "--format", "json"});
    CHECK(json::parse(s.out)["parameters"][0]["kappa"] == 0.0);
}

TEST_CASE("input errors exit with 1", "[cli]")
{
    CHECK(run({}).code == kExitInputError);
    CHECK(run({"frobnicate"}).code == kExitInputError);
    CHECK(run({"check"}).code == kExitInputError);
    CHECK(run({"check", kModels + "/frog.model", "--format", "xml"}).code == kExitInputError);

    Run r = run({"check", "/nonexistent.model"});
    CHECK(r.code == kExitInputError);
    CHECK(r.out.empty());
    CHECK_THAT(r.err, ContainsSubstring("error"));

    const std::string bad = temp_file("bad.model", R"({"version": "pmcsens-model/1", "states": 1, "initial": [1], "rows": [{"concrete": [0.9]}]})");
    r = run({"check", bad, "--destination", "1"});
    CHECK(r.code == kExitInputError);
    CHECK_THAT(r.err, ContainsSubstring("/rows/0"));

    CHECK(run({"check", kModels + "/frog.model", "--destination", "9"}).code == kExitInputError);
    CHECK(run({"validate", kModels + "/frog.model"}).code == kExitInputError);
    CHECK(run({"validate", kModels + "/zeroconf.model", "--per-parameter", "0.1,0.1"}).code == kExitInputError);
    CHECK(run({"sensitivity", kModels + "/zeroconf.model", "--direction", "uniformly"}).code == kExitInputError);
}

TEST_CASE("numerical failure exits with 2", "[cli]")
{
    const Run r = run({"check", kModels + "/zeroconf.model", "--method", "series", "--truncation", "2"});
    CHECK(r.code == kExitNumericalFailure);
    CHECK_THAT(r.err, ContainsSubstring("NonConvergence"));
}

TEST_CASE("help exits with 0", "[cli]")
{
    const Run r = run({"--help"});
    CHECK(r.code == kExitOk);
    CHECK_THAT(r.out, ContainsSubstring("paper-tables"));
}

TEST_CASE("experiment tables match the golden files", "[cli][golden]")
{
    const Run table = run({"paper-tables"});
    REQUIRE(table.code == kExitOk);
    CHECK(table.out == slurp(kGolden + "/paper_tables.txt"));

    const Run j = run({"paper-tables", "--format", "json"});
    REQUIRE(j.code == kExitOk);
    CHECK(close(json::parse(j.out), json::parse(slurp(kGolden + "/paper_tables.json"))));

    CHECK_THAT(table.out, ContainsSubstring("999.024"));
    CHECK_THAT(table.out, ContainsSubstring("7.797"));
    CHECK_THAT(table.out, ContainsSubstring("±0.016"));
    CHECK_THAT(table.out, ContainsSubstring("±0.031"));
    CHECK_THAT(table.out, ContainsSubstring("±0.047"));
}
