#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "gammalink/interleave.hpp"
#include "gammalink/json_io.hpp"
#include "gammalink/measure_prune.hpp"
#include "gammalink/persistence.hpp"
#include "gammalink/service.hpp"
#include "oracles.hpp"

using namespace gammalink;
namespace fs = std::filesystem;

namespace {

const Kernel U = Kernel::parse("uniform");

struct Run {
    int code;
    std::string out;
};

Run cli(const std::string& args) {
    const std::string cmd = std::string(GAMMALINK_BIN) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    std::string out;
    std::array<char, 4096> buf;
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), got);
    const int st = pclose(p);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("gammalink_io_" + std::to_string(getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

std::string fixture_csv() { return std::string(FIXTURES_DIR) + "/two_points.csv"; }

} // namespace

TEST_CASE("canonical number formatting") {
    CHECK(canonical_dump(json{{"b", 1}, {"a", 0.1}}) == "{\"a\":0.10000000000000001,\"b\":1}\n");
    CHECK(canonical_dump(json(1.0)) == "1.0\n");
    CHECK(canonical_dump(json(1e300)) == "1.0000000000000001e+300\n");
    CHECK(canonical_dump(json::array({-2, nullptr, "x", true})) == "[-2,null,\"x\",true]\n");
    CHECK_THROWS_AS(canonical_dump(json(std::numeric_limits<double>::infinity())), std::logic_error);
}

TEST_CASE("json round trips are byte identical") {
    Rng rng(17);
    for (int i = 0; i < 50; ++i) {
        const auto in = oracle::random_instance(rng);
        const MergeForest F = build_forest(build_space(in.pts, in.w), U, oracle::line_curve(in));
        const std::string f = canonical_dump(forest_to_json(F));
        CHECK(canonical_dump(forest_to_json(forest_from_json(parse_json(f)))) == f);
        CHECK(canonical_dump(parse_json(f)) == f);
        const std::string d = canonical_dump(diagram_to_json(diagram(F)));
        CHECK(canonical_dump(diagram_to_json(diagram_from_json(parse_json(d)))) == d);
        const std::string l = canonical_dump(flat_to_json(flatten_pf(F, 0.1), 0.1, 0.0, "pm"));
        CHECK(canonical_dump(parse_json(l)) == l);
        const auto R = Correspondence::identity(F.n_points());
        const std::string c = canonical_dump(correspondence_to_json(R));
        CHECK(canonical_dump(correspondence_to_json(correspondence_from_json(parse_json(c)))) == c);
    }
    const auto data = generate(parse_dataset_spec({{"preset", "three-gaussians"}, {"n", 60}, {"seed", 1}}));
    const MergeForest co = build_forest(data.space, U, make_line(1, 0.2, true));
    const std::string f = canonical_dump(forest_to_json(co));
    CHECK(canonical_dump(forest_to_json(forest_from_json(parse_json(f)))) == f);
    const std::string d = canonical_dump(diagram_to_json(diagram(co)));
    CHECK(canonical_dump(diagram_to_json(diagram_from_json(parse_json(d)))) == d);
    const std::string v = canonical_dump(vineyard_to_json(vineyard(data.space, U, Family::parse("G3"), 4, true)));
    CHECK(canonical_dump(parse_json(v)) == v);
}

TEST_CASE("forest files are validated on load") {
    const MergeForest F = build_forest(build_space(Points{1, {0.0, 7.0}}, std::vector<double>{0.75, 0.25}), U,
                                       make_line(8, 1, false));
    json j = forest_to_json(F);
    j["nodes"][0]["death"] = 0.5;
    CHECK_THROWS(forest_from_json(j));
    CHECK_THROWS(forest_from_json(parse_json("{\"nodes\":[]}")));
    CHECK_THROWS_AS(parse_json("{"), validation_error);
}

TEST_CASE("cli pipeline on the two point fixture") {
    TempDir tmp;
    REQUIRE(cli("linkage --input " + fixture_csv() + " --kernel uniform --curve line:x=8,y=1 -o " + (tmp / "f.json")).code == 0);
    const Run d = cli("diagram " + (tmp / "f.json"));
    REQUIRE(d.code == 0);
    CHECK(d.out == "{\"orientation\":\"contra\",\"points\":[[0.0,0.75],[0.125,0.25]]}\n");
    const Run one = cli("flatten " + (tmp / "f.json") + " --tau 0.2");
    REQUIRE(one.code == 0);
    CHECK(parse_json(one.out)["labels"] == json::array({0, 0}));
    const Run two = cli("flatten " + (tmp / "f.json") + " --tau 0.05 -o " + (tmp / "l.json"));
    REQUIRE(two.code == 0);
    CHECK(parse_json(slurp(tmp.path / "l.json"))["count"] == 2);
    // the library produces the same bytes
    const MergeForest F = forest_from_json(read_json_file(tmp / "f.json"));
    CHECK(one.out == canonical_dump(flat_to_json(flatten(F, 0.2, 0.0, PruneOrder::persistence_first), 0.2, 0.0, "pm")));
}

TEST_CASE("cli gen and vineyard") {
    TempDir tmp;
    REQUIRE(cli("gen --preset three-gaussians --n 500 --seed 7 -o " + (tmp / "d.csv")).code == 0);
    const std::string csv = slurp(tmp.path / "d.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 500);
    REQUIRE(cli("linkage --input " + (tmp / "d.csv") + " --kernel uniform --curve line:x=1,y=1 -o " + (tmp / "f.json")).code == 0);
    CHECK(cli("diagram " + (tmp / "f.json") + " --plot " + (tmp / "pd.svg")).code == 0);
    CHECK(fs::exists(tmp.path / "pd.svg"));
    const Run v = cli("vineyard --input " + (tmp / "d.csv") + " --family G3 --steps 5 --drop-top --session " + (tmp / "s.json"));
    REQUIRE(v.code == 0);
    CHECK(parse_json(v.out)["persistences"].size() == 5);
    verify_session(read_json_file(tmp / "s.json"));
}

TEST_CASE("cli interleave") {
    TempDir tmp;
    REQUIRE(cli("linkage --input " + fixture_csv() + " --kernel uniform --curve line:x=8,y=1 -o " + (tmp / "f.json")).code == 0);
    write_text_file(tmp / "r.json", canonical_dump(correspondence_to_json(Correspondence::identity(2))));
    const Run r = cli("interleave --left " + (tmp / "f.json") + " --right " + (tmp / "f.json") + " --corr " + (tmp / "r.json") + " --eps 0");
    REQUIRE(r.code == 0);
    CHECK(parse_json(r.out)["interleaved"] == true);
    write_text_file(tmp / "bad.json", "{\"nx\":2,\"ny\":2,\"pairs\":[[0,0]]}");
    CHECK(cli("interleave --left " + (tmp / "f.json") + " --right " + (tmp / "f.json") + " --corr " + (tmp / "bad.json") + " --eps 0").code == 2);
}

TEST_CASE("cli exit codes") {
    TempDir tmp;
    CHECK(cli("").code == 2);
    CHECK(cli("nonsense").code == 2);
    CHECK(cli("gen --preset three-gaussians --n 5 --bogus 1").code == 2);
    CHECK(cli("gen --preset nowhere --n 5").code == 2);
    CHECK(cli("linkage --input " + fixture_csv() + " --curve line:x=-1,y=1").code == 2);
    REQUIRE(cli("linkage --input " + fixture_csv() + " --kernel uniform --curve line:x=8,y=1 -o " + (tmp / "f.json")).code == 0);
    CHECK(cli("flatten " + (tmp / "f.json") + " --tau -1").code == 2);
    CHECK(cli("flatten " + (tmp / "f.json") + " --tau abc").code == 2);
    CHECK(cli("flatten " + (tmp / "f.json") + " --tau 0.1 --order zz").code == 2);
    CHECK(cli("flatten " + (tmp / "missing.json") + " --tau 0.1").code == 2);
    CHECK(cli("experiment unknown").code == 2);
    CHECK(cli("serve --session " + (tmp / "missing.json") + " --port 0").code == 2);
}
