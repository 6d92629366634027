#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "rhognf/cli.hpp"
#include "rhognf/dgp.hpp"
#include "rhognf/flow.hpp"
#include "rhognf/io.hpp"

using namespace rhognf;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Sandbox {
    fs::path dir;

    explicit Sandbox(const std::string& tag) {
        dir = fs::temp_directory_path() / ("rhognf_cli_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Sandbox() { fs::remove_all(dir); }

    std::string path(const std::string& name) const { return (dir / name).string(); }

    int run(std::vector<std::string> args, std::string* err_text = nullptr) const {
        args.push_back("--out-dir");
        args.push_back(dir.string());
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        if (err_text) *err_text = err.str();
        return code;
    }

    void put(const std::string& name, const std::string& text) const { write_text(dir / name, text); }
    std::string get(const std::string& name) const { return read_text(dir / name); }
    json get_json(const std::string& name) const { return json::parse(get(name)); }
};

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

}  // namespace

TEST_CASE("simulate is reproducible and stamps provenance") {
    Sandbox box("simulate");
    const std::vector<std::string> args{"simulate", "--table1-row", "3", "--n", "500", "--seed", "11"};
    auto with_name = [&](const std::string& name) {
        auto a = args;
        a.insert(a.end(), {"--name", name});
        return a;
    };
    REQUIRE(box.run(with_name("x")) == kExitOk);
    REQUIRE(box.run(with_name("x2")) == kExitOk);
    CHECK(box.get("x.csv") == box.get("x2.csv"));

    const json side = box.get_json("x.json");
    CHECK(side["true_ace"].get<double>() == doctest::Approx(table1_rows()[2].params.alpha));
    CHECK(side["provenance"]["seed"] == 11);
    const std::string hash = side["provenance"]["config_hash"];
    CHECK(hash.size() == 16);
    CHECK(first_line(box.get("x.csv")) == "# rhognf simulate config_hash=" + hash + " seed=11");
    CHECK(format_dgp(parse_dgp(side["dgp"].get<std::string>())) == format_dgp(DgpSpec{table1_rows()[2].params}));

    const Table t = read_csv(box.dir / "x.csv");
    CHECK(t.header == std::vector<std::string>{"a", "y"});
    CHECK(t.rows.size() == 500);

    auto other = with_name("y");
    other[6] = "12";
    REQUIRE(box.run(other) == kExitOk);
    CHECK(box.get("y.csv") != box.get("x.csv"));
    CHECK(box.get_json("y.json")["provenance"]["config_hash"] != hash);
}

TEST_CASE("simulate from a dgp file and the binary benchmarks") {
    Sandbox box("dgpfile");
    BinaryDgpParams p;
    p.p_u = 0.3;
    p.p_a_given_u = {0.2, 0.7};
    p.p_y_given_au = {{{0.1, 0.4}, {0.5, 0.9}}};
    box.put("b.dgp", format_dgp(p));
    REQUIRE(box.run({"simulate", "--dgp-file", box.path("b.dgp"), "--n", "4000", "--name", "b"}) == kExitOk);
    const json side = box.get_json("b.json");
    CHECK(side["true_ace"].get<double>() == doctest::Approx(binary_true_ace(p)));
    CHECK(side["af_bounds"]["lower"].get<double>() == doctest::Approx(af_bounds(exact_obs_stats(p)).lower));
    for (const auto& row : read_csv(box.dir / "b.csv").rows) {
        CHECK((row[0] == 0.0 || row[0] == 1.0));
        CHECK((row[1] == 0.0 || row[1] == 1.0));
    }

    REQUIRE(box.run({"simulate", "--categorical", "--dimensions", "3", "--n", "300", "--name", "c"}) == kExitOk);
    const Table dims = read_csv(box.dir / "c_dims.csv");
    const Table obs = read_csv(box.dir / "c.csv");
    REQUIRE(dims.header == std::vector<std::string>{"a", "d1", "d2", "d3"});
    for (std::size_t i = 0; i < obs.rows.size(); ++i) {
        CHECK(dims.rows[i][0] == obs.rows[i][0]);
        CHECK(dims.rows[i][1] + dims.rows[i][2] + dims.rows[i][3] == obs.rows[i][1]);
    }

    std::string err;
    CHECK(box.run({"simulate", "--binary", "--categorical", "--n", "10"}, &err) == kExitUsage);
    CHECK(box.run({"simulate", "--table1-row", "9", "--n", "10"}) == kExitUsage);
    CHECK(box.run({"simulate", "--table1-row", "1", "--n", "0"}) == kExitUsage);
    box.put("bad.dgp", "# rhognf dgp v1\nkind = linear\nalpha = 1\n");
    CHECK(box.run({"simulate", "--dgp-file", box.path("bad.dgp"), "--n", "10"}) == kExitUsage);
    CHECK(box.run({"simulate", "--dgp-file", box.path("none.dgp"), "--n", "10"}) == kExitData);
}

TEST_CASE("bounds reproduces hand-computed assumption-free bounds") {
    Sandbox box("bounds");
    // a=1: 4 rows, 3 with y=1 -> q1 = 0.75, p1 = 0.4. a=0: 6 rows, 2 with y=1 -> q0 = 1/3, p0 = 0.6.
    box.put("d.csv", "a,y\n1,1\n1,1\n1,1\n1,0\n0,1\n0,1\n0,0\n0,0\n0,0\n0,0\n");
    REQUIRE(box.run({"bounds", "--data", box.path("d.csv")}) == kExitOk);
    const json j = box.get_json("bounds_bounds.json");
    const double joint1 = 0.75 * 0.4, joint0 = (1.0 / 3.0) * 0.6;
    CHECK(j["af_bounds"]["lower"].get<double>() == doctest::Approx(joint1 - joint0 - 0.4));
    CHECK(j["af_bounds"]["upper"].get<double>() == doctest::Approx(joint1 - joint0 + 0.6));

    box.put("m.csv", "a,d1,d2\n1,1,0\n1,0,0\n0,1,1\n0,0,1\n");
    REQUIRE(box.run({"bounds", "--data", box.path("m.csv"), "--name", "m"}) == kExitOk);
    const json m = box.get_json("m_bounds.json");
    // d1: q1 = q0 = 0.5 -> [-0.5, 0.5]; d2: q1 = 0, q0 = 1 -> [-1, 0].
    CHECK(m["summed_af_bounds"]["lower"].get<double>() == doctest::Approx(-1.5));
    CHECK(m["summed_af_bounds"]["upper"].get<double>() == doctest::Approx(0.5));

    box.put("nb.csv", "a,y\n1,2\n0,1\n");
    CHECK(box.run({"bounds", "--data", box.path("nb.csv")}) == kExitData);
    box.put("arm.csv", "a,y\n1,1\n1,0\n");
    CHECK(box.run({"bounds", "--data", box.path("arm.csv")}) == kExitData);
}

TEST_CASE("fit writes a loadable parameter file") {
    Sandbox box("fit");
    REQUIRE(box.run({"simulate", "--table1-row", "1", "--n", "600", "--seed", "4", "--name", "d"}) == kExitOk);
    const std::vector<std::string> fit{"fit",          "--data", box.path("d.csv"), "--rho", "0.3",
                                       "--max-epochs", "3",      "--seed",          "9"};
    REQUIRE(box.run(fit) == kExitOk);
    const json j = box.get_json("model_fit.json");
    CHECK(j["rho"].get<double>() == doctest::Approx(0.3));
    CHECK(j["epochs_run"] == 3);
    CHECK(j["history"].size() == 4);
    const std::string params_text = box.get("model.params");
    CHECK(first_line(params_text) == "# rhognf fit config_hash=" + j["provenance"]["config_hash"].get<std::string>() +
                                         " seed=9");
    std::istringstream in(params_text);
    const FlowParams p = load_params(in);
    CHECK(p.hyper.bins_a == 8);
    CHECK(p.hyper.hidden == std::vector<int>{20, 15, 10});

    const std::string first = params_text;
    REQUIRE(box.run(fit) == kExitOk);
    CHECK(box.get("model.params") == first);

    CHECK(box.run({"fit", "--data", box.path("missing.csv"), "--rho", "0"}) == kExitData);
    CHECK(box.run({"fit", "--data", box.path("d.csv"), "--rho", "1.5"}) == kExitUsage);
    CHECK(box.run({"fit", "--data", box.path("d.csv"), "--rho", "1"}) == kExitUsage);
    CHECK(box.run({"fit", "--data", box.path("d.csv"), "--rho", "0", "--lr", "1e6"}) == kExitNumerical);
    CHECK(box.run({"fit", "--data", box.path("d.csv"), "--rho", "0", "--schema-a", "discrete:2"}) == kExitData);
}

TEST_CASE("configuration files supply defaults that flags override") {
    Sandbox box("config");
    REQUIRE(box.run({"simulate", "--table1-row", "2", "--n", "400", "--name", "d"}) == kExitOk);
    box.put("run.toml", "[sweep]\nmax-epochs = 2\nn-samples = 500\ngrid = [-0.4, 0.1, 0.6]\n");
    const std::vector<std::string> base{"--config", box.path("run.toml"), "sweep", "--data", box.path("d.csv")};
    REQUIRE(box.run(base) == kExitOk);
    const json j = box.get_json("sweep_curve.json");
    CHECK(j["grid"] == json::array({-0.4, 0.1, 0.6}));
    for (const auto& p : j["points"]) CHECK(p["fit"]["epochs_run"] == 2);
    const Table curve = read_csv(box.dir / "sweep_curve.csv");
    CHECK(curve.header == std::vector<std::string>{"rho", "ace", "ey1", "ey0"});
    CHECK(curve.rows.size() == 3);

    auto overridden = base;
    overridden.insert(overridden.end(), {"--grid", "0,0.5", "--name", "o"});
    REQUIRE(box.run(overridden) == kExitOk);
    const json o = box.get_json("o_curve.json");
    CHECK(o["grid"] == json::array({0.0, 0.5}));
    CHECK(o["provenance"]["config_hash"] != j["provenance"]["config_hash"]);

    REQUIRE(box.run({"report", "--curves", box.path("sweep_curve.json"), box.path("o_curve.json")}) == kExitOk);
    const Table merged = read_csv(box.dir / "report_report.csv");
    CHECK(merged.rows.size() == 5);
    CHECK(merged.rows[3][0] == 1.0);
    CHECK(merged.rows[4][1] == 0.5);

    box.put("junk.json", "{\"points\": 3}");
    CHECK(box.run({"report", "--curves", box.path("junk.json")}) == kExitData);
    CHECK(box.run({"sweep", "--data", box.path("d.csv"), "--grid", "0.5,0.2"}) == kExitUsage);
    CHECK(box.run({"sweep"}) == kExitUsage);
}

TEST_CASE("usage errors and help") {
    Sandbox box("usage");
    CHECK(box.run({}) == kExitUsage);
    CHECK(box.run({"frobnicate"}) == kExitUsage);
    CHECK(box.run({"simulate", "--n"}) == kExitUsage);
    std::ostringstream out, err;
    CHECK(run_cli({"--help"}, out, err) == kExitOk);
    CHECK(out.str().find("sweep") != std::string::npos);
}

TEST_CASE("simulate then sweep is byte-identical across runs") {
    Sandbox box("pipeline");
    auto pipeline = [&](const std::string& tag) {
        REQUIRE(box.run({"simulate", "--binary", "--n", "600", "--seed", "5", "--name", tag}) == kExitOk);
        // Each run reads the same path so the two configurations hash alike.
        fs::copy_file(box.dir / (tag + ".csv"), box.dir / "in.csv", fs::copy_options::overwrite_existing);
        REQUIRE(box.run({"sweep", "--data", box.path("in.csv"), "--schema-a", "discrete:2", "--schema-y",
                         "discrete:2", "--grid", "-0.5,0,0.5", "--max-epochs", "2", "--n-samples", "2000", "--seed",
                         "5", "--threads", "2", "--name", tag}) == kExitOk);
        return box.get(tag + "_curve.csv");
    };
    const std::string first = pipeline("r1");
    CHECK(pipeline("r2") == first);
    CHECK(box.get("r1.csv") == box.get("r2.csv"));

    const json j = box.get_json("r1_curve.json");
    for (const auto& p : j["points"]) {
        // Outcomes are decoded back to classes 0/1, so the arms are probabilities.
        CHECK(p["ey1"].get<double>() >= 0.0);
        CHECK(p["ey1"].get<double>() <= 1.0);
        CHECK(p["ey0"].get<double>() >= 0.0);
        CHECK(p["ey0"].get<double>() <= 1.0);
    }
}

TEST_CASE("a single-point grid collapses the bounds onto its ace") {
    Sandbox box("single");
    REQUIRE(box.run({"simulate", "--table1-row", "4", "--n", "400", "--name", "d"}) == kExitOk);
    REQUIRE(box.run({"sweep", "--data", box.path("d.csv"), "--grid", "0.32", "--max-epochs", "2", "--n-samples",
                     "500"}) == kExitOk);
    const json j = box.get_json("sweep_curve.json");
    REQUIRE(j["points"].size() == 1);
    CHECK(j["bounds"]["lower"] == j["points"][0]["ace"]);
    CHECK(j["bounds"]["upper"] == j["points"][0]["ace"]);
}
