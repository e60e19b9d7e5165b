#include <cstdlib>
#include <string>

#include "doctest.h"

#include <nlohmann/json.hpp>

#include "qcdkit/em.hpp"
#include "qcdkit/gmm.hpp"
#include "qcdkit/stream.hpp"
#include "test_support.hpp"

using namespace qcd;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(const test::TempDir& dir, const std::string& arguments) {
    const auto out_path = dir.file("stdout.txt");
    const auto err_path = dir.file("stderr.txt");
    const std::string command = std::string(QCDKIT_CLI_PATH) + " " + arguments + " > " +
                                out_path.string() + " 2> " + err_path.string();
    const int status = std::system(command.c_str());
    RunResult result;
    result.exit_code = WEXITSTATUS(status);
    result.out = test::read_file(out_path);
    result.err = test::read_file(err_path);
    return result;
}

std::string scenario_config(std::uint64_t gamma, const std::string& extra = "") {
    json config = {
        {"seed", 7},
        {"scenario",
         {{"pre", GaussianMixture::single(0.0, 1.0).to_json()},
          {"post", GaussianMixture::single(2.5, 1.0).to_json()},
          {"gamma", gamma},
          {"length", 600}}},
        {"detectors",
         {{{"kind", "cusum_mix"},
           {"threshold", 7.0},
           {"pre", GaussianMixture::single(0.0, 1.0).to_json()},
           {"post", GaussianMixture::single(2.5, 1.0).to_json()}}}},
    };
    if (!extra.empty()) {
        config.merge_patch(json::parse(extra));
    }
    if (gamma == 0) {
        config["scenario"]["gamma"] = "inf";
    }
    return config.dump();
}

}  // namespace

TEST_CASE("fit recovers a two-component mixture from a csv") {
    test::TempDir dir("clifit");
    const auto low = sample(GaussianMixture::single(0.0, 0.25), 11, 2500);
    const auto high = sample(GaussianMixture::single(4.0, 0.25), 12, 2500);
    std::vector<double> data = low;
    data.insert(data.end(), high.begin(), high.end());
    write_error_stream_csv(dir.file("errors.csv"), data);

    const auto gmm_path = dir.file("gmm.json");
    const auto result =
        run_cli(dir, "fit " + dir.file("errors.csv").string() + " -k 2 -o " + gmm_path.string());
    REQUIRE(result.exit_code == 0);
    CHECK(result.out.find("log_likelihood=") != std::string::npos);
    CHECK(result.out.find("component 2:") != std::string::npos);

    const auto written = GaussianMixture::from_json(json::parse(test::read_file(gmm_path)));
    const auto direct = fit_em(data, 2).mixture;
    CHECK(written == direct);
}

TEST_CASE("fit with one component equals the sample moments") {
    test::TempDir dir("clifit1");
    const auto data = sample(GaussianMixture::single(3.0, 1.0), 5, 2000);
    write_error_stream_csv(dir.file("errors.csv"), data);
    const auto result = run_cli(
        dir, "fit " + dir.file("errors.csv").string() + " -k 1 -o " + dir.file("g.json").string());
    REQUIRE(result.exit_code == 0);
    const auto written = GaussianMixture::from_json(json::parse(test::read_file(dir.file("g.json"))));
    double mean = 0.0;
    for (double x : data) mean += x;
    mean /= static_cast<double>(data.size());
    CHECK(written.components()[0].gaussian.mean == doctest::Approx(mean).epsilon(1e-9));
}

TEST_CASE("fit reports malformed rows with their row number on exit 2") {
    test::TempDir dir("clibad");
    test::write_file(dir.file("bad.csv"), "time,error\n1,0.5\n2,zzz\n");
    const auto result =
        run_cli(dir, "fit " + dir.file("bad.csv").string() + " -o " + dir.file("g.json").string());
    CHECK(result.exit_code == 2);
    CHECK(result.err.find("row 3") != std::string::npos);
}

TEST_CASE("fit on degenerate data exits 3") {
    test::TempDir dir("clidegen");
    write_error_stream_csv(dir.file("flat.csv"), std::vector<double>(100, 1.0));
    const auto result =
        run_cli(dir, "fit " + dir.file("flat.csv").string() + " -o " + dir.file("g.json").string());
    CHECK(result.exit_code == 3);
}

TEST_CASE("detect alarms after a mid-stream change and stays quiet without one") {
    test::TempDir dir("clidetect");
    test::write_file(dir.file("change.json"), scenario_config(490));
    auto result = run_cli(dir, "detect --config " + dir.file("change.json").string() + " --out " +
                                   dir.path().string());
    REQUIRE(result.exit_code == 0);
    REQUIRE(result.out.rfind("ALARM t=", 0) == 0);
    const std::uint64_t tau = std::stoull(result.out.substr(8));
    CHECK(tau >= 490);
    CHECK(tau < 540);
    const auto trace = test::read_file(dir.file("trace_cusum_mix.csv"));
    CHECK(trace.rfind("time,sample,statistic,alarmed\n", 0) == 0);
    CHECK(trace.find(",1\n") != std::string::npos);  // final row is alarmed

    test::write_file(dir.file("quiet.json"), scenario_config(0));
    result = run_cli(dir, "detect --config " + dir.file("quiet.json").string() + " --out " +
                              dir.path().string());
    REQUIRE(result.exit_code == 0);
    CHECK(result.out == "NO_ALARM n=600\n");
}

TEST_CASE("detect reads stream files and handles empty ones") {
    test::TempDir dir("clistream");
    write_error_stream_csv(dir.file("empty.csv"), {});
    test::write_file(dir.file("cfg.json"),
                     scenario_config(490, R"({"stream_csv": ")" +
                                              dir.file("empty.csv").string() + R"("})"));
    const auto result = run_cli(dir, "detect --config " + dir.file("cfg.json").string() +
                                         " --out " + dir.path().string());
    REQUIRE(result.exit_code == 0);
    CHECK(result.out == "NO_ALARM n=0\n");
}

TEST_CASE("missing config is a usage error with exit 2") {
    test::TempDir dir("clinoconfig");
    const auto result = run_cli(dir, "detect");
    CHECK(result.exit_code == 2);
    CHECK(result.err.find("--config") != std::string::npos);
}

TEST_CASE("a seedless config is rejected before any work") {
    test::TempDir dir("clinoseed");
    auto config = json::parse(scenario_config(490));
    config.erase("seed");
    test::write_file(dir.file("cfg.json"), config.dump());
    const auto result = run_cli(dir, "detect --config " + dir.file("cfg.json").string());
    CHECK(result.exit_code == 2);
    CHECK(result.err.find("seed") != std::string::npos);
}

TEST_CASE("calibrate exits 3 when the target cannot be reached") {
    test::TempDir dir("cliunreach");
    // Identical pre and post laws: the ratio is flat and no threshold works.
    json config = json::parse(scenario_config(0));
    config["detectors"][0]["post"] = GaussianMixture::single(0.0, 1.0).to_json();
    config["target_mtfa"] = 100.0;
    config["calibration_trials"] = 100;
    config["horizon"] = 400;
    test::write_file(dir.file("cfg.json"), config.dump());
    const auto result = run_cli(dir, "calibrate --config " + dir.file("cfg.json").string() +
                                         " --out " + dir.path().string());
    CHECK(result.exit_code == 3);
}

TEST_CASE("sweep writes one csv row per detector and threshold") {
    test::TempDir dir("clisweep");
    json config = json::parse(scenario_config(490));
    config["detectors"][0]["kind"] = "cusum_single";
    config["threshold_grid"] = {2.0};
    config["trials"] = 150;
    config["horizon"] = 3000;
    test::write_file(dir.file("cfg.json"), config.dump());
    const auto result = run_cli(dir, "sweep --config " + dir.file("cfg.json").string() + " --out " +
                                         dir.path().string());
    REQUIRE(result.exit_code == 0);
    const auto csv = test::read_file(dir.file("sweep.csv"));
    CHECK(csv.rfind("detector,threshold,mtfa,mtfa_stderr,wadd,wadd_stderr,trials,censored\n", 0) ==
          0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    CHECK(csv.find("cusum_single,2,") != std::string::npos);
}

TEST_CASE("report flags an identical pre/post model as not correct") {
    test::TempDir dir("clireport");
    json config = json::parse(scenario_config(490));
    config["detectors"][0]["post"] = GaussianMixture::single(0.0, 1.0).to_json();
    config["scenario"]["post"] = GaussianMixture::single(0.0, 1.0).to_json();
    config["correctness_samples"] = 20000;
    test::write_file(dir.file("cfg.json"), config.dump());
    const auto result = run_cli(dir, "report --config " + dir.file("cfg.json").string() +
                                         " --out " + dir.path().string());
    REQUIRE(result.exit_code == 0);
    const auto artifact = json::parse(test::read_file(dir.file("report_cusum_mix.json")));
    CHECK(artifact.at("correct") == false);
    CHECK(artifact.at("detector") == "cusum_mix");
}

TEST_CASE("identical seeds give byte-identical artifacts") {
    test::TempDir dir("clidet");
    test::write_file(dir.file("cfg.json"), scenario_config(490));
    const auto out_a = dir.file("a");
    const auto out_b = dir.file("b");
    auto a = run_cli(dir, "detect --config " + dir.file("cfg.json").string() + " --out " +
                              out_a.string());
    auto b = run_cli(dir, "detect --config " + dir.file("cfg.json").string() + " --out " +
                              out_b.string());
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    CHECK(a.out == b.out);
    CHECK(test::read_file(out_a / "trace_cusum_mix.csv") ==
          test::read_file(out_b / "trace_cusum_mix.csv"));

    // A different seed changes the stream.
    auto c = run_cli(dir, "detect --config " + dir.file("cfg.json").string() + " --seed 8 --out " +
                              dir.file("c").string());
    REQUIRE(c.exit_code == 0);
    CHECK(test::read_file(dir.file("c") / "trace_cusum_mix.csv") !=
          test::read_file(out_a / "trace_cusum_mix.csv"));
}
