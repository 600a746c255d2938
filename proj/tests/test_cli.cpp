#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(MAPMART_CLI_PATH) + " " + args +
                            " > cli_stdout.txt 2> cli_stderr.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

const char* kModelJson = R"({
  "modulator": {"mu1": 0.2, "sigma1": 1.0,
                "nu1": {"intensity": 1.0,
                        "law": {"type": "uniform", "lo": 1.0, "hi": 2.0}}},
  "ordinate": {"mu2": {"type": "constant", "value": 0.1},
               "sigma2": {"type": "constant", "value": 0.5},
               "nu2": {"intensity": 2.0,
                       "law": {"type": "gaussian", "mean": 0.0, "stddev": 1.0}}},
  "triggered": {"type": "deterministic", "scale": 0.5},
  "xi0": 0.0,
  "horizon": 1.0
})";

} // namespace

TEST_CASE("help exits cleanly") {
    CHECK(run("--help") == 0);
    CHECK(run("simulate --help") == 0);
}

TEST_CASE("simulate writes the documented CSV and reruns byte-identically") {
    CHECK(run("simulate --paths 1 --seed 7 --dt 0.05 --out cli_case_a") == 0);
    const std::string first = slurp("cli_case_a_0.csv");
    CHECK(first.rfind("time,theta,xiL,xiF,is_jump,jump_source,jump_size\n", 0) ==
          0);
    CHECK(run("simulate --paths 1 --seed 7 --dt 0.05 --out cli_case_b") == 0);
    CHECK(first == slurp("cli_case_b_0.csv"));
}

TEST_CASE("schema violations exit with code 2") {
    CHECK(run("simulate --paths 0") == 2);
    write_file("cli_bad_model.json", R"({"modulator": {}})");
    CHECK(run("moments --model cli_bad_model.json") == 2);
    write_file("cli_unknown_key.json", kModelJson);
    {
        auto j = nlohmann::json::parse(kModelJson);
        j["extra_key"] = 1;
        write_file("cli_unknown_key.json", j.dump());
    }
    CHECK(run("moments --model cli_unknown_key.json") == 2);
    CHECK(run("verify --suite nonsense --paths 500") == 2);
}

TEST_CASE("moments reads an explicit model file") {
    write_file("cli_model.json", kModelJson);
    CHECK(run("moments --model cli_model.json --out cli_moments.json") == 0);
    const auto j = nlohmann::json::parse(slurp("cli_moments.json"));
    CHECK(j.at("schema") == "v1");
    CHECK(j.at("theta_mean_rate").get<double>() == doctest::Approx(1.7));
    // m_2(nu2) = 2 for two standard-Gaussian jumps per unit time.
    CHECK(j.at("scalar_moments").at("nu2")[1].get<double>() ==
          doctest::Approx(2.0));
}

TEST_CASE("orthogonalize reports the basis with alpha provenance") {
    CHECK(run("orthogonalize --K 1 --g-x 1 --g-y 0 --out cli_basis.json") == 0);
    const auto j = nlohmann::json::parse(slurp("cli_basis.json"));
    CHECK(j.at("alpha").at("method") == "analytic");
    CHECK(j.at("alpha").at("value").get<double>() == doctest::Approx(0.25));
    CHECK(j.at("s1").at("coeffs")[0][0].get<double>() == 1.0);
    CHECK(j.at("s3").at("coeffs")[0][0].get<double>() == 1.0);
}

TEST_CASE("degenerate orthogonalization exits with code 3 naming the label") {
    // U(x) = x/2 makes y^2 collinear with x^1 in S3.
    CHECK(run("orthogonalize --K 2 --g-x 2 --g-y 2") == 3);
    const std::string err = slurp("cli_stderr.txt");
    CHECK(err.find("degenerate-direction") != std::string::npos);
    CHECK(err.find("y^2") != std::string::npos);
}

TEST_CASE("verify runs a small suite and reports PASS") {
    CHECK(run("verify --suite martingale --paths 1500 --dt 0.02 --seed 31 "
              "--out cli_suite.json") == 0);
    const auto j = nlohmann::json::parse(slurp("cli_suite.json"));
    CHECK(j.at("suite") == "martingale");
    CHECK(j.at("verdict") == "PASS");
    const std::string summary = slurp("cli_stderr.txt");
    CHECK(summary.find("[PASS]") != std::string::npos);
}

TEST_CASE("replicate emits per-bucket integrands") {
    CHECK(run("replicate --payoff terminal_ordinate --K 2 --paths 2000 "
              "--dt 0.02 --buckets 5 --out cli_rep.json") == 0);
    const auto j = nlohmann::json::parse(slurp("cli_rep.json"));
    CHECK(j.at("schema") == "v1");
    REQUIRE(j.at("coeffs").size() == 5);
    for (const auto& bucket : j.at("coeffs"))
        CHECK(bucket[0][0].get<double>() == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("chaos-check reports decreasing RMS under refinement") {
    CHECK(run("chaos-check --g 0 --p 2 --b 0 --paths 50 --seed 3 "
              "--dts 0.01 --dts 0.0025 --out cli_chaos.json") == 0);
    const auto j = nlohmann::json::parse(slurp("cli_chaos.json"));
    REQUIRE(j.at("results").size() == 2);
    CHECK(j.at("results")[1].at("rms_error").get<double>() <
          j.at("results")[0].at("rms_error").get<double>());
}

TEST_CASE("config files fill defaults and flags override them") {
    write_file("cli_config.json",
               R"({"dt": 0.05, "seed": 12345, "paths": 1})");
    CHECK(run("simulate --config cli_config.json --out cli_cfg_a") == 0);
    const auto direct = [&] {
        CHECK(run("simulate --paths 1 --seed 12345 --dt 0.05 --out cli_cfg_b") ==
              0);
        return slurp("cli_cfg_b_0.csv");
    }();
    CHECK(slurp("cli_cfg_a_0.csv") == direct);
    // Explicit flag wins over the config value.
    CHECK(run("simulate --config cli_config.json --seed 777 --out cli_cfg_c") ==
          0);
    CHECK(run("simulate --paths 1 --seed 777 --dt 0.05 --out cli_cfg_d") == 0);
    CHECK(slurp("cli_cfg_c_0.csv") == slurp("cli_cfg_d_0.csv"));
    CHECK(slurp("cli_cfg_c_0.csv") != slurp("cli_cfg_a_0.csv"));

    write_file("cli_config_bad.json", R"({"dt": 0.05, "mystery": 1})");
    CHECK(run("simulate --config cli_config_bad.json") == 2);
}
