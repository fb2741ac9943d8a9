// C API and command-line tests. Links only the shared library.
#include "doctest.h"

#include "rulehaz/rulehaz.h"

#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const fs::path kTmp = fs::path(RULEHAZ_TEST_TMP);

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& s) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << s;
}

int run(const std::string& args) {
    const std::string cmd = std::string(RULEHAZ_CLI) + " " + args + " > " + (kTmp / "stdout.txt").string() +
                            " 2> " + (kTmp / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string f; std::getline(in, f, ',');) out.push_back(f);
    return out;
}

// Deterministic 50-row toy CSV with two covariates.
std::string toy_csv() {
    std::string s = "time,event,treatment,age,marker\n";
    for (int i = 0; i < 50; ++i) {
        const double age = 30.0 + (i * 37 % 41);
        const int marker = (i * 7) % 3 == 0;
        const int z = i % 2;
        const double t = 0.2 + std::fmod(i * 0.731, 3.0) * (marker && z ? 2.0 : 1.0);
        s += std::to_string(t) + "," + std::to_string(i % 4 != 3) + "," + std::to_string(z) + "," +
             std::to_string(age) + "," + std::to_string(marker) + "\n";
    }
    return s;
}

} // namespace

TEST_CASE("C API reports status codes and messages") {
    rulehaz_dataset* data = nullptr;
    CHECK(rulehaz_dataset_load_csv(nullptr, &data) == RULEHAZ_USAGE_ERROR);
    CHECK(std::string(rulehaz_last_error()).size() > 0);
    CHECK(rulehaz_dataset_load_csv((kTmp / "does-not-exist.csv").c_str(), &data) == RULEHAZ_DATA_ERROR);

    rulehaz_model* model = nullptr;
    CHECK(rulehaz_model_from_json("{\"schema_version\": 1}", &model) == RULEHAZ_DATA_ERROR);
    CHECK(rulehaz_model_from_json("[", &model) == RULEHAZ_DATA_ERROR);
    CHECK(model == nullptr);

    char* meta = nullptr;
    CHECK(rulehaz_simulate("{\"scenario\": \"M9xT1\"}", &data, &meta) == RULEHAZ_USAGE_ERROR);
    REQUIRE(rulehaz_simulate("{\"scenario\": \"M1xT1\", \"n\": 120, \"seed\": 3}", &data, &meta) == RULEHAZ_OK);
    const auto m = nlohmann::json::parse(meta);
    rulehaz_string_free(meta);
    CHECK(m.contains("censoring_fraction"));
    std::size_t rows = 0, features = 0;
    rulehaz_dataset_shape(data, &rows, &features);
    CHECK(rows == 120);
    CHECK(features == 15);

    CHECK(rulehaz_fit(data, "{\"bogus\": 1}", &model) == RULEHAZ_USAGE_ERROR);
    CHECK(rulehaz_fit(data, "{\"trees\": ", &model) == RULEHAZ_USAGE_ERROR);
    REQUIRE(rulehaz_fit(data, "{\"trees\": 30, \"num_lambdas\": 10, \"seed\": 2}", &model) == RULEHAZ_OK);

    std::vector<double> x(15, 0.0), s1(1), s0(1), hte(1);
    std::vector<int> ext(1);
    CHECK(rulehaz_predict(model, 1, 14, x.data(), 1.0, s1.data(), s0.data(), hte.data(), ext.data()) ==
          RULEHAZ_DATA_ERROR);
    CHECK(rulehaz_predict(model, 1, 15, x.data(), -1.0, s1.data(), s0.data(), hte.data(), ext.data()) ==
          RULEHAZ_USAGE_ERROR);
    REQUIRE(rulehaz_predict(model, 1, 15, x.data(), 1.0, s1.data(), s0.data(), hte.data(), ext.data()) == RULEHAZ_OK);
    CHECK(hte[0] == doctest::Approx(s1[0] - s0[0]));

    char* json = nullptr;
    REQUIRE(rulehaz_model_to_json(model, &json) == RULEHAZ_OK);
    rulehaz_model* again = nullptr;
    REQUIRE(rulehaz_model_from_json(json, &again) == RULEHAZ_OK);
    rulehaz_string_free(json);
    std::vector<double> hte2(1);
    rulehaz_predict(again, 1, 15, x.data(), 1.0, nullptr, nullptr, hte2.data(), nullptr);
    CHECK(std::abs(hte2[0] - hte[0]) <= 1e-12);

    char* rep = nullptr;
    CHECK(rulehaz_report(model, data, "yaml", &rep) == RULEHAZ_USAGE_ERROR);
    REQUIRE(rulehaz_report(model, data, "text", &rep) == RULEHAZ_OK);
    CHECK(std::string(rep).find("Variable importance") != std::string::npos);
    rulehaz_string_free(rep);

    rulehaz_model_free(again);
    rulehaz_model_free(model);
    rulehaz_dataset_free(data);
}

TEST_CASE("CLI exit codes") {
    fs::create_directories(kTmp);
    CHECK(run("") == 2);
    CHECK(run("fit --data") == 2);
    CHECK(run("simulate --scenario M4xT2 --out " + (kTmp / "bad").string()) == 2);
    CHECK(slurp(kTmp / "stderr.txt").find("M1xT1") != std::string::npos);
    CHECK(run("fit --data " + (kTmp / "missing.csv").string() + " --model " + (kTmp / "m.json").string()) == 3);
    write(kTmp / "ragged.csv", "time,event,treatment,x\n1,1,0\n");
    CHECK(run("fit --data " + (kTmp / "ragged.csv").string() + " --model " + (kTmp / "m.json").string()) == 3);
    write(kTmp / "one_arm.csv", "time,event,treatment,x\n1,1,0,1\n2,0,1,2\n3,1,0,3\n4,0,1,4\n");
    CHECK(run("fit --data " + (kTmp / "one_arm.csv").string() + " --model " + (kTmp / "m.json").string()) == 3);
    CHECK(slurp(kTmp / "stderr.txt").find("arm") != std::string::npos);
}

TEST_CASE("CLI simulate writes data and metadata") {
    const auto dir = kTmp / "sim";
    REQUIRE(run("simulate --scenario M1xT1 --n 1000 --seed 1 --out " + dir.string()) == 0);
    const auto rows = lines(slurp(dir / "data.csv"));
    REQUIRE(rows.size() == 1001);
    const auto header = split(rows[0]);
    CHECK(header.size() == 18);
    CHECK(header[0] == "time");
    CHECK(header[17] == "x15");
    const auto meta = nlohmann::json::parse(slurp(dir / "metadata.json"));
    CHECK(meta["censoring_fraction"].get<double>() > 0.0);
    CHECK(meta["censoring_fraction"].get<double>() < 1.0);
}

TEST_CASE("CLI fit, predict and report on a 50-row toy file") {
    const auto dir = kTmp / "toy";
    write(dir / "toy.csv", toy_csv());
    const std::string fit = "fit --data " + (dir / "toy.csv").string() + " --seed 7 --trees 100 --model ";
    REQUIRE(run(fit + (dir / "a.json").string()) == 0);
    REQUIRE(run(fit + (dir / "b.json").string()) == 0);
    const auto a = slurp(dir / "a.json");
    CHECK(a == slurp(dir / "b.json"));

    const auto model = nlohmann::json::parse(a);
    CHECK(model["schema_version"] == 1);
    const auto& c = model["coefficients"];
    for (std::size_t k = 0; k < c["alpha"].size(); ++k) {
        CHECK((c["alpha"][k].get<double>() == 0.0) == (c["beta"][k].get<double>() == 0.0));
    }
    for (std::size_t k = 0; k < c["alpha_star"].size(); ++k) {
        CHECK((c["alpha_star"][k].get<double>() == 0.0) == (c["beta_star"][k].get<double>() == 0.0));
    }

    // Ten rows in, ten rows out, order preserved.
    std::string cov = "marker,age\n";
    for (int i = 0; i < 10; ++i) cov += std::to_string(i % 2) + "," + std::to_string(30 + 3 * i) + "\n";
    write(dir / "ten.csv", cov);
    REQUIRE(run("predict --model " + (dir / "a.json").string() + " --data " + (dir / "ten.csv").string() +
                " --t0 1.0 --out " + (dir / "pred.csv").string()) == 0);
    const auto pred = lines(slurp(dir / "pred.csv"));
    REQUIRE(pred.size() == 11);
    CHECK(pred[0] == "id,S1,S0,hte,extrapolated,age,marker");
    for (int i = 0; i < 10; ++i) {
        const auto f = split(pred[static_cast<std::size_t>(i) + 1]);
        CHECK(f[0] == std::to_string(i + 1));
        CHECK(std::stod(f[5]) == 30 + 3 * i);
        CHECK(std::stod(f[3]) == doctest::Approx(std::stod(f[1]) - std::stod(f[2])).epsilon(1e-12));
    }

    write(dir / "empty.csv", "age,marker\n");
    REQUIRE(run("predict --model " + (dir / "a.json").string() + " --data " + (dir / "empty.csv").string()) == 0);
    CHECK(lines(slurp(kTmp / "stdout.txt")).size() == 1);

    write(dir / "wrong.csv", "age,weight\n1,2\n");
    CHECK(run("predict --model " + (dir / "a.json").string() + " --data " + (dir / "wrong.csv").string()) == 3);
    const auto err = slurp(kTmp / "stderr.txt");
    CHECK(err.find("missing: marker") != std::string::npos);
    CHECK(err.find("extra: weight") != std::string::npos);

    REQUIRE(run("report --model " + (dir / "a.json").string() + " --data " + (dir / "toy.csv").string() +
                " --out " + (dir / "report").string()) == 0);
    for (const char* f : {"report.txt", "report.json", "rules.csv", "linear_terms.csv", "variables.csv"}) {
        CHECK(fs::exists(dir / "report" / f));
    }
}

TEST_CASE("CLI lambda max gives zero effects everywhere") {
    const auto dir = kTmp / "null";
    write(dir / "toy.csv", toy_csv());
    REQUIRE(run("fit --data " + (dir / "toy.csv").string() + " --seed 7 --trees 50 --lambda max --model " +
                (dir / "m.json").string()) == 0);
    REQUIRE(run("predict --model " + (dir / "m.json").string() + " --data " + (dir / "toy.csv").string() +
                " --out " + (dir / "p.csv").string()) == 0);
    const auto pred = lines(slurp(dir / "p.csv"));
    REQUIRE(pred.size() == 51);
    for (std::size_t i = 1; i < pred.size(); ++i) CHECK(std::stod(split(pred[i])[3]) == 0.0);

    REQUIRE(run("report --model " + (dir / "m.json").string() + " --data " + (dir / "toy.csv").string() +
                " --out " + (dir / "rep").string()) == 0);
    CHECK(lines(slurp(dir / "rep" / "rules.csv")).size() == 1);
    for (const auto& l : lines(slurp(dir / "rep" / "variables.csv"))) {
        if (l.rfind("feature", 0) == 0) continue;
        CHECK(std::stod(split(l)[1]) == 0.0);
    }
}

TEST_CASE("CLI truth at the origin matches the closed form") {
    const auto dir = kTmp / "truth";
    std::string cov;
    for (int j = 1; j <= 15; ++j) cov += (j > 1 ? ",x" : "x") + std::to_string(j);
    cov += "\n0";
    for (int j = 2; j <= 15; ++j) cov += ",0";
    cov += "\n0,0,0,0,0,1";  // second row: x6 = 1
    for (int j = 7; j <= 15; ++j) cov += ",0";
    write(dir / "zero.csv", cov + "\n");
    REQUIRE(run("truth --scenario M1xT1 --data " + (dir / "zero.csv").string() + " --out " +
                (dir / "t.csv").string()) == 0);
    const auto rows = lines(slurp(dir / "t.csv"));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].rfind("id,truth,analytic,x1", 0) == 0);
    // Origin: mu = tau = 0, identical arms.
    const auto f = split(rows[1]);
    CHECK(std::stod(f[2]) == 0.0);
    CHECK(std::abs(std::stod(f[1])) <= 0.005);
    // x6 = 1: mu = -1, tau = 1.5, horizon 2.
    const double closed = std::exp(-4.0 * std::exp(-1.0 + 0.75)) - std::exp(-4.0 * std::exp(-1.0 - 0.75));
    const auto g = split(rows[2]);
    CHECK(std::stod(g[2]) == doctest::Approx(closed).epsilon(1e-12));
    CHECK(std::abs(std::stod(g[1]) - closed) <= 0.005);
}
