#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lrfree/cli.hpp"

using namespace lrfree::cli;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = main(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path write_file(const std::string& name, const std::string& body) {
    const auto p = std::filesystem::temp_directory_path() / ("lrfree_cli_" + name);
    std::ofstream(p) << body;
    return p;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("parse run invocation") {
    const ParseOutcome p = parse_args({"run", "--config", "exp.json", "--out", "results/"});
    REQUIRE(p.invocation.has_value());
    CHECK(p.invocation->command == Command::Run);
    CHECK(*p.invocation->config_path == "exp.json");
    CHECK(*p.invocation->out_dir == "results/");
    CHECK_FALSE(p.invocation->verbose);

    const ParseOutcome v = parse_args({"-v", "sweep", "-c", "s.json", "-j", "3"});
    REQUIRE(v.invocation.has_value());
    CHECK(v.invocation->command == Command::Sweep);
    CHECK(v.invocation->threads == 3);
    CHECK(v.invocation->verbose);
}

TEST_CASE("usage errors exit 2") {
    for (const std::vector<std::string>& args :
         {std::vector<std::string>{"run", "--config"}, {"--bogus", "list"}, {}, {"frobnicate"},
          {"run"}, {"sweep", "-c", "x", "-j", "0"}, {"list", "extra"}}) {
        const ParseOutcome p = parse_args(args);
        CHECK_FALSE(p.invocation.has_value());
        CHECK(p.exit_code == kUsage);
        CHECK(p.message.find("Usage") != std::string::npos);
    }
    CHECK(call({"--bogus"}).code == kUsage);
}

TEST_CASE("help exits 0") {
    const Result r = call({"--help"});
    CHECK(r.code == kOk);
    CHECK(r.out.find("invariants") != std::string::npos);
}

TEST_CASE("list") {
    const Result r = call({"list"});
    CHECK(r.code == kOk);
    for (const char* word : {"ps_sps", "ps_da_sgd", "dadapt_sgd", "logistic", "amsgrad", "cosine",
                             "scale-equivalence"})
        CHECK(r.out.find(word) != std::string::npos);
}

TEST_CASE("run writes outputs and exits 0") {
    const auto cfg = write_file("ok.json", R"({"name": "cli_ok",
        "objective": {"kind": "quadratic", "diag": [1, 1], "w0": [3, 4], "w_star": [0, 0]},
        "optimizer": {"kind": "sps"}, "steps": 2})");
    const auto out = std::filesystem::temp_directory_path() / "lrfree_cli_out";
    std::filesystem::remove_all(out);
    const Result r = call({"run", "--config", cfg.string(), "--out", out.string()});
    CHECK(r.code == kOk);
    CHECK(std::filesystem::exists(out / "cli_ok.csv"));
    CHECK(std::filesystem::exists(out / "cli_ok.summary.json"));
    CHECK(r.out.find("\"success\": true") != std::string::npos);
}

TEST_CASE("unknown optimizer exits 2 with the field path") {
    const auto cfg = write_file("bad.json", R"({"objective": {"kind": "l1"}, "optimizer": {"kind": "lion"}})");
    const Result r = call({"run", "-c", cfg.string(), "-o", "/tmp"});
    CHECK(r.code == kUsage);
    CHECK(r.err.find("optimizer.kind") != std::string::npos);
    CHECK(call({"run", "-c", "/nonexistent/file.json"}).code == kUsage);
}

TEST_CASE("nan run exits 1 and flushes the partial trace") {
    const auto cfg = write_file("nan.json", R"({"name": "cli_nan",
        "objective": {"kind": "quadratic", "diag": [1, 1000], "w0": [1, 1], "w_star": [0, 0]},
        "optimizer": {"kind": "sgd", "lr": 10}, "steps": 1000})");
    const auto out = std::filesystem::temp_directory_path() / "lrfree_cli_nan";
    std::filesystem::remove_all(out);
    const Result r = call({"run", "-c", cfg.string(), "-o", out.string()});
    CHECK(r.code == kRunFailure);
    CHECK(std::filesystem::file_size(out / "cli_nan.csv") > 100);
}

TEST_CASE("invariants and gradcheck") {
    CHECK(call({"invariants", "--suite", "naive-sps"}).code == kOk);
    CHECK(call({"invariants", "--suite", "nope"}).code == kUsage);
    const Result g = call({"gradcheck"});
    CHECK(g.code == kOk);
    CHECK(g.out.find("[FAIL]") == std::string::npos);
}

TEST_CASE("sweep writes a csv") {
    const auto cfg = write_file("sweep.json", R"({"runs": [
        {"name": "a", "objective": {"kind": "l1", "dim": 3}, "optimizer": {"kind": "ps_sps"}, "steps": 20},
        {"name": "b", "objective": {"kind": "l1", "dim": 3}, "optimizer": {"kind": "ps_da_sgd"}, "steps": 20}
    ]})");
    const auto out = std::filesystem::temp_directory_path() / "lrfree_cli_sweep";
    std::filesystem::remove_all(out);
    const Result r = call({"sweep", "-c", cfg.string(), "-o", out.string(), "-j", "2"});
    CHECK(r.code == kOk);
    CHECK(std::filesystem::exists(out / "sweep.csv"));
    CHECK(std::filesystem::exists(out / "a.csv"));
}

}
