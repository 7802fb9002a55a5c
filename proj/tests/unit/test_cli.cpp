#include <doctest.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "artrec/cli.hpp"
#include "artrec/policy.hpp"
#include "helpers.hpp"

namespace fs = std::filesystem;
using artrec::cli::run;

namespace {

struct Result {
    int code = 0;
    std::string out, err;
};

Result cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    Result r;
    r.code = run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// small enough that the whole pipeline runs in a few seconds
fs::path write_config(const testutil::TempDir& tmp) {
    const fs::path p = tmp / "config.json";
    std::ofstream(p) << nlohmann::json{
        {"corpus", {{"n_users", 150}, {"n_titles", 60}, {"n_examples", 900}}},
        {"runs_dir", (tmp / "runs").string()},
        {"train", {{"max_epochs", 30}, {"lr_grid", {0.1, 1.0, 3.0}}}},
    }.dump();
    return p;
}

fs::path only_run_dir(const testutil::TempDir& tmp) {
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(tmp / "runs")) dirs.push_back(e.path());
    REQUIRE(dirs.size() == 1);
    return dirs.front();
}

}  // namespace

TEST_CASE("cli pipeline end to end") {
    testutil::TempDir tmp;
    const std::string cfg = write_config(tmp).string();
    auto with = [&](std::vector<std::string> a) {
        a.insert(a.end(), {"--config", cfg, "--seed", "5"});
        return cli(a);
    };

    auto r = with({"synth"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("bayes-optimal accuracy") != std::string::npos);
    const fs::path dir = only_run_dir(tmp);
    for (const char* f : {"corpus/train.jsonl", "corpus/val.jsonl", "corpus/test.jsonl", "corpus/corpus.oracle"}) {
        CHECK_MESSAGE(fs::exists(dir / f), f);
        CHECK_MESSAGE(fs::exists(dir / (std::string(f) + ".manifest.json")), f);
    }
    const std::string train_first = slurp(dir / "corpus/train.jsonl");
    const std::string train_manifest = slurp(dir / "corpus/train.jsonl.manifest.json");

    REQUIRE(with({"export", "--kind", "sft"}).code == 0);
    REQUIRE(with({"export", "--kind", "dpo"}).code == 0);
    const std::string sft_first = slurp(dir / "exports/sft.train.jsonl");

    r = with({"train", "--objective", "sft"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("selected lr") != std::string::npos);
    CHECK(fs::exists(dir / "checkpoints/sft.json"));
    CHECK(fs::exists(dir / "checkpoints/sft.lr.txt"));
    r = with({"train", "--objective", "dpo"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(artrec::policy::load_checkpoint(dir / "checkpoints/dpo.json").parent_checkpoint.find("sft") !=
          std::string::npos);

    const std::string sft_ckpt = (dir / "checkpoints/sft.json").string();
    for (const std::string b : {"random", "fixed", "oracle", "heuristic"}) {
        r = with({"infer", "--backend", b});
        REQUIRE_MESSAGE(r.code == 0, b << ": " << r.err);
    }
    REQUIRE(with({"infer", "--backend", "policy:" + sft_ckpt, "--name", "sft", "--parallelism", "4"}).code == 0);
    const std::string random_log = (dir / "logs/random.test.jsonl").string();
    const std::string sft_log_first = slurp(dir / "logs/sft.test.jsonl");

    std::vector<std::string> entries;
    for (const std::string name : {"random", "fixed", "oracle", "heuristic", "sft"}) {
        r = with({"eval", "--log", (dir / "logs" / (name + ".test.jsonl")).string(), "--baseline", random_log});
        REQUIRE_MESSAGE(r.code == 0, name << ": " << r.err);
        CHECK(fs::exists(dir / "reports" / (name + ".json")));
        CHECK(fs::exists(dir / "reports" / (name + ".labels.csv")));
        entries.push_back(name + "=" + (dir / "reports" / (name + ".json")).string());
    }
    const auto oracle_report = nlohmann::json::parse(slurp(dir / "reports/oracle.json"));
    CHECK(oracle_report.at("accuracy").get<double>() == 1.0);
    const auto fixed_report = nlohmann::json::parse(slurp(dir / "reports/fixed.json"));
    // 75 test rows are too few for the detector's evidence floor; check the shape only
    CHECK(fixed_report.contains("position_bias"));
    const std::string csv = slurp(dir / "reports/fixed.labels.csv");
    CHECK(csv.find("\n1,") != std::string::npos);

    std::vector<std::string> report_args = {"report"};
    report_args.insert(report_args.end(), entries.begin(), entries.end());
    report_args.insert(report_args.end(), {"--baseline", "random", "--out", (dir / "reports/summary.txt").string()});
    r = with(report_args);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    for (const char* name : {"random", "fixed", "oracle", "heuristic", "sft"})
        CHECK(r.out.find(name) != std::string::npos);

    SUBCASE("reasoning distillation feeds the reasoning export") {
        r = with({"distill", "--backend", "oracle:0.02"});
        REQUIRE_MESSAGE(r.code == 0, r.err);
        CHECK(fs::exists(dir / "reasoning/train.jsonl"));
        r = with({"export", "--kind", "sft-reason", "--reasoning", (dir / "reasoning/train.jsonl").string()});
        REQUIRE_MESSAGE(r.code == 0, r.err);
        CHECK(fs::file_size(dir / "exports/sft-reason.train.jsonl") > 0);
    }

    SUBCASE("reruns are byte-identical") {
        REQUIRE(with({"synth"}).code == 0);
        REQUIRE(with({"export", "--kind", "sft"}).code == 0);
        REQUIRE(with({"infer", "--backend", "policy:" + sft_ckpt, "--name", "sft"}).code == 0);
        CHECK(slurp(dir / "corpus/train.jsonl") == train_first);
        CHECK(slurp(dir / "corpus/train.jsonl.manifest.json") == train_manifest);
        CHECK(slurp(dir / "exports/sft.train.jsonl") == sft_first);
        CHECK(slurp(dir / "logs/sft.test.jsonl") == sft_log_first);
    }

    SUBCASE("logs over different examples are not compared") {
        REQUIRE(with({"infer", "--backend", "random", "--split", "val"}).code == 0);
        r = with({"eval", "--log", (dir / "logs/random.val.jsonl").string(), "--baseline", random_log});
        CHECK(r.code == 1);
        CHECK(r.err.find("key mismatch") != std::string::npos);
    }

    SUBCASE("manifests record the config hash and input digests") {
        const auto m = nlohmann::json::parse(slurp(dir / "logs/sft.test.jsonl.manifest.json"));
        CHECK(m.at("config_hash").get<std::string>().size() == 64);
        CHECK(m.at("output_sha256").get<std::string>().size() == 64);
        CHECK(!m.at("inputs").empty());
        CHECK(m.dump().find("time") == std::string::npos);
        CHECK(fs::exists(dir / "metadata.jsonl"));
    }
}

TEST_CASE("cli usage errors") {
    testutil::TempDir tmp;
    const std::string cfg = write_config(tmp).string();

    auto r = cli({"synth", "--config", cfg});
    CHECK(r.code == 1);
    CHECK(r.err.find("seed") != std::string::npos);

    r = cli({"infer", "--config", cfg, "--seed", "1"});
    CHECK(r.code == 1);
    CHECK(r.err.find("--backend") != std::string::npos);

    r = cli({"distill", "--config", cfg, "--seed", "1"});
    CHECK(r.code == 1);

    r = cli({"frobnicate"});
    CHECK(r.code == 1);

    std::ofstream(tmp / "bad.json") << R"({"corpus": {"n_users": 10, "colour": "red"}})";
    r = cli({"synth", "--config", (tmp / "bad.json").string(), "--seed", "1"});
    CHECK(r.code == 1);
    CHECK(r.err.find("colour") != std::string::npos);

    r = cli({"synth", "--config", cfg, "--seed", "1", "--parallelism", "0"});
    CHECK(r.code == 1);
}

TEST_CASE("cli maps backend failures to exit 2") {
    testutil::TempDir tmp;
    const fs::path p = tmp / "http.json";
    std::ofstream(p) << nlohmann::json{
        {"corpus", {{"n_users", 150}, {"n_titles", 60}, {"n_examples", 900}}},
        {"runs_dir", (tmp / "runs").string()},
        {"backend", {{"retries", 1}, {"timeout_ms", 500}}},
    }.dump();
    const std::string cfg = p.string();
    REQUIRE(cli({"synth", "--config", cfg, "--seed", "2"}).code == 0);
    // nothing listens on port 9; every request fails, so more than 1% of rows fail
    auto r = cli({"infer", "--config", cfg, "--seed", "2", "--backend", "http:http://127.0.0.1:9/v1/completions"});
    CHECK(r.code == 2);
}
