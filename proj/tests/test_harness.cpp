#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fexpbayes/config.hpp"
#include "fexpbayes/errors.hpp"
#include "fexpbayes/experiment.hpp"

using namespace fexpbayes;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

ExperimentConfig smoke_config(const std::string& out_dir) {
    ExperimentConfig cfg = experiment_preset("consistency-smoke");
    cfg.out_dir = out_dir;
    return cfg;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name)
        : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("key value text: comments, blanks, trimming, last wins") {
    const std::string text =
        "# a comment\n"
        "\n"
        "  alpha = 1.5  # trailing comment\n"
        "beta=2\n"
        "alpha = 2.5\n"
        "name = hello world\n";
    const KeyValueConfig kv = KeyValueConfig::parse_string(text);
    CHECK(kv.get_double("alpha") == 2.5);
    CHECK(kv.get_int("beta") == 2);
    CHECK(kv.get_string("name") == "hello world");
    CHECK(!kv.has("gamma"));
    CHECK(kv.get_double("gamma", 9.0) == 9.0);
}

TEST_CASE("key value text: malformed input reports the line") {
    try {
        KeyValueConfig::parse_string("ok = 1\nnot a pair\n");
        FAIL("expected config_error");
    } catch (const config_error& e) {
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
    const KeyValueConfig kv = KeyValueConfig::parse_string("x = abc\n");
    CHECK_THROWS_AS(kv.get_double("x"), config_error);
    CHECK_THROWS_AS(kv.get_u64("x"), config_error);
    CHECK_THROWS_AS(kv.get_bool("x"), config_error);
    CHECK_THROWS_AS(kv.get_double("missing"), config_error);
}

TEST_CASE("key value round trip is byte stable") {
    KeyValueConfig kv;
    kv.set("b.key", "two");
    kv.set_double("a.value", 0.1);
    kv.set_u64_list("n_list", {128, 256});
    kv.set_bool("flag", true);
    const std::string once = kv.serialize();
    const KeyValueConfig back = KeyValueConfig::parse_string(once);
    CHECK(back == kv);
    CHECK(back.serialize() == once);
    CHECK(back.get_double("a.value") == 0.1);
    CHECK(back.get_u64_list("n_list") == std::vector<std::uint64_t>{128, 256});
    CHECK(back.get_bool("flag"));
}

TEST_CASE("experiment config round-trips through key value form") {
    for (const std::string& name : experiment_preset_names()) {
        const ExperimentConfig cfg = experiment_preset(name);
        CHECK_NOTHROW(cfg.validate());
        const KeyValueConfig kv = to_kv(cfg);
        const ExperimentConfig back = experiment_config_from_kv(kv);
        CHECK(to_kv(back).serialize() == kv.serialize());

        // another full cycle through text
        const KeyValueConfig reparsed = KeyValueConfig::parse_string(kv.serialize());
        CHECK(to_kv(experiment_config_from_kv(reparsed)).serialize() == kv.serialize());
    }
}

TEST_CASE("unknown keys are rejected") {
    KeyValueConfig kv = to_kv(experiment_preset("consistency-smoke"));
    kv.set("some.unknown.key", "3");
    CHECK_THROWS_AS(experiment_config_from_kv(kv), config_error);
}

TEST_CASE("unknown preset names are rejected") {
    CHECK_THROWS_AS(experiment_preset("nope"), config_error);
    const auto names = experiment_preset_names();
    CHECK(names.size() == 5);
}

TEST_CASE("config validation enforces the documented bounds") {
    ExperimentConfig cfg = experiment_preset("consistency-smoke");
    cfg.n_list = {128, 128};
    CHECK_THROWS(cfg.validate());
    cfg = experiment_preset("consistency-smoke");
    cfg.n_list = {256, 128};
    CHECK_THROWS(cfg.validate());
    cfg = experiment_preset("consistency-smoke");
    cfg.n_list = {128, 4096};
    CHECK_THROWS(cfg.validate());
    cfg = experiment_preset("consistency-smoke");
    cfg.replicates = 0;
    CHECK_THROWS(cfg.validate());
    cfg = experiment_preset("trace-limits");
    cfg.pairs.clear();
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("experiment reruns are byte identical") {
    TempDir a("fexp_harness_a"), b("fexp_harness_b");
    const ExperimentReport ra = run_experiment(smoke_config(a.path.string()));
    const ExperimentReport rb = run_experiment(smoke_config(b.path.string()));
    CHECK(ra.rows.size() == rb.rows.size());
    CHECK(slurp(a.path / "report.csv") == slurp(b.path / "report.csv"));
    CHECK(ra.exit_code() == 0);
}

TEST_CASE("fit report schema is stable") {
    TempDir dir("fexp_harness_schema");
    const ExperimentReport rep = run_experiment(smoke_config(dir.path.string()));
    std::ifstream is(dir.path / "report.csv");
    std::string header;
    std::getline(is, header);
    CHECK(header ==
          "n,rep,ok,status,d_hat,abs_err_d,l_fhat,l_fhat2,h_fhat2,"
          "prob_gt_005,prob_gt_01,prob_gt_025,ess_d");
    std::size_t rows = 0;
    for (std::string line; std::getline(is, line);) ++rows;
    const ExperimentConfig cfg = smoke_config(dir.path.string());
    CHECK(rows == cfg.n_list.size() * cfg.replicates);
    CHECK(rep.rows.size() == rows);

    const std::string summary = slurp(dir.path / "summary.json");
    for (const char* key :
         {"\"kind\"", "\"seed\"", "\"n_list\"", "\"replicates\"", "\"per_n\"",
          "\"slope_log_median_l_vs_log_n\"", "\"monotone_median_abs_err_d\"",
          "\"final_median_abs_err_d\"", "\"final_median_prob_gt_025\"",
          "\"failures\"", "\"timings\"", "\"total_s\"", "\"per_row_s\""})
        CHECK(summary.find(key) != std::string::npos);
}

TEST_CASE("trace limits report schema is stable") {
    TempDir dir("fexp_harness_trace");
    ExperimentConfig cfg = experiment_preset("trace-limits");
    cfg.n_list = {32, 64};  // keep the unit test light
    cfg.out_dir = dir.path.string();
    const ExperimentReport rep = run_experiment(cfg);
    CHECK(rep.trace_rows.size() == cfg.pairs.size() * cfg.n_list.size());
    std::ifstream is(dir.path / "report.csv");
    std::string header;
    std::getline(is, header);
    CHECK(header ==
          "pair,n,trace_value,trace_limit,trace_gap,kl_value,kl_limit,kl_gap");
}

TEST_CASE("property suite runs clean at small case counts") {
    const ExperimentReport rep = validate_properties(7, 25);
    CHECK(rep.property_rows.size() == 25);
    CHECK(rep.violations == 0);
    CHECK(rep.regime_cases > 0);
    CHECK(rep.exit_code() == 0);
    for (const auto& row : rep.property_rows) CHECK(row.ok);

    const ExperimentReport empty = validate_properties(7, 0);
    CHECK(empty.property_rows.empty());
    CHECK(empty.exit_code() == 0);
}

TEST_CASE("property suite writes the documented schema") {
    TempDir dir("fexp_harness_props");
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::divergence_properties;
    cfg.case_count = 10;
    cfg.seed = 7;
    cfg.out_dir = dir.path.string();
    const ExperimentReport rep = run_experiment(cfg);
    CHECK(rep.property_rows.size() == 10);
    std::ifstream is(dir.path / "report.csv");
    std::string header;
    std::getline(is, header);
    CHECK(header ==
          "case,d0,k0,d1,k1,h,l,b,bh_in_regime,holds_hl,holds_bh,"
          "holds_nonneg,holds_scaling,ok,status");
}

TEST_CASE("failure accounting drives the exit code") {
    ExperimentReport rep;
    rep.kind = ExperimentKind::consistency;
    rep.failure_fraction = 0.25;
    CHECK(rep.exit_code() == 2);
    rep.failure_fraction = 0.1;
    CHECK(rep.exit_code() == 0);
    rep.violations = 1;
    CHECK(rep.exit_code() == 2);
}

TEST_CASE("series dumps can be re-read by the fit path") {
    TempDir dir("fexp_harness_dump");
    ExperimentConfig cfg = smoke_config(dir.path.string());
    cfg.n_list = {64};
    cfg.replicates = 2;
    cfg.dump_series = true;
    run_experiment(cfg);
    const std::vector<double> row =
        read_series_csv_row((dir.path / "series_n64_r0.csv").string(), 0);
    CHECK(row.size() == 64);
}

TEST_CASE("experiment kind names round-trip") {
    for (ExperimentKind k : {ExperimentKind::consistency, ExperimentKind::rate,
                             ExperimentKind::trace_limits,
                             ExperimentKind::divergence_properties})
        CHECK(experiment_kind_from_string(to_string(k)) == k);
    CHECK_THROWS(experiment_kind_from_string("bogus"));
}
