// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "brox/error.hpp"
#include "brox/experiment.hpp"
#include "doctest.h"

namespace ex = brox::experiment;

TEST_CASE("experiment names round trip") {
    CHECK(ex::all_experiments().size() == 12);
    for (const auto e : ex::all_experiments()) CHECK(ex::parse_experiment(ex::name(e)) == e);
    CHECK(ex::name(ex::Experiment::bianeyor_k) == "bianeyor-k");
    CHECK_THROWS_AS(ex::parse_experiment("hitting_law"), brox::InvalidArgument);
}

TEST_CASE("empty table gives a header-only file") {
    CHECK(ex::format_csv({}) == std::string(ex::kCsvHeader) + "\n");
    CHECK(ex::parse_csv(ex::format_csv({})).empty());
}

TEST_CASE("rows round-trip bit-exactly") {
    ex::Row r;
    r.replica = 12;
    r.kappa = 0.1;
    r.r_or_t = 1.0 / 3.0;
    r.value = 6.02214076e23;
    r.normalized_value = std::nextafter(1.0, 2.0);
    r.truncated = false;
    r.seed = std::numeric_limits<std::uint64_t>::max();
    ex::Row t = r;
    t.replica = 13;
    t.value = std::numeric_limits<double>::denorm_min();
    t.normalized_value = std::numeric_limits<double>::quiet_NaN();
    t.truncated = true;
    const std::string text = ex::format_csv({r, t});
    CHECK(text.find('\r') == std::string::npos);
    const auto back = ex::parse_csv(text);
    REQUIRE(back.size() == 2);
    CHECK(back[0] == r);
    CHECK(back[1].value == t.value);
    CHECK(std::isnan(back[1].normalized_value));
    CHECK(back[1].truncated);
}

TEST_CASE("malformed CSV is rejected") {
    CHECK_THROWS_AS(ex::parse_csv(""), brox::InvalidArgument);
    CHECK_THROWS_AS(ex::parse_csv("a,b\n"), brox::InvalidArgument);
    const std::string h = std::string(ex::kCsvHeader) + "\n";
    CHECK_THROWS_AS(ex::parse_csv(h + "1,2,3\n"), brox::InvalidArgument);
    CHECK_THROWS_AS(ex::parse_csv(h + "1,2,3,4,5,2,7\n"), brox::InvalidArgument);
    CHECK_THROWS_AS(ex::parse_csv(h + "1,2,3,4,5,0,7,8\n"), brox::InvalidArgument);
    CHECK_THROWS_AS(ex::parse_csv(h + "x,2,3,4,5,0,7\n"), brox::InvalidArgument);
}

TEST_CASE("export_csv writes the same bytes and reports I/O errors") {
    ex::Row r;
    r.value = 2.5;
    const std::string path = "brox_test_export.csv";
    ex::export_csv({r}, path);
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    CHECK(ss.str() == ex::format_csv({r}));
    std::remove(path.c_str());
    CHECK_THROWS_AS(ex::export_csv({r}, "/nonexistent-dir/x.csv"), brox::IoError);
}

TEST_CASE("config validation and JSON overrides") {
    ex::ExperimentConfig c;
    CHECK_NOTHROW(c.validate());
    c.replicas = 0;
    CHECK_THROWS_AS(c.validate(), brox::InvalidArgument);
    c.replicas = 5;
    c.dt = 0.0;
    CHECK_THROWS_AS(c.validate(), brox::InvalidArgument);
    c.dt = 1e-3;
    c.kappa = 2.0;
    c.r_or_t = 1000.0;
    CHECK_THROWS_AS(c.validate(), brox::InvalidArgument);

    ex::ExperimentConfig j;
    ex::apply_json(j, R"({"experiment": "theta-avg", "kappa": 0.5, "r": 1000, "replicas": 7,
                          "seed": 18446744073709551615, "quenched": true, "ks_threshold": 0.1})");
    CHECK(j.experiment == ex::Experiment::theta_avg);
    CHECK(j.kappa == 0.5);
    CHECK(j.r_or_t == 1000.0);
    CHECK(j.replicas == 7);
    CHECK(j.seed == std::numeric_limits<std::uint64_t>::max());
    CHECK(j.quenched);
    CHECK(j.ks_threshold.value() == 0.1);
    CHECK_THROWS_AS(ex::apply_json(j, R"({"kapa": 1})"), brox::InvalidArgument);
    CHECK_THROWS_AS(ex::apply_json(j, R"({"kappa": "x"})"), brox::InvalidArgument);
    CHECK_THROWS_AS(ex::apply_json(j, "[1, 2]"), brox::InvalidArgument);
    CHECK_THROWS_AS(ex::apply_json(j, "{"), brox::InvalidArgument);
}

TEST_CASE("output does not depend on the worker count") {
    ex::ExperimentConfig c;
    c.experiment = ex::Experiment::hitting_law;
    c.kappa = 2.0;
    c.r_or_t = 10.0;
    c.replicas = 40;
    c.env_step = 0.02;
    c.space_step = 0.02;
    c.threads = 1;
    const auto one = ex::run_experiment(c);
    c.threads = 5;
    const auto five = ex::run_experiment(c);
    CHECK(ex::format_csv(one.rows) == ex::format_csv(five.rows));
    CHECK(one.rows.size() == 40);
    for (std::size_t i = 0; i < one.rows.size(); ++i) CHECK(one.rows[i].replica == i);
    CHECK(one.summary.to_json() == five.summary.to_json());
}

TEST_CASE("summary carries the reference and the criteria") {
    ex::ExperimentConfig c;
    c.experiment = ex::Experiment::theta_avg;
    c.kappa = 1.0;
    c.r_or_t = 1e4;
    c.replicas = 50;
    const auto res = ex::run_experiment(c);
    CHECK(res.summary.metrics.at("reference") == doctest::Approx(0.25));
    REQUIRE(res.summary.criteria.size() == 1);
    CHECK(res.summary.to_json().find("\"all_pass\"") != std::string::npos);
}

TEST_CASE("errors name the replica") {
    ex::ExperimentConfig c;
    c.experiment = ex::Experiment::lil_track;
    c.kappa = 1.0;
    c.r_or_t = 12.0;
    c.env_step = 5.0;
    c.replicas = 3;
    CHECK_THROWS_WITH_AS(ex::run_experiment(c), doctest::Contains("replica 0"), brox::InvalidArgument);
}

TEST_CASE("c1-table lists the standard drifts") {
    ex::ExperimentConfig c;
    c.experiment = ex::Experiment::c1_table;
    c.kappa = 0.9;
    const auto res = ex::run_experiment(c);
    REQUIRE(res.rows.size() == 4);
    CHECK(res.rows[1].kappa == 0.5);
    CHECK(res.rows[1].value == doctest::Approx(1.2337005501).epsilon(1e-8));
    CHECK(res.summary.all_pass());
}
