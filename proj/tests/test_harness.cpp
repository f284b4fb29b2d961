#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "shiftsim/harness/config.hpp"
#include "shiftsim/harness/csv.hpp"
#include "shiftsim/harness/experiments.hpp"

using namespace shiftsim;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = fs::path(SHIFTSIM_FIXTURE_DIR);

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path temp_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("shiftsim_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("format_cell renders 9 significant digits") {
    CHECK(format_cell(Cell{0.760250001}) == "0.760250001");
    CHECK(format_cell(Cell{0.5}) == "0.5");
    CHECK(format_cell(Cell{1e-12}) == "1e-12");
    CHECK(format_cell(Cell{std::uint64_t{42}}) == "42");
    CHECK(format_cell(Cell{std::string("x")}) == "x");
}

TEST_CASE("emit_csv: header-only, round trip, determinism") {
    const fs::path dir = temp_dir("csv");
    Table t{{"a", "b"}, {}};
    emit_csv(t, dir / "empty.csv");
    CHECK(slurp(dir / "empty.csv") == "a,b\n");

    t.add_row({std::string("x"), 0.760250001});
    emit_csv(t, dir / "one.csv");
    emit_csv(t, dir / "two.csv");
    CHECK(slurp(dir / "one.csv") == slurp(dir / "two.csv"));
    CHECK(slurp(dir / "one.csv") == "a,b\nx,0.760250001\n");

    CHECK_THROWS(emit_csv(t, dir / "no_such_dir" / "x.csv"));
}

TEST_CASE("ingest: happy path keeps rows in order") {
    const auto result = ingest_accuracies(kFixtures / "accuracies_good.csv", "");
    CHECK(result.errors.empty());
    REQUIRE(result.records.size() == 12);
    CHECK(result.records.front().model_id == "clip_rn50_a");
    CHECK(result.records.front().ref_accuracy.value == doctest::Approx(0.602));
    CHECK(result.records.front().metadata.at("meta_arch") == "rn50");
}

TEST_CASE("ingest: filter expressions select on named and meta columns") {
    const auto sketch =
        ingest_accuracies(kFixtures / "accuracies_good.csv", "shift_name=sketch");
    CHECK(sketch.records.size() == 6);
    for (const auto& r : sketch.records) CHECK(r.shift_name == "sketch");

    const auto vit_sketch = ingest_accuracies(
        kFixtures / "accuracies_good.csv", "shift_name=sketch && meta_arch=vit");
    CHECK(vit_sketch.records.size() == 3);

    CHECK_THROWS(ingest_accuracies(kFixtures / "accuracies_good.csv", "no_equals"));
}

TEST_CASE("ingest: malformed rows produce line-numbered diagnostics") {
    const auto result =
        ingest_accuracies(kFixtures / "accuracies_malformed.csv", "");
    CHECK(result.records.size() == 3);  // good_a, good_b, good_c survive
    REQUIRE(result.errors.size() == 4);
    CHECK(result.errors[0].line == 3);
    CHECK(result.errors[0].message.find("outside [0,1]") != std::string::npos);
    CHECK(result.errors[1].line == 4);
    CHECK(result.errors[1].message.find("not numeric") != std::string::npos);
    CHECK(result.errors[2].line == 6);
    CHECK(result.errors[2].message.find("fields") != std::string::npos);
    CHECK(result.errors[3].line == 7);
    CHECK(result.errors[3].message.find("m_ref") != std::string::npos);
}

TEST_CASE("ingest: missing file and missing columns fail loudly") {
    CHECK_THROWS(ingest_accuracies(kFixtures / "nope.csv", ""));
    const fs::path dir = temp_dir("badcol");
    std::ofstream(dir / "f.csv") << "model_id,ref_accuracy\nx,0.5\n";
    CHECK_THROWS_WITH_AS(ingest_accuracies(dir / "f.csv", ""),
                         doctest::Contains("ref_dataset"), std::runtime_error);
}

TEST_CASE("ingest-then-emit is idempotent after one normalization pass") {
    const auto first = ingest_accuracies(kFixtures / "accuracies_good.csv", "");
    const fs::path dir = temp_dir("idem");
    auto write_normalized = [&](const std::vector<AccuracyRecord>& recs,
                                const fs::path& path) {
        Table t{{"model_id", "ref_dataset", "ref_accuracy", "shift_name",
                 "shift_accuracy", "m_ref", "m_shift", "meta_arch", "meta_epochs"},
                {}};
        for (const auto& r : recs)
            t.add_row({r.model_id, r.ref_dataset, r.ref_accuracy.value,
                       r.shift_name, r.shift_accuracy.value, r.m_ref, r.m_shift,
                       r.metadata.at("meta_arch"), r.metadata.at("meta_epochs")});
        emit_csv(t, path);
    };
    write_normalized(first.records, dir / "pass1.csv");
    const auto second = ingest_accuracies(dir / "pass1.csv", "");
    CHECK(second.errors.empty());
    write_normalized(second.records, dir / "pass2.csv");
    CHECK(slurp(dir / "pass1.csv") == slurp(dir / "pass2.csv"));
}

TEST_CASE("config: strict schema lists every offending field") {
    nlohmann::ordered_json j = {
        {"version", 1},
        {"kind", "ensemble_check"},
        {"seed", 7},
        {"dimension", 16},
        {"pairs", 0},            // bad value
        {"n_min", 10},
        {"n_max", 20},
        {"typo_key", true},       // unknown
    };
    try {
        parse_config(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.issues.size() == 2);
        bool saw_pairs = false, saw_typo = false;
        for (const auto& msg : e.issues) {
            saw_pairs |= msg.find("pairs") != std::string::npos;
            saw_typo |= msg.find("typo_key") != std::string::npos;
        }
        CHECK(saw_pairs);
        CHECK(saw_typo);
    }
}

TEST_CASE("config: unsupported version and unknown kind are rejected") {
    nlohmann::ordered_json j = {{"version", 2}, {"kind", "nope"}, {"seed", 1}};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
}

TEST_CASE("config: direction selectors are exclusive and validated") {
    nlohmann::ordered_json j = {
        {"version", 1},
        {"kind", "filter_experiment"},
        {"seed", 3},
        {"dimension", 32},
        {"n", 64},
        {"trials", 2},
        {"test_id", {{"direction", {{"axis", 0}}}, {"rho", 1.0}}},
        {"test_ood", {{"direction", {{"angle_deg", 60.0}, {"plane", {0, 1}}}},
                      {"rho", 1.0}}},
        {"train", {{"direction", {{"axis", 0}, {"spread", true}}}, {"rho", 1.0}}},
        {"pretrained", {{"angle_deg", 25.0}, {"plane", {0, 1}}}},
        {"filter", {{"kind", "hard_threshold"}, {"tau", 0.0}}},
    };
    CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("exactly one"),
                         ConfigError);
}

TEST_CASE("run_experiment: byte-identical reruns and jobs invariance") {
    nlohmann::ordered_json j = {
        {"version", 1},
        {"kind", "line_sweep"},
        {"seed", 20240811},
        {"dimension", 64},
        {"train", {{"direction", {{"spread", true}}}, {"rho", 1.0}}},
        {"test_ref", {{"direction", {{"spread", true}}}, {"rho", 1.0}}},
        {"test_shift",
         {{"direction", {{"angle_deg", 36.869897645844021}}}, {"rho", 1.0}}},
        {"n_grid", {32, 64}},
        {"xi_grid", {0.5, 1.0}},
        {"trials", 3},
        {"eval", {{"mode", "mc"}, {"samples", 2000}}},
    };
    const ExperimentConfig cfg = parse_config(j);

    const fs::path d1 = temp_dir("run1"), d2 = temp_dir("run2"),
                   d8 = temp_dir("run8");
    RunOptions o1;
    o1.jobs = 1;
    o1.out_override = d1.string();
    RunOptions o2 = o1;
    o2.out_override = d2.string();
    RunOptions o8;
    o8.jobs = 8;
    o8.out_override = d8.string();

    run_experiment(cfg, o1);
    run_experiment(cfg, o2);
    run_experiment(cfg, o8);
    for (const char* name : {"report.json", "points.csv", "cells.csv"}) {
        CHECK(slurp(d1 / name) == slurp(d2 / name));
        CHECK(slurp(d1 / name) == slurp(d8 / name));
    }
}

TEST_CASE("run_experiment: ingest_fit writes records, rejects, and a fit") {
    nlohmann::ordered_json j = {
        {"version", 1},
        {"kind", "ingest_fit"},
        {"seed", 1},
        {"input", (kFixtures / "accuracies_good.csv").string()},
        {"filter", "shift_name=sketch"},
        {"fit_mode", "free"},
    };
    const ExperimentConfig cfg = parse_config(j);
    const fs::path dir = temp_dir("fit");
    RunOptions opts;
    opts.out_override = dir.string();
    const auto outcome = run_experiment(cfg, opts);
    CHECK(outcome.checks_passed);
    CHECK(fs::exists(dir / "records.csv"));
    CHECK(fs::exists(dir / "rejected.csv"));
    const auto& fit = outcome.report["results"]["fit"];
    CHECK(fit["n_points"].get<int>() == 6);
    CHECK(fit["slope"].get<double>() > 0.5);
    CHECK(fit["slope"].get<double>() < 1.5);
    // probit trends of real accuracy tables come out roughly linear
    CHECK(fit["r_squared"].get<double>() > 0.9);
}

TEST_CASE("run_experiment: strict mode turns malformed rows into a failure") {
    nlohmann::ordered_json j = {
        {"version", 1},
        {"kind", "ingest_fit"},
        {"seed", 1},
        {"input", (kFixtures / "accuracies_malformed.csv").string()},
    };
    const ExperimentConfig cfg = parse_config(j);
    const fs::path dir = temp_dir("strict");
    RunOptions opts;
    opts.out_override = dir.string();
    opts.strict = true;
    const auto outcome = run_experiment(cfg, opts);
    CHECK_FALSE(outcome.checks_passed);
}

TEST_CASE("report text rendering is stable") {
    nlohmann::ordered_json r;
    r["toolkit_version"] = kToolkitVersion;
    r["checks"] = nlohmann::ordered_json::array();
    r["checks"].push_back(to_json(CheckResult{"c1", "s1", 0.5, true}));
    const std::string text = render_report_text(r);
    CHECK(text.find("toolkit_version") != std::string::npos);
    CHECK(text.find("c1") != std::string::npos);
    CHECK(render_report_text(r) == text);
}
