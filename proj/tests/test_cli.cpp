#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qfa/commands.hpp"

using namespace qfa;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
    return out;
}

/// Rows after the header, split into fields.
std::vector<std::vector<std::string>> data_rows(const std::string& csv) {
    std::vector<std::vector<std::string>> rows;
    bool header = false;
    for (const auto& l : lines_of(csv)) {
        if (l.starts_with("#")) continue;
        if (!header) {
            header = true;
            continue;
        }
        rows.push_back(split(l));
    }
    return rows;
}

std::string header_of(const std::string& csv) {
    for (const auto& l : lines_of(csv))
        if (!l.starts_with("#")) return l;
    return {};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "qfa_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = scratch(name);
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + QFA_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Table1, DefaultsReproduceReference) {
    std::ostringstream os, err;
    EXPECT_EQ(cmd_table1({}, os, err), exit_ok) << err.str();
    EXPECT_EQ(header_of(os.str()), "case,N,M1_db,x,beta_A,beta_B,S_A,S_B,gm_db,typeA_stable,typeB_stable");
    const auto rows = data_rows(os.str());
    ASSERT_EQ(rows.size(), 4u);
    const auto& r3 = rows[2];
    EXPECT_EQ(r3[0], "case3");
    EXPECT_EQ(r3[1], "5");
    EXPECT_NEAR(std::stod(r3[2]), 45.0, 0.5);
    EXPECT_NEAR(std::stod(r3[5]), 0.0034, 5e-4);
    EXPECT_NEAR(std::stod(r3[6]), 1.0718, 5e-4);
    EXPECT_NEAR(std::stod(r3[7]), 0.7428, 5e-4);
    EXPECT_NEAR(std::stod(r3[8]), 8.5699, 0.05);
    EXPECT_EQ(r3[9], "true");
    EXPECT_EQ(r3[10], "true");
}

TEST(Table1, MetadataAndPrecision) {
    const auto t = run_table1(default_config());
    const auto ls = lines_of(t.csv);
    ASSERT_GE(ls.size(), 5u);
    EXPECT_EQ(ls[0], "# tool: qfa 1.0.0");
    EXPECT_TRUE(ls[2].starts_with("# config_hash: fnv1a64:"));
    EXPECT_EQ(format_number(0.1), "0.10000000000000001");
    EXPECT_EQ(std::stod(format_number(t.rows[0].s_a.value())), t.rows[0].s_a.value());
    EXPECT_TRUE(t.json.contains("rows"));
    EXPECT_TRUE(t.deviations.empty());
}

TEST(Table1, SingleAmplifierTopologiesCoincide) {
    const auto doc = parse_config(R"({"cases": [{"name": "one", "n_amplifiers": 1, "x": 0.8, "beta_A": 0.25}]})");
    const auto row = run_table1(doc).rows.at(0);
    ASSERT_TRUE(row.beta_b && row.s_a && row.s_b);
    EXPECT_NEAR(*row.beta_b, 0.25, 1e-12);
    EXPECT_NEAR(*row.s_a, *row.s_b, 1e-12);
}

TEST(Table1, PassiveAmplifierReportsNA) {
    const auto doc = parse_config(R"({"cases": [{"name": "off", "n_amplifiers": 2, "x": 0.0, "beta_A": 0.1}]})");
    const auto t = run_table1(doc);
    const auto& row = t.rows.at(0);
    EXPECT_NEAR(row.m1_db, 0.0, 1e-12);
    EXPECT_FALSE(row.s_a);
    EXPECT_FALSE(row.beta_b);
    const auto fields = data_rows(t.csv).at(0);
    EXPECT_EQ(fields[5], "NA");
    EXPECT_EQ(fields[6], "NA");
    EXPECT_EQ(fields[7], "NA");
    EXPECT_EQ(fields[8], "NA");
}

TEST(Table1, ConfigErrorsExitTwo) {
    const std::string bad[] = {
        R"({"cases": [{"name": "a", "n_amplifiers": 2, "x": 1.2, "beta_A": 0.1}]})",
        R"({"cases": [{"name": "a", "n_amplifiers": 0, "x": 0.5, "beta_A": 0.1}]})",
        R"({"cases": [{"name": "a", "n_amplifiers": 2, "x": 0.5, "beta_A": 1.5}]})",
        R"({"cases": [{"name": "a", "n_amplifiers": 2, "x": 0.5}]})",
        R"({"cases": []})",
        R"(not json)",
    };
    int i = 0;
    for (const auto& text : bad) {
        const auto p = write_config("bad" + std::to_string(i++) + ".json", text);
        std::ostringstream os, err;
        EXPECT_EQ(cmd_table1({p.string(), std::nullopt}, os, err), exit_config) << text;
        EXPECT_FALSE(err.str().empty());
    }
    std::ostringstream os, err;
    EXPECT_EQ(cmd_table1({"/nonexistent/qfa.json", std::nullopt}, os, err), exit_config);
}

TEST(Table1, ExpectedDeviationExitsThree) {
    const auto p = write_config("dev.json", R"({"cases": [{"name": "c1", "n_amplifiers": 2, "x": 0.9, "beta_A": 0.2,
        "expected": {"S_A": {"value": 0.5, "tol": 1e-3}}}]})");
    std::ostringstream os, err;
    EXPECT_EQ(cmd_table1({p.string(), std::nullopt}, os, err), exit_tolerance);
    EXPECT_NE(err.str().find("c1.S_A"), std::string::npos);
}

TEST(Table1, OutWritesCsvAndJson) {
    const auto out = scratch("table1.csv");
    std::ostringstream os, err;
    ASSERT_EQ(cmd_table1({std::nullopt, out.string()}, os, err), exit_ok);
    EXPECT_TRUE(os.str().empty());
    EXPECT_EQ(slurp(out), run_table1(default_config()).csv);
    const auto js = nlohmann::json::parse(slurp(scratch("table1.json")));
    EXPECT_EQ(js["rows"].size(), 4u);
}

TEST(Nyquist, CaseSummaries) {
    const auto doc = default_config();
    const auto n1 = run_nyquist(doc, doc.find("case1"));
    EXPECT_EQ(n1.summary["encirclements"], 0);
    EXPECT_NEAR(n1.summary["gm_db"].get<double>(), 8.1310, 0.05);
    const auto n4 = run_nyquist(doc, doc.find("CASE4"));
    EXPECT_NEAR(n4.summary["gm_db"].get<double>(), 19.9847, 0.05);
    EXPECT_EQ(header_of(n1.csv), "omega,re_L,im_L");
    const auto rows = data_rows(n1.csv);
    EXPECT_EQ(rows.front()[0], "0");
    EXPECT_EQ(rows.back()[0], "inf");
}

TEST(Nyquist, ZeroFeedbackCurve) {
    const auto doc = parse_config(R"({"cases": [{"name": "z", "n_amplifiers": 2, "x": 0.9, "beta_A": 0.2,
        "beta_B": 0.0, "grid": {"points": 50}}]})");
    const auto n = run_nyquist(doc, doc.cases[0]);
    for (const auto& pt : n.result.curve) EXPECT_EQ(std::abs(pt.value), 0.0);
    EXPECT_EQ(n.result.encirclements, 0);
    EXPECT_TRUE(n.summary["gm_db"].is_null());
}

TEST(Nyquist, UnknownCaseIsConfigError) {
    std::ostringstream os, err;
    EXPECT_EQ(cmd_nyquist({"case9", std::nullopt, std::nullopt}, os, err), exit_config);
}

TEST(Gainplot, ColumnsAndMetadata) {
    const auto doc = default_config();
    gainplot_options opt;
    opt.samples = 3;
    opt.seed = 5;
    const auto g = run_gainplot(doc, doc.find("case1"), opt);
    EXPECT_EQ(header_of(g.csv), "sample,omega,gain_db_uncontrolled,gain_db_typeA,gain_db_typeB,unstable_flag");
    EXPECT_NE(g.csv.find("# seed: 5\n"), std::string::npos);
    EXPECT_NE(g.csv.find("# generator: " + std::string(generator_name)), std::string::npos);
    EXPECT_NE(g.csv.find("# tool: qfa 1.0.0"), std::string::npos);
    const auto rows = data_rows(g.csv);
    EXPECT_EQ(rows.size(), 3u * 2001u);
    EXPECT_EQ(rows[0][1], "0");
    for (const auto& r : rows) {
        ASSERT_EQ(r.size(), 6u);
        EXPECT_TRUE(r[5] == "0" || r[5] == "1");
    }
}

TEST(Gainplot, ControlledPeakingStaysSmall) {
    const auto doc = default_config();
    const auto g = run_gainplot(doc, doc.find("case2"), {});
    double worst = -1e9;
    for (const auto& s : g.result.samples)
        for (std::size_t f = 0; f < g.result.omegas.size(); ++f)
            for (auto sys : {type_a, type_b})
                worst = std::max(worst, s.gain_db[f][sys] - g.result.nominal_db[f][sys]);
    EXPECT_LT(worst, 3.0);
}

TEST(Gainplot, IdenticalAcrossThreadCounts) {
    const auto doc = default_config();
    gainplot_options one, many;
    one.samples = many.samples = 12;
    many.threads = 4;
    EXPECT_EQ(run_gainplot(doc, doc.find("case3"), one).csv, run_gainplot(doc, doc.find("case3"), many).csv);
}

TEST(Verify, AllScopesPass) {
    verify_args a;
    a.options.draws = 200;
    a.json_out = scratch("verify.json").string();
    std::ostringstream os, err;
    EXPECT_EQ(cmd_verify(a, os, err), exit_ok) << os.str() << err.str();
    EXPECT_EQ(os.str().find("FAIL"), std::string::npos) << os.str();
    const auto js = nlohmann::json::parse(slurp(scratch("verify.json")));
    EXPECT_TRUE(js["passed"].get<bool>());
    EXPECT_EQ(js["properties"].size(), 11u);
}

TEST(Verify, TheoremScopeOnly) {
    verify_options o;
    o.scope = verify_scope::theorem;
    o.draws = 100;
    const auto rep = run_verify(o);
    EXPECT_EQ(rep.properties.size(), 2u);
    EXPECT_TRUE(rep.all_passed());
}

TEST(Verify, CorruptedSignBridgeFails) {
    verify_args a;
    a.options.draws = 100;
    a.options.bridge = sign_bridge::inverted;
    std::ostringstream os, err;
    EXPECT_EQ(cmd_verify(a, os, err), exit_tolerance);
    EXPECT_NE(os.str().find("FAIL theorem/"), std::string::npos);
}

TEST(Binary, ExitCodes) {
    EXPECT_EQ(run_cli("table1 --out " + scratch("bin_table1.csv").string()), 0);
    EXPECT_EQ(run_cli("table1 --config /nonexistent.json"), 2);
    EXPECT_EQ(run_cli("nyquist"), 2);
    EXPECT_EQ(run_cli("frobnicate"), 2);
    const auto p = write_config("bin_dev.json", R"({"cases": [{"name": "c1", "n_amplifiers": 2, "x": 0.9,
        "beta_A": 0.2, "expected": {"gm_db": {"value": 1.0, "tol": 0.01}}}]})");
    EXPECT_EQ(run_cli("table1 --config " + p.string()), 3);
    EXPECT_EQ(run_cli("verify --scope ccr"), 0);
    EXPECT_EQ(run_cli("verify --scope theorem --draws 50 --corrupt-sign-bridge"), 3);
}

TEST(Binary, GainplotFilesAreByteIdentical) {
    const auto a = scratch("bin_gp_a.csv"), b = scratch("bin_gp_b.csv");
    ASSERT_EQ(run_cli("gainplot --case case2 --seed 3 --samples 6 --out " + a.string()), 0);
    ASSERT_EQ(run_cli("gainplot --case case2 --seed 3 --samples 6 --threads 3 --out " + b.string()), 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_TRUE(fs::exists(scratch("bin_gp_a.json")));
}
