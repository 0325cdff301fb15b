#include <cmath>
#include <sstream>
#include <string>

#include "catch_amalgamated.hpp"
#include "tqsim/tqsim.hpp"

using namespace tqsim;

namespace {

constexpr double kPi = std::numbers::pi;

ParsedConfig parse_str(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

std::string csv_of(const Table& table, const SweepConfig& cfg) {
    std::ostringstream os;
    write_csv(os, table, cfg);
    return os.str();
}

}  // namespace

TEST_CASE("config parsing applies defaults and records overrides", "[sweep]") {
    const ParsedConfig pc = parse_str(
        "# comment only\n"
        "Q2 = 2.5   # super-Ohmic\n"
        "time = 0, 2, 5\n"
        "sweep = B2, 0.5, 2, 4\n"
        "outputs = alpha1, qfi\n");
    CHECK(pc.cfg.fixed.at("Q2") == 2.5);
    CHECK(pc.cfg.fixed.at("Q1") == 1.0);
    CHECK(pc.cfg.fixed.at("theta") == 0.5 * kPi);
    CHECK(pc.explicit_fixed.size() == 1);
    CHECK(pc.has_time);
    CHECK(pc.has_outputs);
    REQUIRE(pc.cfg.axes.size() == 1);
    CHECK(pc.cfg.axes[0].name == "B2");
    CHECK(pc.cfg.axes[0].count == 4);
    CHECK(pc.cfg.t_count == 5);
    CHECK(pc.cfg.outputs == std::vector<std::string>{"alpha1", "qfi"});
}

TEST_CASE("config parsing rejects malformed input with line numbers", "[sweep]") {
    auto msg = [](const std::string& text) {
        try {
            parse_str(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(msg("Q1\n") == "line 1: expected key = value");
    CHECK(msg("\nbogus = 1\n") == "line 2: unknown key 'bogus'");
    CHECK(msg("Q1 = fast\n") == "line 1: invalid number 'fast' for Q1");
    CHECK(msg("time = 0, 2\n") == "line 1: time needs start,stop,count");
    CHECK(msg("time = 0, 2, 2.5\n") == "line 1: invalid count '2.5' for time count");
    CHECK(msg("time = -1, 2, 5\n") == "line 1: t_start must be >= 0");
    CHECK(msg("time = 2, 1, 5\n") == "line 1: t_stop must be >= t_start");
    CHECK(msg("time = 0, 1, 3\ntime = 0, 1, 3\n") == "line 2: duplicate time grid");
    CHECK(msg("sweep = Qx, 0, 1, 3\n") == "line 1: unknown sweep parameter 'Qx'");
    CHECK(msg("sweep = Q1, 0.1, 1, 3\nsweep = Q1, 0.1, 1, 3\n") ==
          "line 2: parameter 'Q1' swept twice");
    CHECK(msg("Q1 = 2\nsweep = Q1, 0.1, 1, 3\n") ==
          "line 2: parameter 'Q1' is both fixed and swept");
    CHECK(msg("sweep = Q1, 0.1, 1, 3\nQ1 = 2\n") ==
          "line 2: parameter 'Q1' is both fixed and swept");
    CHECK(msg("sweep = Q1, 0.1, 1, 1\n") == "line 1: sweep count must be >= 2");
    CHECK(msg("sweep = Q1, 0.1, 1, 2\nsweep = Q2, 0.1, 1, 2\nsweep = B1, 0.1, 1, 2\n"
              "sweep = B2, 0.1, 1, 2\n") == "line 4: at most 3 sweep axes");
    CHECK(msg("outputs = qfi, warp\n") == "line 1: unknown output 'warp'");
    CHECK(msg("outputs = qfi, qfi\n") == "line 1: duplicate output 'qfi'");
    CHECK(msg("outputs = \n") == "line 1: outputs list is empty");
    CHECK(msg("outputs = qfi\noutputs = fi\n") == "line 2: duplicate outputs list");
    CHECK(msg("Q1 = 1\nQ1 = 2\n") == "line 2: duplicate parameter 'Q1'");
}

TEST_CASE("sweep rows are lexicographic with time innermost", "[sweep]") {
    SweepConfig cfg;
    cfg.fixed = default_parameters();
    cfg.axes = {{"Q2", 1.0, 3.0, 3}, {"B2", 0.5, 1.0, 2}};
    cfg.outputs = {"alpha2"};
    cfg.t_start = 0.0;
    cfg.t_stop = 1.0;
    cfg.t_count = 2;
    const Table tab = run_sweep(cfg);
    REQUIRE(tab.columns == std::vector<std::string>{"Q2", "B2", "t", "alpha2"});
    REQUIRE(tab.rows.size() == 3 * 2 * 2);
    // Q2 outermost, then B2, then t
    const double expect[12][3] = {
        {1, 0.5, 0}, {1, 0.5, 1}, {1, 1, 0}, {1, 1, 1}, {2, 0.5, 0}, {2, 0.5, 1},
        {2, 1, 0},   {2, 1, 1},   {3, 0.5, 0}, {3, 0.5, 1}, {3, 1, 0}, {3, 1, 1}};
    for (size_t r = 0; r < tab.rows.size(); ++r) {
        for (int c = 0; c < 3; ++c) CHECK(tab.rows[r].vals[c] == expect[r][c]);
        const double a2 =
            alpha(expect[r][2], {expect[r][0], 1.0, expect[r][1]}).alpha;
        CHECK(tab.rows[r].vals[3] == a2);
    }
}

TEST_CASE("sweep values reproduce direct library calls", "[sweep]") {
    SweepConfig cfg;
    cfg.fixed = default_parameters();
    cfg.fixed["Q2"] = 2.0;
    cfg.outputs = {"alpha1", "qfi", "f_avg", "concurrence_out", "discord_ch", "hss",
                   "trace_dist", "fidelity"};
    cfg.t_start = 0.5;
    cfg.t_stop = 1.5;
    cfg.t_count = 3;
    const Table tab = run_sweep(cfg);
    REQUIRE(tab.rows.size() == 3);
    const EnvironmentParams env1{1.0, 1.0, 1.0};
    const EnvironmentParams env2{2.0, 1.0, 1.0};
    const PureStateParams prm{0.5 * kPi, 0.0, 0.5 * kPi};
    for (const Row& row : tab.rows) {
        const double t = row.vals[0];
        CHECK(row.flag == 0);
        const DecoherenceFactor a1 = alpha(t, env1);
        const DecoherenceFactor a2 = alpha(t, env2);
        const double ae = a1.alpha * a2.alpha;
        CHECK(row.vals[1] == a1.alpha);
        CHECK(row.vals[2] == qfi_b1(t, env1, env2, prm).qfi);
        CHECK(row.vals[3] == average_fidelity(ae, prm.vartheta));
        CHECK(row.vals[4] == concurrence_x(teleport_closed_elements(ae, prm)));
        CHECK(row.vals[5] == discord_x(channel_elements(a1.alpha, a2.alpha, prm.vartheta)));
        CHECK(row.vals[6] == hss_witness(t, env1).value);
        CHECK(row.vals[7] == blp_witness(t, env1).value);
        CHECK(row.vals[8] == teleport_closed(ae, prm).fidelity_pointwise);
    }
}

TEST_CASE("degenerate start of the time grid is flagged as continuity", "[sweep]") {
    SweepConfig cfg;
    cfg.fixed = default_parameters();
    cfg.outputs = {"qfi", "fi", "alpha1"};
    cfg.t_start = 0.0;
    cfg.t_stop = 1.0;
    cfg.t_count = 2;
    const Table tab = run_sweep(cfg);
    REQUIRE(tab.rows.size() == 2);
    CHECK(tab.rows[0].flag == 1);
    CHECK(tab.rows[0].vals[1] == 0.0);
    CHECK(tab.rows[0].vals[2] == 0.0);
    CHECK(tab.rows[0].vals[3] == 1.0);
    CHECK(tab.rows[1].flag == 0);
    CHECK(max_flag(tab) == 1);
}

TEST_CASE("evaluation errors poison single cells, not the row", "[sweep]") {
    SweepConfig cfg;
    cfg.fixed = default_parameters();
    cfg.fixed["theta"] = 0.0;  // no signal basis for the Fisher outputs
    cfg.outputs = {"alpha1", "fi", "f_avg"};
    cfg.t_start = 0.5;
    cfg.t_stop = 0.5;
    cfg.t_count = 1;
    const Table tab = run_sweep(cfg);
    REQUIRE(tab.rows.size() == 1);
    const Row& row = tab.rows[0];
    CHECK(row.flag == 2);
    CHECK_FALSE(row.note.empty());
    CHECK(std::isfinite(row.vals[1]));      // alpha1 unaffected
    CHECK(std::isnan(row.vals[2]));         // fi failed
    CHECK(std::isfinite(row.vals[3]));      // f_avg unaffected
}

TEST_CASE("invalid parameter combinations poison the whole row", "[sweep]") {
    SweepConfig cfg;
    cfg.fixed = default_parameters();
    cfg.fixed["Gamma1"] = -1.0;
    cfg.outputs = {"alpha1", "f_avg"};
    cfg.t_start = 0.5;
    cfg.t_stop = 0.5;
    cfg.t_count = 1;
    const Table tab = run_sweep(cfg);
    const Row& row = tab.rows[0];
    CHECK(row.flag == 2);
    CHECK(std::isnan(row.vals[1]));
    CHECK(std::isnan(row.vals[2]));
    CHECK_FALSE(row.note.empty());
}

TEST_CASE("quiet fields freeze the dynamics", "[sweep]") {
    SweepConfig cfg;
    cfg.fixed = default_parameters();
    cfg.fixed["B1"] = 0.0;
    cfg.fixed["B2"] = 0.0;
    cfg.outputs = {"alpha1", "alpha2", "f_avg", "fidelity"};
    cfg.t_start = 0.0;
    cfg.t_stop = 4.0;
    cfg.t_count = 9;
    const Table tab = run_sweep(cfg);
    for (const Row& row : tab.rows) {
        CHECK(row.vals[1] == 1.0);
        CHECK(row.vals[2] == 1.0);
        CHECK(row.vals[3] == 1.0);
        CHECK(std::abs(row.vals[4] - 1.0) < 1e-12);
    }
}

TEST_CASE("thread count never changes the table", "[sweep]") {
    SweepConfig cfg;
    cfg.fixed = default_parameters();
    cfg.axes = {{"Q2", 1.0, 4.0, 4}};
    cfg.outputs = {"qfi", "f_avg", "concurrence_out", "hss"};
    cfg.t_start = 0.0;
    cfg.t_stop = 2.0;
    cfg.t_count = 21;
    const Table t1 = run_sweep(cfg, 1);
    const Table t4 = run_sweep(cfg, 4);
    const Table t7 = run_sweep(cfg, 7);
    REQUIRE(t1.rows.size() == t4.rows.size());
    const std::string c1 = csv_of(t1, cfg);
    CHECK(c1 == csv_of(t4, cfg));
    CHECK(c1 == csv_of(t7, cfg));
    const std::string j1 = table_json(t1, cfg).dump();
    CHECK(j1 == table_json(t4, cfg).dump());
}

TEST_CASE("config hash is stable and sensitive", "[sweep]") {
    SweepConfig cfg;
    cfg.fixed = default_parameters();
    cfg.outputs = {"qfi"};
    const std::string h = config_hash(cfg);
    CHECK(h.size() == 16);
    CHECK(h == config_hash(cfg));
    SweepConfig other = cfg;
    other.fixed["Q2"] = 2.0;
    CHECK(h != config_hash(other));
    SweepConfig tgrid = cfg;
    tgrid.t_count = 51;
    CHECK(h != config_hash(tgrid));
}

TEST_CASE("CSV layout, empty cells, and note quoting", "[sweep]") {
    SweepConfig cfg;
    cfg.fixed = default_parameters();
    cfg.fixed["theta"] = 0.0;
    cfg.outputs = {"fi", "alpha1"};
    cfg.t_start = 0.5;
    cfg.t_stop = 0.5;
    cfg.t_count = 1;
    const Table tab = run_sweep(cfg);
    const std::string csv = csv_of(tab, cfg);
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    CHECK(line.rfind("# tqsim ", 0) == 0);
    std::getline(is, line);
    CHECK(line.rfind("# config_hash ", 0) == 0);
    std::getline(is, line);
    CHECK(line.rfind("# fixed", 0) == 0);
    CHECK(line.find("theta=0") != std::string::npos);
    std::getline(is, line);
    CHECK(line.rfind("# time ", 0) == 0);
    std::getline(is, line);
    CHECK(line == "# columns t fi alpha1 flag note");
    std::getline(is, line);
    CHECK(line == "t,fi,alpha1,flag,note");
    std::getline(is, line);
    // NaN renders as an empty cell; the note is quoted
    CHECK(line.rfind("0.5,,", 0) == 0);
    CHECK(line.find(",2,\"") != std::string::npos);
}

TEST_CASE("JSON sidecar mirrors the table with nulls for NaN", "[sweep]") {
    SweepConfig cfg;
    cfg.fixed = default_parameters();
    cfg.fixed["theta"] = 0.0;
    cfg.outputs = {"fi"};
    cfg.t_start = 0.5;
    cfg.t_stop = 0.5;
    cfg.t_count = 1;
    const Table tab = run_sweep(cfg);
    const nlohmann::ordered_json j = table_json(tab, cfg);
    CHECK(j.at("columns") ==
          nlohmann::ordered_json::array({"t", "fi", "flag", "note"}));
    REQUIRE(j.at("rows").size() == 1);
    const auto& row = j.at("rows")[0];
    CHECK(row[0] == 0.5);
    CHECK(row[1].is_null());
    CHECK(row[2] == 2);
    CHECK(row[3].is_string());
}

TEST_CASE("figure definitions cover the catalog", "[sweep]") {
    const char* names[] = {"fig1a", "fig1b", "conB2", "conQ2", "conG2", "FQ", "FG",
                           "comparison"};
    for (const char* n : names) CHECK_NOTHROW(figure_def(n));
    CHECK_THROWS_AS(figure_def("fig9z"), ConfigError);
    try {
        figure_def("fig9z");
    } catch (const ConfigError& e) {
        const std::string w = e.what();
        CHECK(w.find("unknown figure 'fig9z'") != std::string::npos);
        CHECK(w.find("comparison") != std::string::npos);
    }
}

TEST_CASE("family figure assembles labeled curves", "[sweep]") {
    const FigureData fig = make_figure("fig1a", nullptr, 1, false);
    CHECK(fig.columns == std::vector<std::string>{"t", "Q2", "qfi"});
    REQUIRE(fig.rows.size() == 4 * 201);
    CHECK(fig.rows[0].vals[0] == 0.0);
    CHECK(fig.rows[0].vals[1] == 1.0);
    CHECK(fig.rows[0].flag == 1);  // t = 0 continuity row
    CHECK(fig.rows[201].vals[1] == 2.0);
    CHECK(fig.flag == 1);

    const EstimationReport rep = qfi_b1(1.0, {1.0, 1.0, 1.0}, {2.0, 1.0, 1.0},
                                        PureStateParams{0.5 * kPi, 0.0, 0.5 * kPi});
    // t grid hits 1.0 at index 40 of the second member
    const Row& probe = fig.rows[201 + 40];
    CHECK(probe.vals[0] == 1.0);
    CHECK(probe.vals[2] == rep.qfi);

    const auto& man = fig.manifest;
    CHECK(man.at("figure") == "fig1a");
    CHECK(man.at("family").at("column") == "Q2");
    CHECK(man.at("family").at("values") ==
          nlohmann::ordered_json::array({1.0, 2.0, 3.0, 4.0}));
    CHECK(man.at("parameters").at("Q1").at("source") == "default");
    CHECK(man.at("parameters").contains("Q2") == false);
    CHECK(man.at("time").at("source") == "default");
    CHECK(man.at("files") ==
          nlohmann::ordered_json::array({"fig1a.csv", "fig1a_manifest.json"}));
}

TEST_CASE("comparison figure pins its caption parameters", "[sweep]") {
    const FigureData fig = make_figure("comparison", nullptr, 1, true);
    CHECK(fig.columns == std::vector<std::string>{"t", "f_avg", "C_ch", "C_out", "QD_ch",
                                                  "QD_out", "coh_ch", "coh_out"});
    REQUIRE(fig.rows.size() == 301);
    const auto& man = fig.manifest;
    CHECK(man.at("parameters").at("Q1").at("value") == 6.0);
    CHECK(man.at("parameters").at("Q1").at("source") == "pinned");
    CHECK(man.at("parameters").at("Gamma1").at("source") == "default");
    CHECK(man.at("time").at("stop") == 6.0);
    CHECK(man.at("files") == nlohmann::ordered_json::array(
                                 {"comparison.csv", "comparison.json",
                                  "comparison_manifest.json"}));
    // row values agree with direct evaluation at the pinned parameters
    const Row& probe = fig.rows[50];
    const EnvironmentParams env{6.0, 1.0, 1.0};
    const DecoherenceFactor a = alpha(probe.vals[0], env);
    CHECK(std::abs(probe.vals[0] - 1.0) < 1e-12);
    CHECK(probe.vals[1] == average_fidelity(a.alpha * a.alpha, 0.5 * kPi));
}

TEST_CASE("plane figure emits a snapshot grid", "[sweep]") {
    const FigureData fig = make_figure("conQ2", nullptr, 1, false);
    CHECK(fig.columns == std::vector<std::string>{"Q1", "Q2", "concurrence_out"});
    REQUIRE(fig.rows.size() == 40 * 40);
    CHECK(fig.manifest.at("time").at("start") == 0.7);
    CHECK(fig.manifest.at("time").at("count") == 1);
    CHECK(fig.manifest.at("time").at("source") == "pinned");
    CHECK(fig.manifest.at("axes")[0].at("name") == "Q1");
    // rows carry the axis values, not time
    CHECK(fig.rows[0].vals[0] == 0.1);
    CHECK(fig.rows[0].vals[1] == 0.1);
    CHECK(std::abs(fig.rows[40].vals[0] - 0.2) < 1e-12);
    CHECK(fig.rows[40].vals[1] == 0.1);
}

TEST_CASE("figure overrides retune pinned scalars only", "[sweep]") {
    const ParsedConfig t0 = parse_str("time = 0, 0, 1\n");
    const FigureData fig = make_figure("conQ2", &t0, 1, false);
    REQUIRE(fig.rows.size() == 40 * 40);
    for (const Row& row : fig.rows) CHECK(row.vals[2] == 1.0);
    CHECK(fig.manifest.at("time").at("source") == "override");

    const ParsedConfig b2 = parse_str("B2 = 2\n");
    const FigureData fb = make_figure("fig1a", &b2, 1, false);
    CHECK(fb.manifest.at("parameters").at("B2").at("value") == 2.0);
    CHECK(fb.manifest.at("parameters").at("B2").at("source") == "override");

    const ParsedConfig q2 = parse_str("Q2 = 3\n");
    const ParsedConfig q1 = parse_str("Q1 = 3\n");
    const ParsedConfig outs = parse_str("outputs = qfi\n");
    const ParsedConfig ax = parse_str("sweep = B2, 0.5, 2, 3\n");
    CHECK_THROWS_AS(make_figure("fig1a", &q2, 1, false), ConfigError);
    CHECK_THROWS_AS(make_figure("FQ", &q1, 1, false), ConfigError);
    CHECK_THROWS_AS(make_figure("conQ2", &q1, 1, false), ConfigError);
    CHECK_THROWS_AS(make_figure("fig1a", &outs, 1, false), ConfigError);
    CHECK_THROWS_AS(make_figure("fig1a", &ax, 1, false), ConfigError);
}

TEST_CASE("figures are thread-count invariant", "[sweep]") {
    const FigureData f1 = make_figure("conB2", nullptr, 1, false);
    const FigureData f3 = make_figure("conB2", nullptr, 3, false);
    REQUIRE(f1.rows.size() == f3.rows.size());
    std::ostringstream a, b;
    write_figure_csv(a, f1);
    write_figure_csv(b, f3);
    CHECK(a.str() == b.str());
    CHECK(f1.manifest.dump() == f3.manifest.dump());
}
