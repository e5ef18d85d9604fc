#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "tunesel/cli.hpp"
#include "tunesel/dataset.hpp"
#include "tunesel/mc.hpp"

using namespace tunesel;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string write_sample_csv(const std::string& name, int n = 60) {
    const Dataset d = simulate_dataset({TestFunction::Sin2Pi, n}, 3);
    const auto path = temp_path(name);
    save_table(d, path);
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool has_line_starting(const std::string& text, const std::string& prefix) {
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line))
        if (line.rfind(prefix, 0) == 0) return true;
    return false;
}

} // namespace

TEST_CASE("select-k mallows pipeline") {
    const auto data = write_sample_csv("cli_selk.csv");
    const auto out = temp_path("cli_selk_report.txt");
    const int rc = run_cli({"select-k", "--method", "mallows", "--data", data, "--y", "y",
                            "--kmax", "auto", "--seed", "7", "--out", out});
    CHECK(rc == 0);
    const std::string report = slurp(out);
    CHECK(has_line_starting(report, "method mallows"));
    CHECK(has_line_starting(report, "chosen_k "));
    CHECK(has_line_starting(report, "criterion_1 "));
    std::remove(data.c_str());
    std::remove(out.c_str());
}

TEST_CASE("select-k covers the remaining methods") {
    const auto data = write_sample_csv("cli_selk2.csv", 80);
    for (const std::string method : {"stein", "loo", "validation", "vfold", "lepski",
                                     "aggregation"}) {
        const auto out = temp_path("cli_selk2_" + method + ".txt");
        const int rc = run_cli({"select-k", "--method", method, "--data", data, "--y",
                                "y", "--basis", "spline", "--seed", "3", "--out", out});
        CHECK(rc == 0);
        const std::string report = slurp(out);
        CHECK(has_line_starting(report, "method " + method));
        if (method == "aggregation") CHECK(has_line_starting(report, "weight_1 "));
        std::remove(out.c_str());
    }
    std::remove(data.c_str());
}

TEST_CASE("select-lambda covers the grid, pivotal, and panel rules") {
    const auto data = write_sample_csv("cli_sell2.csv", 40);
    for (const std::string rule : {"brt", "bootstrap", "sure", "cv", "quantile"}) {
        const auto out = temp_path("cli_sell2_" + rule + ".txt");
        std::vector<std::string> args{"select-lambda", "--rule", rule, "--data", data,
                                      "--y", "y", "--seed", "2", "--B", "500",
                                      "--S", "2000", "--grid-size", "8", "--out", out};
        if (rule == "brt") args.insert(args.end(), {"--sigma", "1.0"});
        if (rule == "sure") args.insert(args.end(), {"--sigma2", "1.0"});
        CHECK(run_cli(args) == 0);
        const std::string report = slurp(out);
        CHECK(has_line_starting(report, "lambda "));
        std::remove(out.c_str());
    }
    std::remove(data.c_str());

    // panel rule needs unit/time labels
    Dataset panel;
    panel.x.resize(12, 2);
    panel.y.resize(12);
    panel.col_names = {"a", "b"};
    auto engine = std::mt19937_64(9);
    std::normal_distribution<double> normal;
    for (int u = 0; u < 4; ++u)
        for (int t = 0; t < 3; ++t) {
            const int i = 3 * u + t;
            panel.x(i, 0) = normal(engine);
            panel.x(i, 1) = normal(engine);
            panel.y(i) = panel.x(i, 0) + u + 0.3 * normal(engine);
            panel.unit.push_back(u);
            panel.unit_labels.push_back("u" + std::to_string(u));
            panel.time.push_back(t);
            panel.time_labels.push_back("t" + std::to_string(t));
        }
    const auto ppath = temp_path("cli_panel.csv");
    save_table(panel, ppath);
    const auto pout = temp_path("cli_panel_report.txt");
    CHECK(run_cli({"select-lambda", "--rule", "panel-bcch", "--data", ppath, "--y", "y",
                   "--x", "a", "--x", "b", "--unit", "unit", "--time", "time", "--out",
                   pout}) == 0);
    CHECK(has_line_starting(slurp(pout), "rule bcch_panel"));
    std::remove(ppath.c_str());
    std::remove(pout.c_str());
}

TEST_CASE("usage errors exit with 2, runtime errors with 1") {
    CHECK(run_cli({"no-such-command"}) == 2);
    CHECK(run_cli({"select-k"}) == 2); // missing required options
    const auto out = temp_path("cli_none.txt");
    CHECK(run_cli({"select-k", "--method", "mallows", "--data", "/no/such/file.csv",
                   "--y", "y", "--out", out}) == 1);
}

TEST_CASE("select-lambda bcch echoes the automatic level") {
    const auto data = write_sample_csv("cli_sell.csv", 50);
    const auto out = temp_path("cli_sell_report.txt");
    const int rc = run_cli({"select-lambda", "--rule", "bcch", "--data", data, "--y", "y",
                            "--alpha", "auto", "--out", out});
    CHECK(rc == 0);
    const std::string report = slurp(out);
    CHECK(has_line_starting(report, "rule bcch"));
    CHECK(has_line_starting(report, "lambda "));
    // alpha = 0.1/log(p v n) = 0.1/log(50) = 0.0255622...
    CHECK(report.find("alpha 0.0255622") != std::string::npos);
    std::remove(data.c_str());
    std::remove(out.c_str());
}

TEST_CASE("lasso subcommand reports the fit") {
    const auto data = write_sample_csv("cli_lasso.csv", 40);
    const auto out = temp_path("cli_lasso_report.txt");
    CHECK(run_cli({"lasso", "--data", data, "--y", "y", "--lambda", "0.5", "--out", out}) == 0);
    const std::string report = slurp(out);
    CHECK(has_line_starting(report, "lambda "));
    CHECK(has_line_starting(report, "kkt_gap "));
    CHECK(has_line_starting(report, "beta_0 "));
    std::remove(data.c_str());
    std::remove(out.c_str());
}

TEST_CASE("fit-series subcommand") {
    const auto data = write_sample_csv("cli_fit.csv", 30);
    const auto out = temp_path("cli_fit_report.txt");
    CHECK(run_cli({"fit-series", "--data", data, "--y", "y", "--basis", "spline", "--k",
                   "4", "--out", out}) == 0);
    const std::string report = slurp(out);
    CHECK(has_line_starting(report, "basis spline"));
    CHECK(has_line_starting(report, "beta_3 "));
    std::remove(data.c_str());
    std::remove(out.c_str());
}

TEST_CASE("simulate output is byte-identical across runs and worker counts") {
    const auto out1 = temp_path("cli_sim1.csv");
    const auto out2 = temp_path("cli_sim2.csv");
    const auto out3 = temp_path("cli_sim3.csv");
    const std::vector<std::string> base{"simulate", "--table1", "--reps", "6",
                                        "--seed", "11", "--n", "60", "--B", "500"};
    auto with = [&](const std::string& out, const std::string& jobs) {
        std::vector<std::string> args = base;
        args.insert(args.end(), {"--jobs", jobs, "--out", out});
        return args;
    };
    CHECK(run_cli(with(out1, "1")) == 0);
    CHECK(run_cli(with(out2, "3")) == 0);
    CHECK(run_cli(with(out3, "1")) == 0);
    const std::string a = slurp(out1);
    CHECK(a == slurp(out2));
    CHECK(a == slurp(out3));
    CHECK(has_line_starting(a, "method,basis,n,f,metric"));
    for (const auto& p : {out1, out2, out3}) std::remove(p.c_str());
}

TEST_CASE("full-precision flag switches the number format") {
    const auto data = write_sample_csv("cli_prec.csv", 30);
    const auto out6 = temp_path("cli_prec6.txt");
    const auto outf = temp_path("cli_precf.txt");
    CHECK(run_cli({"select-lambda", "--rule", "brt", "--sigma", "1", "--data", data,
                   "--y", "y", "--out", out6}) == 0);
    CHECK(run_cli({"--full-precision", "select-lambda", "--rule", "brt", "--sigma", "1",
                   "--data", data, "--y", "y", "--out", outf}) == 0);
    CHECK(slurp(out6) != slurp(outf));
    for (const auto& p : {out6, outf}) std::remove(p.c_str());
    std::remove(data.c_str());
}
