#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "tunesel/dataset.hpp"
#include "tunesel/rng.hpp"

using namespace tunesel;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << content;
    return path;
}

} // namespace

TEST_CASE("load_table reads a small file") {
    const auto path = write_temp("ts_small.csv", "y,x1\n1,0.5\n2,0.25\n3,0.75\n4,1\n");
    TableSchema schema;
    schema.y = "y";
    const Dataset d = load_table(path, schema);
    CHECK(d.n() == 4);
    CHECK(d.p() == 1);
    CHECK(d.y(0) == 1.0);
    CHECK(d.x(3, 0) == 1.0);
    CHECK(d.col_names[0] == "x1");
    std::remove(path.c_str());
}

TEST_CASE("load_table rejects blank and non-numeric cells") {
    const auto path = write_temp("ts_blank.csv", "y,x1\n1,0.5\n2,\n");
    TableSchema schema;
    schema.y = "y";
    CHECK_THROWS_WITH_AS(load_table(path, schema),
                         doctest::Contains("non-numeric cell at (2,x1)"),
                         std::runtime_error);
    std::remove(path.c_str());

    const auto path2 = write_temp("ts_word.csv", "y,x1\n1,abc\n");
    CHECK_THROWS_AS(load_table(path2, schema), std::runtime_error);
    std::remove(path2.c_str());
}

TEST_CASE("load_table errors") {
    TableSchema schema;
    schema.y = "y";
    CHECK_THROWS_AS(load_table("/nonexistent/file.csv", schema), std::runtime_error);

    const auto path = write_temp("ts_unknown.csv", "y,x1\n1,2\n");
    TableSchema bad;
    bad.y = "resp";
    CHECK_THROWS_AS(load_table(path, bad), std::invalid_argument);
    std::remove(path.c_str());

    const auto empty = write_temp("ts_empty.csv", "y,x1\n");
    CHECK_THROWS_AS(load_table(empty, schema), std::runtime_error);
    std::remove(empty.c_str());
}

TEST_CASE("cluster labels become two groups of two") {
    const auto path = write_temp("ts_cluster.csv", "y,x1,g\n1,1,a\n2,2,a\n3,3,b\n4,4,b\n");
    TableSchema schema;
    schema.y = "y";
    schema.cluster = "g";
    const Dataset d = load_table(path, schema);
    CHECK(d.num_clusters() == 2);
    const auto groups = d.cluster_groups();
    CHECK(groups[0].size() == 2);
    CHECK(groups[1].size() == 2);
    std::remove(path.c_str());
}

TEST_CASE("save/load round-trips bit-exactly") {
    Dataset d;
    d.x.resize(3, 2);
    d.x << 0.1, -2.5e-7, 1.0 / 3.0, 7.25, 1e300, -0.0;
    d.y.resize(3);
    d.y << 1.25, -3.75, 0.3333333333333333;
    d.col_names = {"a", "b"};
    const auto path = (std::filesystem::temp_directory_path() / "ts_rt.csv").string();
    save_table(d, path);
    TableSchema schema;
    schema.y = "y";
    const Dataset back = load_table(path, schema);
    REQUIRE(back.n() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(back.y(i) == d.y(i));
        for (int j = 0; j < 2; ++j) CHECK(back.x(i, j) == d.x(i, j));
    }
    std::remove(path.c_str());
}

namespace {

Dataset panel_dataset() {
    // units A,B with periods 1..3; x2 constant within unit
    Dataset d;
    d.x.resize(6, 2);
    d.y.resize(6);
    d.col_names = {"x1", "x2"};
    auto engine = make_engine(42);
    std::normal_distribution<double> normal;
    for (int i = 0; i < 6; ++i) {
        d.x(i, 0) = normal(engine);
        d.x(i, 1) = i < 3 ? 2.0 : -1.0;
        d.y(i) = normal(engine);
    }
    d.unit = {0, 0, 0, 1, 1, 1};
    d.unit_labels = {"A", "A", "A", "B", "B", "B"};
    d.time = {0, 1, 2, 0, 1, 2};
    d.time_labels = {"1", "2", "3", "1", "2", "3"};
    return d;
}

} // namespace

TEST_CASE("within transform demeans two points to +-1") {
    Dataset d;
    d.x.resize(2, 1);
    d.x << 0.0, 1.0;
    d.y.resize(2);
    d.y << 1.0, 3.0;
    d.col_names = {"x"};
    d.unit = {0, 0};
    d.unit_labels = {"A", "A"};
    d.time = {0, 1};
    d.time_labels = {"1", "2"};
    const Dataset t = within_transform(d);
    CHECK(t.y(0) == doctest::Approx(-1.0));
    CHECK(t.y(1) == doctest::Approx(1.0));
    CHECK(t.cluster == t.unit);
}

TEST_CASE("within transform zeroes unit-constant covariates") {
    const Dataset t = within_transform(panel_dataset());
    for (int i = 0; i < t.n(); ++i) CHECK(t.x(i, 1) == doctest::Approx(0.0));
}

TEST_CASE("within transform leaves zero unit means") {
    const Dataset t = within_transform(panel_dataset());
    for (int u = 0; u < 2; ++u) {
        double mean_y = 0.0, mean_x = 0.0;
        for (int i = 0; i < t.n(); ++i) {
            if (t.unit[static_cast<std::size_t>(i)] != u) continue;
            mean_y += t.y(i);
            mean_x += t.x(i, 0);
        }
        CHECK(std::fabs(mean_y / 3.0) < 1e-12);
        CHECK(std::fabs(mean_x / 3.0) < 1e-12);
    }
}

TEST_CASE("within transform is idempotent") {
    const Dataset once = within_transform(panel_dataset());
    const Dataset twice = within_transform(once);
    for (int i = 0; i < once.n(); ++i) {
        CHECK(std::fabs(twice.y(i) - once.y(i)) < 1e-12);
        CHECK(std::fabs(twice.x(i, 0) - once.x(i, 0)) < 1e-12);
    }
}

TEST_CASE("within transform rejects bad panels") {
    Dataset d = panel_dataset();
    d.time = {0, 0, 0, 0, 0, 0};
    d.time_labels = {"1", "1", "1", "1", "1", "1"};
    CHECK_THROWS_AS(within_transform(d), std::invalid_argument); // T = 1

    Dataset holed = panel_dataset();
    holed.time[5] = 1; // duplicate (B,2), missing (B,3)
    CHECK_THROWS_AS(within_transform(holed), std::invalid_argument);

    Dataset plain = panel_dataset();
    plain.unit.clear();
    plain.unit_labels.clear();
    plain.time.clear();
    plain.time_labels.clear();
    CHECK_THROWS_AS(within_transform(plain), std::invalid_argument);
}

TEST_CASE("normalize_columns scales to unit root mean square") {
    Dataset d;
    d.x.resize(4, 2);
    d.x << 2, 1, 2, -1, -2, 1, -2, -1;
    d.y = Eigen::VectorXd::Zero(4);
    d.col_names = {"a", "b"};
    const Dataset scaled = normalize_columns(d);
    CHECK(scaled.x.col(0).squaredNorm() / 4.0 == doctest::Approx(1.0));
    CHECK(scaled.x.col(1).squaredNorm() / 4.0 == doctest::Approx(1.0));

    Dataset zero = d;
    zero.x.col(1).setZero();
    CHECK_THROWS_AS(normalize_columns(zero), std::invalid_argument);
}

TEST_CASE("validate catches non-finite values") {
    Dataset d;
    d.x.resize(2, 1);
    d.x << 1.0, std::numeric_limits<double>::quiet_NaN();
    d.y.resize(2);
    d.y << 1.0, 2.0;
    d.col_names = {"x"};
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
}
