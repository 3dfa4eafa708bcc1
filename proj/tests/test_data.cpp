#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "film/data.hpp"
#include "film/errors.hpp"

using namespace film;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& content) {
        static int counter = 0;
        path = "film_test_" + std::to_string(counter++) + ".csv";
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("csv loading happy path") {
    TempFile f("date,x,OT\n2020-01-01,1.5,2\n2020-01-02,-0.5,3\n2020-01-03,0,4.25\n");
    const auto t = data::load_csv(f.path);
    CHECK(t.rows() == 3);
    CHECK(t.channels() == 2);
    CHECK(t.column_names == std::vector<std::string>{"x", "OT"});
    CHECK(t.timestamps[1] == "2020-01-02");
    CHECK(t.values(2, 1) == doctest::Approx(4.25));
}

TEST_CASE("csv errors carry line numbers") {
    TempFile nan_cell("date,x\n1,0.5\n2,NaN\n");
    CHECK_THROWS_WITH_AS(data::load_csv(nan_cell.path), doctest::Contains("line 3"), DataError);

    TempFile ragged("date,x,y\n1,2,3\n2,4\n");
    CHECK_THROWS_WITH_AS(data::load_csv(ragged.path), doctest::Contains("line 3"), DataError);

    TempFile text_cell("date,x\n1,abc\n");
    CHECK_THROWS_WITH_AS(data::load_csv(text_cell.path), doctest::Contains("line 2"), DataError);

    TempFile headerless("1,2.0,3.0\n2,4.0,5.0\n");
    CHECK_THROWS_WITH_AS(data::load_csv(headerless.path), doctest::Contains("header"), DataError);

    CHECK_THROWS_AS(data::load_csv("definitely_missing_file.csv"), DataError);
}

TEST_CASE("column selection by name and index") {
    TempFile f("date,a,b\n1,1,10\n2,2,20\n3,3,30\n");
    const auto t = data::load_csv(f.path);
    const auto by_name = data::select_column(t, "b");
    CHECK(by_name.channels() == 1);
    CHECK(by_name.values(2, 0) == 30.0);
    const auto by_index = data::select_column(t, "0");
    CHECK(by_index.values(1, 0) == 2.0);
    CHECK_THROWS_AS(data::select_column(t, "missing"), std::invalid_argument);
}

namespace {

data::TimeSeriesTable counting_table(Eigen::Index rows) {
    data::TimeSeriesTable t;
    t.values.resize(rows, 1);
    for (Eigen::Index i = 0; i < rows; ++i) {
        t.values(i, 0) = static_cast<double>(i);
        t.timestamps.push_back(std::to_string(i));
    }
    t.column_names = {"v"};
    return t;
}

} // namespace

TEST_CASE("chronological split sizes") {
    const auto t10 = counting_table(10);
    const auto s10 = data::split(t10, {});
    CHECK(s10.train.rows() == 7);
    CHECK(s10.val.rows() == 1);
    CHECK(s10.test.rows() == 2);

    const auto t100 = counting_table(100);
    const auto s100 = data::split(t100, {});
    CHECK(s100.train.rows() == 70);
    CHECK(s100.val.rows() == 10);
    CHECK(s100.test.rows() == 20);

    // parts concatenate back to the original
    Eigen::VectorXd glued(100);
    glued << s100.train.values.col(0), s100.val.values.col(0), s100.test.values.col(0);
    CHECK((glued - t100.values.col(0)).norm() == 0.0);

    CHECK_THROWS_AS(data::split(counting_table(9), {}), std::invalid_argument);
    CHECK_THROWS_AS(data::split(t10, {0.5, 0.2, 0.2}), std::invalid_argument);
}

TEST_CASE("window enumeration") {
    const auto t = counting_table(10);
    const auto w = data::windows(t, 4, 2, 1);
    CHECK(w.count() == 5);
    CHECK(w.origins.front() == 0);
    CHECK(w.origins.back() == 4);
    CHECK(data::window_input(t, w, 1)(0, 0) == 1.0);
    CHECK(data::window_target(t, w, 1)(0, 0) == 5.0);

    CHECK(data::windows(t, 4, 2, 10).count() == 1);
    CHECK(data::windows(t, 8, 2, 1).count() == 1);
    CHECK_THROWS_AS(data::windows(t, 9, 2, 1), std::invalid_argument);
}

TEST_CASE("standardization fits on train only") {
    auto train = counting_table(50);
    auto other = counting_table(50);
    other.values.array() += 100.0;

    const auto scaler = data::fit_scaler(train);
    auto train_and_more = counting_table(100);
    const auto leaky = data::fit_scaler(train_and_more);
    CHECK(scaler.mean(0) != leaky.mean(0)); // fitting on more rows changes the scaler

    data::apply_scaler(scaler, train);
    CHECK(std::abs(train.values.col(0).mean()) < 1e-10);
    const double sd = std::sqrt(train.values.col(0).array().square().mean());
    CHECK(sd == doctest::Approx(1.0).epsilon(1e-10));

    const Eigen::MatrixXd round = data::invert_scaler(scaler, train.values);
    for (Eigen::Index i = 0; i < 50; ++i) {
        CHECK(round(i, 0) == doctest::Approx(static_cast<double>(i)).epsilon(1e-10));
    }
}

TEST_CASE("constant channels keep unit scale") {
    data::TimeSeriesTable t;
    t.values = Eigen::MatrixXd::Constant(20, 1, 5.0);
    t.column_names = {"v"};
    const auto scaler = data::fit_scaler(t);
    CHECK(scaler.std(0) == 1.0);
    data::apply_scaler(scaler, t);
    CHECK(t.values.norm() == 0.0);
}

TEST_CASE("scaler text round-trip") {
    data::Scaler s;
    s.mean = Eigen::Vector2d(1.234567890123456789, -7.5e-13);
    s.std = Eigen::Vector2d(0.333333333333333331, 42.0);
    data::save_scaler("film_test_scaler.txt", s);
    const auto back = data::load_scaler("film_test_scaler.txt");
    CHECK(back.mean == s.mean);
    CHECK(back.std == s.std);
    std::remove("film_test_scaler.txt");
}

TEST_CASE("sine-trend generator") {
    const auto exact = data::gen_sine_trend(100, {{2.0, 25.0, 0.5}}, 0.0, 0.0, 3);
    for (Eigen::Index t = 0; t < 100; ++t) {
        const double want =
            2.0 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 25.0 + 0.5);
        CHECK(exact.values(t, 0) == doctest::Approx(want).epsilon(1e-12));
    }
    const auto line = data::gen_sine_trend(10, {}, 1.0, 0.0, 3);
    for (Eigen::Index t = 0; t < 10; ++t) {
        CHECK(line.values(t, 0) == doctest::Approx(static_cast<double>(t)));
    }
    const auto a = data::gen_sine_trend(64, {{1.0, 7.0, 0.0}}, 0.1, 0.5, 9);
    const auto b = data::gen_sine_trend(64, {{1.0, 7.0, 0.0}}, 0.1, 0.5, 9);
    CHECK((a.values - b.values).norm() == 0.0);
}

TEST_CASE("unitary autoregression generator") {
    const auto gen = data::gen_ar_unitary(6, 50, 0.3, 21);
    const Eigen::MatrixXd gram =
        gen.transition.transpose() * gen.transition;
    CHECK((gram - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-12);

    // sigma = 0 replays the deterministic recursion exactly
    const auto clean = data::gen_ar_unitary(6, 50, 0.0, 21);
    CHECK(clean.transition == gen.transition);
    CHECK(clean.offset == gen.offset);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(6);
    for (Eigen::Index t = 0; t < 50; ++t) {
        x = clean.transition * x + clean.offset;
        CHECK((clean.trajectory.row(t).transpose() - x).norm() < 1e-14);
    }

    // noise enters linearly: doubling sigma doubles the deviation
    const auto twice = data::gen_ar_unitary(6, 50, 0.6, 21);
    const Eigen::MatrixXd dev1 = gen.trajectory - clean.trajectory;
    const Eigen::MatrixXd dev2 = twice.trajectory - clean.trajectory;
    CHECK((dev2 - 2.0 * dev1).norm() < 1e-10 * dev1.norm());

    CHECK_THROWS_AS(data::gen_ar_unitary(3, 10, 0.1, 0), std::invalid_argument);
    CHECK_THROWS_AS(data::gen_ar_unitary(0, 10, 0.1, 0), std::invalid_argument);
}

TEST_CASE("lipschitz generator honors its bound") {
    const auto flat = data::gen_lipschitz(0.0, 50, 1);
    CHECK(flat.cwiseAbs().maxCoeff() == 0.0);

    const double c = 2.5;
    const auto x = data::gen_lipschitz(c, 400, 5);
    double max_step = 0.0;
    for (Eigen::Index t = 1; t < 400; ++t) {
        max_step = std::max(max_step, std::abs(x(t) - x(t - 1)));
    }
    CHECK(max_step * 400.0 <= c + 1e-12);

    const auto y = data::gen_lipschitz(c, 400, 5);
    CHECK((x - y).norm() == 0.0);
}
