#include "tda/data.hpp"
#include "tda/error.hpp"

#include <doctest.h>

#include <cmath>

using namespace tda;

TEST_CASE("csv parsing") {
    const CaseControlData d = parse_csv("AFP,disease,DCP\n1.5,0,2\nNA,1,-3e-2\n  4 ,1,\"5\"\n", "disease");
    CHECK(d.n_rows() == 3);
    CHECK(d.marker_names == std::vector<std::string>{"AFP", "DCP"});
    CHECK(d.disease == std::vector<int>{0, 1, 1});
    CHECK_FALSE(d.observed(1, 0));
    CHECK(d.values(1, 1) == -0.03);
    CHECK(d.values(2, 0) == 4.0);
    CHECK(d.values(2, 1) == 5.0);
    CHECK(d.count(1) == 2);
    CHECK(row_pattern(d.observed, 1) == 2u);
    CHECK(pattern_columns(5, 3) == std::vector<int>{0, 2});
}

TEST_CASE("csv errors") {
    CHECK_THROWS_AS(parse_csv("a,disease\nx,0\n1,1\n", "disease"), ParseError);
    CHECK_THROWS_AS(parse_csv("a,disease\n1,2\n1,1\n", "disease"), ParseError);
    CHECK_THROWS_AS(parse_csv("a,disease\n1,0,3\n1,1\n", "disease"), ParseError);
    CHECK_THROWS_AS(parse_csv("a,b\n1,0\n", "disease"), ParseError);
    CHECK_THROWS_AS(parse_csv("a,disease\nNA,0\n1,1\n", "disease"), ParseError);
    CHECK_THROWS_AS(parse_csv("a,disease\n1,0\n2,0\n", "disease"), InsufficientData);
    CHECK_THROWS_AS(read_csv("/nonexistent/file.csv"), ParseError);
}

TEST_CASE("csv round trip is exact") {
    Eigen::MatrixXd v(3, 2);
    v << 0.1, 1.0 / 3.0, NAN, -2.5e-300, 1e300, 7.0;
    const CaseControlData d(v, {0, 1, 0}, {"x", "y"});
    const CaseControlData back = parse_csv(to_csv(d));
    CHECK(back.marker_names == d.marker_names);
    CHECK(back.disease == d.disease);
    CHECK((back.observed == d.observed).all());
    for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 2; ++j)
            if (d.observed(i, j)) CHECK(back.values(i, j) == d.values(i, j));
}

TEST_CASE("row and marker selection") {
    Eigen::MatrixXd v(4, 3);
    v << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
    const CaseControlData d(v, {0, 1, 0, 1});
    const CaseControlData r = d.rows({3, 0});
    CHECK(r.values(0, 2) == 12);
    CHECK(r.disease == std::vector<int>{1, 0});
    const CaseControlData m = d.markers({2, 0});
    CHECK(m.marker_names == std::vector<std::string>{"Y3", "Y1"});
    CHECK(m.values(1, 1) == 4);
    CHECK(d.class_values(1).rows() == 2);
}
