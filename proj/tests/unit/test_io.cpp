#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mfchain/io.hpp"

using namespace mfchain;

TEST(FormatDouble, RoundTripsAndMarksIntegers) {
  EXPECT_EQ(format_double(0.0), "0.0");
  EXPECT_EQ(format_double(3.0), "3.0");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  for (double v : {0.1, 1.0 / 3.0, 5.145e-7, 1e300, -2.5})
    EXPECT_EQ(std::stod(format_double(v)), v) << v;
}

TEST(FormatShortest, FewestDigits) {
  EXPECT_EQ(format_shortest(0.1), "0.1");
  EXPECT_EQ(format_shortest(0.25), "0.25");
  EXPECT_EQ(format_shortest(10.0), "10.0");
  EXPECT_EQ(std::stod(format_shortest(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(PathCsv, RoundTrip) {
  JumpPath path(2, {{0.125, 3}, {0.5, 1}, {0.9999999999999999, 2}}, 1.0);
  std::stringstream buf;
  write_path_csv(buf, path);
  EXPECT_EQ(buf.str().substr(0, 22), "time,state\n0.0,2\n0.125");
  EXPECT_EQ(read_path_csv(buf, 1.0), path);
}

TEST(PathCsv, EmptyPathRoundTrip) {
  JumpPath path(4, {}, 2.0);
  std::stringstream buf;
  write_path_csv(buf, path);
  EXPECT_EQ(buf.str(), "time,state\n0.0,4\n");
  EXPECT_EQ(read_path_csv(buf, 2.0), path);
}

TEST(PathCsv, MalformedInputIsParseError) {
  for (const char* text : {"", "t,x\n0.0,1\n", "time,state\n", "time,state\n0.5,1\n", "time,state\n0.0;1\n",
                           "time,state\n0.0,1\nabc,2\n"}) {
    std::stringstream in(text);
    try {
      read_path_csv(in, 1.0);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::ParseError) << text;
    }
  }
}

TEST(PathCsv, InvalidEventsAreRejected) {
  std::stringstream in("time,state\n0.0,1\n0.5,1\n");
  EXPECT_THROW(read_path_csv(in, 1.0), Error);
}

TEST(MeanCurveCsv, OneRowPerGridPoint) {
  MeanCurve curve(TimeGrid(1.0, 2), {0.0, 0.25, 0.5});
  std::stringstream out;
  write_mean_curve_csv(out, curve);
  EXPECT_EQ(out.str(), "t,mu\n0.0,0.0\n0.5,0.25\n1.0,0.5\n");
}

TEST(RiccatiCsv, NoExitIsInf) {
  std::vector<RiccatiRow> rows{{{0, 1, 0.1, 0.0}, std::nullopt}, {{0, 1, 0.5, 0.25}, 0.75}};
  std::stringstream out;
  write_riccati_table_csv(out, rows);
  EXPECT_EQ(out.str(), "a,b,alpha,m0,exit_time\n0,1,0.1,0.0,inf\n0,1,0.5,0.25,0.75\n");
}

TEST(RiccatiCsv, EmptyTableIsHeaderOnly) {
  std::stringstream out;
  write_riccati_table_csv(out, {});
  EXPECT_EQ(out.str(), "a,b,alpha,m0,exit_time\n");
}

TEST(Json, CostEstimateFields) {
  CostEstimate est{1.5, 0.01, 100, EstimatorKind::Direct};
  auto j = to_json(est);
  EXPECT_EQ(j.at("value"), 1.5);
  EXPECT_EQ(j.at("se"), 0.01);
  EXPECT_EQ(j.at("n_paths"), 100);
  EXPECT_EQ(j.at("estimator"), to_string(EstimatorKind::Direct));
}

TEST(Json, MartingaleReportFields) {
  MartingaleReport r;
  r.mean_L = 1.0;
  r.pass_L = true;
  r.per_edge.push_back({0, 1, 0.0, 0.1, true});
  auto j = to_json(r);
  EXPECT_EQ(j.at("pass_L"), true);
  ASSERT_EQ(j.at("per_edge").size(), 1u);
  EXPECT_EQ(j.at("per_edge")[0].at("j"), 1);
}
