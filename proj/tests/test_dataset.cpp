#include <doctest.h>

#include <sstream>

#include "rmstpo/dataset.hpp"
#include "rmstpo/errors.hpp"

using namespace rmstpo;

namespace {

StudyData from_string(const std::string& csv, const SchemaHint& hint = {}) {
  std::istringstream in(csv);
  return encode(parse_csv(in), hint);
}

const char* kBasic =
    "id,arm,time,event,sex,age\n"
    "a,1,10,1,F,30\n"
    "b,1,12,0,M,41\n"
    "c,0,7,1,M,55\n"
    "d,0,20,0,F,28\n";

}  // namespace

TEST_CASE("categorical covariates are one-hot encoded with the smallest level as reference") {
  const StudyData data = from_string(kBasic);
  REQUIRE(data.schema.encoded_names.size() == 2);
  CHECK(data.schema.encoded_names[0] == "sex=M");
  CHECK(data.schema.encoded_names[1] == "age");
  CHECK(data.records[0].covariates == std::vector<double>{0.0, 30.0});
  CHECK(data.records[1].covariates == std::vector<double>{1.0, 41.0});
  CHECK(data.records[2].covariates == std::vector<double>{1.0, 55.0});
}

TEST_CASE("row order is preserved and arm counts are exposed") {
  const StudyData data = from_string(kBasic);
  CHECK(data.records[0].id == "a");
  CHECK(data.records[3].id == "d");
  CHECK(data.arm_count(1) == 2);
  CHECK(data.arm_count(0) == 2);
}

TEST_CASE("negative time is rejected naming the row") {
  const char* csv =
      "id,arm,time,event\n"
      "a,1,5,1\nb,1,6,0\nc,0,-3,1\nd,0,4,0\n";
  CHECK_THROWS_WITH_AS(from_string(csv),
                       doctest::Contains("row 4"), ValidationError);
}

TEST_CASE("missing cells are a hard error, never imputed") {
  const char* csv =
      "id,arm,time,event,age\n"
      "a,1,5,1,30\nb,1,6,0,\nc,0,3,1,44\nd,0,4,0,50\n";
  CHECK_THROWS_WITH_AS(from_string(csv), doctest::Contains("missing value"),
                       ValidationError);
}

TEST_CASE("arm outside {0,1} is rejected") {
  const char* csv =
      "id,arm,time,event\n"
      "a,1,5,1\nb,2,6,0\nc,0,3,1\nd,0,4,0\n";
  CHECK_THROWS_AS(from_string(csv), ValidationError);
}

TEST_CASE("non-numeric time is a parse error with the row number") {
  const char* csv =
      "id,arm,time,event\n"
      "a,1,5,1\nb,1,abc,0\nc,0,3,1\nd,0,4,0\n";
  CHECK_THROWS_WITH_AS(from_string(csv), doctest::Contains("row 3"),
                       ValidationError);
}

TEST_CASE("missing required column is a schema error") {
  CHECK_THROWS_WITH_AS(from_string("id,arm,time\na,1,5\n"),
                       doctest::Contains("event"), ValidationError);
}

TEST_CASE("duplicate ids are rejected") {
  const char* csv =
      "id,arm,time,event\n"
      "a,1,5,1\na,1,6,0\nc,0,3,1\nd,0,4,0\n";
  CHECK_THROWS_WITH_AS(from_string(csv), doctest::Contains("duplicate"),
                       ValidationError);
}

TEST_CASE("schema hint remaps reserved columns") {
  const char* csv =
      "subj,grp,days,status\n"
      "a,1,5,1\nb,1,6,0\nc,0,3,1\nd,0,4,0\n";
  SchemaHint hint;
  hint.id_column = "subj";
  hint.arm_column = "grp";
  hint.time_column = "days";
  hint.event_column = "status";
  const StudyData data = from_string(csv, hint);
  CHECK(data.size() == 4);
  CHECK(data.schema.encoded_dim() == 0);
}

TEST_CASE("fewer than two subjects per arm is rejected") {
  CHECK_THROWS_AS(from_string("id,arm,time,event\na,1,5,1\nb,0,6,0\nc,0,3,1\n"),
                  ValidationError);
}

TEST_CASE("split_by_arm partitions preserving order") {
  const StudyData data = from_string(kBasic);
  auto [arm1, arm0] = split_by_arm(data);
  REQUIRE(arm1.size() == 2);
  REQUIRE(arm0.size() == 2);
  CHECK(arm1.record(0).id == "a");
  CHECK(arm1.record(1).id == "b");
  CHECK(arm0.record(0).id == "c");
  CHECK(arm0.record(1).id == "d");
  CHECK(arm1.times() == std::vector<double>{10.0, 12.0});
  CHECK(arm0.events() == std::vector<int>{1, 0});
}

TEST_CASE("CSV round-trip reproduces the records bit-exactly") {
  const char* csv =
      "id,arm,time,event,w\n"
      "a,1,5.25,1,0.1\n"
      "b,1,6.125,0,-2.5\n"
      "c,0,0.3333333333333333,1,7\n"
      "d,0,4,0,0.7071067811865476\n";
  const StudyData data = from_string(csv);
  std::ostringstream out;
  write_csv(data, out);
  std::istringstream in(out.str());
  const StudyData again = encode(parse_csv(in));
  REQUIRE(again.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(again.records[i].id == data.records[i].id);
    CHECK(again.records[i].arm == data.records[i].arm);
    CHECK(again.records[i].time == data.records[i].time);
    CHECK(again.records[i].event == data.records[i].event);
    CHECK(again.records[i].covariates == data.records[i].covariates);
  }
}

TEST_CASE("encoding is deterministic across loads") {
  const StudyData a = from_string(kBasic);
  const StudyData b = from_string(kBasic);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.records[i].covariates == b.records[i].covariates);
  }
}
