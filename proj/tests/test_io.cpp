#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "fregmice/error.hpp"
#include "fregmice/io.hpp"
#include "test_util.hpp"

using namespace fregmice;

namespace {

const Json kSidecar = Json::parse(R"({"grids": {"Y": [0, 0.5, 1, 1.5]}, "binary": ["b"]})");

}  // namespace

TEST_CASE("doubles survive a text round trip") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.30000000000000004})
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  CHECK(format_double(std::nan("")) == "NA");
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("dataset parsing") {
  const std::string csv =
      "x,b,Y__t0,Y__t1,Y__t2,Y__t3\n"
      "1.5,0,1,2,3,4\n"
      "NA,1,NA,NA,NA,NA\n"
      ",1,4,5,6,7\n";
  const MixedDataset d = parse_dataset(csv, kSidecar);
  REQUIRE(d.rows() == 3);
  REQUIRE(d.cols() == 3);
  CHECK(d.column("x").kind == ColumnKind::continuous);
  CHECK(d.column("b").kind == ColumnKind::binary);
  CHECK(d.column("Y").functional());
  CHECK(d.column("x").missing_count() == 2);
  CHECK(d.column("Y").observed == std::vector<unsigned char>{1, 0, 1});
  CHECK(d.column("Y").curves(2, 1) == 5.0);
  CHECK(d.column("Y").grid->points()[1] == 0.5);
}

TEST_CASE("dataset round trip is exact") {
  const std::string csv =
      "x,b,Y__t0,Y__t1,Y__t2,Y__t3\n"
      "0.10000000000000001,0,1,2,3,4\n"
      "NA,1,NA,NA,NA,NA\n"
      "-3.25,1,4,5,6,7\n";
  const MixedDataset d = parse_dataset(csv, kSidecar);
  CHECK(format_dataset(d) == csv);
  const MixedDataset again = parse_dataset(format_dataset(d), sidecar_json(d));
  CHECK(format_dataset(again) == csv);
  CHECK(again.column("b").kind == ColumnKind::binary);
}

TEST_CASE("malformed data files are rejected") {
  CHECK_THROWS_AS(parse_dataset("x,Y__t0,Y__t1,Y__t2,Y__t3\n1,1,NA,3,4\n", kSidecar), Error);  // partial curve
  CHECK_THROWS_AS(parse_dataset("x,b\n1,0,5\n", Json::object()), Error);                // ragged row
  CHECK_THROWS_AS(parse_dataset("x\nabc\n", Json::object()), Error);                    // not a number
  CHECK_THROWS_AS(parse_dataset("x\n", Json::object()), Error);                         // no rows
  CHECK_THROWS_AS(parse_dataset("Y__t0,Y__t1\n1,2\n", kSidecar), Error);                // grid mismatch
  CHECK_THROWS_AS(parse_dataset("x\n1\n", Json::parse(R"({"grid": {}})")), Error);     // unknown key
  try {
    parse_dataset("x,Y__t0,Y__t1,Y__t2,Y__t3\n1,1,NA,3,4\n", kSidecar);
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::data);
  }
}

TEST_CASE("declared ranges reach the dataset") {
  const MixedDataset d = parse_dataset("x\n30\n50\n", Json::parse(R"({"ranges": {"x": [20, 80]}})"));
  REQUIRE(d.column("x").range.has_value());
  CHECK(d.column("x").range->hi == 80.0);
  CHECK_THROWS_AS(parse_dataset("x\n1\n", Json::parse(R"({"ranges": {"x": [5, 1]}})")), Error);
}

TEST_CASE("fit records round trip") {
  FitRecord r;
  r.model = "frm";
  r.response = "Y";
  r.dispersion = 0.7;
  r.edf = 12.5;
  r.n = 40;
  r.lambdas = {{"z1", 3.0}};
  r.terms.push_back(testutil::random_curve_term(6, 1, "z1"));
  TermEstimate s;
  s.label = "theta";
  s.coefficients = Eigen::VectorXd::Constant(1, 0.1);
  s.covariance = Eigen::MatrixXd::Constant(1, 1, 0.2);
  r.terms.push_back(s);

  const Json j = Json::parse(fit_json(r).dump());
  const FitRecord back = parse_fit(j);
  CHECK(back.model == "frm");
  CHECK(back.lambdas.at(0).second == 3.0);
  REQUIRE(back.terms.size() == 2);
  CHECK(back.terms[0].basis.has_value());
  CHECK(*back.terms[0].basis == *r.terms[0].basis);
  CHECK(testutil::max_abs(back.terms[0].coefficients - r.terms[0].coefficients) == 0.0);
  CHECK(testutil::max_abs(back.terms[0].covariance - r.terms[0].covariance) == 0.0);
  CHECK(back.terms[1].shape == TermShape::scalar);

  Json extra = j;
  extra["bogus"] = 1;
  CHECK_THROWS_AS(parse_fit(extra), Error);
  Json bad = j;
  bad["terms"][0]["covariance"] = Json::array({Json::array({1.0})});
  CHECK_THROWS_AS(parse_fit(bad), Error);
}

TEST_CASE("model specs") {
  const ConditionalModel frm = parse_model(Json::parse(R"({"response": "Y", "ff_terms": ["X"], "basis": {"L": 12}})"));
  REQUIRE(std::holds_alternative<FrmSpec>(frm));
  CHECK(std::get<FrmSpec>(frm).basis.L == 12);
  const ConditionalModel again = parse_model(model_json(frm));
  CHECK(model_json(again) == model_json(frm));

  const ConditionalModel srm = parse_model(Json::parse(R"({"type": "srm", "response": "b", "family": "bernoulli"})"));
  CHECK(std::get<SrmSpec>(srm).family == Family::bernoulli);

  CHECK_THROWS_AS(parse_model(Json::parse(R"({"response": "Y", "penalty": 2})")), Error);
  CHECK_THROWS_AS(parse_model(Json::parse(R"({"type": "frm", "response": "Y", "basis": {"L": 3}})")), Error);
  CHECK_THROWS_AS(parse_model(Json::parse(R"({"type": "glm", "response": "Y"})")), Error);
}

TEST_CASE("scenario configs") {
  const ScenarioConfig c = parse_scenario(Json::parse(R"({"study": "srm-sim", "mechanism": "MCAR", "missing": 0.2,
                                                         "methods": ["anm", "fregMICE"], "replications": 10})"));
  CHECK(c.study == Study::srm_sim);
  CHECK(c.methods.size() == 2);
  const ScenarioConfig back = parse_scenario(scenario_json(c));
  CHECK(scenario_json(back) == scenario_json(c));
  CHECK_THROWS_AS(parse_scenario(Json::parse(R"({"reps": 10})")), Error);
  CHECK_THROWS_AS(parse_scenario(Json::parse(R"({"scenario": "c"})")), Error);
}

TEST_CASE("missing files are io errors") {
  try {
    read_text("/nonexistent/file.csv");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::io);
  }
}
