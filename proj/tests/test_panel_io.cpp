#include "doctest.h"

#include <cmath>

#include "proxfact/csv.hpp"
#include "proxfact/errors.hpp"
#include "proxfact/panel.hpp"
#include "test_util.hpp"

using namespace proxfact;

namespace {

std::filesystem::path write_fixture(const testutil::TempDir& dir, const std::string& name,
                                    const std::string& text) {
  auto p = dir.path / name;
  write_text_file(p, text);
  return p;
}

}  // namespace

TEST_CASE("load_csv parses a plain numeric table") {
  testutil::TempDir dir("load_csv");
  auto p = write_fixture(dir, "plain.csv",
                         "unit,t1,t2,t3,t4\n"
                         "a,1,2,3,4\n"
                         "b,5,6,7,8\n"
                         "c,9,10,11,12\n");
  auto res = load_csv(p, Orientation::units_in_rows);
  CHECK(res.panel.n_units() == 3);
  CHECK(res.panel.n_periods() == 4);
  CHECK(res.panel.values(1, 2) == 7.0);
  CHECK(res.panel.unit_ids[2] == "c");
  CHECK(res.panel.time_ids[3] == "t4");
  CHECK(res.report.empty());
}

TEST_CASE("load_csv with units in columns transposes") {
  testutil::TempDir dir("load_csv_cols");
  auto p = write_fixture(dir, "cols.csv",
                         "date,a,b\n"
                         "2001,1,4\n"
                         "2002,2,5\n"
                         "2003,3,6\n");
  auto res = load_csv(p, Orientation::units_in_columns);
  CHECK(res.panel.n_units() == 2);
  CHECK(res.panel.n_periods() == 3);
  CHECK(res.panel.unit_ids[0] == "a");
  CHECK(res.panel.values(0, 2) == 3.0);
  CHECK(res.panel.values(1, 0) == 4.0);
}

TEST_CASE("load_csv drops units with missing cells under the default policy") {
  testutil::TempDir dir("load_csv_na");
  auto p = write_fixture(dir, "na.csv",
                         "unit,t1,t2,t3\n"
                         "a,1,NA,3\n"
                         "b,4,5,6\n");
  auto res = load_csv(p, Orientation::units_in_rows);
  CHECK(res.panel.n_units() == 1);
  CHECK(res.panel.unit_ids[0] == "b");
  REQUIRE(res.report.size() == 1);
  CHECK(res.report[0].find("'a'") != std::string::npos);

  CHECK_THROWS_AS(load_csv(p, Orientation::units_in_rows, MissingPolicy::error), InputError);
}

TEST_CASE("load_csv reports unparseable cells by row and column") {
  testutil::TempDir dir("load_csv_bad");
  auto p = write_fixture(dir, "bad.csv",
                         "unit,t1,t2\n"
                         "a,1,2\n"
                         "b,3,oops\n");
  CHECK_THROWS_WITH_AS(load_csv(p, Orientation::units_in_rows).panel.validate(),
                       doctest::Contains("oops"), InputError);
}

TEST_CASE("load_csv rejects empty tables") {
  testutil::TempDir dir("load_csv_empty");
  auto p = write_fixture(dir, "empty.csv", "unit,t1\n");
  CHECK_THROWS_AS(load_csv(p, Orientation::units_in_rows), InputError);
}

TEST_CASE("load_csv redirects FRED-MD shaped files") {
  testutil::TempDir dir("load_csv_fred");
  auto p = write_fixture(dir, "fred.csv",
                         "sasdate,s1,s2\n"
                         "Transform:,5,1\n"
                         "1/1/1960,100,1\n"
                         "2/1/1960,110,2\n");
  CHECK_THROWS_WITH_AS(load_csv(p, Orientation::units_in_columns),
                       doctest::Contains("fred"), InputError);

  // Also detected without the sasdate marker when the transform row is
  // labeled (or left unlabeled).
  auto q = write_fixture(dir, "fred2.csv",
                         "date,s1,s2\n"
                         ",5,1\n"
                         "1,100,1\n"
                         "2,110,2\n");
  CHECK_THROWS_AS(load_csv(q, Orientation::units_in_columns), InputError);

  // A plain panel whose first data row happens to hold small integers must
  // not trip the detector.
  auto r = write_fixture(dir, "smallints.csv",
                         "unit,t1,t2\n"
                         "a,1,2\n"
                         "b,3,4\n");
  CHECK(load_csv(r, Orientation::units_in_rows).panel.n_units() == 2);
}

TEST_CASE("panel round trip write -> load reproduces values exactly") {
  testutil::TempDir dir("roundtrip");
  Panel panel = testutil::random_panel(7, 11, 42);
  panel.values *= 1e3;
  panel.values(3, 5) = 1.0 / 3.0;
  auto p = dir.path / "panel.csv";
  write_panel_csv(panel, p);
  auto back = load_csv(p, Orientation::units_in_rows);
  REQUIRE(back.panel.n_units() == 7);
  REQUIRE(back.panel.n_periods() == 11);
  const double rel =
      (back.panel.values - panel.values).cwiseAbs().maxCoeff() / panel.values.cwiseAbs().maxCoeff();
  CHECK(rel <= 1e-12);
  CHECK(back.panel.unit_ids == panel.unit_ids);
  CHECK(back.panel.time_ids == panel.time_ids);
}

TEST_CASE("standardize demean and zscore") {
  Panel panel;
  panel.values.resize(1, 3);
  panel.values << 1, 2, 3;
  panel.unit_ids = {"a"};
  panel.time_ids = {"t1", "t2", "t3"};

  auto demeaned = standardize(panel, StandardizeMode::demean);
  CHECK(demeaned.panel.values(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(demeaned.panel.values(0, 1) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(demeaned.panel.values(0, 2) == doctest::Approx(1.0).epsilon(1e-15));

  // Sample std of (1,2,3) is exactly 1, so zscore matches demean here.
  auto z = standardize(panel, StandardizeMode::zscore);
  CHECK(z.params.stds(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(z.panel.values(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));

  auto none = standardize(panel, StandardizeMode::none);
  CHECK(none.panel.values == panel.values);
}

TEST_CASE("standardize rejects zero-variance unit under zscore") {
  Panel panel;
  panel.values.resize(2, 3);
  panel.values << 1, 2, 3, 5, 5, 5;
  panel.unit_ids = {"ok", "flat"};
  panel.time_ids = {"t1", "t2", "t3"};
  CHECK_THROWS_WITH_AS(standardize(panel, StandardizeMode::zscore),
                       doctest::Contains("flat"), InputError);
}

TEST_CASE("training standardization parameters apply to a test panel") {
  Panel train = testutil::random_panel(4, 20, 7);
  Panel test = testutil::random_panel(4, 10, 8);
  auto st = standardize(train, StandardizeMode::zscore);
  Panel applied = apply_standardization(test, st.params);
  for (int i = 0; i < 4; ++i) {
    CHECK(applied.values(i, 0) ==
          doctest::Approx((test.values(i, 0) - st.params.means(i)) / st.params.stds(i)));
  }
}

TEST_CASE("split_train_test splits chronologically") {
  Panel p10 = testutil::random_panel(3, 10, 1);
  auto [tr10, te10] = split_train_test(p10, 0.5);
  CHECK(tr10.n_periods() == 5);
  CHECK(te10.n_periods() == 5);

  Panel p11 = testutil::random_panel(3, 11, 2);
  auto [tr11, te11] = split_train_test(p11, 0.5);
  CHECK(tr11.n_periods() == 5);  // floor on the training side
  CHECK(te11.n_periods() == 6);

  CHECK_THROWS_AS(split_train_test(p10, 1.0), InputError);
  CHECK_THROWS_AS(split_train_test(p10, 0.0), InputError);
}

TEST_CASE("split concatenation reproduces the original time axis") {
  Panel p = testutil::random_panel(2, 13, 3);
  auto [tr, te] = split_train_test(p, 0.37);
  std::vector<std::string> glued = tr.time_ids;
  glued.insert(glued.end(), te.time_ids.begin(), te.time_ids.end());
  CHECK(glued == p.time_ids);
  Eigen::MatrixXd rejoined(p.n_units(), p.n_periods());
  rejoined << tr.values, te.values;
  CHECK((rejoined - p.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("table csv output is byte-deterministic") {
  Table t({"a", "b"});
  t.add_row({1.5, 2.0 / 3.0});
  t.add_row({-1e-17, 12345678.9});
  const std::string once = t.to_csv();
  CHECK(once == t.to_csv());
  CHECK(once.substr(0, 4) == "a,b\n");
}
