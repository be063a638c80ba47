#include "helpers.hpp"

#include "screenclean/io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace screenclean;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

ErrorKind kind_of(const std::string& csv) {
  try {
    (void)parse_dataset_csv(csv);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("csv parsing: y anywhere, names in file order, blank lines skipped") {
  const auto d = parse_dataset_csv("a, y ,b\n1,2,3\n\n4,5,6\r\n");
  CHECK(d.n() == 2);
  CHECK(d.p() == 2);
  CHECK(d.name(0) == "a");
  CHECK(d.name(1) == "b");
  CHECK(d.y()(0) == 2);
  CHECK(d.y()(1) == 5);
  CHECK(d.x()(1, 1) == 6);
  CHECK(d.x()(0, 0) == 1);
}

TEST_CASE("csv parsing errors") {
  CHECK(kind_of("a,b\n1,2\n") == ErrorKind::MissingColumn);
  CHECK(kind_of("") == ErrorKind::Parse);
  CHECK(kind_of("y,a\n") == ErrorKind::TooFewRows);
  CHECK(kind_of("y\n1\n") == ErrorKind::Parse);
  CHECK(kind_of("y,y,a\n1,2,3\n") == ErrorKind::Parse);
  CHECK(kind_of("y,a\n1,2,3\n") == ErrorKind::Parse);
  try {
    (void)parse_dataset_csv("y,a\n1,2\n3,abc\n");
    FAIL("expected Parse");
  } catch (const Error& e) {
    const std::string what = e.what();
    CHECK(what.find("line 3") != std::string::npos);
    CHECK(what.find("column 2") != std::string::npos);
  }
  CHECK(kind_of("y,a\n1,nan\n") == ErrorKind::Parse);
  CHECK_THROWS_AS(read_dataset_csv("/nonexistent/file.csv"), Error);
}

TEST_CASE("csv round trip through a file") {
  const auto dir = std::filesystem::temp_directory_path() / "screenclean_io_test";
  std::filesystem::create_directories(dir);
  write_text(dir / "d.csv", "y,x1,x2\n1.5,-2,3e-1\n0.25,4,5\n");
  const auto d = read_dataset_csv(dir / "d.csv");
  CHECK(d.x()(0, 1) == doctest::Approx(0.3));
  CHECK(d.y()(1) == 0.25);
  std::filesystem::remove_all(dir);
}

TEST_CASE("center response") {
  const auto d = center_response(parse_dataset_csv("y,a\n1,0\n3,1\n"));
  CHECK(d.y()(0) == -1);
  CHECK(d.y()(1) == 1);
}

TEST_CASE("provenance and config hashes") {
  // FNV-1a 64 reference values.
  CHECK(config_hash("") == "cbf29ce484222325");
  CHECK(config_hash("a") == "af63dc4c8601ec8c");
  CHECK(config_hash("x") != config_hash("y"));
  CHECK(provenance_line(7, "") == "# screenclean 0.1.0 seed=7 config=cbf29ce484222325\n");
}

TEST_CASE("report writers") {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(8);
  beta(0) = 3;
  beta(4) = -3;
  const Eigen::MatrixXd x = testing::gaussian_matrix(90, 8, 1);
  const Dataset d(x * beta + testing::gaussian_vector(90, 2), x,
                  false, {"a", "b", "c", "d", "e", "f", "g", "h"});
  PipelineConfig cfg;
  cfg.seed = 3;
  const auto r = run_screen_and_clean(d, cfg);
  const std::string prov = provenance_line(3, "cfg");

  const auto table = lines(clean_table_csv(r, d, prov));
  CHECK(table[0] == prov.substr(0, prov.size() - 1));
  CHECK(table[1] == "variable,name,coefficient,t,critical,kept");
  CHECK(table.size() == 2 + r.clean.s_hat.size());
  CHECK(table[2].rfind("1,a,", 0) == 0);

  const auto path = lines(screen_path_csv(r, prov));
  CHECK(path[1] == "step,lambda,size,selected,coefficients");
  CHECK(path.size() == 2 + r.path.entries.size());
  CHECK(path[2].rfind("0,", 0) == 0);

  const auto curve = lines(cv_curve_csv(r, prov));
  int chosen = 0;
  for (std::size_t k = 2; k < curve.size(); ++k) chosen += curve[k].back() == '1';
  CHECK(chosen == 1);

  const auto j = nlohmann::json::parse(summary_json(r, d, cfg));
  CHECK(j["version"] == "0.1.0");
  CHECK(j["n"] == 90);
  CHECK(j["splits"] == "trisplit");
  CHECK(j["d_hat"] == std::vector<int>{1, 5});
  CHECK(j["d_hat_names"] == std::vector<std::string>{"a", "e"});
  CHECK(j["sandwich"]["lower"] == j["d_hat"]);
  CHECK(j["split_sizes"] == std::vector<int>{30, 30, 30});
  CHECK(j["perfect_fit"] == false);
}

TEST_CASE("table writers") {
  Table1Row row;
  row.spec = {SplitScheme::TriSplit, 100, 100, ModelKind::B};
  for (auto& m : row.method) {
    m.size = 0.02;
    m.power_av = 0.9;
    m.replicates = 10;
  }
  const auto t1 = lines(table1_csv({row}, ""));
  REQUIRE(t1.size() == 2);
  CHECK(t1[0].rfind("splits,n,p,model,size_lasso,size_stepwise,size_marginal,power_lasso", 0) == 0);
  CHECK(t1[1].rfind("3,100,100,B,0.02,0.02,0.02,0.9,", 0) == 0);

  Table2Row r2;
  r2.spec = row.spec;
  r2.row.fpr = std::numeric_limits<double>::quiet_NaN();
  r2.row.replicates = 8;
  r2.row.failures = 2;
  const auto t2 = lines(table2_csv({r2}, ""));
  CHECK(t2[1] == "100,100,B,0,0,NA,0,0,0,10,2");

  PersistenceReport pr;
  pr.summary.push_back({100, 2.5, 0.1, 0.2, 0.3, 1.0, 5});
  pr.curve.push_back({100, 0.5, 1.0, 1.1, 0.5});
  CHECK(lines(persistence_summary_csv(pr, ""))[1] == "100,2.5,0.1,0.2,0.3,1,5");
  CHECK(lines(persistence_curve_csv(pr, ""))[1] == "100,0.5,1,1.1,0.5");
}

TEST_CASE("write_text reports unwritable paths") {
  CHECK_THROWS_AS(write_text("/nonexistent/dir/out.txt", "x"), Error);
}
