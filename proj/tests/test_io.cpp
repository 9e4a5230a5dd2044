#include "support.hpp"

#include <filesystem>

using namespace mlport;
using Catch::Approx;

namespace {

template <typename Fn>
std::tuple<ErrorKind, std::size_t, std::size_t> parse_failure_of(Fn&& fn) {
  try {
    fn();
  } catch (const ParseFailure& e) {
    return {e.kind(), e.row(), e.column()};
  }
  FAIL("expected a ParseFailure");
  return {ErrorKind::InvalidArgument, 0, 0};
}

}  // namespace

TEST_CASE("returns csv: small file round trip") {
  const auto r = io::parse_returns_csv("date,A,B\n1,0.01,-0.02\n2,0.03,+0.04\n3,1e-3,0\n");
  CHECK(r.n() == 3);
  CHECK(r.m() == 2);
  CHECK(r.asset_labels() == std::vector<std::string>{"A", "B"});
  CHECK(r.period_index() == std::vector<std::string>{"1", "2", "3"});
  Eigen::MatrixXd want(3, 2);
  want << 0.01, -0.02, 0.03, 0.04, 0.001, 0.0;
  CHECK(r.data() == want);
}

TEST_CASE("returns csv: BOM, CRLF, quoting, blank lines") {
  const std::string text = "\xEF\xBB\xBF" "period,\"Asset, one\",\"B\"\"x\"\r\n\r\n2001-01,0.5,\"0.25\"\r\n2001-02, 1 ,2\r\n";
  const auto r = io::parse_returns_csv(text);
  CHECK(r.asset_labels() == std::vector<std::string>{"Asset, one", "B\"x"});
  CHECK(r.period_index() == std::vector<std::string>{"2001-01", "2001-02"});
  CHECK(r.data()(0, 1) == 0.25);
  CHECK(r.data()(1, 0) == 1.0);
}

TEST_CASE("returns csv: error coordinates") {
  using K = ErrorKind;
  CHECK(parse_failure_of([] { io::parse_returns_csv("d,A,B\n1,0.1,0.2\n2,,0.3\n"); }) == std::tuple{K::MissingValue, 3u, 2u});
  CHECK(parse_failure_of([] { io::parse_returns_csv("d,A,B\n1,0.1,0.2\n2,0.3, \n"); }) == std::tuple{K::MissingValue, 3u, 3u});
  CHECK(parse_failure_of([] { io::parse_returns_csv("d,A,A\n1,0.1,0.2\n"); }) == std::tuple{K::DuplicateAssetLabel, 1u, 3u});
  CHECK(parse_failure_of([] { io::parse_returns_csv("d,A,B\n1,0.1\n"); }) == std::tuple{K::ParseError, 2u, 3u});
  CHECK(parse_failure_of([] { io::parse_returns_csv("d,A\n1,abc\n"); }) == std::tuple{K::ParseError, 2u, 2u});
  CHECK(parse_failure_of([] { io::parse_returns_csv("d,A\n1,inf\n"); }) == std::tuple{K::ParseError, 2u, 2u});
  CHECK(parse_failure_of([] { io::parse_returns_csv("d,A\n2,0.1\n1,0.2\n"); }) == std::tuple{K::ParseError, 3u, 1u});
  CHECK(std::get<0>(parse_failure_of([] { io::parse_returns_csv("d,A\n1,\"0.1\n"); })) == K::ParseError);
  CHECK(std::get<0>(parse_failure_of([] { io::parse_returns_csv("d,A\n1,0\"1\n"); })) == K::ParseError);
}

TEST_CASE("returns csv: numeric period labels order numerically") {
  const auto r = io::parse_returns_csv("t,A\n9,0.1\n10,0.2\n");
  CHECK(r.period_index() == std::vector<std::string>{"9", "10"});
}

TEST_CASE("returns csv: risk-free column is subtracted and dropped") {
  io::IngestOptions opts;
  opts.rf_column = "RF";
  const auto r = io::parse_returns_csv("d,A,RF,B\n1,0.05,0.01,0.03\n2,0.02,0.02,0.00\n", opts);
  CHECK(r.asset_labels() == std::vector<std::string>{"A", "B"});
  CHECK(r.data()(0, 0) == Approx(0.04));
  CHECK(r.data()(0, 1) == Approx(0.02));
  CHECK(r.data()(1, 1) == Approx(-0.02));
  opts.rf_column = "nope";
  CHECK(testing::error_kind_of([&] { io::parse_returns_csv("d,A\n1,0.1\n", opts); }) == ErrorKind::ConfigError);
}

TEST_CASE("returns csv: large-return rows are dropped and reported") {
  io::IngestOptions opts;
  opts.drop_above = 0.5;
  io::IngestReport report;
  const auto r = io::parse_returns_csv("d,A,B\n1,0.1,0.2\n2,0.9,0.0\n3,0.5,0.1\n", opts, &report);
  CHECK(r.period_index() == std::vector<std::string>{"1", "3"});
  CHECK(report.dropped_periods == std::vector<std::string>{"2"});
}

TEST_CASE("ingest from disk") {
  const auto dir = std::filesystem::temp_directory_path() / "mlport_test_io";
  std::filesystem::create_directories(dir);
  io::write_file(dir / "r.csv", "d,A\n1,0.1\n2,0.2\n");
  CHECK(io::ingest_csv(dir / "r.csv").n() == 2);
  CHECK(testing::error_kind_of([&] { io::ingest_csv(dir / "missing.csv"); }) == ErrorKind::IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("config parser") {
  const auto cfg = io::parse_config("# comment\nwindow = 60\n\nstrategies=mv, ridge  # trailing\r\nwindow=12\n");
  CHECK(cfg.at("window") == "12");
  CHECK(cfg.at("strategies") == "mv, ridge");
  CHECK(cfg.size() == 2);
  CHECK(parse_failure_of([] { io::parse_config("a = 1\nbroken\n"); }) == std::tuple{ErrorKind::ConfigError, 2u, 1u});
  CHECK(std::get<0>(parse_failure_of([] { io::parse_config(" = 3\n"); })) == ErrorKind::ConfigError);
}

TEST_CASE("number formatting") {
  CHECK(io::format_number(0.1) == "0.1");
  CHECK(io::format_number(-0.0) == "0");
  CHECK(io::format_number(1.0 / 3.0) == "0.3333333333");
  CHECK(io::format_number(1e-12) == "1e-12");
  CHECK(io::format_cell(std::nullopt) == "-");
  CHECK(io::format_cell(2.5) == "2.5");
}

TEST_CASE("population json round trip") {
  std::mt19937_64 rng(3);
  const auto pop = testing::random_population(3, rng, 0.7);
  const auto back = io::population_from_json(nlohmann::json::parse(io::population_to_json(pop).dump()));
  CHECK(back.mu() == pop.mu());
  CHECK(back.sigma() == pop.sigma());
  CHECK(back.r_bar() == pop.r_bar());

  const auto j = nlohmann::json::parse(R"({"mu":[0.1],"sigma":[[0.04]],"alpha":2,"r_f":0.1})");
  CHECK(io::population_from_json(j).r_bar() == Approx(0.4));
  CHECK(testing::error_kind_of([] { io::population_from_json(nlohmann::json::parse(R"({"mu":[0.1,0.2],"sigma":[[0.04]]})")); }) ==
        ErrorKind::ConfigError);
}
