#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "../oracles.h"
#include "preftransfer/dataset.h"
#include "preftransfer/loaders.h"
#include "preftransfer/pca.h"
#include "preftransfer/random.h"
#include "preftransfer/split.h"
#include "preftransfer/text.h"
#include "../temp_dir.h"

using namespace preftransfer;

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << text;
}

std::string movie_row(int id, const std::string& title, const std::string& date,
                      std::initializer_list<int> genres) {
  std::string row = fmt::format("{}|{}|{}||http://x", id, title, date);
  std::set<int> on(genres);
  for (int g = 0; g < kGenreCount; ++g) row += on.count(g) ? "|1" : "|0";
  return row + "\n";
}

std::size_t count_label(const std::vector<Interaction>& v, Label label) {
  return static_cast<std::size_t>(
      std::count_if(v.begin(), v.end(), [&](const Interaction& i) { return i.label == label; }));
}

}  // namespace

TEST_CASE("text helpers") {
  CHECK(split("a|b||c", '|') == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(trim("  x y \r\n") == "x y");
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(split_csv_line("1,\"a,b\",\"q\"\"x\",") == std::vector<std::string>{"1", "a,b", "q\"x", ""});
  CHECK(format_double(0.1) == "0.1");
  CHECK(parse_double(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(try_parse_int("+12") == 12);
  CHECK_FALSE(try_parse_int("12x").has_value());
  CHECK_FALSE(try_parse_double("").has_value());
  CHECK_THROWS(parse_int("abc"));
}

TEST_CASE("movielens year bins") {
  CHECK(movielens_year_bin("01-Jan-1998", 1998) == kYearBins - 1);
  CHECK(movielens_year_bin("01-Jan-1929", 1998) == 0);
  CHECK(movielens_year_bin("01-Jan-1922", 1998) == 0);
  CHECK(movielens_year_bin("", 1998) == kYearBins);
  CHECK(movielens_year_bin("garbage", 1998) == kYearBins);
  CHECK(kMovieLensFeatureDim == 90);
}

TEST_CASE("movielens loader on a small fixture") {
  TempDir tmp("ml");
  std::string items = movie_row(1, "Toy Story (1995)", "01-Jan-1995", {3, 4, 5});
  items += movie_row(2, "Old One (1930)", "01-Jan-1930", {8});
  items += movie_row(3, "No Date", "", {0});
  items += "4|broken row\n";
  write_file(tmp.path() / "u.item", items);
  write_file(tmp.path() / "u.data",
             "1\t1\t4\t881250949\n1\t2\t3\t881250950\n2\t3\t5\t881250951\n2\t1\t1\t1\nbad line\n");
  const Dataset ds = load_movielens(tmp.path(), MovieLensOptions{false});
  CHECK(ds.item_count() == 3);
  CHECK(ds.feature_dim() == 90);
  CHECK(ds.features.array().unaryExpr([](double v) { return v == 0.0 || v == 1.0; }).all());
  CHECK(ds.features.rowwise().sum()(0) == 4.0);  // three genres plus one year bin
  CHECK(ds.features(0, kGenreCount + kYearBins - 1) == 1.0);  // latest year
  CHECK(ds.features(2, kGenreCount + kYearBins) == 1.0);      // unknown year
  REQUIRE(ds.interactions.size() == 4);
  CHECK(ds.interactions[0].user == "0");
  CHECK(ds.interactions[0].label == Label::kUp);    // rating 4
  CHECK(ds.interactions[1].label == Label::kDown);  // rating 3
  CHECK(ds.users() == std::vector<std::string>{"0", "1"});
  CHECK(ds.checksum.size() == 16);
  bool noted = false;
  for (const auto& n : ds.notes) noted |= n.find("malformed") != std::string::npos;
  CHECK(noted);

  CHECK_THROWS_AS(load_movielens(tmp.path(), MovieLensOptions{true}), std::runtime_error);
  CHECK_THROWS(load_movielens(tmp.path() / "missing"));
}

TEST_CASE("canonical csv round trip") {
  Dataset ds;
  ds.name = "tiny";
  ds.item_ids = {"a", "b,c"};
  ds.item_names = {"Alpha \"A\"", "Beta"};
  ds.features.resize(2, 2);
  ds.features << 0.1, 1.0 / 3.0, -2.5, 1e-300;
  ds.interactions = {{"u1", 0, Label::kUp}, {"u2", 1, Label::kDown}};
  TempDir tmp("canon");
  write_canonical(ds, tmp.path() / "tiny.csv");
  const Dataset back = read_canonical(tmp.path() / "tiny.csv");
  CHECK(back.item_ids == ds.item_ids);
  CHECK(back.item_names == ds.item_names);
  CHECK(back.features == ds.features);
  REQUIRE(back.interactions.size() == 2);
  CHECK(back.interactions[1].user == "u2");
  CHECK(back.interactions[1].item == 1);
  CHECK(back.interactions[1].label == Label::kDown);
  write_file(tmp.path() / "bad.csv", "nonsense\n");
  CHECK_THROWS(read_canonical(tmp.path() / "bad.csv"));
  CHECK(hex64(fnv1a("")) == "cbf29ce484222325");
  CHECK(hex64(fnv1a("a")) == "af63dc4c8601ec8c");
}

TEST_CASE("pca on points along y = x") {
  Eigen::MatrixXd pts(5, 2);
  pts << 0, 0, 1, 1, 2, 2, 3, 3, 4, 4;
  const PcaModel model = fit_pca(pts, 2);
  CHECK(model.eigenvalues[0] == doctest::Approx(5.0));  // var(x) + var(y) = 2.5 + 2.5
  CHECK(std::abs(model.eigenvalues[1]) < 1e-12);
  CHECK(model.scale[1] == 0.0);
  CHECK_FALSE(model.warnings.empty());
  CHECK(std::abs(std::abs(model.components(0, 0)) - std::sqrt(0.5)) < 1e-12);
}

TEST_CASE("pca reconstruction, orthonormality and unit variance") {
  Rng rng(157);
  Eigen::MatrixXd x(40, 6);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = standard_normal(rng) * (1 + i % 6);
  const PcaModel full = fit_pca(x, 6);
  const Eigen::MatrixXd centered = x.rowwise() - full.mean.transpose();
  const Eigen::MatrixXd coords = centered * full.components;
  CHECK((coords * full.components.transpose() - centered).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((full.components.transpose() * full.components - Eigen::MatrixXd::Identity(6, 6))
            .cwiseAbs()
            .maxCoeff() < 1e-8);
  for (Eigen::Index c = 1; c < 6; ++c) CHECK(full.eigenvalues[c] <= full.eigenvalues[c - 1]);

  const PcaModel three = fit_pca(x, 3);
  const Eigen::MatrixXd proj = apply_pca(three, x);
  CHECK(proj.cols() == 3);
  for (Eigen::Index c = 0; c < 3; ++c) {
    const double mean = proj.col(c).mean();
    const double var = (proj.col(c).array() - mean).square().sum() / (proj.rows() - 1);
    CHECK(std::abs(mean) < 1e-10);
    CHECK(std::abs(var - 1.0) < 1e-6);
  }
  CHECK_THROWS_AS(fit_pca(x, 7), std::invalid_argument);
  CHECK_THROWS_AS(fit_pca(x.topRows(1), 1), std::invalid_argument);
}

TEST_CASE("pca with fewer samples than dimensions uses the gram route") {
  Rng rng(163);
  Eigen::MatrixXd x(8, 20);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = standard_normal(rng);
  const PcaModel model = fit_pca(x, 10);
  // Rank of the centered data is 7: three null components.
  CHECK(model.scale.tail(3).isZero());
  CHECK((model.components.transpose() * model.components - Eigen::MatrixXd::Identity(10, 10))
            .cwiseAbs()
            .maxCoeff() < 1e-8);
  const Eigen::MatrixXd proj = apply_pca(model, x);
  for (Eigen::Index c = 0; c < 7; ++c) {
    const double var = (proj.col(c).array() - proj.col(c).mean()).square().sum() / 7.0;
    CHECK(std::abs(var - 1.0) < 1e-6);
  }
  // Same leading eigenvalues as the covariance route on the transposed problem.
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / 7.0;
  Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov).eigenvalues().reverse();
  for (Eigen::Index c = 0; c < 7; ++c) CHECK(model.eigenvalues[c] == doctest::Approx(eig[c]).epsilon(1e-9));
}

TEST_CASE("split with intersection shares about a quarter of the catalog") {
  const std::size_t catalog = 40;
  const int seeds = 10000;
  double shared = 0.0;
  for (int s = 0; s < seeds; ++s) {
    const ServiceSplit sp = make_split(catalog, SplitMode::kWithIntersection, static_cast<std::uint64_t>(s));
    shared += static_cast<double>(sp.shared_count());
  }
  const double draws = static_cast<double>(seeds) * catalog;
  CHECK(std::abs(shared / draws - 0.25) <= oracle::binomial_halfwidth(0.25, draws));
}

TEST_CASE("disjoint split partitions the catalog and seeds reproduce") {
  const ServiceSplit a = make_split(50, SplitMode::kNoIntersection, 9);
  CHECK(a.shared_count() == 0);
  CHECK(a.source_items().size() + a.target_items().size() == 50);
  const ServiceSplit b = make_split(50, SplitMode::kNoIntersection, 9);
  CHECK(a.in_source == b.in_source);
  CHECK(a.in_target == b.in_target);
  // One item can never give both services something: the seed is bumped until it does.
  const ServiceSplit tiny = make_split(2, SplitMode::kNoIntersection, 0);
  CHECK(tiny.source_items().size() == 1);
  CHECK(tiny.resamples() >= 0);
  CHECK(parse_split_mode("intersect") == SplitMode::kWithIntersection);
  CHECK(parse_split_mode("disjoint") == SplitMode::kNoIntersection);
  CHECK_THROWS(parse_split_mode("both"));
}

TEST_CASE("tokenizer and vocabulary") {
  CHECK(tokenize("Great, GREAT product!! 5/5") ==
        std::vector<std::string>{"great", "great", "product", "5", "5"});
  const std::vector<std::string> docs{"b a a", "c b a", "d"};
  CHECK(build_vocabulary(docs, 2) == std::vector<std::string>{"a", "b"});
  CHECK(build_vocabulary(docs, 10).size() == 4);
  CHECK(build_vocabulary(docs, 3) == build_vocabulary(docs, 3));
  CHECK(to_utf8("caf\xe9") == "caf\xc3\xa9");
  CHECK(to_utf8("caf\xc3\xa9") == "caf\xc3\xa9");
}

TEST_CASE("last.fm loader samples disjoint, seeded negatives") {
  TempDir tmp("lastfm");
  std::string listens = "userID\tartistID\tweight\n";
  std::string tags = "userID\tartistID\ttagID\tday\tmonth\tyear\n";
  for (int a = 1; a <= 60; ++a) tags += fmt::format("9\t{}\t{}\t1\t1\t2009\n", a, a % 7);
  for (int a = 1; a <= 20; ++a) listens += fmt::format("2\t{}\t{}\n", a * 2, 10 + a);
  for (int a = 1; a <= 5; ++a) listens += fmt::format("3\t{}\t1\n", a);
  listens += "3\t6\t0\n";
  write_file(tmp.path() / "user_artists.dat", listens);
  write_file(tmp.path() / "user_taggedartists.dat", tags);
  write_file(tmp.path() / "artists.dat", "id\tname\turl\tpictureURL\n2\tSome Band\tu\tp\n");

  const Dataset ds = load_lastfm(tmp.path(), LastfmOptions{1, 2000, 3000});
  CHECK(ds.item_count() == 60);
  CHECK(ds.feature_dim() == 7);
  const auto by_user = ds.by_user();
  const auto& u2 = by_user.at("2");
  CHECK(count_label(u2, Label::kUp) == 20);
  CHECK(count_label(u2, Label::kDown) == 20);
  std::set<std::size_t> up, down;
  for (const auto& i : u2) (i.label == Label::kUp ? up : down).insert(i.item);
  for (std::size_t d : down) CHECK_FALSE(up.count(d));
  CHECK(count_label(by_user.at("3"), Label::kUp) == 5);
  CHECK(ds.item_names[1] == "Some Band");

  const Dataset again = load_lastfm(tmp.path(), LastfmOptions{1, 2000, 3000});
  CHECK(again.interactions.size() == ds.interactions.size());
  for (std::size_t i = 0; i < ds.interactions.size(); ++i) {
    CHECK(again.interactions[i].item == ds.interactions[i].item);
  }
  CHECK_THROWS(load_lastfm(tmp.path() / "missing"));
}

TEST_CASE("amazon loader labels by rating and builds bag-of-words") {
  TempDir tmp("amazon");
  std::string lines;
  lines += R"({"reviewerID": "u1", "asin": "A", "overall": 5.0, "reviewText": "great sound great"})" "\n";
  lines += R"({"reviewerID": "u1", "asin": "B", "overall": 2.0, "reviewText": "poor sound"})" "\n";
  lines += R"({"reviewerID": "u2", "asin": "C", "overall": 4.0, "reviewText": "poor sound"})" "\n";
  lines += R"({"reviewerID": "u2", "asin": "A", "overall": 1.0, "reviewText": "ok"})" "\n";
  lines += "not json\n";
  write_file(tmp.path() / "reviews.json", lines);
  const Dataset ds = load_amazon(tmp.path(), AmazonOptions{3, 3000});
  CHECK(ds.item_ids == std::vector<std::string>{"A", "B", "C"});
  CHECK(ds.feature_dim() == 3);
  CHECK(ds.features.row(1) == ds.features.row(2));  // identical review text
  const auto by_user = ds.by_user();
  CHECK(by_user.at("u1")[0].label == Label::kUp);
  CHECK(by_user.at("u1")[1].label == Label::kDown);
  CHECK(by_user.at("u2")[0].label == Label::kUp);
  bool noted = false;
  for (const auto& n : ds.notes) noted |= n.find("malformed") != std::string::npos;
  CHECK(noted);
  CHECK_THROWS(load_amazon(tmp.path() / "missing.json"));
}

TEST_CASE("reduce_features standardizes to the requested dimension") {
  Rng rng(167);
  Dataset ds;
  ds.name = "r";
  ds.features.resize(30, 8);
  for (Eigen::Index i = 0; i < ds.features.size(); ++i) ds.features.data()[i] = uniform01(rng);
  for (int i = 0; i < 30; ++i) {
    ds.item_ids.push_back(std::to_string(i));
    ds.item_names.push_back(std::to_string(i));
  }
  reduce_features(ds, 4);
  CHECK(ds.feature_dim() == 4);
}
