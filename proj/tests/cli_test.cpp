#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "ngds/config.hpp"
#include "ngds/error.hpp"
#include "ngds/mds.hpp"
#include "ngds/synthetic.hpp"
#include "ngds/tensor_io.hpp"
#include "ngds_cli/cli.hpp"
#include "support.hpp"

using namespace ngds;
using namespace ngds::test;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
  }
  return files;
}

std::vector<std::string> gen_args(const fs::path& out, const std::string& dims = "6x6x6") {
  return {"gen", "--out", out.string(), "--dims", dims, "--per-class", "4", "--classes", "3", "--seed", "7"};
}

Matrix euclidean_distances(const Matrix& points) {
  Matrix d(points.rows(), points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    for (Eigen::Index j = 0; j < points.rows(); ++j) d(i, j) = (points.row(i) - points.row(j)).norm();
  return d;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("gen twice gives identical trees") {
    TempDir dir("gen");
    REQUIRE(run_cli(gen_args(dir.path() / "a")).code == 0);
    REQUIRE(run_cli(gen_args(dir.path() / "b")).code == 0);
    const auto a = tree(dir.path() / "a");
    CHECK(a.count("manifest.txt") == 1);
    CHECK(a.count("gen.txt") == 1);
    CHECK(a.size() == 12 + 2);
    CHECK(a == tree(dir.path() / "b"));
  }

  TEST_CASE("gen echo reproduces the run") {
    TempDir dir("gen-echo");
    REQUIRE(run_cli(gen_args(dir.path() / "a")).code == 0);
    REQUIRE(run_cli({"gen", "--out", (dir.path() / "b").string(), "--spec", (dir.path() / "a" / "gen.txt").string()})
                .code == 0);
    CHECK(tree(dir.path() / "a") == tree(dir.path() / "b"));
  }

  TEST_CASE("fit then eval on the train split reaches accuracy 1") {
    TempDir dir("fit-eval");
    const auto data = dir.path() / "data";
    REQUIRE(run_cli(gen_args(data)).code == 0);
    const auto manifest = (data / "manifest.txt").string();
    const auto fitted = run_cli({"fit", "--manifest", manifest, "--out", (dir.path() / "model").string(),
                                 "--method", "nmode-wgds"});
    REQUIRE_MESSAGE(fitted.code == 0, fitted.err);
    for (const char* f : {"model.nmdl", "config.txt", "fisher.csv", "search_trace.csv", "summary.json"})
      CHECK(fs::exists(dir.path() / "model" / f));

    const auto model = (dir.path() / "model" / "model.nmdl").string();
    const auto evaluated =
        run_cli({"eval", "--model", model, "--manifest", manifest, "--split", "train", "--out", (dir.path() / "ev").string()});
    REQUIRE_MESSAGE(evaluated.code == 0, evaluated.err);
    const auto summary = nlohmann::json::parse(slurp(dir.path() / "ev" / "summary.json"));
    CHECK(summary["metrics"]["accuracy"].get<double>() == 1.0);
    CHECK(evaluated.out.find("accuracy 1") != std::string::npos);

    // The echoed config refits to the same model.
    const auto again = run_cli({"fit", "--manifest", manifest, "--out", (dir.path() / "model2").string(), "--config",
                                (dir.path() / "model" / "config.txt").string()});
    REQUIRE(again.code == 0);
    CHECK(slurp(dir.path() / "model" / "model.nmdl") == slurp(dir.path() / "model2" / "model.nmdl"));

    const auto dist = run_cli({"dist", "--model", model, "--manifest", manifest, "--out", (dir.path() / "d").string()});
    REQUIRE(dist.code == 0);
    CHECK(fs::exists(dir.path() / "d" / "distances.csv"));
    const auto mds = run_cli({"mds", "--model", model, "--manifest", manifest, "--out", (dir.path() / "m").string()});
    REQUIRE(mds.code == 0);
    std::istringstream rows(slurp(dir.path() / "m" / "mds.csv"));
    std::string header;
    std::getline(rows, header);
    CHECK(header == "path,label,x1,x2,x3");
    std::size_t count = 0;
    for (std::string row; std::getline(rows, row);) ++count;
    CHECK(count == 12);
    const auto fisher = run_cli({"fisher", "--model", model});
    CHECK(fisher.code == 0);
    CHECK(fisher.out.find("F_n raw") != std::string::npos);
  }

  TEST_CASE("eval with mismatched dims exits 2 with a dims diagnostic") {
    TempDir dir("mismatch");
    REQUIRE(run_cli(gen_args(dir.path() / "small")).code == 0);
    REQUIRE(run_cli(gen_args(dir.path() / "large", "7x6x6")).code == 0);
    REQUIRE(run_cli({"fit", "--manifest", (dir.path() / "small" / "manifest.txt").string(), "--out",
                     (dir.path() / "model").string(), "--method", "pgm"})
                .code == 0);
    const auto r = run_cli({"eval", "--model", (dir.path() / "model" / "model.nmdl").string(), "--manifest",
                            (dir.path() / "large" / "manifest.txt").string(), "--out", (dir.path() / "ev").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("dims") != std::string::npos);
    CHECK(r.err.find("7x6x6") != std::string::npos);
  }

  TEST_CASE("usage, data and numerical exit codes") {
    TempDir dir("codes");
    CHECK(run_cli({}).code == 1);
    CHECK(run_cli({"bogus"}).code == 1);
    CHECK(run_cli({"fit", "--manifest", "x"}).code == 1);
    CHECK(run_cli({"fit", "--manifest", (dir.path() / "none.txt").string(), "--out", dir.path().string()}).code == 2);

    REQUIRE(run_cli(gen_args(dir.path() / "data")).code == 0);
    const auto manifest = (dir.path() / "data" / "manifest.txt").string();
    CHECK(run_cli({"fit", "--manifest", manifest, "--out", (dir.path() / "m").string(), "--method", "nope"}).code == 1);
    CHECK(run_cli({"fit", "--manifest", manifest, "--out", (dir.path() / "m").string(), "--split", "val"}).code == 1);

    // Two classes built from the same tensors cannot be separated.
    const auto twin = dir.path() / "twin";
    fs::create_directories(twin);
    const auto t1 = random_tensor({5, 5, 5}, 1);
    const auto t2 = random_tensor({5, 5, 5}, 2);
    write_tensor(twin / "a1.nmt", t1);
    write_tensor(twin / "a2.nmt", t2);
    write_tensor(twin / "b1.nmt", t1);
    write_tensor(twin / "b2.nmt", t2);
    std::ofstream(twin / "manifest.txt") << "# dims: 5x5x5\na1.nmt,0,train\na2.nmt,0,train\nb1.nmt,1,train\nb2.nmt,1,train\n";
    const auto r = run_cli({"fit", "--manifest", (twin / "manifest.txt").string(), "--out", (dir.path() / "t").string(),
                            "--method", "nmode-gds"});
    CHECK(r.code == 3);
    CHECK(r.err.find("Fisher") != std::string::npos);
  }

  TEST_CASE("flags override the config file") {
    TempDir dir("layers");
    REQUIRE(run_cli(gen_args(dir.path() / "data")).code == 0);
    std::ofstream(dir.path() / "c.txt") << "method=msm\nmodes=1\nseed=3\n";
    const auto r = run_cli({"fit", "--manifest", (dir.path() / "data" / "manifest.txt").string(), "--out",
                            (dir.path() / "m").string(), "--config", (dir.path() / "c.txt").string(), "--seed", "5"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto c = parse_config(slurp(dir.path() / "m" / "config.txt"));
    CHECK(c.method == Method::msm);
    CHECK(c.modes == std::vector<int>{1});
    CHECK(c.seed == 5);
  }
}

TEST_SUITE("config") {
  TEST_CASE("canonical text roundtrips every field") {
    PipelineConfig c;
    c.method = Method::gds;
    c.modes = {3, 1};
    c.energy_mu = 0.1 + 0.2;
    c.mode_dims = {2, 0};
    c.class_dims = {4, 5};
    c.angle_counts = {1, 2};
    c.alpha_max = 3;
    c.beta_search = true;
    c.search = GdsSearch::exhaustive;
    c.search_rounds = 4;
    c.weighting = Weighting::fisher;
    c.distance = ModeDistance::full_spectrum;
    c.classifier = Classifier::class_karcher;
    c.karcher_tol = 1.0 / 3.0 * 1e-7;
    c.karcher_max_iter = 17;
    c.gram_schmidt_tol = 1e-12;
    c.seed = 123456789012345ull;
    const auto text = format_config(c);
    const auto back = parse_config(text);
    CHECK(format_config(back) == text);
    CHECK(back.energy_mu == c.energy_mu);
    CHECK(back.karcher_tol == c.karcher_tol);
    CHECK(back.modes == c.modes);
    CHECK(back.seed == c.seed);
    CHECK(back.method == Method::gds);
    CHECK(format_config(parse_config(format_config(PipelineConfig{}))) == format_config(PipelineConfig{}));
  }

  TEST_CASE("parse errors are usage errors") {
    CHECK_THROWS_AS(parse_config("colour=blue\n"), InvalidArgument);
    CHECK_THROWS_AS(parse_config("mu=lots\n"), InvalidArgument);
    CHECK_THROWS_AS(parse_config("method\n"), InvalidArgument);
    CHECK_THROWS_AS(parse_method("svm"), InvalidArgument);
    const auto c = parse_config("# comment\n\nmethod = pgm  # inline\n");
    CHECK(c.method == Method::pgm);
  }
}

TEST_SUITE("mds") {
  TEST_CASE("collinear points are reproduced") {
    Matrix pts(3, 1);
    pts << 0, 1, 2;
    const Matrix d = euclidean_distances(pts);
    const auto r = classical_mds(d, 1);
    CHECK((euclidean_distances(r.coordinates) - d).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(r.negative_mass <= 1e-12);
    const auto r3 = classical_mds(d, 3);
    CHECK(r3.coordinates.cols() == 3);
    CHECK((euclidean_distances(r3.coordinates) - d).cwiseAbs().maxCoeff() <= 1e-9);
  }

  TEST_CASE("unit square embeds in two dimensions") {
    Matrix square(4, 2);
    square << 0, 0, 1, 0, 1, 1, 0, 1;
    const Matrix d = euclidean_distances(square);
    CHECK(std::abs(d(0, 2) - std::sqrt(2.0)) <= 1e-15);
    const auto r = classical_mds(d, 2);
    const Matrix e = euclidean_distances(r.coordinates);
    for (Eigen::Index i = 0; i < 4; ++i)
      for (Eigen::Index j = i + 1; j < 4; ++j) CHECK(std::abs(e(i, j) - d(i, j)) <= 1e-9);
    CHECK(std::abs(r.eigenvalues(0) - 1.0) <= 1e-12);
    CHECK(std::abs(r.eigenvalues(1) - 1.0) <= 1e-12);
  }

  TEST_CASE("identical points embed at the origin") {
    const auto r = classical_mds(Matrix::Zero(5, 5), 3);
    CHECK(r.coordinates.rows() == 5);
    CHECK(r.coordinates.cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("permuting inputs permutes embedded distances") {
    const Matrix pts = random_matrix(7, 3, 21);
    const Matrix d = euclidean_distances(pts);
    const std::vector<Eigen::Index> perm{3, 0, 6, 1, 5, 2, 4};
    Matrix dp(7, 7);
    for (Eigen::Index i = 0; i < 7; ++i)
      for (Eigen::Index j = 0; j < 7; ++j) dp(i, j) = d(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    const Matrix e = euclidean_distances(classical_mds(d, 3).coordinates);
    const Matrix ep = euclidean_distances(classical_mds(dp, 3).coordinates);
    for (Eigen::Index i = 0; i < 7; ++i)
      for (Eigen::Index j = 0; j < 7; ++j)
        CHECK(std::abs(ep(i, j) - e(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)])) <= 1e-9);
  }

  TEST_CASE("non-Euclidean input reports negative mass") {
    Matrix d(3, 3);
    d << 0, 1, 5, 1, 0, 1, 5, 1, 0;  // violates the triangle inequality
    const auto r = classical_mds(d, 2);
    CHECK(r.negative_mass > 0.0);
    CHECK(r.negative_mass < 1.0);
  }

  TEST_CASE("input contracts") {
    Matrix d = Matrix::Zero(3, 3);
    CHECK_THROWS_AS(classical_mds(d, 0), InvalidArgument);
    CHECK_THROWS_AS(classical_mds(Matrix::Zero(3, 2), 1), DimensionError);
    d(0, 1) = 1.0;
    CHECK_THROWS_AS(classical_mds(d, 1), InvalidArgument);
    d(1, 0) = 1.0;
    d(2, 2) = 0.5;
    CHECK_THROWS_AS(classical_mds(d, 1), InvalidArgument);
    d(2, 2) = NAN;
    CHECK_THROWS_AS(classical_mds(d, 1), NumericalError);
  }
}
