#include <gtest/gtest.h>

#include <fstream>

#include "cli.hpp"
#include "terraclass/cloudio.hpp"
#include "terraclass/ensemble.hpp"
#include "terraclass/evaluate.hpp"
#include "test_util.hpp"

using namespace terraclass;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "terraclass");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Cli, SynthIsDeterministic) {
  const auto dir = testutil::temp_dir("cli_synth");
  ASSERT_EQ(run({"synth", "--recipe", "demo", "--extent", "60", "--seed", "7", "-o", (dir / "a.ply").string()}), 0);
  ASSERT_EQ(run({"synth", "--recipe", "demo", "--extent", "60", "--seed", "7", "-o", (dir / "b.ply").string()}), 0);
  EXPECT_EQ(slurp(dir / "a.ply"), slurp(dir / "b.ply"));
  const PointCloud c = read_cloud(dir / "a.ply");
  EXPECT_TRUE(c.has_labels());
  EXPECT_TRUE(c.has_color());
}

TEST(Cli, SplitTrainPredictEvaluate) {
  const auto dir = testutil::temp_dir("cli_flow");
  const auto scene = (dir / "scene.ply").string();
  const auto a = (dir / "a.ply").string(), b = (dir / "b.ply").string();
  ASSERT_EQ(run({"synth", "--recipe", "demo", "--extent", "60", "--seed", "3", "-o", scene}), 0);
  ASSERT_EQ(run({"split", scene, "--angles", "36", "--offsets", "200", "-o", a, b}), 0);

  const PointCloud whole = read_cloud(scene), pa = read_cloud(a), pb = read_cloud(b);
  ASSERT_EQ(pa.size() + pb.size(), whole.size());
  std::vector<std::tuple<double, double, double>> u, w;
  for (const auto* c : {&pa, &pb})
    for (const auto& p : c->points()) u.emplace_back(p.pos.x, p.pos.y, p.pos.z);
  for (const auto& p : whole.points()) w.emplace_back(p.pos.x, p.pos.y, p.pos.z);
  std::sort(u.begin(), u.end());
  std::sort(w.begin(), w.end());
  EXPECT_EQ(u, w);

  const auto model = (dir / "model.txt").string(), out = (dir / "out.ply").string();
  ASSERT_EQ(run({"train", a, "--features", "all", "--classifier", "gbt", "--trees", "10", "--per-class", "200", "-o",
                 model}),
            0);
  ASSERT_EQ(run({"predict", model, b, "-o", out}), 0);
  const PointCloud labeled = read_cloud(out);
  ASSERT_EQ(labeled.size(), pb.size());
  EXPECT_TRUE(labeled.has_labels());
  for (const auto& p : labeled.points()) ASSERT_LT(p.label, kNumClasses);

  const auto report = (dir / "report.txt").string();
  ASSERT_EQ(run({"evaluate", model, b, "-o", report}), 0);
  const Report r = parse_report(slurp(report));
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_LT(r.rows[0].overall_error, 0.2);

  // Flags that contradict the model manifest are a usage error.
  EXPECT_EQ(run({"predict", model, b, "--features", "g", "-o", out}), 1);
}

TEST(Cli, ExitCodes) {
  const auto dir = testutil::temp_dir("cli_exit");
  testing::internal::CaptureStderr();
  EXPECT_EQ(run({"train", "x.ply", "-o", "m.txt", "--classifer", "rf"}), 1);
  const std::string err = testing::internal::GetCapturedStderr();
  EXPECT_NE(err.find("--classifier"), std::string::npos) << err;

  testing::internal::CaptureStderr();
  EXPECT_EQ(run({"trian"}), 1);
  EXPECT_NE(testing::internal::GetCapturedStderr().find("train"), std::string::npos);

  testing::internal::CaptureStderr();
  EXPECT_EQ(run({"predict", (dir / "missing.txt").string(), "x.ply", "-o", (dir / "o.ply").string()}), 2);
  testing::internal::GetCapturedStderr();

  std::ofstream(dir / "bad.xyz") << "1 2\n";
  testing::internal::CaptureStderr();
  EXPECT_EQ(run({"split", (dir / "bad.xyz").string(), "-o", (dir / "p.ply").string(), (dir / "n.ply").string()}), 2);
  EXPECT_NE(testing::internal::GetCapturedStderr().find("line 1"), std::string::npos);

  testing::internal::CaptureStderr();
  EXPECT_EQ(run({}), 1);
  testing::internal::GetCapturedStderr();
}
