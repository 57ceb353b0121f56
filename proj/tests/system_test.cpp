#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mmobs/cli.hpp"
#include "mmobs/error.hpp"
#include "mmobs/system.hpp"

using namespace mmobs;

namespace {

const std::string kSmall =
    "system small\n"
    "time dt\n"
    "states a b\n"
    "outputs 1\n"
    "f a = 0.5*a\n"
    "f b = a - 0.25*b\n"
    "h 1 = a\n"
    "domain a in [-1, 1]\n"
    "domain b in [-1, 1]\n"
    "x0 a in [-0.5, 0.5]\n"
    "x0 b in [-0.5, 0.5]\n";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  s.replace(s.find(from), from.size(), to);
  return s;
}

ErrorKind kind_of(const std::string& text) {
  try {
    parse_system(text);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return ErrorKind::IoError;
}

struct CliResult {
  int code;
  std::string out, err;
};

CliResult invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "mmobs");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = mmobs::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("mmobs_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::filesystem::path dir_;
};

}  // namespace

TEST(BundledSystems, Henon) {
  const SystemSpec s = resolve_system("henon_dt");
  EXPECT_EQ(s.n(), 2U);
  EXPECT_EQ(s.l, 1U);
  EXPECT_EQ(s.time, embed::TimeDomain::DT);
  EXPECT_EQ(s.x0, Box({-2, -1}, {2, 1}));
  EXPECT_FALSE(s.transform.has_value());
  for (const Vector& x : {Vector{0.5, -0.3}, Vector{-1.7, 0.9}}) {
    EXPECT_DOUBLE_EQ(expr::eval(s.f[0], x), x[1] + 0.05 * (1 - x[0] * x[0]));
    EXPECT_DOUBLE_EQ(expr::eval(s.f[1], x), 0.3 * x[0]);
    EXPECT_DOUBLE_EQ(expr::eval(s.h[0], x), x[0]);
  }
}

TEST(BundledSystems, Pendulum) {
  const SystemSpec s = resolve_system("ct_pendulum");
  EXPECT_EQ(s.n(), 3U);
  EXPECT_EQ(s.l, 1U);
  EXPECT_EQ(s.time, embed::TimeDomain::CT);
  const std::vector<std::pair<std::string, double>> params{
      {"a1", 35.63}, {"b1", 15}, {"a2", 0.25}, {"a3", 36}, {"a4", 200}};
  EXPECT_EQ(s.params, params);
  ASSERT_TRUE(s.transform.has_value());
  EXPECT_EQ(*s.transform, (Matrix{{20, 0.1, 0.1}, {0, 0.01, 0.06}, {0, -10, -0.4}}));
  ASSERT_TRUE(s.prek.has_value());
  EXPECT_EQ(*s.prek, (Matrix{{5}, {0}, {0}}));
  EXPECT_EQ(s.x0, Box({9, 9, 0.5}, {19.5, 11, 1.5}));
  EXPECT_TRUE(s.domain.contains(s.x0));
}

TEST(BundledSystems, ShippedFilesMatchCompiledCopies) {
  for (const auto& name : bundled_system_names()) {
    const std::string path = std::string(MMOBS_SOURCE_DIR) + "/systems/" + name + ".sys";
    std::ifstream f(path);
    ASSERT_TRUE(f) << path;
    std::stringstream ss;
    ss << f.rdbuf();
    EXPECT_EQ(ss.str(), *bundled_system_text(name));
    EXPECT_EQ(load_system(path), resolve_system(name));
  }
}

TEST(SystemFile, RoundTrip) {
  for (const auto& name : bundled_system_names()) {
    const SystemSpec s = resolve_system(name);
    EXPECT_EQ(parse_system(write_system(s)), s) << name;
  }
  const SystemSpec s = parse_system(kSmall);
  EXPECT_EQ(parse_system(write_system(s)), s);
}

TEST(SystemFile, ValidationErrors) {
  EXPECT_EQ(kind_of(replace(kSmall, "x0 a in [-0.5, 0.5]", "x0 a in [-0.5, 1.5]")), ErrorKind::ValidationError);
  EXPECT_EQ(kind_of(replace(kSmall, "f b = a - 0.25*b\n", "")), ErrorKind::ValidationError);
  EXPECT_EQ(kind_of(kSmall + "transform row 1 = 1 2\ntransform row 2 = 2 4\n"), ErrorKind::ValidationError);
  EXPECT_EQ(kind_of(replace(kSmall, "time dt", "time sometimes")), ErrorKind::ParseError);
  EXPECT_EQ(kind_of(replace(kSmall, "h 1 = a", "h 1 = c")), ErrorKind::ParseError);
}

TEST(SystemFile, ParseErrorPosition) {
  try {
    parse_system(replace(kSmall, "domain b in [-1, 1]", "domain b in [-1; 1]"));
    FAIL();
  } catch (const FileParseError& e) {
    EXPECT_EQ(e.line(), 9U);
    EXPECT_GT(e.column(), 1U);
  }
}

TEST(WorkingCoordinates, TransformedPlantIsConjugate) {
  const SystemSpec s = resolve_system("ct_pendulum");
  const WorkingSystem w = prepare(s);
  const Matrix& t = *s.transform;
  const Vector x{12.0, 10.0, 1.0};
  const Vector z = t * x;
  Vector fx(3), fz(3);
  for (std::size_t i = 0; i < 3; ++i) {
    fx[i] = expr::eval(s.f[i], x);
    fz[i] = expr::eval(w.f_true[i], z);
  }
  const Vector tfx = t * fx;
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(fz[i], tfx[i], 1e-9 * std::max(1.0, std::abs(tfx[i])));
  EXPECT_NEAR(expr::eval(w.h[0], z), x[0], 1e-12);
  EXPECT_TRUE(w.x0.contains(z));
  EXPECT_EQ(*w.pre_gain, t * *s.prek);
}

TEST(GainFile, RoundTripIsExact) {
  GainFile g;
  g.system = "henon_dt";
  g.matrices["L"] = Matrix{{0.1 / 3}, {2.0 / 7}};
  g.matrices["P"] = Matrix{{1, 1e-17}, {1e-17, 3}};
  g.scalars["alpha"] = 0.1;
  g.strings["strategy"] = "upper";
  std::stringstream ss;
  write_gain(ss, g);
  const GainFile h = read_gain(ss);
  EXPECT_EQ(h.system, g.system);
  EXPECT_EQ(h.matrices, g.matrices);
  EXPECT_EQ(h.scalars, g.scalars);
  EXPECT_EQ(h.strings, g.strings);
}

TEST(GainFile, BuiltinGains) {
  EXPECT_EQ(resolve_gain("paper", resolve_system("henon_dt")), (Matrix{{0.0393}, {0.0346}}));
  const Matrix ct = resolve_gain("paper", resolve_system("ct_pendulum"));
  EXPECT_NEAR(ct(0, 0), 3.44e-6, 1e-20);
  EXPECT_EQ(ct(1, 0), 0.0);
  EXPECT_NEAR(ct(2, 0), 0.04e-6, 1e-20);
  EXPECT_EQ(resolve_gain("zero", resolve_system("henon_dt")), Matrix(2, 1));
}

TEST(Csv, HeaderContract) {
  sim::TrajectoryLog log;
  log.times = {0};
  log.upper = {{1, 2}};
  log.lower = {{0, 0}};
  log.eps = {{1, 2}};
  log.eps_inf = {2};
  std::ostringstream plain;
  write_csv(plain, log, 2);
  EXPECT_EQ(plain.str().substr(0, plain.str().find('\n')), "t,xbar_1,xbar_2,xlow_1,xlow_2,eps_1,eps_2,eps_inf");
  log.truth = {{0.5, 1}};
  std::ostringstream with_truth;
  write_csv(with_truth, log, 2);
  EXPECT_EQ(with_truth.str(),
            "t,xbar_1,xbar_2,xlow_1,xlow_2,eps_1,eps_2,eps_inf,xtrue_1,xtrue_2\n0,1,2,0,0,1,2,2,0.5,1\n");
}

TEST(Csv, OriginalCoordinatesEncloseMappedTruth) {
  sim::TrajectoryLog log;
  const Matrix tinv = inverse(Matrix{{2, 1}, {0, 1}});
  log.times = {0};
  log.upper = {{3, 1}};
  log.lower = {{1, -1}};
  log.eps = {{2, 2}};
  log.eps_inf = {2};
  log.truth = {{2, 0}};
  const sim::TrajectoryLog x = to_original(log, tinv);
  const Vector xt = tinv * log.truth[0];
  EXPECT_EQ(x.truth[0], xt);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_LE(x.lower[0][i], xt[i]);
    EXPECT_GE(x.upper[0][i], xt[i]);
    EXPECT_DOUBLE_EQ(x.eps[0][i], x.upper[0][i] - x.lower[0][i]);
  }
}

TEST_F(TempDir, SynthThenSimulatePipeline) {
  const CliResult s = invoke({"synth", "henon_dt", "--out", path("h.gain")});
  ASSERT_EQ(s.code, cli::kOk) << s.out << s.err;
  EXPECT_TRUE(std::filesystem::exists(path("h.gain")));
  const CliResult r = invoke({"simulate", "henon_dt", "--gain", path("h.gain"), "--mc", "50", "--out", path("h.csv")});
  EXPECT_EQ(r.code, cli::kOk) << r.out << r.err;
  std::ifstream csv(path("h.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "t,xbar_1,xbar_2,xlow_1,xlow_2,eps_1,eps_2,eps_inf,xtrue_1,xtrue_2");
  const CliResult v = invoke({"verify", "henon_dt", "--gain", path("h.gain")});
  EXPECT_EQ(v.code, cli::kOk) << v.out << v.err;
}

TEST_F(TempDir, VerifyReferenceHenonGain) {
  const CliResult v = invoke({"verify", "henon_dt", "--gain", "paper"});
  EXPECT_EQ(v.code, cli::kOk) << v.out << v.err;
  EXPECT_NE(v.out.find("certificate: PASS"), std::string::npos);
}

TEST_F(TempDir, ExportedLmiChecksOut) {
  ASSERT_EQ(invoke({"export-lmi", "henon_dt", "--out", path("h.lmi")}).code, cli::kOk);
  const CliResult solved = invoke({"check-lmi", path("h.lmi"), path("h.pt"), "--solve"});
  EXPECT_EQ(solved.code, cli::kOk) << solved.out;
  EXPECT_EQ(invoke({"check-lmi", path("h.lmi"), path("h.pt")}).code, cli::kOk);
  std::ofstream(path("zero.pt")) << "point nvars=9\n0\n0\n0\n0\n0\n0\n0\n0\n0\n";
  EXPECT_EQ(invoke({"check-lmi", path("h.lmi"), path("zero.pt")}).code, cli::kNotCertified);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({}).code, cli::kUsage);
  EXPECT_EQ(invoke({"synth"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"synth", "no_such_system"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"simulate", "henon_dt"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"check", "henon_dt", "--strategy", "middle"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"check", "henon_dt"}).code, cli::kOk);
}
