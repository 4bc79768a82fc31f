#include "cdlab/report/report.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cdlab;
using namespace cdlab::report;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("cdlab_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome verify(const std::string& args) {
  const char* bin = std::getenv("CDLAB_VERIFY_BIN");
  if (!bin) bin = CDLAB_VERIFY_DEFAULT;
  const fs::path err = scratch() / "stderr.txt";
  const std::string cmd = std::string("\"") + bin + "\" " + args + " 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Outcome r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

std::string manifold(const std::string& name) { return std::string(CDLAB_SOURCE_DIR) + "/manifolds/" + name; }

json load(const fs::path& p) { return json::parse(slurp(p)); }

// ---------------------------------------------------------------------------------------------------------------
// Library pieces

TEST(ReportLibrary, SuitesRunInDeclaredOrder) {
  EXPECT_EQ(expand_suites({"bochner", "algebra"}), (std::vector<std::string>{"algebra", "bochner"}));
  EXPECT_EQ(expand_suites({"all"}), suite_order());
  EXPECT_THROW(expand_suites({"nonsense"}), UsageError);
}

TEST(ReportLibrary, TwistSpecParsing) {
  const auto t = parse_twist("0.37,0,0,0;1,0,0,0,0,0.2;0,2,0,0,0.1,0", 2);
  EXPECT_EQ(t.period, (std::vector<double>{0.37, 0, 0, 0}));
  ASSERT_EQ(t.f_modes.size(), 2u);
  EXPECT_EQ(t.f_modes[0].k, (std::vector<int>{1, 0, 0, 0}));
  EXPECT_EQ(t.f_modes[0].sin_amp, 0.2);
  EXPECT_EQ(t.f_modes[1].cos_amp, 0.1);
  EXPECT_THROW(parse_twist("0.37,0", 2), UsageError);
  EXPECT_THROW(parse_twist("0,0,0,0;1.5,0,0,0,1,0", 2), UsageError);
  EXPECT_THROW(parse_twist("0,x,0,0", 2), UsageError);
}

TEST(ReportLibrary, OverallStatusPrecedence) {
  std::vector<verify::CheckResult> rs(3);
  for (auto& r : rs) r.status = Status::Pass;
  EXPECT_EQ(overall(rs), Status::Pass);
  rs[1].status = Status::Unreliable;
  EXPECT_EQ(overall(rs), Status::Unreliable);
  EXPECT_EQ(exit_code(overall(rs)), 2);
  rs[2].status = Status::Fail;
  EXPECT_EQ(overall(rs), Status::Fail);
  EXPECT_EQ(exit_code(overall(rs)), 1);
  EXPECT_EQ(exit_code(Status::Pass), 0);
}

TEST(ReportLibrary, StripTimingRemovesOnlyTimingFields) {
  json j = {{"a", 1}, {"runtime_s", 2.0}, {"checks", {{{"id", "x"}, {"runtime_s", 3.0}}}}, {"total_runtime_s", 4.0}};
  const json s = strip_timing(j);
  EXPECT_FALSE(s.contains("runtime_s"));
  EXPECT_FALSE(s.contains("total_runtime_s"));
  EXPECT_FALSE(s["checks"][0].contains("runtime_s"));
  EXPECT_EQ(s["checks"][0]["id"], "x");
  EXPECT_EQ(s["a"], 1);
}

TEST(ReportLibrary, ToleranceOverrides) {
  RunConfig rc;
  rc.tol_overrides["adjoint"] = 1e-3;
  EXPECT_EQ(suite_config(rc).tol.adjoint, 1e-3);
  rc.tol_overrides["bogus"] = 1;
  EXPECT_THROW(suite_config(rc), UsageError);
}

// ---------------------------------------------------------------------------------------------------------------
// The binary

TEST(VerifyBinary, AlgebraSuitePasses) {
  const fs::path out = scratch() / "algebra.json";
  const Outcome r = verify("--suite algebra --n 3 --report \"" + out.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = load(out);
  EXPECT_EQ(j["schema_version"], kSchemaVersion);
  EXPECT_EQ(j["overall"], "pass");
  EXPECT_EQ(j["config"]["n"], 3);
  ASSERT_EQ(j["checks"].size(), 7u);
  for (const auto& c : j["checks"]) {
    EXPECT_EQ(c["status"], "pass");
    EXPECT_FALSE(c["anchor"].get<std::string>().empty());
    EXPECT_TRUE(c.contains("runtime_s"));
  }
}

TEST(VerifyBinary, FlatSurfaceAllSuitesPass) {
  const fs::path out = scratch() / "flat1.json", csv = scratch() / "flat1.csv";
  const Outcome r = verify("--suite all --manifold \"" + manifold("flat_n1.cfg") + "\" --report \"" + out.string() +
                       "\" --spectra \"" + csv.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = load(out);
  EXPECT_EQ(j["overall"], "pass");
  bool found = false;
  for (const auto& c : j["checks"])
    if (c["id"] == "cohomology.derham") {
      found = true;
      EXPECT_EQ(c["observed"], 4);
      EXPECT_EQ(c["expected"], 4);
      EXPECT_GE(c["gap_ratio"].get<double>(), 1e2);
    }
  EXPECT_TRUE(found);
  EXPECT_EQ(j["manifold_text"], slurp(manifold("flat_n1.cfg")));
  const std::string spectra = slurp(csv);
  EXPECT_EQ(spectra.rfind("check_id,index,eigenvalue\n", 0), 0u);
  EXPECT_NE(spectra.find("cohomology.derham,0,"), std::string::npos);
}

TEST(VerifyBinary, ReportsAreReproducibleApartFromTiming) {
  const fs::path a = scratch() / "det_a.json", b = scratch() / "det_b.json";
  const std::string args = "--suite geometry operators cohomology --manifold \"" + manifold("flat_n1.cfg") + "\" --seed 7 --report ";
  ASSERT_EQ(verify(args + "\"" + a.string() + "\"").code, 0);
  ASSERT_EQ(verify(args + "\"" + b.string() + "\"").code, 0);
  EXPECT_EQ(strip_timing(load(a)).dump(2), strip_timing(load(b)).dump(2));
  // the seed is part of the result
  const fs::path c = scratch() / "det_c.json";
  ASSERT_EQ(verify("--suite operators --manifold \"" + manifold("flat_n1.cfg") + "\" --seed 8 --report \"" + c.string() + "\"").code, 0);
  auto residual = [](const json& j, const std::string& id) {
    for (const auto& x : j["checks"])
      if (x["id"] == id) return x["residual"].get<double>();
    throw std::runtime_error("no check " + id);
  };
  const std::string id = "operators.sigma_conjugation.del";
  EXPECT_NE(residual(load(c), id), residual(load(a), id));
}

TEST(VerifyBinary, MalformedManifoldNamesTheLine) {
  const fs::path bad = scratch() / "bad.cfg";
  std::ofstream(bad) << "n = 2\nband_limit = 1\nterm = 1 1 0 0 1\n";
  const Outcome r = verify("--suite geometry --manifold \"" + bad.string() + "\"");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;

  std::ofstream(bad) << "n = 2\nband_limit = 1\ncolour = blue\n";
  const Outcome u = verify("--suite geometry --manifold \"" + bad.string() + "\"");
  EXPECT_EQ(u.code, 3);
  EXPECT_NE(u.err.find("line 3"), std::string::npos) << u.err;
  EXPECT_NE(u.err.find("colour"), std::string::npos) << u.err;
}

TEST(VerifyBinary, IndefiniteMetricIsRejected) {
  const fs::path bad = scratch() / "indefinite.cfg";
  std::ofstream(bad) << "n = 1\nband_limit = 1\nterm = 1 1  1 0  0.7 0\nterm = 1 1  -1 0  0.7 0\n";
  const Outcome r = verify("--suite geometry --manifold \"" + bad.string() + "\"");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("not positive definite"), std::string::npos) << r.err;
}

TEST(VerifyBinary, UsageErrorsExitWithThree) {
  EXPECT_EQ(verify("--suite nonsense").code, 3);
  EXPECT_EQ(verify("--no-such-flag").code, 3);
  EXPECT_EQ(verify("--suite twisted --twist 1,2,3").code, 3);
  EXPECT_EQ(verify("--suite geometry --manifold /nonexistent/file.cfg").code, 3);
  EXPECT_EQ(verify("--suite geometry --n 2 --grid-dims 8,8").code, 3);
  EXPECT_EQ(verify("--suite geometry --tol bogus=1").code, 3);
}

TEST(VerifyBinary, FailingCheckExitsWithOne) {
  const fs::path out = scratch() / "fail.json";
  const Outcome r = verify("--suite operators --n 1 --tol first_order=1e-30 --report \"" + out.string() + "\"");
  EXPECT_EQ(r.code, 1) << r.err;
  EXPECT_EQ(load(out)["overall"], "fail");
}

TEST(VerifyBinary, UnconvergedSolveExitsWithTwo) {
  const fs::path out = scratch() / "unreliable.json";
  // a 24x24 grid is past the dense threshold, and one iteration cannot converge
  const Outcome r = verify("--suite cohomology --n 1 --kernel-grid 24 --max-iter 1 --report \"" + out.string() + "\"");
  EXPECT_EQ(r.code, 2) << r.err;
  const json j = load(out);
  EXPECT_EQ(j["overall"], "unreliable");
  EXPECT_EQ(j["summary"]["unreliable"].get<int>(), 2);
}

TEST(VerifyBinary, TwistFlagIsEchoedAndUsed) {
  const fs::path out = scratch() / "twist.json";
  const Outcome r = verify("--suite twisted --n 1 --twist \"0.25,0;1,0,0,0.1\" --report \"" + out.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = load(out);
  EXPECT_EQ(j["config"]["twist"]["constant"][0], 0.25);
  EXPECT_EQ(j["config"]["twist"]["modes"].size(), 1u);
  for (const auto& c : j["checks"])
    if (c["id"] == "twisted.derham") {
      EXPECT_EQ(c["observed"], 0);
    }
}

}  // namespace
