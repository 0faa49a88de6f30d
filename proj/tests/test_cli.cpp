#include "doctest.h"
#include "testutil.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

// Black-box tests for the catgrad binary. The build injects CATGRAD_BIN so
// the suite exercises the exact artifact that ships, through a real shell,
// checking bytes on stdout and the documented exit codes.

namespace {

const std::string kBin = CATGRAD_BIN;

const char* kSqrSrc = "\\x -> x*x";
const char* kMagSqrSrc = "\\(a,b) -> a*a + b*b";
const char* kCosSinProdSrc = "\\(x,y) -> let z = x*y in (cos z, sin z)";

oracle::CliResult run(const std::string& args) {
  return oracle::run_command(kBin + " " + args);
}

// Variants that keep only one stream, so tests can tell stdout from stderr.
// run_command itself merges the two, hence the subshell redirections.
oracle::CliResult run_stdout(const std::string& args) {
  return oracle::run_command("( " + kBin + " " + args + " 2>/dev/null )");
}

oracle::CliResult run_stderr(const std::string& args) {
  return oracle::run_command("( " + kBin + " " + args + " 1>/dev/null )");
}

std::string q(const std::string& s) { return oracle::shell_quote(s); }

std::string expr_args(const std::string& src, const std::string& shape) {
  return "--expr " + q(src) + " --shape " + q(shape);
}

std::vector<double> parse_numbers(const std::string& text) {
  std::istringstream in(text);
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::string line;
  std::istringstream in(text);
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& p, const std::string& contents)
      : path(p) {
    std::ofstream out(path, std::ios::binary);
    out << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("show prints the normalized categorical form") {
  auto r = run("show " + expr_args(kMagSqrSrc, "(R,R)"));
  CHECK(r.exit_code == 0);
  CHECK(r.output ==
        "addC ∘ (mulC ∘ (exl △ exl) △ mulC ∘ (exr △ exr))\n");

  r = run("show " + expr_args(kSqrSrc, "R"));
  CHECK(r.exit_code == 0);
  CHECK(r.output == "mulC ∘ (id △ id)\n");

  r = run("show " + expr_args(kCosSinProdSrc, "(R,R)"));
  CHECK(r.exit_code == 0);
  CHECK(r.output == "(cosC △ sinC) ∘ mulC\n");
}

TEST_CASE("--file and --expr give the same program") {
  TempFile src("/tmp/catgrad_cli_prog.lam", std::string(kMagSqrSrc) + "\n");
  auto from_file =
      run("show --file " + q(src.path) + " --shape " + q("(R,R)"));
  auto from_expr = run("show " + expr_args(kMagSqrSrc, "(R,R)"));
  CHECK(from_file.exit_code == 0);
  CHECK(from_file.output == from_expr.output);

  // The two source options are mutually exclusive.
  auto both = run("show --file " + q(src.path) + " " +
                  expr_args(kSqrSrc, "R"));
  CHECK(both.exit_code == 2);

  auto neither = run("show --shape R");
  CHECK(neither.exit_code == 2);
}

TEST_CASE("eval prints flattened results on one line") {
  auto r = run("eval " + expr_args(kMagSqrSrc, "(R,R)") + " --point 3,4");
  CHECK(r.exit_code == 0);
  CHECK(r.output == "25\n");

  r = run("eval " + expr_args(kCosSinProdSrc, "(R,R)") + " --point 0,1");
  CHECK(r.exit_code == 0);
  CHECK(r.output == "1 0\n");

  r = run("eval " + expr_args("\\v -> v", "[3 x R]") + " --point 1,2,3");
  CHECK(r.exit_code == 0);
  CHECK(r.output == "1 2 3\n");

  // Spaces around the commas are tolerated.
  r = run("eval " + expr_args(kMagSqrSrc, "(R,R)") + " --point " + q("3, 4"));
  CHECK(r.exit_code == 0);
  CHECK(r.output == "25\n");
}

TEST_CASE("jacobian agrees across all four modes") {
  for (const char* mode :
       {"", "forward", "reverse-cont", "reverse-dual", "matrix"}) {
    std::string extra = *mode ? std::string(" --mode ") + mode : "";
    auto r = run("jacobian " + expr_args(kMagSqrSrc, "(R,R)") +
                 " --point 3,4" + extra);
    CAPTURE(mode);
    CHECK(r.exit_code == 0);
    CHECK(r.output == "6 8\n");
  }

  auto id2 = run("jacobian " + expr_args("\\p -> p", "(R,R)") +
                 " --point 5,7 --mode matrix");
  CHECK(id2.exit_code == 0);
  CHECK(id2.output == "1 0\n0 1\n");

  // cos/sin pair at (1,2): rows are the gradients of cos(xy) and sin(xy).
  auto r = run("jacobian " + expr_args(kCosSinProdSrc, "(R,R)") +
               " --point 1,2 --mode reverse-dual");
  CHECK(r.exit_code == 0);
  auto nums = parse_numbers(r.output);
  REQUIRE(nums.size() == 4);
  double s2 = std::sin(2.0), c2 = std::cos(2.0);
  CHECK(std::abs(nums[0] - (-2.0 * s2)) <= 1e-12);
  CHECK(std::abs(nums[1] - (-s2)) <= 1e-12);
  CHECK(std::abs(nums[2] - 2.0 * c2) <= 1e-12);
  CHECK(std::abs(nums[3] - c2) <= 1e-12);

  auto bad = run("jacobian " + expr_args(kSqrSrc, "R") +
                 " --point 1 --mode sideways");
  CHECK(bad.exit_code == 4);
  CHECK(contains(bad.output, "sideways"));
}

TEST_CASE("gradient prints the reverse-mode gradient") {
  auto r = run("gradient " + expr_args(kMagSqrSrc, "(R,R)") + " --point 3,4");
  CHECK(r.exit_code == 0);
  CHECK(r.output == "6 8\n");

  r = run("gradient " + expr_args("\\(a,b) -> 2.5", "(R,R)") + " --point 1,1");
  CHECK(r.exit_code == 0);
  CHECK(r.output == "0 0\n");

  // grad cos(x + y z) = -sin(x + y z) * (1, z, y)
  r = run("gradient " +
          expr_args("\\((x,y),z) -> cos (x + y*z)", "((R,R),R)") +
          " --point 1,2,3");
  CHECK(r.exit_code == 0);
  auto nums = parse_numbers(r.output);
  REQUIRE(nums.size() == 3);
  double s7 = std::sin(7.0);
  CHECK(std::abs(nums[0] - (-s7)) <= 1e-12);
  CHECK(std::abs(nums[1] - (-3.0 * s7)) <= 1e-12);
  CHECK(std::abs(nums[2] - (-2.0 * s7)) <= 1e-12);

  auto pair = run("gradient " + expr_args(kCosSinProdSrc, "(R,R)") +
                  " --point 1,2");
  CHECK(pair.exit_code == 5);
  CHECK(contains(pair.output, "error:"));
}

TEST_CASE("check compares every mode against finite differences") {
  auto r = run("check " + expr_args(kMagSqrSrc, "(R,R)"));
  CHECK(r.exit_code == 0);
  auto ls = lines_of(r.output);
  REQUIRE(ls.size() >= 3);
  CHECK(ls[0] == "trials: 100");
  CHECK(contains(ls[1], "max relative error: "));
  CHECK(ls.back() == "result: PASS");

  r = run("check " + expr_args(kCosSinProdSrc, "(R,R)") + " --iters 7");
  CHECK(r.exit_code == 0);
  CHECK(lines_of(r.output)[0] == "trials: 7");

  // Same seed, same trial points, byte-identical report.
  std::string cmd = "check " + expr_args(kCosSinProdSrc, "(R,R)") +
                    " --seed 42 --iters 25";
  auto a = run(cmd), b = run(cmd);
  CHECK(a.exit_code == 0);
  CHECK(a.output == b.output);

  // An impossible tolerance turns truncation error into a failure.
  auto fail = run("check " + expr_args(kCosSinProdSrc, "(R,R)") +
                  " --tol 1e-16");
  CHECK(fail.exit_code == 6);
  auto fl = lines_of(fail.output);
  CHECK(fl.back() == "result: FAIL");
  CHECK(contains(fail.output, "worst mode: "));
  CHECK(contains(fail.output, "worst point: "));

  // A zero-dimensional domain has nothing to differentiate.
  auto unit = run("check " + expr_args("\\() -> 2", "1"));
  CHECK(unit.exit_code == 0);
  CHECK(unit.output == "trials: 100\nmax relative error: 0\nresult: PASS\n");

  auto badh = run("check " + expr_args(kSqrSrc, "R") + " --h 0");
  CHECK(badh.exit_code == 2);
}

TEST_CASE("descend walks a quadratic to its minimum") {
  auto r = run("descend " + expr_args(kMagSqrSrc, "(R,R)") +
               " --point 3,4 --eta 0.1 --iters 80 --tol 2e-6");
  CHECK(r.exit_code == 0);
  auto ls = lines_of(r.output);
  REQUIRE(ls.size() >= 4);
  CHECK(ls[0].rfind("iter 1: ", 0) == 0);
  std::string verdict = ls[ls.size() - 3];
  CHECK(verdict.rfind("converged in ", 0) == 0);
  int steps = std::stoi(verdict.substr(13));
  CHECK(steps <= 80);
  CHECK(static_cast<std::size_t>(steps) + 3 == ls.size());

  auto gnorm = parse_numbers(ls[ls.size() - 2].substr(15));
  REQUIRE(gnorm.size() == 1);
  CHECK(gnorm[0] <= 2e-6);

  auto xs = parse_numbers(ls.back().substr(3));
  REQUIRE(xs.size() == 2);
  CHECK(std::hypot(xs[0], xs[1]) <= 1e-6);

  // Objective strictly decreases along the run.
  double prev = 25.0;
  for (int k = 0; k < steps; ++k) {
    auto obj = parse_numbers(ls[k].substr(ls[k].find(": ") + 2));
    REQUIRE(obj.size() == 1);
    CHECK(obj[0] < prev);
    prev = obj[0];
  }

  // Starting at the minimum converges before taking a step.
  auto flat = run("descend " + expr_args(kMagSqrSrc, "(R,R)") +
                  " --point 0,0 --tol 2e-6");
  CHECK(flat.exit_code == 0);
  CHECK(flat.output == "converged in 0 steps\ngradient norm: 0\nx: 0 0\n");

  // A zero step size goes nowhere and hits the iteration cap.
  auto stuck = run("descend " + expr_args(kSqrSrc, "R") +
                   " --point 1 --eta 0 --iters 7");
  CHECK(stuck.exit_code == 0);
  auto sl = lines_of(stuck.output);
  REQUIRE(sl.size() == 10);
  for (int k = 1; k <= 7; ++k)
    CHECK(sl[k - 1] == "iter " + std::to_string(k) + ": 1");
  CHECK(sl[7] == "iteration cap reached after 7 steps");
  CHECK(sl[8] == "gradient norm: 2");
  CHECK(sl[9] == "x: 1");

  auto blown = run("descend " + expr_args("\\x -> exp (x*x)", "R") +
                   " --point 1 --eta 9");
  CHECK(blown.exit_code == 7);
  CHECK(contains(blown.output, "diverged after "));
}

TEST_CASE("chain_order finds the cheapest association") {
  auto r = run("chain_order --dims " + q("10 100 5 50"));
  CHECK(r.exit_code == 0);
  CHECK(r.output == "cost: 7500\norder: ((A1 A2) A3)\n");

  r = run("chain_order --dims 10,100,5,50");
  CHECK(r.exit_code == 0);
  CHECK(r.output == "cost: 7500\norder: ((A1 A2) A3)\n");

  r = run("chain_order --dims " + q("10 100"));
  CHECK(r.exit_code == 0);
  CHECK(r.output == "cost: 0\norder: A1\n");

  CHECK(run("chain_order --dims " + q("10 0 5")).exit_code == 2);
  CHECK(run("chain_order --dims 10").exit_code == 2);
  CHECK(run("chain_order --dims " + q("10 abc 5")).exit_code == 2);
}

TEST_CASE("dot renders deterministic graphs") {
  std::string base = "dot " + expr_args(kMagSqrSrc, "(R,R)");
  auto a = run(base), b = run(base);
  CHECK(a.exit_code == 0);
  CHECK(a.output == b.output);
  CHECK(a.output.rfind("digraph G {\n", 0) == 0);
  CHECK(a.output.substr(a.output.size() - 2) == "}\n");
  CHECK(contains(a.output, "label=\"mul\""));
  CHECK(!contains(a.output, "subgraph"));

  auto plain = run(base + " --mode plain");
  CHECK(plain.output == a.output);

  auto fwd = run(base + " --mode forward");
  CHECK(fwd.exit_code == 0);
  CHECK(contains(fwd.output, "subgraph cluster_d"));
  CHECK(contains(fwd.output, "derivative (forward)"));

  auto dual = run(base + " --mode dual");
  CHECK(dual.exit_code == 0);
  CHECK(contains(dual.output, "derivative (dual)"));

  // The scalar identity reduces to a single wire.
  auto wire = run("dot " + expr_args("\\x -> x", "R"));
  CHECK(wire.exit_code == 0);
  CHECK(contains(wire.output, "i0 -> o0"));

  CHECK(run(base + " --mode cont").exit_code == 4);
  CHECK(run(base + " --mode sideways").exit_code == 4);
}

TEST_CASE("--out writes the same bytes the terminal would get") {
  std::string path = "/tmp/catgrad_cli_out.dot";
  std::remove(path.c_str());
  std::string base = "dot " + expr_args(kMagSqrSrc, "(R,R)") + " --mode dual";
  auto direct = run(base);
  auto filed = run(base + " --out " + q(path));
  CHECK(filed.exit_code == 0);
  CHECK(filed.output.empty());
  CHECK(slurp(path) == direct.output);
  std::remove(path.c_str());

  auto jd = run("jacobian " + expr_args(kMagSqrSrc, "(R,R)") +
                " --point 3,4 --out " + q(path));
  CHECK(jd.exit_code == 0);
  CHECK(slurp(path) == "6 8\n");
  std::remove(path.c_str());

  auto bad = run(base + " --out /nonexistent-dir/x.dot");
  CHECK(bad.exit_code == 8);
}

TEST_CASE("failures map to the documented exit codes") {
  // 2: anything wrong with the program text, its shapes, or the usage
  auto unbound = run("show " + expr_args("\\x -> y", "R"));
  CHECK(unbound.exit_code == 2);
  CHECK(contains(unbound.output, "1:7: unbound variable 'y'"));

  CHECK(run("show " + expr_args(kMagSqrSrc, "R")).exit_code == 2);
  CHECK(run("show " + expr_args(kSqrSrc, "(R,")).exit_code == 2);
  CHECK(run("eval " + expr_args(kSqrSrc, "R")).exit_code == 2);
  CHECK(run("frobnicate").exit_code == 2);
  CHECK(run("").exit_code == 2);
  CHECK(run("eval " + expr_args(kSqrSrc, "R") + " --point 1 --bogus")
            .exit_code == 2);

  // 3: a syntactically fine point that does not fit the domain
  auto extra = run("eval " + expr_args(kMagSqrSrc, "(R,R)") + " --point 3,4,5");
  CHECK(extra.exit_code == 3);
  CHECK(contains(extra.output, "3 coordinates"));
  CHECK(run("eval " + expr_args(kSqrSrc, "R") + " --point " + q("1,zebra"))
            .exit_code == 3);
  CHECK(run("eval " + expr_args(kSqrSrc, "R") + " --point " + q(""))
            .exit_code == 3);

  // 8: I/O trouble
  CHECK(run("show --file /nonexistent-dir/prog.lam --shape R").exit_code == 8);

  // help stays on the long flag; the short one would shadow --h
  CHECK(run("--help").exit_code == 0);
  CHECK(contains(run("--help").output, "chain_order"));
  CHECK(run("-h").exit_code == 2);
  CHECK(run("check --help").exit_code == 0);
}

TEST_CASE("diagnostics go to stderr and data to stdout") {
  std::string good = "eval " + expr_args(kMagSqrSrc, "(R,R)") + " --point 3,4";
  CHECK(run_stdout(good).output == "25\n");
  CHECK(run_stderr(good).output.empty());

  std::string bad = "gradient " + expr_args(kCosSinProdSrc, "(R,R)") +
                    " --point 1,2";
  CHECK(run_stdout(bad).output.empty());
  CHECK(contains(run_stderr(bad).output, "error:"));
}

}  // TEST_SUITE("cli")
