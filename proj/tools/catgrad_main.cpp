// Command-line front end. Commands: show, eval, jacobian, gradient, check,
// descend, chain_order, dot.
//
// Exit codes: 0 success; 2 malformed source, shape, or usage; 3 point does
// not conform to the shape; 4 invalid mode; 5 non-scalar codomain where a
// gradient is required; 6 derivative check exceeded tolerance; 7 divergence
// during descent; 8 I/O failure. Diagnostics go to standard error, data to
// standard output.

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "catgrad/driver.hpp"
#include "catgrad/graph.hpp"

using namespace catgrad;

namespace {

struct Args {
  std::string file, expr, shape, point, mode, dims, out;
  double h = 1e-6;
  double tol = 1e-5;
  double eta = 0.1;
  std::size_t iters = 100;
  std::uint64_t seed = 0;
};

int fail(int code, const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return code;
}

// Loads program text from --expr or --file. Returns 0 on success.
int load_source(const Args& a, std::string& src) {
  if (!a.file.empty()) {
    std::ifstream in(a.file);
    if (!in) return fail(8, "cannot read file '" + a.file + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    src = buf.str();
    return 0;
  }
  if (!a.expr.empty()) {
    src = a.expr;
    return 0;
  }
  return fail(2, "provide a program with --expr or --file");
}

int compile_args(const Args& a, Compiled& c) {
  std::string src;
  if (int rc = load_source(a, src)) return rc;
  Shape arg;
  try {
    arg = parse_shape(a.shape);
  } catch (const ShapeParseError& e) {
    return fail(2, "bad shape: " + std::string(e.what()));
  }
  try {
    c = compile(src, arg);
  } catch (const LangError& e) {
    return fail(2, e.what());
  }
  return 0;
}

// Parses --point as flattened comma-separated reals conforming to `dom`.
int parse_point(const std::string& text, const Shape& dom, Value& out) {
  std::vector<double> coords;
  std::size_t at = 0;
  while (at <= text.size()) {
    std::size_t end = text.find(',', at);
    if (end == std::string::npos) end = text.size();
    std::string item = text.substr(at, end - at);
    // trim surrounding blanks
    while (!item.empty() && item.front() == ' ') item.erase(item.begin());
    while (!item.empty() && item.back() == ' ') item.pop_back();
    if (!item.empty()) {
      double v = 0;
      auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc() || p != item.data() + item.size())
        return fail(3, "point coordinate '" + item + "' is not a number");
      coords.push_back(v);
    }
    at = end + 1;
  }
  if (coords.size() != dom.dim())
    return fail(3, "point has " + std::to_string(coords.size()) +
                       " coordinates but shape " + show_shape(dom) + " has " +
                       std::to_string(dom.dim()));
  out = unflatten(dom, coords);
  return 0;
}

std::string show_coords(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += show_number(v[i]);
  }
  return out;
}

// Routes data to stdout or --out.
int write_data(const Args& a, const std::string& data) {
  if (a.out.empty()) {
    std::cout << data;
    return 0;
  }
  std::ofstream o(a.out);
  if (!o) return fail(8, "cannot write '" + a.out + "'");
  o << data;
  o.flush();
  if (!o) return fail(8, "short write to '" + a.out + "'");
  return 0;
}

int cmd_show(const Args& a) {
  Compiled c;
  if (int rc = compile_args(a, c)) return rc;
  return write_data(a, show_cat(c.term) + "\n");
}

int cmd_eval(const Args& a) {
  Compiled c;
  if (int rc = compile_args(a, c)) return rc;
  Value x;
  if (int rc = parse_point(a.point, c.dom, x)) return rc;
  return write_data(a, show_coords(flatten(eval_plain(c, x))) + "\n");
}

int cmd_jacobian(const Args& a) {
  Compiled c;
  if (int rc = compile_args(a, c)) return rc;
  Value x;
  if (int rc = parse_point(a.point, c.dom, x)) return rc;
  JacMode mode;
  if (a.mode.empty() || a.mode == "forward")
    mode = JacMode::Forward;
  else if (a.mode == "reverse-cont")
    mode = JacMode::ReverseCont;
  else if (a.mode == "reverse-dual")
    mode = JacMode::ReverseDual;
  else if (a.mode == "matrix")
    mode = JacMode::Matrix;
  else
    return fail(4, "invalid mode '" + a.mode +
                       "' (expected forward, reverse-cont, reverse-dual, or "
                       "matrix)");
  return write_data(a, jacobian(c, x, mode).to_text());
}

int cmd_gradient(const Args& a) {
  Compiled c;
  if (int rc = compile_args(a, c)) return rc;
  if (!(c.cod == Shape::scalar()))
    return fail(5, "gradient needs a scalar result, got " + show_shape(c.cod));
  Value x;
  if (int rc = parse_point(a.point, c.dom, x)) return rc;
  return write_data(a, show_coords(flatten(gradient(c, x))) + "\n");
}

int cmd_check(const Args& a) {
  Compiled c;
  if (int rc = compile_args(a, c)) return rc;
  if (a.h <= 0) return fail(2, "--h must be positive");
  CheckReport r = check(c, a.iters, a.h, a.seed);
  std::ostringstream o;
  o << "trials: " << r.trials << "\n";
  o << "max relative error: " << show_number(r.worst) << "\n";
  if (!r.worst_mode.empty()) {
    o << "worst mode: " << r.worst_mode << "\n";
    o << "worst point: " << show_coords(r.worst_point) << "\n";
  }
  bool ok = r.pass(a.tol);
  o << (ok ? "result: PASS\n" : "result: FAIL\n");
  if (int rc = write_data(a, o.str())) return rc;
  return ok ? 0 : 6;
}

int cmd_descend(const Args& a) {
  Compiled c;
  if (int rc = compile_args(a, c)) return rc;
  if (!(c.cod == Shape::scalar()))
    return fail(5, "descent needs a scalar objective, got " +
                       show_shape(c.cod));
  Value x;
  if (int rc = parse_point(a.point, c.dom, x)) return rc;
  DescendReport r = descend(c, x, a.eta, a.iters, a.tol);
  std::ostringstream o;
  for (std::size_t i = 0; i < r.objectives.size(); ++i)
    o << "iter " << (i + 1) << ": " << show_number(r.objectives[i]) << "\n";
  if (r.diverged)
    o << "diverged after " << r.steps << " steps\n";
  else if (r.converged)
    o << "converged in " << r.steps << " steps\n";
  else
    o << "iteration cap reached after " << r.steps << " steps\n";
  o << "gradient norm: " << show_number(r.grad_norm) << "\n";
  o << "x: " << show_coords(flatten(r.x)) << "\n";
  if (int rc = write_data(a, o.str())) return rc;
  return r.diverged ? 7 : 0;
}

int cmd_chain_order(const Args& a) {
  std::vector<std::size_t> dims;
  std::string item;
  for (char ch : a.dims + " ") {
    if (ch == ' ' || ch == ',' || ch == '\t') {
      if (!item.empty()) {
        std::size_t v = 0;
        auto [p, ec] =
            std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc() || p != item.data() + item.size() || v == 0)
          return fail(2, "bad dimension '" + item + "'");
        dims.push_back(v);
        item.clear();
      }
    } else {
      item.push_back(ch);
    }
  }
  if (dims.size() < 2)
    return fail(2, "--dims needs at least two sizes (one matrix)");
  ChainPlan plan = chain_order(dims);
  std::ostringstream o;
  o << "cost: " << plan.cost << "\n";
  o << "order: " << plan.order << "\n";
  return write_data(a, o.str());
}

int cmd_dot(const Args& a) {
  Compiled c;
  if (int rc = compile_args(a, c)) return rc;
  PortGraph g;
  if (a.mode.empty() || a.mode == "plain")
    g = to_graph(c.term);
  else if (a.mode == "forward")
    g = to_graph_d(c.term, DerivMode::Forward);
  else if (a.mode == "dual")
    g = to_graph_d(c.term, DerivMode::Dual);
  else
    return fail(4, "invalid mode '" + a.mode +
                       "' (expected plain, forward, or dual)");
  return write_data(a, emit_dot(g));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"categorical automatic differentiation toolkit"};
  // --h is the finite-difference step, so help stays long-form only
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  Args a;

  auto sub_of = [&](const char* name, const char* desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->set_help_flag("--help", "print help");
    return sub;
  };
  auto add_common = [&](CLI::App* sub, bool needs_shape) {
    auto* f = sub->add_option("--file,-f", a.file, "program file");
    auto* e = sub->add_option("--expr,-e", a.expr, "inline program text");
    f->excludes(e);
    auto* s = sub->add_option(
        "--shape", a.shape, "argument shape, e.g. R, (R,R), [3 x R], 1");
    if (needs_shape) s->required();
    sub->add_option("--out", a.out, "write data to this path instead of stdout");
    return sub;
  };
  auto add_point = [&](CLI::App* sub) {
    sub->add_option("--point", a.point, "flattened comma-separated coordinates")
        ->required();
  };

  CLI::App* show = add_common(
      sub_of("show", "print the normalized categorical form"),
      true);
  (void)show;

  CLI::App* eval = add_common(
      sub_of("eval", "evaluate at a point"), true);
  add_point(eval);

  CLI::App* jac = add_common(
      sub_of("jacobian", "dense Jacobian at a point"), true);
  add_point(jac);
  jac->add_option("--mode", a.mode,
                  "forward | reverse-cont | reverse-dual | matrix");

  CLI::App* grad = add_common(
      sub_of("gradient", "reverse-mode gradient at a point"),
      true);
  add_point(grad);

  CLI::App* chk = add_common(
      sub_of("check", "compare all derivative modes to central differences"),
      true);
  chk->add_option("--h", a.h, "finite-difference step (default 1e-6)");
  chk->add_option("--tol", a.tol, "relative tolerance (default 1e-5)");
  chk->add_option("--iters", a.iters, "number of random trial points");
  chk->add_option("--seed", a.seed, "PRNG seed (default 0)");

  CLI::App* dsc = add_common(
      sub_of("descend", "gradient descent on a scalar objective"),
      true);
  add_point(dsc);
  dsc->add_option("--eta", a.eta, "step size (default 0.1)");
  dsc->add_option("--iters", a.iters, "iteration cap (default 100)");
  dsc->add_option("--tol", a.tol, "stop when the gradient norm reaches this");

  CLI::App* chn = sub_of("chain_order", "optimal matrix-chain association");
  chn->add_option("--dims", a.dims,
                  "matrix sizes, space- or comma-separated, e.g. \"10 100 5\"")
      ->required();
  chn->add_option("--out", a.out, "write data to this path instead of stdout");

  CLI::App* dot = add_common(
      sub_of("dot", "emit the dataflow graph as DOT text"), true);
  dot->add_option("--mode", a.mode, "plain | forward | dual");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand("show")) return cmd_show(a);
    if (app.got_subcommand("eval")) return cmd_eval(a);
    if (app.got_subcommand("jacobian")) return cmd_jacobian(a);
    if (app.got_subcommand("gradient")) return cmd_gradient(a);
    if (app.got_subcommand("check")) return cmd_check(a);
    if (app.got_subcommand("descend")) return cmd_descend(a);
    if (app.got_subcommand("chain_order")) return cmd_chain_order(a);
    if (app.got_subcommand("dot")) return cmd_dot(a);
  } catch (const LangError& e) {
    return fail(2, e.what());
  } catch (const CatError& e) {
    return fail(1, e.what());
  }
  return fail(2, "no command");
}
