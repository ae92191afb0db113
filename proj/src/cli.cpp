#include "pcfbounds/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "pcfbounds/approx.hpp"
#include "pcfbounds/bounds.hpp"
#include "pcfbounds/operational.hpp"
#include "pcfbounds/poly.hpp"
#include "pcfbounds/preorder.hpp"
#include "pcfbounds/syntax_text.hpp"
#include "pcfbounds/typing.hpp"

namespace pcf {
namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_input(const std::string& path, std::istream& in) {
  std::ostringstream buf;
  if (path == "-") {
    buf << in.rdbuf();
    return buf.str();
  }
  std::ifstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot open '" + path + "'");
  buf << file.rdbuf();
  return buf.str();
}

bool contains_errconv(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::ErrConv:
      return true;
    case Term::Kind::FreeVar:
    case Term::Kind::BoundVar:
    case Term::Kind::Num:
    case Term::Kind::Coin:
    case Term::Kind::ErrDiv:
      return false;
    case Term::Kind::Succ:
    case Term::Kind::Pred:
    case Term::Kind::Fix:
      return contains_errconv(t.operand());
    case Term::Kind::If:
      return contains_errconv(t.cond()) || contains_errconv(t.then_branch()) || contains_errconv(t.else_branch());
    case Term::Kind::Let:
      return contains_errconv(t.bound_term()) || contains_errconv(t.scope());
    case Term::Kind::Abs:
      return contains_errconv(t.scope());
    case Term::Kind::App:
      return contains_errconv(t.fun()) || contains_errconv(t.arg());
  }
  return false;
}

IndexSet parse_index_list(const std::string& text) {
  IndexSet j;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    item = item.substr(b, e - b + 1);
    if (item.find_first_not_of("0123456789") != std::string::npos || item.size() > 19) {
      throw InputError("bad index '" + item + "' in J list");
    }
    j.insert(std::stoull(item));
  }
  return j;
}

std::string format_index_set(const IndexSet& j) {
  std::string s = "{";
  bool first = true;
  for (auto n : j) {
    if (!first) s += ", ";
    s += std::to_string(n);
    first = false;
  }
  return s + "}";
}

std::string describe(const Rational& r) {
  std::ostringstream os;
  os << to_string(r) << " (" << std::setprecision(10) << to_double(r) << ")";
  return os.str();
}

/// Parses and typechecks a program whose free variables are all taken at
/// `nat`; returns the ground context.
Context load_program(const std::string& path, std::istream& in, Term& term, Type& type) {
  term = parse_term(read_input(path, in));
  Context ctx = Context::ground_for(term);
  type = typecheck(ctx, term);
  return ctx;
}

class Cli {
 public:
  Cli(std::istream& in, std::ostream& out, std::ostream& err) : in_(in), out_(out), err_(err) {}

  int run(const std::vector<std::string>& args);

 private:
  int cmd_bound();
  int cmd_run();
  int cmd_order();
  int cmd_poly();
  int cmd_check();

  void warn_errconv(const Term& t, bool raw) {
    if (!raw && contains_errconv(t)) {
      err_ << "warning: the program contains err+; its err+ outcomes are counted as convergence\n";
    }
  }

  std::istream& in_;
  std::ostream& out_;
  std::ostream& err_;

  std::string file_;
  std::string file_b_;
  std::vector<std::string> dists_;
  std::uint32_t k_ = 0;
  std::string epsilon_;
  std::uint32_t k_max_ = 64;
  std::string j_;
  bool json_ = false;
  bool raw_ = false;
  bool no_timing_ = false;
  std::uint64_t samples_ = 1000;
  std::uint64_t seed_ = 0;
  std::uint64_t max_steps_ = 10000;
  std::string polarity_ = "lower";
};

int Cli::run(const std::vector<std::string>& args) {
  CLI::App app{"Certified bounds on convergence probabilities of probabilistic PCF programs", "pcfbounds"};
  app.require_subcommand(1);

  auto* bound = app.add_subcommand("bound", "certified interval for the probability of convergence");
  bound->add_option("file", file_, "program file, - for stdin")->required();
  bound->add_option("--dist", dists_, "distribution of a free variable, x={0: 1/2, err: 1/4}");
  bound->add_option("--k", k_, "unfolding depth (ignored with --epsilon)");
  bound->add_option("--epsilon", epsilon_, "refine until upper - lower <= epsilon");
  bound->add_option("--k-max", k_max_, "largest depth tried by refinement");
  bound->add_option("--J", j_, "restriction set, e.g. 0,1,2 (default: union of supports)");
  bound->add_flag("--json", json_, "JSON report");
  bound->add_flag("--raw", raw_, "err+ probability of the program itself, without wrapping");
  bound->add_flag("--no-timing", no_timing_, "report wall_ms as 0");

  auto* run = app.add_subcommand("run", "Monte Carlo estimate of the outcome distribution");
  run->add_option("file", file_, "closed program file, - for stdin")->required();
  run->add_option("--samples", samples_, "number of runs");
  run->add_option("--seed", seed_, "base seed");
  run->add_option("--max-steps", max_steps_, "reduction steps before a run counts as a timeout");
  run->add_flag("--json", json_, "JSON report");

  auto* order = app.add_subcommand("order", "decide A <= B in the syntactic preorder");
  order->add_option("a", file_, "left program")->required();
  order->add_option("b", file_b_, "right program")->required();

  auto* poly = app.add_subcommand("poly", "polynomial computed by the machine");
  poly->add_option("file", file_, "program file, - for stdin")->required();
  poly->add_option("--J", j_, "restriction set, e.g. 0,1");
  poly->add_option("--polarity", polarity_, "lower or upper")->check(CLI::IsMember({"lower", "upper"}));
  poly->add_option("--k", k_, "unfolding depth");
  poly->add_flag("--raw", raw_, "skip wrapping");
  poly->add_flag("--json", json_, "JSON output");

  auto* check = app.add_subcommand("check", "parse and typecheck only");
  check->add_option("file", file_, "program file, - for stdin")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out_ << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out_ << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err_ << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  try {
    if (bound->parsed()) return cmd_bound();
    if (run->parsed()) return cmd_run();
    if (order->parsed()) return cmd_order();
    if (poly->parsed()) return cmd_poly();
    return cmd_check();
  } catch (const ParseError& e) {
    err_ << "parse error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const TypeError& e) {
    err_ << "type error: " << e.what() << "\n";
    if (e.at_free_variable()) {
      err_ << "note: free variables are implicitly of type nat\n";
      return kExitNonGround;
    }
    return kExitInputError;
  } catch (const NotGround& e) {
    err_ << "error: " << e.what() << "\n";
    return kExitNonGround;
  } catch (const InputError& e) {
    err_ << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const RationalParseError& e) {
    err_ << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const SubDistParseError& e) {
    err_ << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    err_ << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err_ << "error: " << e.what() << "\n";
    return kExitResource;
  }
}

int Cli::cmd_bound() {
  BoundsQuery q;
  Type type = Type::nat();
  q.ctx = load_program(file_, in_, q.term, type);
  if (!type.is_nat()) throw TypeError("program has type " + render_type(type) + ", expected nat", "program");
  warn_errconv(q.term, raw_);

  const auto fv = free_vars(q.term);
  for (const auto& entry : dists_) {
    if (entry.empty()) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0) throw InputError("--dist expects name={...}, got '" + entry + "'");
    std::string name = entry.substr(0, eq);
    if (q.dists.count(name)) throw InputError("variable '" + name + "' has two distributions");
    SubDist u = parse_subdist(entry.substr(eq + 1));
    if (!fv.count(name)) {
      err_ << "warning: '" << name << "' does not occur free in the program; ignored\n";
      continue;
    }
    q.dists.emplace(std::move(name), std::move(u));
  }
  for (const auto& x : fv) {
    if (!q.dists.count(x)) throw InputError("no --dist given for free variable '" + x + "'");
  }
  if (!j_.empty()) q.j = parse_index_list(j_);
  q.raw = raw_;
  q.k_max = k_max_;

  BoundsReport report;
  if (!epsilon_.empty()) {
    q.epsilon = parse_rational(epsilon_);
    report = refine(q);
  } else {
    const auto start = std::chrono::steady_clock::now();
    q.k = k_;
    Interval i = bound_at_k(q);
    report.lower = i.lower;
    report.upper = i.upper;
    report.k_used = k_;
    report.j_used = resolve_j(q);
    report.converged = i.lower == i.upper;
    report.trace.push_back({k_, i.lower, i.upper});
    report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }

  if (json_) {
    out_ << report_to_json(report, !no_timing_).dump(2) << "\n";
    return kExitOk;
  }
  out_ << "lower      " << describe(report.lower) << "\n";
  out_ << "upper      " << describe(report.upper) << "\n";
  out_ << "width      " << describe(report.upper - report.lower) << "\n";
  out_ << "k          " << report.k_used << "\n";
  out_ << "J          " << format_index_set(report.j_used) << "\n";
  if (q.epsilon) out_ << "converged  " << (report.converged ? "yes" : "no") << "\n";
  if (report.trace.size() > 1) {
    out_ << "trace\n";
    for (const auto& t : report.trace) {
      out_ << "  k=" << t.k << "  [" << to_string(t.lower) << ", " << to_string(t.upper) << "]\n";
    }
  }
  if (!no_timing_) out_ << "wall_ms    " << std::llround(report.wall_ms) << "\n";
  return kExitOk;
}

int Cli::cmd_run() {
  Term t = Term::num(0);
  Type type = Type::nat();
  load_program(file_, in_, t, type);
  const auto fv = free_vars(t);
  if (!fv.empty()) {
    err_ << "error: run needs a closed program; free variable '" << *fv.begin() << "'\n";
    return kExitNonGround;
  }
  if (!type.is_nat()) throw TypeError("program has type " + render_type(type) + ", expected nat", "program");
  if (samples_ == 0) throw InputError("--samples must be positive");

  EmpiricalDistribution emp = estimate(t, samples_, seed_, max_steps_);
  if (json_) {
    nlohmann::ordered_json j;
    j["samples"] = emp.samples;
    j["seed"] = seed_;
    j["max_steps"] = max_steps_;
    j["outcomes"] = nlohmann::ordered_json::array();
    for (const auto& [o, count] : emp.counts) {
      j["outcomes"].push_back({{"outcome", to_string(o)},
                               {"count", count},
                               {"frequency", emp.frequency(o)},
                               {"stderr", emp.standard_error(o)}});
    }
    out_ << j.dump(2) << "\n";
    return kExitOk;
  }
  out_ << "samples " << emp.samples << "  seed " << seed_ << "  max_steps " << max_steps_ << "\n";
  for (const auto& [o, count] : emp.counts) {
    std::ostringstream line;
    line << std::left << std::setw(10) << to_string(o) << std::right << std::setw(10) << count << "  "
         << std::fixed << std::setprecision(6) << emp.frequency(o) << " +- " << emp.standard_error(o);
    out_ << line.str() << "\n";
  }
  return kExitOk;
}

int Cli::cmd_order() {
  Term a = parse_term(read_input(file_, in_));
  Term b = parse_term(read_input(file_b_, in_));
  auto names = free_vars(a);
  names.merge(free_vars(b));
  Context ctx;
  for (const auto& x : names) ctx.add(x, Type::nat());
  Type ta = typecheck(ctx, a);
  Type tb = typecheck(ctx, b);
  if (ta != tb) {
    err_ << "error: the programs have different types, " << render_type(ta) << " and " << render_type(tb) << "\n";
    return kExitInputError;
  }
  const bool leq = term_preorder_leq(a, b, ctx, ta);
  out_ << (leq ? "true" : "false") << "\n";
  return leq ? kExitOk : kExitFalse;
}

int Cli::cmd_poly() {
  Term t = Term::num(0);
  Type type = Type::nat();
  Context ctx = load_program(file_, in_, t, type);
  if (!type.is_nat()) throw TypeError("program has type " + render_type(type) + ", expected nat", "program");
  warn_errconv(t, raw_);
  const Polarity pol = polarity_ == "upper" ? Polarity::Upper : Polarity::Lower;
  const IndexSet j = j_.empty() ? IndexSet{} : parse_index_list(j_);
  Term observed = raw_ ? t : wrap_observe(t);
  Polynomial p = tree_to_poly(kreval_term(unfold(observed, k_, pol, ctx), ctx, j));
  if (json_) {
    out_ << poly_to_json(p).dump(2) << "\n";
  } else {
    out_ << render_poly(p) << "\n";
  }
  return kExitOk;
}

int Cli::cmd_check() {
  Term t = Term::num(0);
  Type type = Type::nat();
  Context ctx = load_program(file_, in_, t, type);
  out_ << render(t) << "\n";
  out_ << ": " << render_type(type) << "\n";
  for (const auto& [x, ty] : ctx.entries()) out_ << "free " << x << " : " << render_type(ty) << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  Cli cli(in, out, err);
  return cli.run(args);
}

}  // namespace pcf
