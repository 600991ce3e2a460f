#include "muz/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "muz/apf.hpp"
#include "muz/dists.hpp"
#include "muz/engine.hpp"
#include "muz/infer.hpp"
#include "muz/oracle.hpp"
#include "muz/passes.hpp"
#include "muz/syntax.hpp"

namespace muz {

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Degenerate:
    case ErrorKind::NonFinite: return kExitDegenerate;
    case ErrorKind::Io: return kExitIo;
    default: return kExitStatic;
  }
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  out << text;
  if (!out) fail(ErrorKind::Io, "write to '" + path + "' failed");
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) {
    auto b = cur.find_first_not_of(" \t\r");
    auto e = cur.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

Value parse_cell(const std::string& s) {
  if (s == "true") return Value(true);
  if (s == "false") return Value(false);
  char* end = nullptr;
  double d = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) fail(ErrorKind::Io, "bad observation value '" + s + "'");
  return Value(d);
}

void collect_params(const Pattern& p, std::vector<std::string>& out) {
  if (p.kind == Pattern::Kind::Name) out.push_back(p.name);
  for (const auto& q : p.items) collect_params(q, out);
}

ExprPtr pattern_expr(const Pattern& p) {
  switch (p.kind) {
    case Pattern::Kind::Name: return mk::var(p.name);
    case Pattern::Kind::Unit: return mk::unit();
    case Pattern::Kind::Pair: return mk::pair(pattern_expr(p.items[0]), pattern_expr(p.items[1]));
  }
  return mk::unit();
}

const Decl& node_decl(const Program& p, const std::string& name) {
  const Decl* d = p.find(name);
  if (!d || d->kind == DeclKind::Let) fail(ErrorKind::UnboundVariable, "no node named '" + name + "'");
  return *d;
}

// Input streams of a node: from the observation table, or synthesized
// standard normal reals when no table is given.
Streams input_streams(const Decl& d, const ObsTable* obs, int T, std::uint64_t seed) {
  std::vector<std::string> names;
  collect_params(d.param, names);
  Streams h;
  for (std::size_t k = 0; k < names.size(); ++k) {
    auto& s = h[names[k]];
    for (int t = 0; t < T; ++t) {
      if (obs) {
        s.push_back(obs_input(*obs, Pattern::var(names[k]), static_cast<std::size_t>(t)));
      } else {
        double u = seeds_for(seed ^ 0x6f6273ULL, k, static_cast<std::uint64_t>(t), 0);
        s.push_back(Value(normal_quantile(u)));
      }
    }
  }
  return h;
}

struct Opts {
  std::string file;
  std::string file2;
  std::string node;
  std::string obs;
  std::string out;
  std::string perm;
  std::string algo = "pf";
  std::string resampling = "multinomial";
  int steps = -1;
  int trials = 100;
  std::size_t particles = 1000;
  std::size_t cloud = 100;
  std::uint64_t seed = 0;
  double ess_threshold = 0.5;
};

InferOptions infer_options(const Opts& o) {
  InferOptions c;
  c.particles = o.particles;
  c.cloud = o.cloud;
  c.seed = o.seed;
  c.ess_threshold = o.ess_threshold;
  c.resampling = o.resampling == "systematic" ? Resampling::Systematic : Resampling::Multinomial;
  return c;
}

class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {}
  std::ostream& os() { return buf_; }
  void flush() {
    if (path_.empty())
      fallback_ << buf_.str();
    else
      write_file(path_, buf_.str());
  }

 private:
  std::string path_;
  std::ostream& fallback_;
  std::ostringstream buf_;
};

int steps_of(const Opts& o, const ObsTable* obs, int fallback) {
  if (o.steps >= 0) return o.steps;
  if (obs) return static_cast<int>(obs->rows.size());
  return fallback;
}

int cmd_check(const Opts& o, std::ostream& out) {
  Program p = load_program(read_file(o.file));
  out << phi_json(apf_analyze(p), 2) << "\n";
  return kExitOk;
}

int cmd_dump_ast(const Opts& o, std::ostream& out) {
  out << dump_ast(parse(read_file(o.file)), 2) << "\n";
  return kExitOk;
}

int cmd_run(const Opts& o, std::ostream& out) {
  Program p = load_program(read_file(o.file));
  Machine m(p);
  const Decl& d = node_decl(p, o.node);
  if (d.kind != DeclKind::Node) fail(ErrorKind::Kind, "'" + o.node + "' is not a det node");
  ObsTable obs;
  if (!o.obs.empty()) obs = read_obs_csv(read_file(o.obs));
  const int T = steps_of(o, o.obs.empty() ? nullptr : &obs, 1);
  InferOptions cfg = infer_options(o);
  EvalOptions eo;
  eo.infer = &cfg;
  eo.eqs = EqMode::Auto;
  Runner r(m, m.func_index(o.node), eo);
  Sink sink(o.out, out);
  std::vector<std::vector<double>> rows;
  for (int t = 0; t < T; ++t) {
    Value in = o.obs.empty() ? obs_input(ObsTable{}, d.param, 0) : obs_input(obs, d.param, static_cast<std::size_t>(t));
    std::vector<double> xs;
    flatten_output(r.step(in), xs);
    rows.push_back(std::move(xs));
  }
  auto& os = sink.os();
  os << "step";
  const std::size_t dim = rows.empty() ? 0 : rows.front().size();
  for (std::size_t k = 0; k < dim; ++k) os << ",value_" << k;
  os << "\n";
  for (std::size_t t = 0; t < rows.size(); ++t) {
    os << t;
    for (double x : rows[t]) os << "," << fmt_real(x);
    os << "\n";
  }
  sink.flush();
  return kExitOk;
}

int cmd_infer(const Opts& o, std::ostream& out) {
  if (o.particles == 0) fail(ErrorKind::Config, "--particles must be positive");
  if (o.algo == "apf" && o.cloud == 0) fail(ErrorKind::Config, "--cloud must be positive");
  if (o.algo != "pf" && o.algo != "apf") fail(ErrorKind::Config, "unknown --algo '" + o.algo + "'");
  Program src = load_program(read_file(o.file));
  const Decl& d = node_decl(src, o.node);
  if (d.kind != DeclKind::Proba) fail(ErrorKind::Kind, "'" + o.node + "' is not a proba node");
  ObsTable obs;
  const bool has_obs = !o.obs.empty();
  if (has_obs) obs = read_obs_csv(read_file(o.obs));
  const int T = steps_of(o, has_obs ? &obs : nullptr, 0);
  const InferOptions cfg = infer_options(o);

  std::optional<ApfOutput> compiled;
  std::optional<Machine> m;
  if (o.algo == "apf") {
    compiled = apf_compile(src);
    m.emplace(compiled->program);
  } else {
    m.emplace(src);
  }

  std::vector<Dist> posts;
  std::vector<double> evidence;
  if (o.algo == "pf") {
    PfState st = pf_init(*m, m->func_index(o.node), cfg);
    for (int t = 0; t < T; ++t) {
      posts.push_back(pf_step(st, obs_input(obs, d.param, static_cast<std::size_t>(t))));
      evidence.push_back(st.log_evidence);
    }
  } else {
    const Value* prior = m->global(prior_name(o.node));
    ApfState st = apf_init(*m, m->func_index(model_name(o.node)), *prior, cfg);
    for (int t = 0; t < T; ++t) {
      posts.push_back(apf_step(st, obs_input(obs, d.param, static_cast<std::size_t>(t))));
      evidence.push_back(st.log_evidence);
    }
  }

  Sink sink(o.out, out);
  auto& os = sink.os();
  std::vector<Summary> sums;
  for (const auto& p : posts) sums.push_back(summarize(std::get<Empirical>(p.rep)));
  const std::size_t dim = sums.empty() ? 0 : sums.front().mean.size();
  os << "step";
  for (std::size_t k = 0; k < dim; ++k) os << ",mean_" << k << ",std_" << k;
  os << ",ess,log_evidence\n";
  for (std::size_t t = 0; t < sums.size(); ++t) {
    os << t;
    for (std::size_t k = 0; k < dim; ++k)
      os << "," << fmt_real(sums[t].mean[k]) << "," << fmt_real(std::sqrt(sums[t].variance[k]));
    os << "," << fmt_real(sums[t].ess) << "," << fmt_real(evidence[t]) << "\n";
  }
  sink.flush();
  return kExitOk;
}

std::string sidecar_path(const std::string& out) {
  std::string base = out;
  if (base.size() > 4 && base.compare(base.size() - 4, 4, ".muz") == 0) base.resize(base.size() - 4);
  return base + ".perm.json";
}

int cmd_compile_apf(const Opts& o, std::ostream& out) {
  Program p = load_program(read_file(o.file));
  ApfOutput c = apf_compile(p);
  if (o.out.empty()) {
    out << print(c.program);
    return kExitOk;
  }
  write_file(o.out, print(c.program));
  write_file(sidecar_path(o.out), perm_json(c.perms) + "\n");
  return kExitOk;
}

int report(const Report& r, const Opts& o, std::ostream& out) {
  Sink sink(o.out, out);
  sink.os() << r.to_json(2) << "\n";
  sink.flush();
  return r.pass ? kExitOk : kExitStatic;
}

int cmd_equiv(const Opts& o, std::ostream& out) {
  Program a = load_program(read_file(o.file));
  Program b = load_program(read_file(o.file2));
  const Decl& d = node_decl(a, o.node);
  ObsTable obs;
  if (!o.obs.empty()) obs = read_obs_csv(read_file(o.obs));
  const int T = steps_of(o, nullptr, 50);
  Streams h = input_streams(d, o.obs.empty() ? nullptr : &obs, T, o.seed);
  std::vector<std::string> inputs;
  collect_params(d.param, inputs);
  ExprPtr arg = pattern_expr(d.param);
  Subject left = make_subject(a, mk::app(o.node, arg), inputs);
  if (o.perm.empty()) {
    node_decl(b, o.node);
    Subject right = make_subject(b, mk::app(o.node, arg), inputs);
    return report(equiv_check(left, right, {}, h, T, o.trials, o.seed + 1), o, out);
  }
  const auto perms = perms_from_json(read_file(o.perm));
  const SeedPerm* sp = nullptr;
  for (const auto& x : perms)
    if (x.node == o.node) sp = &x;
  if (!sp) fail(ErrorKind::Config, "no permutation for '" + o.node + "' in '" + o.perm + "'");
  Subject right = make_subject(b, definition_expansion(b, o.node, sp->prior_width > 0, arg), inputs);
  return report(equiv_check(left, right, sp->perm, h, T, o.trials, o.seed + 1), o, out);
}

int cmd_oracle(const Opts& o, std::ostream& out) {
  Program p = load_program(read_file(o.file));
  const Decl& d = node_decl(p, o.node);
  ObsTable obs;
  if (!o.obs.empty()) obs = read_obs_csv(read_file(o.obs));
  const int T = steps_of(o, nullptr, 20);
  Streams h = input_streams(d, o.obs.empty() ? nullptr : &obs, T, o.seed);
  std::vector<std::string> inputs;
  collect_params(d.param, inputs);
  Subject s = make_subject(p, mk::app(o.node, pattern_expr(d.param)), inputs);
  return report(coit_rel_agree(s, h, T, o.trials, o.seed + 1), o, out);
}

}  // namespace

ObsTable read_obs_csv(const std::string& text) {
  ObsTable t;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto cells = split(line, ',');
    if (header) {
      if (cells.empty() || cells[0] != "step") fail(ErrorKind::Io, "observation header must start with 'step'");
      t.columns.assign(cells.begin() + 1, cells.end());
      header = false;
      continue;
    }
    if (cells.size() != t.columns.size() + 1)
      fail(ErrorKind::Io, "observation row " + std::to_string(t.rows.size()) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(t.columns.size() + 1));
    t.rows.emplace_back(cells.begin() + 1, cells.end());
  }
  if (header) fail(ErrorKind::Io, "empty observation file");
  return t;
}

Value obs_input(const ObsTable& obs, const Pattern& param, std::size_t t) {
  switch (param.kind) {
    case Pattern::Kind::Unit: return Value::unit();
    case Pattern::Kind::Pair:
      return Value::pair(obs_input(obs, param.items[0], t), obs_input(obs, param.items[1], t));
    case Pattern::Kind::Name: break;
  }
  if (t >= obs.rows.size())
    fail(ErrorKind::Io, "no observation row " + std::to_string(t) + " for '" + param.name + "'");
  const auto& row = obs.rows[t];
  for (std::size_t c = 0; c < obs.columns.size(); ++c)
    if (obs.columns[c] == param.name) return parse_cell(row[c]);
  std::vector<double> xs;
  for (std::size_t k = 0;; ++k) {
    const std::string col = param.name + "_" + std::to_string(k);
    std::size_t c = 0;
    while (c < obs.columns.size() && obs.columns[c] != col) ++c;
    if (c == obs.columns.size()) break;
    xs.push_back(parse_cell(row[c]).as_real());
  }
  if (xs.empty()) fail(ErrorKind::Io, "no observation column for input '" + param.name + "'");
  return Value::vec(std::move(xs));
}

void flatten_output(const Value& v, std::vector<double>& out) {
  if (v.is_pair()) {
    flatten_output(v.fst(), out);
    flatten_output(v.snd(), out);
  } else if (v.is_dist()) {
    auto m = dist_mean(v.as_dist());
    out.insert(out.end(), m.begin(), m.end());
  } else {
    flatten_reals(v, out);
  }
}

std::string fmt_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"muz: probabilistic synchronous dataflow toolkit"};
  app.require_subcommand(1);
  Opts o;

  auto node_opt = [&](CLI::App* c) { c->add_option("--node", o.node, "Entry node")->required(); };
  auto common = [&](CLI::App* c) {
    c->add_option("--steps", o.steps, "Number of instants")->check(CLI::NonNegativeNumber);
    c->add_option("--seed", o.seed, "Master seed");
    c->add_option("--obs", o.obs, "Observation CSV");
    c->add_option("--out", o.out, "Output path (stdout when absent)");
  };
  auto infer_flags = [&](CLI::App* c) {
    c->add_option("--particles", o.particles, "Particle count");
    c->add_option("--cloud", o.cloud, "Cloud size per particle (apf)");
    c->add_option("--ess-threshold", o.ess_threshold, "Resample when ESS/N falls below this");
    c->add_option("--resampling", o.resampling, "multinomial or systematic")
        ->check(CLI::IsMember({"multinomial", "systematic"}));
  };

  auto* check = app.add_subcommand("check", "Parse, check kinds and print constant parameters");
  check->add_option("file", o.file)->required();
  auto* dump = app.add_subcommand("dump-ast", "Print the syntax tree as JSON");
  dump->add_option("file", o.file)->required();
  auto* run = app.add_subcommand("run", "Run a det node");
  run->add_option("file", o.file)->required();
  node_opt(run);
  common(run);
  infer_flags(run);
  auto* inf = app.add_subcommand("infer", "Run inference on a proba node and emit posterior summaries");
  inf->add_option("file", o.file)->required();
  node_opt(inf);
  common(inf);
  infer_flags(inf);
  inf->add_option("--algo", o.algo, "pf or apf")->check(CLI::IsMember({"pf", "apf"}));
  auto* comp = app.add_subcommand("compile-apf", "Compile constant parameters out of proba nodes");
  comp->add_option("file", o.file)->required();
  comp->add_option("--out", o.out, "Compiled program; the permutation goes to <out>.perm.json");
  auto* eq = app.add_subcommand("equiv", "Differential test of a node across two programs");
  eq->add_option("file", o.file)->required();
  eq->add_option("file2", o.file2)->required();
  node_opt(eq);
  common(eq);
  eq->add_option("--perm", o.perm, "Seed permutation sidecar; compares against the definition expansion");
  eq->add_option("--trials", o.trials, "Number of random seed prefixes")->check(CLI::PositiveNumber);
  auto* orc = app.add_subcommand("oracle", "Compare the engine against the relational evaluator");
  orc->add_option("file", o.file)->required();
  node_opt(orc);
  common(orc);
  orc->add_option("--trials", o.trials, "Number of random seed prefixes")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitStatic;
  }

  try {
    if (*check) return cmd_check(o, out);
    if (*dump) return cmd_dump_ast(o, out);
    if (*run) return cmd_run(o, out);
    if (*inf) return cmd_infer(o, out);
    if (*comp) return cmd_compile_apf(o, out);
    if (*eq) return cmd_equiv(o, out);
    if (*orc) return cmd_oracle(o, out);
  } catch (const Error& e) {
    err << o.file << ": " << e.what() << "\n";
    return exit_code_for(e.kind());
  }
  return kExitStatic;
}

}  // namespace muz
