#include <cctype>
#include <charconv>
#include <cstdlib>
#include <optional>
#include <unordered_map>

#include "muz/syntax.hpp"

namespace muz {

namespace {

enum class Tok { Ident, Number, Keyword, Sym, ApfInfer, End };

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  SrcLoc loc;
};

const char* const kKeywords[] = {"let",    "node",    "proba",  "where", "rec",  "and",   "init",
                                 "last",   "present", "else",   "reset", "every", "sample", "observe",
                                 "factor", "infer",   "if",     "then",  "true", "false"};

bool is_keyword(std::string_view s) {
  for (const char* k : kKeywords)
    if (s == k) return true;
  return false;
}

const std::unordered_map<std::string_view, OpCode>& intrinsics() {
  static const std::unordered_map<std::string_view, OpCode> m = {
      {"gaussian", OpCode::Gaussian}, {"uniform", OpCode::Uniform}, {"bernoulli", OpCode::Bernoulli},
      {"pdf", OpCode::Pdf},           {"fst", OpCode::Fst},         {"snd", OpCode::Snd},
      {"exp", OpCode::Exp},           {"log", OpCode::Log},         {"sqrt", OpCode::Sqrt},
      {"abs", OpCode::Abs},           {"min", OpCode::Min},         {"max", OpCode::Max}};
  return m;
}

class Lexer {
 public:
  explicit Lexer(std::string_view s) : src_(s) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip();
      SrcLoc loc{line_, col_};
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "<eof>", 0.0, loc});
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t b = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          adv();
        std::string id(src_.substr(b, pos_ - b));
        if (id == "APF" && src_.substr(pos_, 6) == ".infer") {
          for (int i = 0; i < 6; ++i) adv();
          out.push_back({Tok::ApfInfer, "APF.infer", 0.0, loc});
          continue;
        }
        out.push_back({is_keyword(id) ? Tok::Keyword : Tok::Ident, id, 0.0, loc});
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t b = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) adv();
        if (pos_ < src_.size() && src_[pos_] == '.') {
          adv();
          while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) adv();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
          std::size_t save = pos_;
          int sl = line_, sc = col_;
          adv();
          if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) adv();
          if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) adv();
          } else {
            pos_ = save;
            line_ = sl;
            col_ = sc;
          }
        }
        std::string text(src_.substr(b, pos_ - b));
        double v = 0.0;
        auto r = std::from_chars(text.data(), text.data() + text.size(), v);
        if (r.ec != std::errc()) fail(ErrorKind::Syntax, "bad number literal '" + text + "'", loc);
        out.push_back({Tok::Number, text, v, loc});
        continue;
      }
      if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
        adv();
        adv();
        out.push_back({Tok::Sym, "->", 0.0, loc});
        continue;
      }
      if (std::string_view("(),;[]=+-*/<>").find(c) != std::string_view::npos) {
        adv();
        out.push_back({Tok::Sym, std::string(1, c), 0.0, loc});
        continue;
      }
      fail(ErrorKind::Syntax, std::string("unexpected character '") + c + "'", loc);
    }
  }

 private:
  void adv() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) adv();
      if (pos_ + 1 < src_.size() && src_[pos_] == '-' && src_[pos_ + 1] == '-') {
        while (pos_ < src_.size() && src_[pos_] != '\n') adv();
        continue;
      }
      return;
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

  Program program() {
    Program p;
    while (!at(Tok::End)) p.decls.push_back(decl());
    return p;
  }

  ExprPtr lone_expr() {
    ExprPtr e = expr();
    if (!at(Tok::End)) error("trailing input after expression");
    return e;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return t_[std::min(i_ + k, t_.size() - 1)]; }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_kw(std::string_view s) const { return peek().kind == Tok::Keyword && peek().text == s; }
  bool at_sym(std::string_view s) const { return peek().kind == Tok::Sym && peek().text == s; }
  Token next() { return t_[i_ < t_.size() - 1 ? i_++ : i_]; }

  [[noreturn]] void error(const std::string& msg) const {
    fail(ErrorKind::Syntax, msg + " (found '" + peek().text + "')", peek().loc);
  }

  void expect_sym(std::string_view s) {
    if (!at_sym(s)) error("expected '" + std::string(s) + "'");
    next();
  }
  void expect_kw(std::string_view s) {
    if (!at_kw(s)) error("expected '" + std::string(s) + "'");
    next();
  }
  std::string ident() {
    if (!at(Tok::Ident)) error("expected an identifier");
    return next().text;
  }

  Decl decl() {
    SrcLoc loc = peek().loc;
    bool had_let = false;
    if (at_kw("let")) {
      next();
      had_let = true;
    }
    if (at_kw("node") || at_kw("proba")) {
      DeclKind k = next().text == "node" ? DeclKind::Node : DeclKind::Proba;
      std::string name = ident();
      if (is_intrinsic(name)) error("'" + name + "' is a reserved intrinsic");
      Pattern param = pattern();
      expect_sym("=");
      ExprPtr body = expr();
      return Decl{k, name, std::move(param), std::move(body), loc};
    }
    if (!had_let) error("expected a declaration");
    std::string name = ident();
    expect_sym("=");
    ExprPtr body = expr();
    return Decl{DeclKind::Let, name, Pattern::unit(), std::move(body), loc};
  }

  Pattern pattern() {
    if (at(Tok::Ident)) return Pattern::var(next().text);
    expect_sym("(");
    if (at_sym(")")) {
      next();
      return Pattern::unit();
    }
    std::vector<Pattern> items{pattern()};
    while (at_sym(",")) {
      next();
      items.push_back(pattern());
    }
    expect_sym(")");
    Pattern p = std::move(items.back());
    for (std::size_t k = items.size() - 1; k-- > 0;) p = Pattern::pair(std::move(items[k]), std::move(p));
    return p;
  }

  template <class F>
  ExprPtr located(SrcLoc loc, F&& build) {
    ExprPtr e = build();
    const_cast<Expr&>(*e).loc = loc;
    return e;
  }

  ExprPtr expr() {
    SrcLoc loc = peek().loc;
    if (at_kw("present")) {
      next();
      ExprPtr c = expr();
      expect_sym("->");
      ExprPtr a = expr();
      expect_kw("else");
      ExprPtr b = expr();
      return located(loc, [&] { return mk::present(c, a, b); });
    }
    if (at_kw("reset")) {
      next();
      ExprPtr body = expr();
      expect_kw("every");
      ExprPtr c = expr();
      return located(loc, [&] { return mk::reset(body, c); });
    }
    if (at_kw("if")) {
      next();
      ExprPtr c = expr();
      expect_kw("then");
      ExprPtr a = expr();
      expect_kw("else");
      ExprPtr b = expr();
      return located(loc, [&] { return mk::op(OpCode::If, {c, a, b}); });
    }
    ExprPtr e = cmp();
    if (at_kw("where")) {
      next();
      expect_kw("rec");
      std::vector<Eq> eqs{equation()};
      while (at_kw("and")) {
        next();
        eqs.push_back(equation());
      }
      return located(loc, [&] { return mk::where(e, std::move(eqs)); });
    }
    return e;
  }

  Eq equation() {
    SrcLoc loc = peek().loc;
    if (at_kw("init")) {
      next();
      std::string x = ident();
      expect_sym("=");
      Eq q = mk::init(x, expr());
      q.loc = loc;
      return q;
    }
    if (at_sym("(")) {
      next();
      expect_sym(")");
      expect_sym("=");
      Eq q = mk::def("", expr());
      q.loc = loc;
      return q;
    }
    if (!at(Tok::Ident)) error("expected an equation");
    std::string x = ident();
    expect_sym("=");
    Eq q = mk::def(x, expr());
    q.loc = loc;
    return q;
  }

  ExprPtr cmp() {
    SrcLoc loc = peek().loc;
    ExprPtr a = add();
    if (at_sym("=") || at_sym("<") || at_sym(">")) {
      std::string s = next().text;
      OpCode op = s == "=" ? OpCode::Eq : s == "<" ? OpCode::Lt : OpCode::Gt;
      ExprPtr b = add();
      return located(loc, [&] { return mk::op(op, {a, b}); });
    }
    return a;
  }

  ExprPtr add() {
    SrcLoc loc = peek().loc;
    ExprPtr a = mul();
    while (at_sym("+") || at_sym("-")) {
      OpCode op = next().text == "+" ? OpCode::Add : OpCode::Sub;
      ExprPtr b = mul();
      a = located(loc, [&] { return mk::op(op, {a, b}); });
    }
    return a;
  }

  ExprPtr mul() {
    SrcLoc loc = peek().loc;
    ExprPtr a = unary();
    while (at_sym("*") || at_sym("/")) {
      OpCode op = next().text == "*" ? OpCode::Mul : OpCode::Div;
      ExprPtr b = unary();
      a = located(loc, [&] { return mk::op(op, {a, b}); });
    }
    return a;
  }

  ExprPtr unary() {
    SrcLoc loc = peek().loc;
    if (at_sym("-")) {
      next();
      if (at(Tok::Number)) {
        double v = next().number;
        return located(loc, [&] { return mk::real(-v); });
      }
      ExprPtr a = unary();
      return located(loc, [&] { return mk::op(OpCode::Neg, {a}); });
    }
    return atom();
  }

  std::vector<ExprPtr> call_args() {
    expect_sym("(");
    std::vector<ExprPtr> args;
    if (at_sym(")")) {
      next();
      return args;
    }
    args.push_back(expr());
    while (at_sym(",")) {
      next();
      args.push_back(expr());
    }
    expect_sym(")");
    return args;
  }

  static ExprPtr tuple(std::vector<ExprPtr> items) {
    if (items.empty()) return mk::unit();
    ExprPtr p = items.back();
    for (std::size_t k = items.size() - 1; k-- > 0;) p = mk::pair(items[k], p);
    return p;
  }

  ExprPtr one_arg(const std::string& what) {
    auto args = call_args();
    if (args.size() != 1) error(what + " takes one argument");
    return args[0];
  }

  ExprPtr atom() {
    SrcLoc loc = peek().loc;
    if (at(Tok::Number)) {
      double v = next().number;
      return located(loc, [&] { return mk::real(v); });
    }
    if (at_kw("true") || at_kw("false")) {
      bool b = next().text == "true";
      return located(loc, [&] { return mk::boolean(b); });
    }
    if (at_sym("(")) {
      next();
      if (at_sym(")")) {
        next();
        return located(loc, [] { return mk::unit(); });
      }
      std::vector<ExprPtr> items{expr()};
      while (at_sym(",")) {
        next();
        items.push_back(expr());
      }
      expect_sym(")");
      if (items.size() == 1) return items[0];
      return located(loc, [&] { return tuple(std::move(items)); });
    }
    if (at_sym("[")) {
      next();
      std::vector<ExprPtr> items{expr()};
      while (at_sym(";")) {
        next();
        items.push_back(expr());
      }
      expect_sym("]");
      return located(loc, [&] { return mk::op(OpCode::MkVec, std::move(items)); });
    }
    if (at_kw("last")) {
      next();
      std::string x = ident();
      return located(loc, [&] { return mk::last(x); });
    }
    if (at_kw("sample")) {
      next();
      ExprPtr a = one_arg("sample");
      return located(loc, [&] { return mk::sample(a); });
    }
    if (at_kw("factor")) {
      next();
      ExprPtr a = one_arg("factor");
      return located(loc, [&] { return mk::factor(a); });
    }
    if (at_kw("infer")) {
      next();
      ExprPtr a = one_arg("infer");
      return located(loc, [&] { return mk::infer(a); });
    }
    if (at_kw("observe")) {
      next();
      auto args = call_args();
      if (args.size() != 2) error("observe takes two arguments");
      ExprPtr pd = located(loc, [&] { return mk::op(OpCode::Pdf, {args[0], args[1]}); });
      return located(loc, [&] { return mk::factor(pd); });
    }
    if (at(Tok::ApfInfer)) {
      next();
      expect_sym("(");
      std::string model = ident();
      expect_sym(",");
      ExprPtr prior = expr();
      expect_sym(",");
      ExprPtr arg = expr();
      expect_sym(")");
      return located(loc, [&] { return mk::apf_infer(model, prior, arg); });
    }
    if (at(Tok::Ident)) {
      std::string name = next().text;
      auto it = intrinsics().find(name);
      if (it != intrinsics().end()) {
        auto args = call_args();
        int ar = op_arity(it->second);
        if (ar >= 0 && static_cast<int>(args.size()) != ar)
          fail(ErrorKind::Syntax, name + " expects " + std::to_string(ar) + " arguments", loc);
        OpCode op = it->second;
        return located(loc, [&] { return mk::op(op, std::move(args)); });
      }
      if (at_sym("(")) {
        auto args = call_args();
        return located(loc, [&] { return mk::app(name, tuple(std::move(args))); });
      }
      return located(loc, [&] { return mk::var(name); });
    }
    error("expected an expression");
  }

  std::vector<Token> t_;
  std::size_t i_ = 0;
};

}  // namespace

bool is_intrinsic(std::string_view name) { return intrinsics().count(name) > 0; }

Program parse(std::string_view src) {
  Parser p(Lexer(src).run());
  Program prog = p.program();
  if (prog.decls.empty()) fail(ErrorKind::Syntax, "empty program", SrcLoc{1, 1});
  return prog;
}

ExprPtr parse_expr(std::string_view src) {
  Parser p(Lexer(src).run());
  return p.lone_expr();
}

}  // namespace muz
