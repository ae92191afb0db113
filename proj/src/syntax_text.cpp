#include "pcfbounds/syntax_text.hpp"
#include "deep_stack.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace pcf {

namespace {

enum class Tok {
  End,
  Ident,
  Number,
  LParen,
  RParen,
  Lambda,
  Colon,
  Dot,
  Arrow,
  Equals,
  Slash,
  ErrMinus,
  ErrPlus,
  KwSucc,
  KwPred,
  KwIf,
  KwThen,
  KwElse,
  KwLet,
  KwIn,
  KwFix,
  KwCoin,
  KwNat,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int column = 1;
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::End: return "end of input";
    case Tok::Ident: return "identifier";
    case Tok::Number: return "numeral";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Lambda: return "'\\'";
    case Tok::Colon: return "':'";
    case Tok::Dot: return "'.'";
    case Tok::Arrow: return "'->'";
    case Tok::Equals: return "'='";
    case Tok::Slash: return "'/'";
    case Tok::ErrMinus: return "'err-'";
    case Tok::ErrPlus: return "'err+'";
    case Tok::KwSucc: return "'succ'";
    case Tok::KwPred: return "'pred'";
    case Tok::KwIf: return "'if'";
    case Tok::KwThen: return "'then'";
    case Tok::KwElse: return "'else'";
    case Tok::KwLet: return "'let'";
    case Tok::KwIn: return "'in'";
    case Tok::KwFix: return "'fix'";
    case Tok::KwCoin: return "'coin'";
    case Tok::KwNat: return "'nat'";
  }
  return "token";
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

Tok keyword(const std::string& word) {
  if (word == "succ") return Tok::KwSucc;
  if (word == "pred") return Tok::KwPred;
  if (word == "if") return Tok::KwIf;
  if (word == "then") return Tok::KwThen;
  if (word == "else") return Tok::KwElse;
  if (word == "let") return Tok::KwLet;
  if (word == "in") return Tok::KwIn;
  if (word == "fix") return Tok::KwFix;
  if (word == "coin") return Tok::KwCoin;
  if (word == "nat") return Tok::KwNat;
  return Tok::Ident;
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token tok;
    tok.line = line;
    tok.column = col;
    auto single = [&](Tok kind, std::size_t len) {
      tok.kind = kind;
      tok.text = std::string(src.substr(i, len));
      advance(len);
    };
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      single(Tok::Number, j - i);
    } else if (ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      std::string word(src.substr(i, j - i));
      if (word == "err" && j < src.size() && (src[j] == '-' || src[j] == '+')) {
        single(src[j] == '-' ? Tok::ErrMinus : Tok::ErrPlus, j - i + 1);
      } else {
        single(keyword(word), j - i);
      }
    } else if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
      single(Tok::Arrow, 2);
    } else if (src.substr(i, 2) == "\xce\xbb") {  // UTF-8 lambda
      single(Tok::Lambda, 2);
    } else {
      switch (c) {
        case '(': single(Tok::LParen, 1); break;
        case ')': single(Tok::RParen, 1); break;
        case '\\': single(Tok::Lambda, 1); break;
        case ':': single(Tok::Colon, 1); break;
        case '.': single(Tok::Dot, 1); break;
        case '=': single(Tok::Equals, 1); break;
        case '/': single(Tok::Slash, 1); break;
        default:
          throw ParseError(std::string("unexpected character '") + c + "'", line, col);
      }
    }
    out.push_back(std::move(tok));
  }
  Token end;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  Term whole_term() {
    Term t = expr();
    expect(Tok::End);
    return t;
  }

  Type whole_type() {
    Type t = type();
    expect(Tok::End);
    return t;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  bool at(Tok k) const { return peek().kind == k; }

  Token expect(Tok k) {
    if (!at(k)) {
      error(std::string("expected ") + describe(k) + ", found " + describe(peek().kind));
    }
    return toks_[pos_++];
  }

  [[noreturn]] void error(const std::string& msg) const { throw ParseError(msg, peek().line, peek().column); }

  Type type() {
    Type lhs = type_atom();
    if (at(Tok::Arrow)) {
      ++pos_;
      return Type::arrow(lhs, type());
    }
    return lhs;
  }

  Type type_atom() {
    if (at(Tok::KwNat)) {
      ++pos_;
      return Type::nat();
    }
    if (at(Tok::LParen)) {
      ++pos_;
      Type t = type();
      expect(Tok::RParen);
      return t;
    }
    error(std::string("expected a type, found ") + describe(peek().kind));
  }

  bool starts_low() const { return at(Tok::Lambda) || at(Tok::KwIf) || at(Tok::KwLet); }

  bool starts_unary() const {
    switch (peek().kind) {
      case Tok::Number:
      case Tok::Ident:
      case Tok::LParen:
      case Tok::ErrMinus:
      case Tok::ErrPlus:
      case Tok::KwCoin:
      case Tok::KwSucc:
      case Tok::KwPred:
      case Tok::KwFix:
        return true;
      default:
        return false;
    }
  }

  Term expr() {
    if (starts_low()) return low();
    Term head = unary();
    while (true) {
      if (starts_unary()) {
        head = Term::app(head, unary());
      } else if (starts_low()) {
        head = Term::app(head, low());
        break;
      } else {
        break;
      }
    }
    return head;
  }

  Term low() {
    if (at(Tok::Lambda)) {
      ++pos_;
      std::string name = expect(Tok::Ident).text;
      expect(Tok::Colon);
      Type ty = type();
      expect(Tok::Dot);
      scope_.push_back(name);
      Term body = expr();
      scope_.pop_back();
      return Term::abs_scope(name, ty, body);
    }
    if (at(Tok::KwIf)) {
      ++pos_;
      Term c = expr();
      expect(Tok::KwThen);
      Term a = expr();
      expect(Tok::KwElse);
      Term b = expr();
      return Term::if_(c, a, b);
    }
    expect(Tok::KwLet);
    std::string name = expect(Tok::Ident).text;
    expect(Tok::Equals);
    Term bound = expr();
    expect(Tok::KwIn);
    scope_.push_back(name);
    Term body = expr();
    scope_.pop_back();
    return Term::let_scope(name, bound, body);
  }

  Term unary() {
    switch (peek().kind) {
      case Tok::KwSucc:
        ++pos_;
        return Term::succ(unary());
      case Tok::KwPred:
        ++pos_;
        return Term::pred(unary());
      case Tok::KwFix:
        ++pos_;
        return Term::fix(unary());
      default:
        return atom();
    }
  }

  Term atom() {
    const Token& tok = peek();
    switch (tok.kind) {
      case Tok::Number: {
        ++pos_;
        try {
          return Term::num(std::stoull(tok.text));
        } catch (const std::out_of_range&) {
          throw ParseError("numeral too large", tok.line, tok.column);
        }
      }
      case Tok::Ident: {
        ++pos_;
        for (std::size_t k = scope_.size(); k-- > 0;) {
          if (scope_[k] == tok.text) return Term::bound(static_cast<std::uint32_t>(scope_.size() - 1 - k));
        }
        return Term::var(tok.text);
      }
      case Tok::ErrMinus:
        ++pos_;
        return Term::errdiv();
      case Tok::ErrPlus:
        ++pos_;
        return Term::errconv();
      case Tok::KwCoin: {
        ++pos_;
        expect(Tok::LParen);
        Token num = expect(Tok::Number);
        std::string text = num.text;
        if (at(Tok::Slash)) {
          ++pos_;
          text += "/" + expect(Tok::Number).text;
        }
        expect(Tok::RParen);
        Rational r;
        try {
          r = parse_rational(text);
        } catch (const RationalParseError& e) {
          throw ParseError(e.what(), num.line, num.column);
        }
        if (r > 1) throw ParseError("coin probability " + text + " exceeds 1", num.line, num.column);
        return Term::coin(r);
      }
      case Tok::LParen: {
        ++pos_;
        Term t = expr();
        expect(Tok::RParen);
        return t;
      }
      default:
        error(std::string("expected a term, found ") + describe(tok.kind));
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<std::string> scope_;
};

// ---------------------------------------------------------------- rendering

enum Level { kLow = 0, kApp = 1, kUnary = 2, kAtom = 3 };

bool valid_ident(const std::string& s) {
  if (s.empty() || !ident_start(s[0])) return false;
  for (char c : s) {
    if (!ident_char(c)) return false;
  }
  if (keyword(s) != Tok::Ident) return false;
  return s != "err";
}

class Renderer {
 public:
  Renderer(const Term& root, std::vector<std::string> outer) : scope_(std::move(outer)) {
    taken_ = free_vars(root);
    for (const auto& n : scope_) taken_.insert(n);
  }

  std::string run(const Term& t) {
    render(t, kLow);
    return std::move(out_);
  }

 private:
  void render(const Term& t, int level) {
    using K = Term::Kind;
    switch (t.kind()) {
      case K::FreeVar:
        out_ += t.name();
        return;
      case K::BoundVar:
        if (t.index() < scope_.size()) {
          out_ += scope_[scope_.size() - 1 - t.index()];
        } else {
          out_ += "#" + std::to_string(t.index());
        }
        return;
      case K::Num:
        out_ += std::to_string(t.numeral());
        return;
      case K::Coin:
        out_ += "coin(" + to_string(t.probability()) + ")";
        return;
      case K::ErrDiv:
        out_ += "err-";
        return;
      case K::ErrConv:
        out_ += "err+";
        return;
      case K::Succ:
      case K::Pred:
      case K::Fix: {
        const bool paren = level > kUnary;
        if (paren) out_ += '(';
        out_ += t.is(K::Succ) ? "succ " : t.is(K::Pred) ? "pred " : "fix ";
        render(t.operand(), kUnary);
        if (paren) out_ += ')';
        return;
      }
      case K::App: {
        const bool paren = level > kApp;
        if (paren) out_ += '(';
        render(t.fun(), kApp);
        out_ += ' ';
        render(t.arg(), kUnary);
        if (paren) out_ += ')';
        return;
      }
      case K::If: {
        const bool paren = level > kLow;
        if (paren) out_ += '(';
        out_ += "if ";
        render(t.cond(), kLow);
        out_ += " then ";
        render(t.then_branch(), kLow);
        out_ += " else ";
        render(t.else_branch(), kLow);
        if (paren) out_ += ')';
        return;
      }
      case K::Let: {
        const bool paren = level > kLow;
        if (paren) out_ += '(';
        // The bound term is outside the binder's scope, so the name is
        // reserved only once it has been rendered.
        const std::string name = fresh_name(valid_ident(t.hint()) ? t.hint() : std::string("v"), taken_);
        out_ += "let " + name + " = ";
        render(t.bound_term(), kLow);
        taken_.insert(name);
        out_ += " in ";
        scope_.push_back(name);
        render(t.scope(), kLow);
        unbind();
        if (paren) out_ += ')';
        return;
      }
      case K::Abs: {
        const bool paren = level > kLow;
        if (paren) out_ += '(';
        std::string name = bind(t.hint());
        out_ += "\\" + name + ": " + render_type(t.annotation()) + ". ";
        scope_.push_back(name);
        render(t.scope(), kLow);
        unbind();
        if (paren) out_ += ')';
        return;
      }
    }
  }

  std::string bind(const std::string& hint) {
    std::string name = fresh_name(valid_ident(hint) ? hint : std::string("v"), taken_);
    taken_.insert(name);
    return name;
  }

  void unbind() {
    taken_.erase(scope_.back());
    scope_.pop_back();
  }

  std::vector<std::string> scope_;
  std::set<std::string> taken_;
  std::string out_;
};

}  // namespace

Term parse_term(std::string_view text) {
  const auto bound = static_cast<std::uint32_t>(std::min<std::size_t>(text.size(), detail::kShallowDepth + 1));
  return detail::with_depth(bound, [&] { return Parser(text).whole_term(); });
}

Type parse_type(std::string_view text) { return Parser(text).whole_type(); }

std::string render(const Term& t) {
  return detail::with_depth(t.depth(), [&] { return Renderer(t, {}).run(t); });
}

std::string render_open(const Term& t, const std::vector<std::string>& outer) {
  return detail::with_depth(t.depth(), [&] { return Renderer(t, outer).run(t); });
}

}  // namespace pcf
