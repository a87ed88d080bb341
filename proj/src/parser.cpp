// Lexer and recursive-descent parser for the .picl surface syntax.
#include "graduator/ast.hpp"

#include <cctype>
#include <set>
#include <stdexcept>
#include <utility>

namespace graduator {

namespace {

enum class Tok : std::uint8_t {
  Ident,
  LBrace,
  RBrace,
  LParen,
  RParen,
  Semi,
  Comma,
  Dot,
  Assign,
  EqEq,
  NotEq,
  AndAnd,
  OrOr,
  At,
  Question,
  End,
};

struct Token
{
  Tok kind = Tok::End;
  std::string text;
  SourceLoc loc;
};

struct SyntaxError
{
  Diagnostic diag;
};

const std::set<std::string, std::less<>> kKeywords = {
  "field", "proc", "main", "var", "skip", "if", "else", "while", "return", "null", "new",
};

class Lexer
{
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run()
  {
    std::vector<Token> out;
    while (true) {
      skip_space();
      SourceLoc loc{line_, col_};
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "", loc});
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
          advance();
        }
        out.push_back({Tok::Ident, std::string(src_.substr(start, pos_ - start)), loc});
        continue;
      }
      auto two = [&](char a, char b) {
        return c == a && pos_ + 1 < src_.size() && src_[pos_ + 1] == b;
      };
      if (two(':', '=')) {
        out.push_back(punct(Tok::Assign, 2, loc));
      } else if (two('=', '=')) {
        out.push_back(punct(Tok::EqEq, 2, loc));
      } else if (two('!', '=')) {
        out.push_back(punct(Tok::NotEq, 2, loc));
      } else if (two('&', '&')) {
        out.push_back(punct(Tok::AndAnd, 2, loc));
      } else if (two('|', '|')) {
        out.push_back(punct(Tok::OrOr, 2, loc));
      } else {
        switch (c) {
          case '{': out.push_back(punct(Tok::LBrace, 1, loc)); break;
          case '}': out.push_back(punct(Tok::RBrace, 1, loc)); break;
          case '(': out.push_back(punct(Tok::LParen, 1, loc)); break;
          case ')': out.push_back(punct(Tok::RParen, 1, loc)); break;
          case ';': out.push_back(punct(Tok::Semi, 1, loc)); break;
          case ',': out.push_back(punct(Tok::Comma, 1, loc)); break;
          case '.': out.push_back(punct(Tok::Dot, 1, loc)); break;
          case '@': out.push_back(punct(Tok::At, 1, loc)); break;
          case '?': out.push_back(punct(Tok::Question, 1, loc)); break;
          default:
            throw SyntaxError{{Severity::Error, loc, std::string("unexpected character '") + c + "'"}};
        }
      }
    }
  }

private:
  Token punct(Tok k, std::size_t n, SourceLoc loc)
  {
    std::string text(src_.substr(pos_, n));
    for (std::size_t i = 0; i < n; ++i) advance();
    return {k, std::move(text), loc};
  }

  void advance()
  {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space()
  {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        return;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser
{
public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program program(std::vector<Diagnostic> & diags)
  {
    Program p;
    std::set<std::string, std::less<>> field_names;
    std::set<std::string, std::less<>> proc_names;
    while (true) {
      if (is_keyword("field")) {
        SourceLoc loc = next().loc;
        Token name = ident("field name");
        expect(Tok::Semi, "';'");
        if (!field_names.insert(name.text).second) {
          diags.push_back({Severity::Error, loc, "duplicate field '" + name.text + "'"});
        }
        p.fields.push_back(name.text);
      } else if (is_keyword("proc")) {
        Procedure proc = procedure();
        if (!proc_names.insert(proc.name).second) {
          diags.push_back({Severity::Error, proc.loc, "duplicate procedure '" + proc.name + "'"});
        }
        p.procedures.push_back(std::move(proc));
      } else {
        break;
      }
    }
    if (!is_keyword("main")) fail(peek().loc, "expected 'field', 'proc' or 'main'");
    p.main_loc = next().loc;
    p.main = block();
    if (peek().kind != Tok::End) fail(peek().loc, "unexpected input after main block");

    if (p.main.empty() || p.main.back().kind != Stmt::Kind::Return) {
      diags.push_back({Severity::Error, p.main_loc, "main must end with a return statement"});
    }
    for (std::size_t i = 0; i < p.main.size(); ++i) {
      bool final_stmt = i + 1 == p.main.size();
      check_main_returns(p.main[i], final_stmt, diags);
    }
    return p;
  }

private:
  static void check_main_returns(const Stmt & s, bool allowed, std::vector<Diagnostic> & diags)
  {
    if (s.kind == Stmt::Kind::Return && !allowed) {
      diags.push_back({Severity::Error, s.loc, "return is only allowed as the final statement of main"});
    }
    for (const Stmt & c : s.then_block) check_main_returns(c, false, diags);
    for (const Stmt & c : s.else_block) check_main_returns(c, false, diags);
  }

  Procedure procedure()
  {
    Procedure proc;
    proc.loc = next().loc;
    proc.name = ident("procedure name").text;
    proc.return_ann = annotation();
    expect(Tok::LParen, "'('");
    proc.param = ident("parameter name").text;
    proc.param_ann = annotation();
    expect(Tok::RParen, "')'");
    proc.body = block();
    return proc;
  }

  Ann annotation()
  {
    if (peek().kind != Tok::At) return Ann::Missing;
    next();
    if (peek().kind == Tok::Question) {
      next();
      return Ann::Missing;
    }
    const Token & t = peek();
    if (t.kind == Tok::Ident && t.text == "NonNull") {
      next();
      return Ann::NonNull;
    }
    if (t.kind == Tok::Ident && t.text == "Nullable") {
      next();
      return Ann::Nullable;
    }
    fail(t.loc, "unknown annotation '" + t.text + "' (expected NonNull, Nullable or ?)");
  }

  Block block()
  {
    expect(Tok::LBrace, "'{'");
    Block out;
    while (peek().kind != Tok::RBrace) {
      if (peek().kind == Tok::End) fail(peek().loc, "unterminated block");
      out.push_back(statement());
    }
    next();
    return out;
  }

  Stmt statement()
  {
    Stmt s;
    const Token & t = peek();
    s.loc = t.loc;
    if (t.kind != Tok::Ident) fail(t.loc, "expected a statement");
    if (t.text == "skip") {
      next();
      expect(Tok::Semi, "';'");
      s.kind = Stmt::Kind::Skip;
    } else if (t.text == "var") {
      next();
      s.kind = Stmt::Kind::Decl;
      s.target = ident("variable name").text;
      expect(Tok::Semi, "';'");
    } else if (t.text == "if") {
      next();
      s.kind = Stmt::Kind::If;
      s.cond = condition();
      s.then_block = block();
      if (!is_keyword("else")) fail(peek().loc, "expected 'else' (if statements require both branches)");
      next();
      s.else_block = block();
    } else if (t.text == "while") {
      next();
      s.kind = Stmt::Kind::While;
      s.cond = condition();
      s.then_block = block();
    } else if (t.text == "return") {
      next();
      s.kind = Stmt::Kind::Return;
      s.target = ident("returned variable").text;
      expect(Tok::Semi, "';'");
    } else {
      Token lhs = ident("variable name");
      if (peek().kind == Tok::Dot) {
        next();
        s.kind = Stmt::Kind::FieldAssign;
        s.target = lhs.text;
        s.field = ident("field name").text;
        expect(Tok::Assign, "':='");
        s.source = ident("stored variable").text;
      } else {
        expect(Tok::Assign, "':='");
        s.kind = Stmt::Kind::Assign;
        s.target = lhs.text;
        s.value = expr();
      }
      expect(Tok::Semi, "';'");
    }
    return s;
  }

  Cond condition()
  {
    expect(Tok::LParen, "'('");
    Cond c;
    c.expr = expr();
    if (peek().kind == Tok::EqEq) {
      c.is_null = true;
    } else if (peek().kind != Tok::NotEq) {
      fail(peek().loc, "expected '==' or '!='");
    }
    next();
    if (!is_keyword("null")) fail(peek().loc, "conditions compare against 'null'");
    next();
    expect(Tok::RParen, "')'");
    return c;
  }

  Expr expr()
  {
    Expr lhs = conjunction();
    while (peek().kind == Tok::OrOr) {
      SourceLoc loc = next().loc;
      lhs = Expr::binary(Expr::Kind::Or, std::move(lhs), conjunction(), loc);
    }
    return lhs;
  }

  Expr conjunction()
  {
    Expr lhs = postfix();
    while (peek().kind == Tok::AndAnd) {
      SourceLoc loc = next().loc;
      lhs = Expr::binary(Expr::Kind::And, std::move(lhs), postfix(), loc);
    }
    return lhs;
  }

  Expr postfix()
  {
    Expr e = primary();
    while (peek().kind == Tok::Dot) {
      SourceLoc loc = next().loc;
      e = Expr::field(std::move(e), ident("field name").text, loc);
    }
    return e;
  }

  Expr primary()
  {
    const Token & t = peek();
    if (t.kind == Tok::LParen) {
      next();
      Expr e = expr();
      expect(Tok::RParen, "')'");
      return e;
    }
    if (t.kind != Tok::Ident) fail(t.loc, "expected an expression");
    SourceLoc loc = t.loc;
    if (t.text == "null") {
      next();
      return Expr::null(loc);
    }
    if (t.text == "new") {
      next();
      expect(Tok::LBrace, "'{'");
      std::vector<std::string> fields;
      fields.push_back(ident("field name").text);
      while (peek().kind == Tok::Comma) {
        next();
        fields.push_back(ident("field name").text);
      }
      expect(Tok::RBrace, "'}'");
      return Expr::make_new(std::move(fields), loc);
    }
    std::string name = ident("identifier").text;
    if (peek().kind == Tok::LParen) {
      next();
      Expr arg = expr();
      expect(Tok::RParen, "')'");
      return Expr::call(std::move(name), std::move(arg), loc);
    }
    return Expr::var(std::move(name), loc);
  }

  const Token & peek() const { return toks_[pos_]; }
  const Token & next()
  {
    const Token & t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }

  bool is_keyword(std::string_view kw) const
  {
    return peek().kind == Tok::Ident && peek().text == kw;
  }

  Token ident(std::string_view what)
  {
    const Token & t = peek();
    if (t.kind != Tok::Ident) fail(t.loc, "expected " + std::string(what));
    if (kKeywords.count(t.text) != 0) {
      fail(t.loc, "expected " + std::string(what) + ", found keyword '" + t.text + "'");
    }
    return next();
  }

  void expect(Tok k, std::string_view what)
  {
    if (peek().kind != k) {
      std::string found = peek().kind == Tok::End ? "end of input" : "'" + peek().text + "'";
      fail(peek().loc, "expected " + std::string(what) + ", found " + found);
    }
    next();
  }

  [[noreturn]] static void fail(SourceLoc loc, std::string msg)
  {
    throw SyntaxError{{Severity::Error, loc, std::move(msg)}};
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

ParseResult parse(std::string_view source)
{
  ParseResult result;
  try {
    Parser parser(Lexer(source).run());
    Program p = parser.program(result.diagnostics);
    if (result.diagnostics.empty()) result.program = std::move(p);
  } catch (const SyntaxError & e) {
    result.diagnostics.push_back(e.diag);
  }
  return result;
}

}  // namespace graduator
