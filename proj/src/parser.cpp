#include "abpr/parser.hpp"

#include <cctype>
#include <unordered_map>

#include "abpr/errors.hpp"
#include "abpr/ops.hpp"

namespace abpr::logic {

namespace {

struct Token {
  enum class Kind { Atom, Var, Int, Punct, End, Eof };
  Kind kind;
  std::string text;
  long long ival = 0;
  int line = 1;
  int col = 1;
  bool lparen_follows = false;  // '(' immediately after, no layout: functor application
  bool quoted = false;          // quoted atoms never act as operators
};

const std::string kSymbolChars = "+-*/\\^<>=~:.?@#&$";

class Lexer {
public:
  explicit Lexer(const std::string& src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_layout();
      Token t = next();
      bool eof = t.kind == Token::Kind::Eof;
      out.push_back(std::move(t));
      if (eof) break;
    }
    return out;
  }

private:
  [[noreturn]] void fail(const std::string& msg) { throw SyntaxError(line_, col_, msg); }

  char peek(size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }
  char get() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }
  bool at_end() const { return pos_ >= src_.size(); }

  void skip_layout() {
    while (!at_end()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        get();
      } else if (c == '%') {
        while (!at_end() && peek() != '\n') get();
      } else if (c == '/' && peek(1) == '*') {
        int l = line_, co = col_;
        get();
        get();
        while (true) {
          if (at_end()) throw SyntaxError(l, co, "unterminated block comment");
          char d = get();
          if (d == '*' && peek() == '/') {
            get();
            break;
          }
        }
      } else {
        break;
      }
    }
  }

  Token mk(Token::Kind k, std::string text, int line, int col) {
    Token t;
    t.kind = k;
    t.text = std::move(text);
    t.line = line;
    t.col = col;
    t.lparen_follows = !at_end() && peek() == '(';
    return t;
  }

  Token next() {
    if (at_end()) return mk(Token::Kind::Eof, "", line_, col_);
    int line = line_, col = col_;
    char c = peek();

    if (std::isdigit(static_cast<unsigned char>(c))) {
      long long v = 0;
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek())))
        v = v * 10 + (get() - '0');
      Token t = mk(Token::Kind::Int, "", line, col);
      t.ival = v;
      return t;
    }

    if (c == '_' || std::isupper(static_cast<unsigned char>(c))) {
      std::string s;
      while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
        s.push_back(get());
      return mk(Token::Kind::Var, std::move(s), line, col);
    }

    if (std::islower(static_cast<unsigned char>(c))) {
      std::string s;
      while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
        s.push_back(get());
      return mk(Token::Kind::Atom, std::move(s), line, col);
    }

    if (c == '\'') {
      get();
      std::string s;
      while (true) {
        if (at_end()) throw SyntaxError(line, col, "unterminated quoted atom");
        char d = get();
        if (d == '\'') {
          if (peek() == '\'') {
            get();
            s.push_back('\'');
            continue;
          }
          break;
        }
        if (d == '\\') {
          if (at_end()) throw SyntaxError(line, col, "unterminated escape");
          char e = get();
          switch (e) {
            case 'n': s.push_back('\n'); break;
            case 't': s.push_back('\t'); break;
            case '\\': s.push_back('\\'); break;
            case '\'': s.push_back('\''); break;
            case '"': s.push_back('"'); break;
            default: s.push_back(e); break;
          }
          continue;
        }
        s.push_back(d);
      }
      Token tok = mk(Token::Kind::Atom, std::move(s), line, col);
      tok.quoted = true;
      return tok;
    }

    if (c == '"') throw UnsupportedFeatureError("double-quoted string", line);

    if (c == '(' || c == ')' || c == '[' || c == ']' || c == ',' || c == '|' || c == '{' ||
        c == '}') {
      get();
      return mk(Token::Kind::Punct, std::string(1, c), line, col);
    }

    if (c == '!' || c == ';') {
      get();
      return mk(Token::Kind::Atom, std::string(1, c), line, col);
    }

    if (kSymbolChars.find(c) != std::string::npos) {
      std::string s;
      while (!at_end() && kSymbolChars.find(peek()) != std::string::npos) s.push_back(get());
      // A solitary '.' followed by layout or EOF ends the clause.
      if (s == "." &&
          (at_end() || std::isspace(static_cast<unsigned char>(peek())) || peek() == '%'))
        return mk(Token::Kind::End, ".", line, col);
      return mk(Token::Kind::Atom, std::move(s), line, col);
    }

    fail(std::string("unexpected character '") + c + "'");
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
public:
  Parser(std::vector<Token> tokens, VarId first_var)
      : toks_(std::move(tokens)), var_counter_(first_var) {}

  // One clause terminated by End; nullopt at EOF.
  std::optional<TermPtr> next_clause(int* line_out) {
    clause_vars_.clear();
    if (cur().kind == Token::Kind::Eof) return std::nullopt;
    *line_out = cur().line;
    TermPtr t = parse(1200);
    expect_end();
    return t;
  }

  TermPtr parse_single() {
    clause_vars_.clear();
    TermPtr t = parse(1200);
    if (cur().kind != Token::Kind::Eof && cur().kind != Token::Kind::End)
      fail("unexpected trailing input");
    return t;
  }

  VarId var_counter() const { return var_counter_; }

private:
  const Token& cur() const { return toks_[idx_]; }
  const Token& ahead(size_t n = 1) const {
    size_t i = idx_ + n;
    return toks_[i < toks_.size() ? i : toks_.size() - 1];
  }
  void advance() {
    if (idx_ + 1 < toks_.size()) ++idx_;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(cur().line, cur().col, msg);
  }
  void expect_punct(const char* p) {
    if (cur().kind != Token::Kind::Punct || cur().text != p)
      fail(std::string("expected '") + p + "'");
    advance();
  }
  void expect_end() {
    if (cur().kind != Token::Kind::End) fail("expected '.' at end of clause");
    advance();
  }

  bool token_starts_term(const Token& t) const {
    switch (t.kind) {
      case Token::Kind::Int:
      case Token::Kind::Var:
      case Token::Kind::Atom: return true;
      case Token::Kind::Punct: return t.text == "(" || t.text == "[";
      default: return false;
    }
  }

  TermPtr make_clause_var(const std::string& name) {
    if (name == "_") return mk_var("_", var_counter_++);
    auto it = clause_vars_.find(name);
    if (it != clause_vars_.end()) return it->second;
    TermPtr v = mk_var(name, var_counter_++);
    clause_vars_.emplace(name, v);
    return v;
  }

  struct Parsed {
    TermPtr term;
    int priority;
  };

  TermPtr parse(int max_prio) { return parse_expr(max_prio).term; }

  Parsed parse_expr(int max_prio) {
    Parsed left = parse_primary(max_prio);
    while (true) {
      const Token& t = cur();
      std::string opname;
      if (t.kind == Token::Kind::Atom && !t.quoted) {
        opname = t.text;
      } else if (t.kind == Token::Kind::Punct && t.text == ",") {
        opname = ",";
      } else {
        break;
      }
      auto op = infix_op(opname);
      if (!op || op->priority > max_prio) break;
      int left_max = op->priority - (op->type == OpType::Yfx ? 0 : 1);
      if (left.priority > left_max) break;
      int right_max = op->priority - (op->type == OpType::Xfy ? 0 : 1);
      advance();
      Parsed right = parse_expr(right_max);
      left = {mk_compound(opname, {left.term, right.term}), op->priority};
    }
    return left;
  }

  Parsed parse_primary(int max_prio) {
    const Token& t = cur();
    switch (t.kind) {
      case Token::Kind::Int: {
        long long v = t.ival;
        advance();
        return {mk_int(v), 0};
      }
      case Token::Kind::Var: {
        TermPtr v = make_clause_var(t.text);
        advance();
        return {v, 0};
      }
      case Token::Kind::Punct: {
        if (t.text == "(") {
          advance();
          TermPtr inner = parse(1200);
          expect_punct(")");
          return {inner, 0};
        }
        if (t.text == "[") return {parse_list(), 0};
        fail("unexpected '" + t.text + "'");
      }
      case Token::Kind::Atom: {
        std::string name = t.text;
        bool fn = t.lparen_follows;
        advance();
        if (fn) {
          expect_punct("(");
          std::vector<TermPtr> args;
          args.push_back(parse(999));
          while (cur().kind == Token::Kind::Punct && cur().text == ",") {
            advance();
            args.push_back(parse(999));
          }
          expect_punct(")");
          return {mk_compound(name, std::move(args)), 0};
        }
        if (auto op = prefix_op(name); op && !t.quoted) {
          if (op->priority <= max_prio && token_starts_term(cur()) &&
              !(cur().kind == Token::Kind::Atom && !cur().quoted && infix_op(cur().text) &&
                !cur().lparen_follows && !prefix_op(cur().text))) {
            // Negative integer literals fold into Int.
            if (name == "-" && cur().kind == Token::Kind::Int) {
              long long v = cur().ival;
              advance();
              return {mk_int(-v), 0};
            }
            int operand_max = op->priority - (op->type == OpType::Fx ? 1 : 0);
            Parsed operand = parse_expr(operand_max);
            return {mk_compound(name, {operand.term}), op->priority};
          }
        }
        return {mk_atom(name), infix_op(name) || prefix_op(name) ? 1201 : 0};
      }
      case Token::Kind::End:
        fail("unexpected end of clause");
      case Token::Kind::Eof:
        fail("unexpected end of input");
    }
    fail("unexpected token");
  }

  TermPtr parse_list() {
    expect_punct("[");
    if (cur().kind == Token::Kind::Punct && cur().text == "]") {
      advance();
      return nil();
    }
    std::vector<TermPtr> items;
    items.push_back(parse(999));
    while (cur().kind == Token::Kind::Punct && cur().text == ",") {
      advance();
      items.push_back(parse(999));
    }
    TermPtr tail = nil();
    if (cur().kind == Token::Kind::Punct && cur().text == "|") {
      advance();
      tail = parse(999);
    }
    expect_punct("]");
    return mk_list(items, tail);
  }

  std::vector<Token> toks_;
  size_t idx_ = 0;
  VarId var_counter_;
  std::unordered_map<std::string, TermPtr> clause_vars_;
};

void check_subset(const TermPtr& goal, int line) {
  static const std::vector<std::pair<std::string, size_t>> banned = {
      {"assert", 1},  {"asserta", 1}, {"assertz", 1}, {"retract", 1},
      {"retractall", 1}, {"catch", 3}, {"throw", 1},
  };
  if (goal->is_compound()) {
    for (const auto& [n, a] : banned)
      if (goal->is_functor(n.c_str(), a)) throw UnsupportedFeatureError(n + "/" + std::to_string(a), line);
    if (goal->is_functor(",", 2) || goal->is_functor(";", 2) || goal->is_functor("->", 2)) {
      check_subset(goal->args[0], line);
      check_subset(goal->args[1], line);
      return;
    }
    if (goal->is_functor("\\+", 1)) check_subset(goal->args[0], line);
  }
}

void record_directive(Program& prog, const TermPtr& d, int line) {
  if (d->is_compound() && (d->name == "table")) throw UnsupportedFeatureError("tabling", line);
  if (d->is_functor("use_module", 1) || d->is_functor("use_module", 2)) {
    const TermPtr& m = d->args[0];
    if (m->is_atom("bk")) prog.uses_bk = true;
  }
  if (d->is_functor("module", 2) && d->args[0]->is_atom("bk")) prog.uses_bk = true;
  prog.directives.push_back(d);
}

}  // namespace

Program parse_program(const std::string& source) {
  Program prog;
  prog.source_text = source;
  Lexer lex(source);
  Parser parser(lex.run(), 0);
  int line = 0;
  while (auto clause = parser.next_clause(&line)) {
    TermPtr t = *clause;
    if (t->is_functor("-->", 2)) throw UnsupportedFeatureError("DCG rule", line);
    if (t->is_compound() && t->name == ":-" && t->args.size() == 1) {
      record_directive(prog, t->args[0], line);
      continue;
    }
    Clause c;
    c.line = line;
    if (t->is_functor(":-", 2)) {
      c.head = t->args[0];
      c.body = t->args[1];
    } else {
      c.head = t;
      c.body = atom_true();
    }
    if (!c.head->is_callable())
      throw SyntaxError(line, 1, "clause head must be callable: " + render_term(c.head));
    check_subset(c.body, line);
    size_t id = prog.clauses.size();
    prog.index[{c.head->name, c.head->arity()}].push_back(id);
    prog.clauses.push_back(std::move(c));
  }
  prog.var_counter = parser.var_counter();
  return prog;
}

TermPtr parse_term(const std::string& text, VarId first_var) {
  Lexer lex(text);
  Parser parser(lex.run(), first_var);
  return parser.parse_single();
}

std::string render_program(const Program& p) {
  std::string out;
  for (const auto& d : p.directives) {
    out += ":- " + render_term(d) + ".\n";
  }
  for (const auto& c : p.clauses) {
    if (c.body->is_atom("true"))
      out += render_term(c.head) + ".\n";
    else
      out += render_term(c.head) + " :- " + render_term(c.body) + ".\n";
  }
  return out;
}

}  // namespace abpr::logic
