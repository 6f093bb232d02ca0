#include "abpr/term.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "abpr/ops.hpp"

namespace abpr::logic {

TermPtr mk_atom(std::string name) {
  auto t = std::make_shared<Term>();
  t->tag = Term::Tag::Atom;
  t->name = std::move(name);
  return t;
}

TermPtr mk_int(long long v) {
  auto t = std::make_shared<Term>();
  t->tag = Term::Tag::Int;
  t->ival = v;
  return t;
}

TermPtr mk_var(std::string name, VarId id) {
  auto t = std::make_shared<Term>();
  t->tag = Term::Tag::Var;
  t->name = std::move(name);
  t->var = id;
  return t;
}

TermPtr mk_compound(std::string functor, std::vector<TermPtr> args) {
  if (args.empty()) return mk_atom(std::move(functor));
  auto t = std::make_shared<Term>();
  t->tag = Term::Tag::Compound;
  t->name = std::move(functor);
  t->args = std::move(args);
  return t;
}

const TermPtr& nil() {
  static const TermPtr t = mk_atom("[]");
  return t;
}

const TermPtr& atom_true() {
  static const TermPtr t = mk_atom("true");
  return t;
}

TermPtr mk_cons(TermPtr head, TermPtr tail) {
  return mk_compound(".", {std::move(head), std::move(tail)});
}

TermPtr mk_list(const std::vector<TermPtr>& items, TermPtr tail) {
  TermPtr acc = tail ? std::move(tail) : nil();
  for (auto it = items.rbegin(); it != items.rend(); ++it) acc = mk_cons(*it, acc);
  return acc;
}

TermPtr mk_pair(TermPtr a, TermPtr b) { return mk_compound(",", {std::move(a), std::move(b)}); }

std::optional<std::vector<TermPtr>> list_elements(const TermPtr& t) {
  std::vector<TermPtr> out;
  const Term* cur = t.get();
  TermPtr hold = t;
  while (true) {
    if (cur->is_atom("[]")) return out;
    if (!cur->is_functor(".", 2)) return std::nullopt;
    out.push_back(cur->args[0]);
    hold = cur->args[1];
    cur = hold.get();
  }
}

bool structurally_equal(const TermPtr& a, const TermPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->tag != b->tag) return false;
  switch (a->tag) {
    case Term::Tag::Atom: return a->name == b->name;
    case Term::Tag::Int: return a->ival == b->ival;
    case Term::Tag::Var: return a->var == b->var;
    case Term::Tag::Compound:
      if (a->name != b->name || a->args.size() != b->args.size()) return false;
      for (size_t i = 0; i < a->args.size(); ++i)
        if (!structurally_equal(a->args[i], b->args[i])) return false;
      return true;
  }
  return false;
}

int compare_terms(const TermPtr& a, const TermPtr& b) {
  auto rank = [](const Term& t) {
    switch (t.tag) {
      case Term::Tag::Var: return 0;
      case Term::Tag::Int: return 1;
      case Term::Tag::Atom: return 2;
      case Term::Tag::Compound: return 3;
    }
    return 3;
  };
  int ra = rank(*a), rb = rank(*b);
  if (ra != rb) return ra < rb ? -1 : 1;
  switch (a->tag) {
    case Term::Tag::Var:
      return a->var < b->var ? -1 : a->var > b->var ? 1 : 0;
    case Term::Tag::Int:
      return a->ival < b->ival ? -1 : a->ival > b->ival ? 1 : 0;
    case Term::Tag::Atom:
      return a->name.compare(b->name) < 0 ? -1 : a->name == b->name ? 0 : 1;
    case Term::Tag::Compound: {
      if (a->args.size() != b->args.size()) return a->args.size() < b->args.size() ? -1 : 1;
      int c = a->name.compare(b->name);
      if (c != 0) return c < 0 ? -1 : 1;
      for (size_t i = 0; i < a->args.size(); ++i) {
        c = compare_terms(a->args[i], b->args[i]);
        if (c != 0) return c;
      }
      return 0;
    }
  }
  return 0;
}

bool is_ground(const TermPtr& t) {
  switch (t->tag) {
    case Term::Tag::Var: return false;
    case Term::Tag::Atom:
    case Term::Tag::Int: return true;
    case Term::Tag::Compound:
      return std::all_of(t->args.begin(), t->args.end(),
                         [](const TermPtr& a) { return is_ground(a); });
  }
  return true;
}

void collect_vars(const TermPtr& t, std::vector<VarId>& out) {
  switch (t->tag) {
    case Term::Tag::Var:
      if (std::find(out.begin(), out.end(), t->var) == out.end()) out.push_back(t->var);
      break;
    case Term::Tag::Compound:
      for (const auto& a : t->args) collect_vars(a, out);
      break;
    default: break;
  }
}

namespace {

bool plain_atom(const std::string& s) {
  if (s.empty()) return false;
  if (!std::islower(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_';
  });
}

bool symbolic_atom(const std::string& s) {
  static const std::string symbols = "+-*/\\^<>=~:.?@#&$";
  return !s.empty() && std::all_of(s.begin(), s.end(), [&](char c) {
    return symbols.find(c) != std::string::npos;
  });
}

std::string atom_text(const std::string& name, bool quote) {
  if (!quote || plain_atom(name) || symbolic_atom(name) || name == "[]" || name == "!" ||
      name == ";" || name == "{}")
    return name;
  std::string out = "'";
  for (char c : name) {
    if (c == '\'' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

struct Writer {
  const RenderOptions& opts;
  std::ostringstream os;

  void write(const TermPtr& t, int max_prio, int depth) {
    if (opts.max_depth > 0 && depth > opts.max_depth) {
      os << "...";
      return;
    }
    switch (t->tag) {
      case Term::Tag::Atom:
        os << atom_text(t->name, opts.quote_atoms);
        return;
      case Term::Tag::Int:
        os << t->ival;
        return;
      case Term::Tag::Var:
        os << "_G" << t->var;
        return;
      case Term::Tag::Compound: break;
    }
    if (t->is_functor(".", 2)) {
      write_list(t, depth);
      return;
    }
    if (t->args.size() == 2) {
      if (auto op = infix_op(t->name)) {
        int lp = op->priority - (op->type != OpType::Yfx ? 1 : 0);
        int rp = op->priority - (op->type != OpType::Xfy ? 1 : 0);
        bool paren = op->priority > max_prio;
        if (paren) os << '(';
        write(t->args[0], lp, depth + 1);
        if (t->name == ",")
          os << ",";
        else
          os << (plain_atom(t->name) ? " " + t->name + " " : t->name);
        write(t->args[1], rp, depth + 1);
        if (paren) os << ')';
        return;
      }
    }
    if (t->args.size() == 1) {
      if (auto op = prefix_op(t->name)) {
        bool paren = op->priority > max_prio;
        if (paren) os << '(';
        os << t->name << (plain_atom(t->name) || t->name == "\\+" || t->name == ":-" ? " " : "");
        write(t->args[0], op->priority - (op->type == OpType::Fx ? 1 : 0), depth + 1);
        if (paren) os << ')';
        return;
      }
    }
    os << atom_text(t->name, opts.quote_atoms) << '(';
    for (size_t i = 0; i < t->args.size(); ++i) {
      if (i) os << ',';
      write(t->args[i], 999, depth + 1);
    }
    os << ')';
  }

  void write_list(const TermPtr& t, int depth) {
    os << '[';
    const Term* cur = t.get();
    TermPtr hold = t;
    int n = 0;
    long long skipped = 0;
    while (cur->is_functor(".", 2)) {
      if (opts.max_list_items > 0 && n >= opts.max_list_items) {
        ++skipped;
        hold = cur->args[1];
        cur = hold.get();
        continue;
      }
      if (n) os << ',';
      write(cur->args[0], 999, depth + 1);
      ++n;
      hold = cur->args[1];
      cur = hold.get();
    }
    if (skipped > 0) {
      os << ",...(+" << skipped << ")";
    } else if (!cur->is_atom("[]")) {
      os << '|';
      write(hold, 999, depth + 1);
    }
    os << ']';
  }
};

}  // namespace

std::string render_term(const TermPtr& t, const RenderOptions& opts) {
  Writer w{opts, {}};
  w.write(t, 1200, 1);
  return w.os.str();
}

std::string predicate_indicator(const TermPtr& goal) {
  if (goal->is_atom()) return goal->name + "/0";
  if (goal->is_compound()) return goal->name + "/" + std::to_string(goal->args.size());
  return render_term(goal);
}

}  // namespace abpr::logic
