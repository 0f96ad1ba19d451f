#include "mb/composer.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>

namespace mb {

// ---------------------------------------------------------------------------
// Types

SemType SemType::entity() {
  SemType t;
  t.atom_ = 'e';
  return t;
}

SemType SemType::truth() { return SemType(); }

SemType SemType::fn(const SemType& from, const SemType& to) {
  SemType t;
  t.atom_ = 0;
  t.from_ = std::make_shared<const SemType>(from);
  t.to_ = std::make_shared<const SemType>(to);
  return t;
}

std::string SemType::str() const {
  if (!is_fn()) return std::string(1, atom_);
  return "<" + from_->str() + "," + to_->str() + ">";
}

bool SemType::operator==(const SemType& o) const {
  if (is_fn() != o.is_fn()) return false;
  if (!is_fn()) return atom_ == o.atom_;
  return *from_ == *o.from_ && *to_ == *o.to_;
}

SemType type_of(const Category& c) {
  static const SemType property = SemType::fn(SemType::entity(), SemType::truth());
  static const SemType quantifier = SemType::fn(property, SemType::truth());
  if (!c.is_atomic()) return SemType::fn(type_of(c.argument()), type_of(c.result()));
  if (c.name() == "S" || c.name() == "NP") return quantifier;
  if (c.name() == "N" || c.name() == "PP") return property;
  return SemType::truth();
}

// ---------------------------------------------------------------------------
// Names

std::string NameSupply::fresh_variable() { return "_v" + std::to_string(++variables_); }

std::string NameSupply::fresh_box() { return "b" + std::to_string(++counters_['b']); }

std::string NameSupply::fresh_referent(char sort, int token) {
  if (std::string_view("xets").find(sort) == std::string_view::npos) sort = 'x';
  std::string name = sort + std::to_string(++counters_[sort]);
  origins_[name] = token;
  return name;
}

bool is_variable_name(std::string_view name) { return name.starts_with("_v"); }

// ---------------------------------------------------------------------------
// Terms

namespace {

std::shared_ptr<Term> make(Term::Kind k) {
  auto t = std::make_shared<Term>();
  t->kind = k;
  return t;
}

}  // namespace

TermPtr Term::var(std::string name) {
  auto t = make(Kind::Var);
  t->name = std::move(name);
  return t;
}

TermPtr Term::ref(std::string name) {
  auto t = make(Kind::Ref);
  t->name = std::move(name);
  return t;
}

TermPtr Term::lam(std::string name, SemType type, TermPtr body) {
  auto t = make(Kind::Lam);
  t->name = std::move(name);
  t->binder_type = std::move(type);
  t->left = std::move(body);
  return t;
}

TermPtr Term::app(TermPtr f, TermPtr a) {
  auto t = make(Kind::App);
  t->left = std::move(f);
  t->right = std::move(a);
  return t;
}

TermPtr Term::box(std::vector<std::string> referents, std::vector<TermCondition> conditions) {
  auto t = make(Kind::Box);
  t->referents = std::move(referents);
  t->conditions = std::move(conditions);
  return t;
}

TermPtr Term::merge(TermPtr a, TermPtr b) {
  auto t = make(Kind::Merge);
  t->left = std::move(a);
  t->right = std::move(b);
  return t;
}

namespace {

std::string arg_text(const Arg& a) { return a.constant ? quote(a.value) : a.value; }

std::string condition_text(const TermCondition& c) {
  std::string head;
  if (c.role_placeholder)
    head = "role";
  else if (c.kind == Condition::Kind::Concept)
    head = c.symbol + "." + c.sense.str();
  else
    head = c.symbol;
  std::vector<std::string> parts;
  for (const auto& a : c.args) parts.push_back(arg_text(a));
  for (const auto& b : c.boxes) parts.push_back(to_string(b));
  std::string out = head + "(";
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
  return out + ")";
}

}  // namespace

std::string to_string(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Var:
    case Term::Kind::Ref:
      return t->name;
    case Term::Kind::Lam:
      return "\\" + t->name + ":" + t->binder_type->str() + ". " + to_string(t->left);
    case Term::Kind::App: {
      std::string f = to_string(t->left);
      if (t->left->kind == Term::Kind::Lam || t->left->kind == Term::Kind::Merge) f = "(" + f + ")";
      return f + "(" + to_string(t->right) + ")";
    }
    case Term::Kind::Box: {
      std::string out = "[";
      for (std::size_t i = 0; i < t->referents.size(); ++i) out += (i ? "," : "") + t->referents[i];
      out += " |";
      for (std::size_t i = 0; i < t->conditions.size(); ++i)
        out += (i ? ", " : " ") + condition_text(t->conditions[i]);
      return out + "]";
    }
    case Term::Kind::Merge:
      return "(" + to_string(t->left) + " ; " + to_string(t->right) + ")";
  }
  return "?";
}

namespace {

using Env = std::vector<std::pair<std::string, SemType>>;

const SemType* lookup(const Env& env, const std::string& name) {
  for (auto it = env.rbegin(); it != env.rend(); ++it)
    if (it->first == name) return &it->second;
  return nullptr;
}

SemType infer(const TermPtr& t, Env& env) {
  switch (t->kind) {
    case Term::Kind::Var: {
      const SemType* ty = lookup(env, t->name);
      if (!ty) throw Error("free variable " + t->name);
      return *ty;
    }
    case Term::Kind::Ref:
      return SemType::entity();
    case Term::Kind::Lam: {
      env.emplace_back(t->name, *t->binder_type);
      SemType body = infer(t->left, env);
      env.pop_back();
      return SemType::fn(*t->binder_type, body);
    }
    case Term::Kind::App: {
      SemType f = infer(t->left, env);
      SemType a = infer(t->right, env);
      if (!f.is_fn() || !(f.from() == a))
        throw Error("cannot apply " + f.str() + " to " + a.str() + " in " + to_string(t));
      return f.to();
    }
    case Term::Kind::Box:
      for (const auto& c : t->conditions) {
        for (const auto& a : c.args) {
          if (a.constant || !is_variable_name(a.value)) continue;
          const SemType* ty = lookup(env, a.value);
          if (!ty) throw Error("free variable " + a.value);
          if (!ty->is_entity()) throw Error("condition argument " + a.value + " has type " + ty->str());
        }
        for (const auto& b : c.boxes)
          if (!infer(b, env).is_truth()) throw Error("sub-box is not of type t: " + to_string(b));
      }
      return SemType::truth();
    case Term::Kind::Merge:
      if (!infer(t->left, env).is_truth() || !infer(t->right, env).is_truth())
        throw Error("merge operands must have type t: " + to_string(t));
      return SemType::truth();
  }
  throw Error("unknown term");
}

void free_variables(const TermPtr& t, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (t->kind) {
    case Term::Kind::Var:
      if (!bound.count(t->name)) out.insert(t->name);
      return;
    case Term::Kind::Ref:
      return;
    case Term::Kind::Lam: {
      bool fresh = bound.insert(t->name).second;
      free_variables(t->left, bound, out);
      if (fresh) bound.erase(t->name);
      return;
    }
    case Term::Kind::App:
    case Term::Kind::Merge:
      free_variables(t->left, bound, out);
      free_variables(t->right, bound, out);
      return;
    case Term::Kind::Box:
      for (const auto& c : t->conditions) {
        for (const auto& a : c.args)
          if (!a.constant && is_variable_name(a.value) && !bound.count(a.value)) out.insert(a.value);
        for (const auto& b : c.boxes) free_variables(b, bound, out);
      }
      return;
  }
}

std::set<std::string> free_variables(const TermPtr& t) {
  std::set<std::string> bound, out;
  free_variables(t, bound, out);
  return out;
}

TermPtr substitute(const TermPtr& t, const std::string& x, const TermPtr& s,
                   const std::set<std::string>& s_free, NameSupply& names) {
  switch (t->kind) {
    case Term::Kind::Var:
      return t->name == x ? s : t;
    case Term::Kind::Ref:
      return t;
    case Term::Kind::Lam: {
      if (t->name == x) return t;
      if (s_free.count(t->name)) {
        std::string fresh = names.fresh_variable();
        TermPtr body = substitute(t->left, t->name, Term::var(fresh), {fresh}, names);
        return Term::lam(fresh, *t->binder_type, substitute(body, x, s, s_free, names));
      }
      return Term::lam(t->name, *t->binder_type, substitute(t->left, x, s, s_free, names));
    }
    case Term::Kind::App:
      return Term::app(substitute(t->left, x, s, s_free, names), substitute(t->right, x, s, s_free, names));
    case Term::Kind::Merge:
      return Term::merge(substitute(t->left, x, s, s_free, names),
                         substitute(t->right, x, s, s_free, names));
    case Term::Kind::Box: {
      std::vector<TermCondition> conds = t->conditions;
      for (auto& c : conds) {
        for (auto& a : c.args) {
          if (a.constant || a.value != x) continue;
          if (s->kind != Term::Kind::Var && s->kind != Term::Kind::Ref)
            throw Error("cannot place " + to_string(s) + " in a condition argument");
          a.value = s->name;
        }
        for (auto& b : c.boxes) b = substitute(b, x, s, s_free, names);
      }
      return Term::box(t->referents, std::move(conds));
    }
  }
  return t;
}

class Reducer {
 public:
  Reducer(NameSupply& names, std::size_t fuel) : names_(names), fuel_(fuel) {}

  TermPtr normalize(const TermPtr& t) {
    switch (t->kind) {
      case Term::Kind::Var:
      case Term::Kind::Ref:
        return t;
      case Term::Kind::Lam:
        return Term::lam(t->name, *t->binder_type, normalize(t->left));
      case Term::Kind::App: {
        TermPtr f = normalize(t->left);
        if (f->kind == Term::Kind::Lam) {
          if (fuel_ == 0) throw Error("beta reduction ran out of fuel");
          --fuel_;
          return normalize(substitute(f->left, f->name, t->right, free_variables(t->right), names_));
        }
        return Term::app(f, normalize(t->right));
      }
      case Term::Kind::Box: {
        std::vector<TermCondition> conds = t->conditions;
        for (auto& c : conds)
          for (auto& b : c.boxes) b = normalize(b);
        return Term::box(t->referents, std::move(conds));
      }
      case Term::Kind::Merge: {
        TermPtr a = normalize(t->left);
        TermPtr b = normalize(t->right);
        if (a->kind == Term::Kind::Box && b->kind == Term::Kind::Box) {
          auto refs = a->referents;
          refs.insert(refs.end(), b->referents.begin(), b->referents.end());
          auto conds = a->conditions;
          conds.insert(conds.end(), b->conditions.begin(), b->conditions.end());
          return Term::box(std::move(refs), std::move(conds));
        }
        return Term::merge(a, b);
      }
    }
    return t;
  }

 private:
  NameSupply& names_;
  std::size_t fuel_;
};

}  // namespace

SemType type_check(const TermPtr& t) {
  Env env;
  return infer(t, env);
}

TermPtr beta_normalize(const TermPtr& t, NameSupply& names, std::size_t fuel) {
  return Reducer(names, fuel).normalize(t);
}

// ---------------------------------------------------------------------------
// Templates

Sense default_sense(const Category& c) {
  Category k = c;
  while (!k.is_atomic()) k = k.result();
  return Sense{k.is("S") ? 'v' : 'n', 1};
}

TemplateRegistry TemplateRegistry::load(const std::string& path) { return parse(read_file(path)); }

TemplateRegistry TemplateRegistry::parse(std::string_view tsv) {
  TemplateRegistry r;
  std::size_t row = 0;
  for (const auto& line : split(tsv, '\n')) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3) throw Error("templates row " + std::to_string(row) + ": expected 3 columns");
    r.add(cols[0], cols[1], cols[2]);
  }
  return r;
}

void TemplateRegistry::add(const std::string& semtag, const std::string& category, std::string body) {
  std::string key = category == "X|X" ? category : parse_category(category).str();
  templates_[{semtag, key}] = std::move(body);
}

const std::string* TemplateRegistry::find(std::string_view semtag, const Category& category) const {
  const bool modifier = !category.is_atomic() && category.result() == category.argument();
  for (std::string tag : {std::string(semtag), std::string("*")}) {
    if (auto it = templates_.find({tag, category.str()}); it != templates_.end()) return &it->second;
    if (modifier)
      if (auto it = templates_.find({tag, "X|X"}); it != templates_.end()) return &it->second;
  }
  return nullptr;
}

namespace {

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '~' || c == '-' || c == '\'';
}

class TemplateParser {
 public:
  TemplateParser(std::string_view src, const LexicalInput& input, NameSupply& names)
      : s_(src), in_(input), names_(names) {}

  TermPtr run() {
    TermPtr t = term();
    skip();
    if (pos_ != s_.size()) fail("trailing input");
    for (const auto& [local, fresh] : referents_)
      if (!introduced_.count(local)) fail("referent '" + local + "' is never introduced");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error("template for '" + in_.token + "' (" + in_.semtag + ", " + in_.category.str() + ") at " +
                std::to_string(pos_) + ": " + what);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip();
    return pos_ < s_.size() && s_[pos_] == c;
  }
  bool accept(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  std::string ident() {
    skip();
    std::size_t begin = pos_;
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (ident_char(c) || (c == '.' && pos_ > begin && pos_ + 1 < s_.size() && ident_char(s_[pos_ + 1])))
        ++pos_;
      else
        break;
    }
    if (begin == pos_) fail("expected a name");
    return std::string(s_.substr(begin, pos_ - begin));
  }

  std::string string_literal() {
    expect('"');
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
      out += s_[pos_++];
    }
    expect('"');
    return out;
  }

  SemType type() {
    if (accept('<')) {
      SemType a = type();
      expect(',');
      SemType b = type();
      expect('>');
      return SemType::fn(a, b);
    }
    if (accept('{')) {
      std::size_t end = s_.find('}', pos_);
      if (end == std::string_view::npos) fail("unterminated category type");
      std::string cat(s_.substr(pos_, end - pos_));
      pos_ = end + 1;
      if (cat == "@cat") return type_of(in_.category);
      if (cat == "@arg" || cat == "@res") {
        if (in_.category.is_atomic()) fail(cat + " needs a complex category");
        return type_of(cat == "@arg" ? in_.category.argument() : in_.category.result());
      }
      return type_of(parse_category(cat));
    }
    std::string name = ident();
    if (name == "e") return SemType::entity();
    if (name == "t") return SemType::truth();
    fail("unknown type '" + name + "'");
  }

  const std::string* bound(const std::string& local) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->first == local) return &it->second;
    return nullptr;
  }

  const std::string& referent(const std::string& local) {
    auto it = referents_.find(local);
    if (it == referents_.end())
      it = referents_.emplace(local, names_.fresh_referent(local[0], in_.index)).first;
    return it->second;
  }

  TermPtr term() {
    TermPtr t = application();
    while (accept(';')) t = Term::merge(t, application());
    return t;
  }

  TermPtr application() {
    TermPtr t = atom();
    while (accept('(')) {
      TermPtr a = term();
      expect(')');
      t = Term::app(t, a);
    }
    return t;
  }

  TermPtr atom() {
    if (accept('\\')) {
      std::string local = ident();
      expect(':');
      SemType ty = type();
      expect('.');
      std::string fresh = names_.fresh_variable();
      scope_.emplace_back(local, fresh);
      TermPtr body = term();
      scope_.pop_back();
      return Term::lam(fresh, ty, body);
    }
    if (accept('(')) {
      TermPtr t = term();
      expect(')');
      return t;
    }
    if (accept('[')) return box();
    std::string name = ident();
    if (const std::string* v = bound(name)) return Term::var(*v);
    return Term::ref(referent(name));
  }

  TermPtr box() {
    std::vector<std::string> refs;
    if (!peek('|')) {
      do {
        std::string local = ident();
        introduced_.insert(local);
        refs.push_back(referent(local));
      } while (accept(','));
    }
    expect('|');
    std::vector<TermCondition> conds;
    if (!peek(']')) {
      do conds.push_back(condition());
      while (accept(','));
    }
    expect(']');
    return Term::box(std::move(refs), std::move(conds));
  }

  Arg arg() {
    if (peek('"')) return Arg::lit(string_literal());
    if (accept('@')) {
      std::string what = ident();
      if (what == "sym") return Arg::lit(in_.symbol);
      if (what == "tok") return Arg::lit(in_.token);
      fail("unknown token field @" + what);
    }
    std::string name = ident();
    if (const std::string* v = bound(name)) return Arg::ref(*v);
    return Arg::ref(referent(name));
  }

  TermCondition condition() {
    using K = Condition::Kind;
    TermCondition c;
    c.origin = in_.index;
    std::string head = ident();
    expect('(');
    if (head == "concept") {
      c.kind = K::Concept;
      c.symbol = in_.symbol;
      c.sense = in_.sense.value_or(default_sense(in_.category));
      c.args = {arg()};
    } else if (head == "named") {
      c.kind = K::Named;
      c.symbol = "Named";
      c.args = {arg(), Arg::lit(in_.symbol)};
    } else if (head == "role") {
      c.kind = K::Role;
      c.role_placeholder = true;
      c.args.push_back(arg());
      expect(',');
      c.args.push_back(arg());
    } else if (head == "not") {
      c.kind = K::Not;
      c.symbol = "NOT";
      c.boxes = {term()};
    } else if (head == "imp" || head == "dis") {
      c.kind = head == "imp" ? K::Imp : K::Dis;
      c.symbol = head == "imp" ? "IMP" : "DIS";
      c.boxes.push_back(term());
      expect(',');
      c.boxes.push_back(term());
    } else if (head == "prop") {
      c.kind = K::Prop;
      c.symbol = "PRP";
      c.args = {arg()};
      expect(',');
      c.boxes = {term()};
    } else if (is_comparison_op(head)) {
      c.kind = K::Comparison;
      c.symbol = head;
      c.args.push_back(arg());
      expect(',');
      c.args.push_back(arg());
    } else if (auto dot = head.rfind('.'); dot != std::string::npos) {
      auto pos_dot = head.rfind('.', dot - 1);
      if (pos_dot == std::string::npos || pos_dot == 0) fail("malformed concept '" + head + "'");
      c.kind = K::Concept;
      c.symbol = head.substr(0, pos_dot);
      c.sense = Sense::parse(head.substr(pos_dot + 1));
      c.args = {arg()};
    } else {
      c.kind = K::Role;
      c.symbol = head;
      c.args.push_back(arg());
      expect(',');
      c.args.push_back(arg());
    }
    expect(')');
    return c;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  const LexicalInput& in_;
  NameSupply& names_;
  std::vector<std::pair<std::string, std::string>> scope_;
  std::map<std::string, std::string> referents_;
  std::set<std::string> introduced_;
};

}  // namespace

TermPtr instantiate_template(std::string_view body, const LexicalInput& input, NameSupply& names) {
  return TemplateParser(body, input, names).run();
}

TermPtr lexical_entry(const TemplateRegistry& registry, const LexicalInput& input, NameSupply& names) {
  if (!input.category.valid()) throw Error("token '" + input.token + "' has no category");
  const std::string* body = registry.find(input.semtag, input.category);
  if (!body)
    throw Error("no template for (" + input.semtag + ", " + input.category.str() + ") at token '" +
                input.token + "'");
  TermPtr t = instantiate_template(*body, input, names);
  SemType got = type_check(t);
  SemType want = type_of(input.category);
  if (!(got == want))
    throw Error("template for (" + input.semtag + ", " + input.category.str() + ") has type " + got.str() +
                ", expected " + want.str());
  return t;
}

// ---------------------------------------------------------------------------
// Composition

namespace {

struct Meaning {
  TermPtr term;  // null for punctuation
  SemType type;
};

class Composer {
 public:
  Composer(const std::vector<LexicalInput>& inputs, const TemplateRegistry& registry, NameSupply& names)
      : inputs_(inputs), registry_(registry), names_(names) {}

  Meaning build(const Derivation& d) {
    if (d.is_leaf()) {
      if (d.token < 0 || static_cast<std::size_t>(d.token) >= inputs_.size())
        throw Error("derivation leaf " + std::to_string(d.token) + " has no lexical input");
      if (d.category.is("PUNCT")) return {nullptr, SemType::truth()};
      LexicalInput in = inputs_[static_cast<std::size_t>(d.token)];
      in.category = d.category;
      TermPtr t = lexical_entry(registry_, in, names_);
      return {t, type_check(t)};
    }
    Meaning l = build(d.children[0]);
    Meaning r = build(d.children[1]);
    auto clash = [&](const std::string& why) {
      return Error("type clash at " + std::string(to_string(d.rule)) + " over tokens " +
                   std::to_string(d.first_token()) + "-" + std::to_string(d.last_token()) + ": " + why);
    };
    switch (d.rule) {
      case Combinator::RP: return l;
      case Combinator::LP: return r;
      default: break;
    }
    if (!l.term || !r.term) throw clash("punctuation outside an absorption rule");
    auto apply = [&](const Meaning& f, const Meaning& a) -> Meaning {
      if (!f.type.is_fn() || !(f.type.from() == a.type))
        throw clash("cannot apply " + f.type.str() + " to " + a.type.str());
      return {Term::app(f.term, a.term), f.type.to()};
    };
    auto compose_fns = [&](const Meaning& outer, const Meaning& inner) -> Meaning {
      if (!outer.type.is_fn() || !inner.type.is_fn() || !(inner.type.to() == outer.type.from()))
        throw clash("cannot compose " + outer.type.str() + " with " + inner.type.str());
      std::string z = names_.fresh_variable();
      return {Term::lam(z, inner.type.from(), Term::app(outer.term, Term::app(inner.term, Term::var(z)))),
              SemType::fn(inner.type.from(), outer.type.to())};
    };
    switch (d.rule) {
      case Combinator::FA: return apply(l, r);
      case Combinator::BA: return apply(r, l);
      case Combinator::FC: return compose_fns(l, r);
      case Combinator::BC:
      case Combinator::BCX: return compose_fns(r, l);
      default: throw clash("unsupported rule");
    }
  }

  TermPtr close(const TermPtr& t, const SemType& type, int token) {
    static const SemType property = SemType::fn(SemType::entity(), SemType::truth());
    static const SemType quantifier = SemType::fn(property, SemType::truth());
    if (type.is_truth()) return t;
    if (!type.is_fn()) throw Error("cannot close a fragment of type " + type.str());
    const SemType& from = type.from();
    if (from.is_entity()) {
      std::string x = names_.fresh_referent('x', token);
      return Term::merge(Term::box({x}, {}), close(Term::app(t, Term::ref(x)), type.to(), token));
    }
    if (from == property) {
      std::string v = names_.fresh_variable();
      return close(Term::app(t, Term::lam(v, SemType::entity(), Term::box({}, {}))), type.to(), token);
    }
    if (from == quantifier) {
      std::string p = names_.fresh_variable();
      std::string x = names_.fresh_referent('x', token);
      TermPtr np = Term::lam(p, property, Term::merge(Term::box({x}, {}), Term::app(Term::var(p), Term::ref(x))));
      return close(Term::app(t, np), type.to(), token);
    }
    throw Error("cannot close a fragment of type " + type.str());
  }

 private:
  const std::vector<LexicalInput>& inputs_;
  const TemplateRegistry& registry_;
  NameSupply& names_;
};

class DrsBuilder {
 public:
  DrsBuilder(const std::map<int, std::string>& roles, NameSupply& names) : roles_(roles), names_(names) {}

  Drs run(const TermPtr& box) {
    collect(box);
    return convert(box);
  }

 private:
  void note(const std::string& ref, int token) {
    if (!ref.empty() && token >= 0) contributors_[ref].insert(token);
  }

  void collect(const TermPtr& box) {
    if (box->kind != Term::Kind::Box) throw Error("composition did not reduce to a DRS: " + to_string(box));
    for (const auto& r : box->referents)
      if (auto it = names_.referent_origins().find(r); it != names_.referent_origins().end()) note(r, it->second);
    for (const auto& c : box->conditions) {
      if (!c.role_placeholder)
        for (const auto& a : c.args)
          if (!a.constant) note(a.value, c.origin);
      for (const auto& b : c.boxes) collect(b);
    }
  }

  std::optional<std::string> role_for(const std::string& ref) const {
    auto it = contributors_.find(ref);
    if (it == contributors_.end()) return std::nullopt;
    for (int token : it->second) {
      auto r = roles_.find(token);
      if (r != roles_.end() && !r->second.empty() && r->second != kNoRole) return r->second;
    }
    return std::nullopt;
  }

  Drs convert(const TermPtr& box) {
    Drs d;
    d.label = names_.fresh_box();
    d.referents = box->referents;
    for (const auto& c : box->conditions) {
      for (const auto& a : c.args)
        if (!a.constant && is_variable_name(a.value))
          throw Error("unbound variable " + a.value + " in composed DRS");
      std::vector<Drs> subs;
      for (const auto& b : c.boxes) subs.push_back(convert(b));
      Condition out;
      using K = Condition::Kind;
      if (c.role_placeholder) {
        auto label = role_for(c.args[1].value);
        if (!label) continue;
        out = Condition::role(*label, c.args[0].value, c.args[1]);
      } else {
        switch (c.kind) {
          case K::Concept: out = Condition::concept_of(c.symbol, c.sense, c.args[0].value); break;
          case K::Role: out = Condition::role(c.symbol, c.args[0].value, c.args[1]); break;
          case K::Named: out = Condition::named(c.args[0].value, c.args[1].value); break;
          case K::Comparison: out = Condition::comparison(c.symbol, c.args[0], c.args[1]); break;
          case K::Not: out = Condition::negation(std::move(subs[0])); break;
          case K::Imp: out = Condition::implication(std::move(subs[0]), std::move(subs[1])); break;
          case K::Dis: out = Condition::disjunction(std::move(subs[0]), std::move(subs[1])); break;
          case K::Prop: out = Condition::proposition(c.args[0].value, std::move(subs[0])); break;
        }
      }
      out.origin = c.origin;
      d.conditions.push_back(std::move(out));
    }
    return d;
  }

  const std::map<int, std::string>& roles_;
  NameSupply& names_;
  std::map<std::string, std::set<int>> contributors_;
};

void collect_condition_refs(const Drs& d, int token, std::optional<std::string>& out) {
  for (const auto& c : d.conditions) {
    if (out) return;
    if (c.origin == token)
      for (const auto& a : c.args)
        if (!a.constant) {
          out = a.value;
          return;
        }
    for (const auto& b : c.boxes) collect_condition_refs(b, token, out);
  }
}

}  // namespace

Composition compose(const ParseResult& parse, const std::vector<LexicalInput>& inputs,
                    const TemplateRegistry& registry, NameSupply& names) {
  Composer composer(inputs, registry, names);
  TermPtr whole;
  for (const auto& fragment : parse.fragments) {
    Meaning m = composer.build(fragment);
    if (!m.term) continue;
    int token = inputs.at(static_cast<std::size_t>(fragment.first_token())).index;
    TermPtr closed = composer.close(m.term, m.type, token);
    whole = whole ? Term::merge(whole, closed) : closed;
  }
  if (!whole) whole = Term::box({}, {});

  std::map<int, std::string> roles;
  for (const auto& in : inputs) roles[in.index] = in.role;
  TermPtr reduced = beta_normalize(whole, names);
  Composition out;
  out.drs = DrsBuilder(roles, names).run(reduced);

  const auto& origins = names.referent_origins();
  auto refs = all_referents(out.drs);
  for (const auto& in : inputs) {
    auto it = std::find_if(refs.begin(), refs.end(), [&](const std::string& r) {
      auto o = origins.find(r);
      return o != origins.end() && o->second == in.index;
    });
    if (it != refs.end()) {
      out.token_referents[in.index] = *it;
      continue;
    }
    std::optional<std::string> ref;
    collect_condition_refs(out.drs, in.index, ref);
    if (ref) out.token_referents[in.index] = *ref;
  }
  return out;
}

Composition compose(const Derivation& derivation, const std::vector<LexicalInput>& inputs,
                    const TemplateRegistry& registry, NameSupply& names) {
  ParseResult p;
  p.fragments.push_back(derivation);
  p.complete = true;
  return compose(p, inputs, registry, names);
}

namespace {

void remove_introduction(Drs& d, const std::string& ref, bool& keep_first) {
  for (auto it = d.referents.begin(); it != d.referents.end();) {
    if (*it == ref) {
      if (keep_first) {
        keep_first = false;
        ++it;
      } else {
        it = d.referents.erase(it);
      }
    } else {
      ++it;
    }
  }
  for (auto& c : d.conditions)
    for (auto& b : c.boxes) remove_introduction(b, ref, keep_first);
}

const std::string* find_referent(const std::vector<Composition>& sentences, int token) {
  for (const auto& s : sentences)
    if (auto it = s.token_referents.find(token); it != s.token_referents.end()) return &it->second;
  return nullptr;
}

void relabel_boxes(Drs& d, int& counter) {
  d.label = "b" + std::to_string(++counter);
  for (auto& c : d.conditions)
    for (auto& b : c.boxes) relabel_boxes(b, counter);
}

}  // namespace

void resolve_coreference(std::vector<Composition>& sentences, const std::map<int, int>& antecedents) {
  for (const auto& [anaphor, antecedent] : antecedents) {
    if (antecedent < 0) throw Error("negative antecedent for token " + std::to_string(anaphor));
    if (antecedent >= anaphor)
      throw Error("antecedent " + std::to_string(antecedent) + " of token " + std::to_string(anaphor) +
                  " does not precede it");
    const std::string* from = find_referent(sentences, anaphor);
    const std::string* to = find_referent(sentences, antecedent);
    if (!from || !to)
      throw Error("dangling antecedent link " + std::to_string(anaphor) + " -> " + std::to_string(antecedent));
    const std::string old_ref = *from;
    const std::string new_ref = *to;
    if (old_ref == new_ref) continue;
    for (auto& s : sentences) {
      rename_referent(s.drs, old_ref, new_ref);
      for (auto& [tok, ref] : s.token_referents)
        if (ref == old_ref) ref = new_ref;
    }
    bool keep_first = true;
    for (auto& s : sentences) remove_introduction(s.drs, new_ref, keep_first);
  }
}

Drs merge_document(const std::vector<Drs>& sentences) {
  Drs out;
  int counter = 0;
  for (const auto& s : sentences) {
    Drs copy = s;
    relabel_boxes(copy, counter);
    out.referents.insert(out.referents.end(), copy.referents.begin(), copy.referents.end());
    for (auto& c : copy.conditions) out.conditions.push_back(std::move(c));
  }
  out.label = "b" + std::to_string(++counter);
  return canonicalize(out);
}

}  // namespace mb
