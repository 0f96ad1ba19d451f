#include "mb/drs.hpp"

#include <functional>
#include <map>
#include <set>

namespace mb {

char sort_prefix(Sort s) {
  switch (s) {
    case Sort::box: return 'b';
    case Sort::entity: return 'x';
    case Sort::event: return 'e';
    case Sort::time: return 't';
    case Sort::state: return 's';
  }
  return '?';
}

bool is_variable(std::string_view f) {
  if (f.size() < 2 || std::string_view("bxets").find(f[0]) == std::string_view::npos) return false;
  for (std::size_t i = 1; i < f.size(); ++i)
    if (f[i] < '0' || f[i] > '9') return false;
  return true;
}

Sort sort_of(std::string_view name) {
  if (!is_variable(name)) throw Error("not a referent: '" + std::string(name) + "'");
  switch (name[0]) {
    case 'b': return Sort::box;
    case 'x': return Sort::entity;
    case 'e': return Sort::event;
    case 't': return Sort::time;
    default: return Sort::state;
  }
}

Condition Condition::concept_of(std::string symbol, Sense sense, std::string ref) {
  Condition c;
  c.kind = Kind::Concept;
  c.symbol = std::move(symbol);
  c.sense = sense;
  c.args = {Arg::ref(std::move(ref))};
  return c;
}

Condition Condition::role(std::string label, std::string ref, Arg arg) {
  Condition c;
  c.kind = Kind::Role;
  c.symbol = std::move(label);
  c.args = {Arg::ref(std::move(ref)), std::move(arg)};
  return c;
}

Condition Condition::named(std::string ref, std::string name) {
  Condition c;
  c.kind = Kind::Named;
  c.symbol = "Named";
  c.args = {Arg::ref(std::move(ref)), Arg::lit(std::move(name))};
  return c;
}

Condition Condition::comparison(std::string op, Arg a, Arg b) {
  if (!is_comparison_op(op)) throw Error("unknown comparison operator '" + op + "'");
  Condition c;
  c.kind = Kind::Comparison;
  c.symbol = std::move(op);
  c.args = {std::move(a), std::move(b)};
  return c;
}

Condition Condition::negation(Drs box) {
  Condition c;
  c.kind = Kind::Not;
  c.symbol = "NOT";
  c.boxes.push_back(std::move(box));
  return c;
}

Condition Condition::implication(Drs antecedent, Drs consequent) {
  Condition c;
  c.kind = Kind::Imp;
  c.symbol = "IMP";
  c.boxes.push_back(std::move(antecedent));
  c.boxes.push_back(std::move(consequent));
  return c;
}

Condition Condition::disjunction(Drs a, Drs b) {
  Condition c;
  c.kind = Kind::Dis;
  c.symbol = "DIS";
  c.boxes.push_back(std::move(a));
  c.boxes.push_back(std::move(b));
  return c;
}

Condition Condition::proposition(std::string ref, Drs box) {
  Condition c;
  c.kind = Kind::Prop;
  c.symbol = "PRP";
  c.args = {Arg::ref(std::move(ref))};
  c.boxes.push_back(std::move(box));
  return c;
}

bool Condition::operator==(const Condition& o) const {
  return kind == o.kind && symbol == o.symbol && (kind != Kind::Concept || sense == o.sense) &&
         args == o.args && boxes == o.boxes;
}

// ---------------------------------------------------------------------------
// Clauses

std::string quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string unquote(std::string_view f) {
  if (f.size() < 2 || f.front() != '"' || f.back() != '"') throw Error("expected a quoted constant");
  std::string out;
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    if (f[i] == '\\' && i + 2 < f.size()) ++i;
    out += f[i];
  }
  return out;
}

std::string Clause::str() const {
  std::string out = box + " " + op;
  for (const auto& a : args) out += " " + a;
  return out;
}

Clause Clause::parse(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == ' ') {
      ++i;
      continue;
    }
    std::size_t begin = i;
    if (line[i] == '"') {
      ++i;
      while (i < line.size() && line[i] != '"') i += line[i] == '\\' ? 2 : 1;
      if (i >= line.size()) throw Error("unterminated quote in clause: " + std::string(line));
      ++i;
    } else {
      while (i < line.size() && line[i] != ' ') ++i;
    }
    fields.emplace_back(line.substr(begin, i - begin));
  }
  if (fields.size() < 3) throw Error("clause needs a box, an operator and arguments: " + std::string(line));
  if (sort_of(fields[0]) != Sort::box) throw Error("clause must start with a box label: " + std::string(line));
  Clause c;
  c.box = fields[0];
  c.op = fields[1];
  c.args.assign(fields.begin() + 2, fields.end());
  return c;
}

namespace {

std::string render(const Arg& a) { return a.constant ? quote(a.value) : a.value; }

Arg read_arg(const std::string& f) { return f.starts_with('"') ? Arg::lit(unquote(f)) : Arg::ref(f); }

void emit(const Drs& b, std::vector<Clause>& out) {
  for (const auto& r : b.referents) out.push_back({b.label, "REF", {r}});
  for (const auto& c : b.conditions) {
    using K = Condition::Kind;
    switch (c.kind) {
      case K::Concept:
        out.push_back({b.label, c.symbol, {quote(c.sense.str()), render(c.args[0])}});
        break;
      case K::Role:
      case K::Named:
      case K::Comparison:
        out.push_back({b.label, c.symbol, {render(c.args[0]), render(c.args[1])}});
        break;
      case K::Not:
        out.push_back({b.label, "NOT", {c.boxes[0].label}});
        break;
      case K::Imp:
      case K::Dis:
        out.push_back({b.label, c.symbol, {c.boxes[0].label, c.boxes[1].label}});
        break;
      case K::Prop:
        out.push_back({b.label, "PRP", {render(c.args[0]), c.boxes[0].label}});
        break;
    }
    for (const auto& sub : c.boxes) emit(sub, out);
  }
}

}  // namespace

std::vector<Clause> to_clauses(const Drs& d) {
  std::vector<Clause> out;
  emit(d, out);
  return out;
}

std::string clauses_text(const std::vector<Clause>& clauses) {
  std::string out;
  for (const auto& c : clauses) out += c.str() + "\n";
  return out;
}

std::vector<Clause> parse_clause_lines(std::string_view text) {
  std::vector<Clause> out;
  for (const auto& line : split(text, '\n'))
    if (!line.empty() && line[0] != '%') out.push_back(Clause::parse(line));
  return out;
}

Drs from_clauses(const std::vector<Clause>& clauses) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const Clause*>> by_box;
  std::set<std::string> referenced;
  for (const auto& c : clauses) {
    if (!by_box.count(c.box)) order.push_back(c.box);
    by_box[c.box].push_back(&c);
    if (c.op == "NOT" || c.op == "IMP" || c.op == "DIS") referenced.insert(c.args.begin(), c.args.end());
    if (c.op == "PRP" && c.args.size() == 2) referenced.insert(c.args[1]);
  }
  if (clauses.empty()) return Drs{};
  std::string root;
  for (const auto& b : order)
    if (!referenced.count(b)) {
      root = b;
      break;
    }
  if (root.empty()) throw Error("clauses have no top box");

  std::set<std::string> seen;
  std::function<Drs(const std::string&)> build = [&](const std::string& label) {
    if (!seen.insert(label).second) throw Error("box " + label + " is nested twice");
    Drs d;
    d.label = label;
    auto arity = [](const Clause& c, std::size_t n) {
      if (c.args.size() != n) throw Error("wrong number of arguments: " + c.str());
    };
    for (const Clause* c : by_box[label]) {
      if (c->op == "REF") {
        arity(*c, 1);
        d.referents.push_back(c->args[0]);
      } else if (c->op == "NOT") {
        arity(*c, 1);
        d.conditions.push_back(Condition::negation(build(c->args[0])));
      } else if (c->op == "IMP" || c->op == "DIS") {
        arity(*c, 2);
        Drs a = build(c->args[0]);
        Drs b = build(c->args[1]);
        d.conditions.push_back(c->op == "IMP" ? Condition::implication(std::move(a), std::move(b))
                                              : Condition::disjunction(std::move(a), std::move(b)));
      } else if (c->op == "PRP") {
        arity(*c, 2);
        d.conditions.push_back(Condition::proposition(c->args[0], build(c->args[1])));
      } else if (c->op == "Named") {
        arity(*c, 2);
        d.conditions.push_back(Condition::named(c->args[0], unquote(c->args[1])));
      } else if (is_comparison_op(c->op)) {
        arity(*c, 2);
        d.conditions.push_back(Condition::comparison(c->op, read_arg(c->args[0]), read_arg(c->args[1])));
      } else if (c->args.size() == 2 && c->args[0].starts_with('"')) {
        d.conditions.push_back(Condition::concept_of(c->op, Sense::parse(unquote(c->args[0])), c->args[1]));
      } else {
        arity(*c, 2);
        d.conditions.push_back(Condition::role(c->op, c->args[0], read_arg(c->args[1])));
      }
    }
    return d;
  };
  Drs d = build(root);
  if (seen.size() != by_box.size()) throw Error("clauses contain boxes unreachable from " + root);
  return d;
}

// ---------------------------------------------------------------------------

namespace {

void walk_names(const Drs& d, const std::function<void(const std::string&, bool is_box)>& visit) {
  visit(d.label, true);
  for (const auto& r : d.referents) visit(r, false);
  for (const auto& c : d.conditions) {
    for (const auto& a : c.args)
      if (!a.constant) visit(a.value, false);
    for (const auto& b : c.boxes) walk_names(b, visit);
  }
}

Drs rename_all(const Drs& d, const std::map<std::string, std::string>& boxes,
               const std::map<std::string, std::string>& refs) {
  auto ref = [&](const std::string& s) {
    auto it = refs.find(s);
    return it == refs.end() ? s : it->second;
  };
  Drs out;
  out.label = boxes.at(d.label);
  for (const auto& r : d.referents) out.referents.push_back(ref(r));
  for (const auto& c : d.conditions) {
    Condition n = c;
    for (auto& a : n.args)
      if (!a.constant) a.value = ref(a.value);
    for (auto& b : n.boxes) b = rename_all(b, boxes, refs);
    out.conditions.push_back(std::move(n));
  }
  return out;
}

}  // namespace

Drs canonicalize(const Drs& d) {
  std::map<std::string, std::string> boxes, refs;
  std::map<char, int> counters;
  walk_names(d, [&](const std::string& name, bool is_box) {
    auto& table = is_box ? boxes : refs;
    if (table.count(name)) return;
    char prefix = is_box ? 'b' : (is_variable(name) ? name[0] : 'x');
    table[name] = prefix + std::to_string(++counters[prefix]);
  });
  return rename_all(d, boxes, refs);
}

std::vector<std::string> well_formedness_errors(const Drs& d) {
  std::vector<std::string> errors;
  std::set<std::string> labels, introduced;
  std::function<void(const Drs&, std::set<std::string>)> check = [&](const Drs& b,
                                                                     std::set<std::string> acc) {
    if (!is_variable(b.label) || b.label[0] != 'b') errors.push_back("bad box label " + b.label);
    if (!labels.insert(b.label).second) errors.push_back("duplicate box label " + b.label);
    for (const auto& r : b.referents) {
      if (!is_variable(r) || r[0] == 'b') errors.push_back("bad referent " + r + " in " + b.label);
      if (!introduced.insert(r).second) errors.push_back("referent " + r + " introduced twice");
      acc.insert(r);
    }
    for (const auto& c : b.conditions) {
      for (const auto& a : c.args) {
        if (a.constant) continue;
        if (!acc.count(a.value))
          errors.push_back("referent " + a.value + " not accessible in " + b.label + " (" + c.symbol + ")");
      }
      if (c.kind == Condition::Kind::Imp) {
        check(c.boxes[0], acc);
        auto inner = acc;
        inner.insert(c.boxes[0].referents.begin(), c.boxes[0].referents.end());
        check(c.boxes[1], inner);
      } else {
        for (const auto& sub : c.boxes) check(sub, acc);
      }
    }
  };
  check(d, {});
  return errors;
}

std::vector<std::string> all_referents(const Drs& d) {
  std::vector<std::string> out = d.referents;
  for (const auto& c : d.conditions)
    for (const auto& b : c.boxes) {
      auto sub = all_referents(b);
      out.insert(out.end(), sub.begin(), sub.end());
    }
  return out;
}

void rename_referent(Drs& d, const std::string& from, const std::string& to) {
  for (auto& r : d.referents)
    if (r == from) r = to;
  for (auto& c : d.conditions) {
    for (auto& a : c.args)
      if (!a.constant && a.value == from) a.value = to;
    for (auto& b : c.boxes) rename_referent(b, from, to);
  }
}

}  // namespace mb
