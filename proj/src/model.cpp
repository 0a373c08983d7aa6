#include "carleman/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <utility>

#include <json.hpp>

#include "carleman/io.hpp"

namespace carleman {

index_t dim_power(index_t n, int j) {
  if (n < 1 || j < 0) throw DimensionMismatch("dim_power needs n >= 1, j >= 0");
  index_t p = 1;
  for (int m = 0; m < j; ++m) {
    if (p > kSizeGuard / n)
      throw AssemblyLimitExceeded("dimension " + std::to_string(n) + "^" + std::to_string(j) +
                                  " exceeds the size guard (2^26)");
    p *= n;
  }
  return p;
}

index_t canonical_column(const std::vector<int>& exponents, int n) {
  index_t idx = 0;
  for (int letter = 0; letter < n; ++letter)
    for (int rep = 0; rep < exponents[static_cast<std::size_t>(letter)]; ++rep)
      idx = idx * n + letter;
  return idx;
}

PolyODE make_ode(int n, std::vector<SparseMatrix> F) {
  if (n < 1) throw DimensionMismatch("state dimension must be positive");
  if (F.empty()) throw Error("a polynomial ODE needs at least the degree-1 coefficient matrix");
  for (std::size_t j = 0; j < F.size(); ++j) {
    const index_t want = dim_power(n, static_cast<int>(j) + 1);
    if (F[j].rows() != n || F[j].cols() != want)
      throw DimensionMismatch("F_" + std::to_string(j + 1) + " must be " + std::to_string(n) +
                              " x " + std::to_string(want) + ", got " +
                              std::to_string(F[j].rows()) + " x " + std::to_string(F[j].cols()));
  }
  while (F.size() > 1 && F.back().nnz() == 0) F.pop_back();
  if (F.back().nnz() == 0)
    throw Error("identically zero right-hand side: the system has no true degree");
  PolyODE ode;
  ode.n = n;
  ode.k = static_cast<int>(F.size());
  ode.F = std::move(F);
  return ode;
}

PolyODE compile(const std::vector<std::vector<Monomial>>& rhs, int n) {
  if (n < 1) throw DimensionMismatch("state dimension must be positive");
  if (static_cast<int>(rhs.size()) != n)
    throw DimensionMismatch("expected " + std::to_string(n) + " right-hand sides, got " +
                            std::to_string(rhs.size()));
  int kmax = 1;
  for (const auto& row : rhs)
    for (const Monomial& m : row) {
      if (static_cast<int>(m.exponents.size()) != n)
        throw ExponentLengthMismatch("monomial exponent vector has length " +
                                     std::to_string(m.exponents.size()) + ", expected " +
                                     std::to_string(n));
      for (int e : m.exponents)
        if (e < 0) throw Error("negative exponent in a monomial");
      if (!std::isfinite(m.coeff)) throw Error("non-finite monomial coefficient");
      if (m.coeff == 0.0) continue;
      if (m.degree() == 0)
        throw DegreeZeroTerm("constant term " + fmt_double(m.coeff) +
                             " violates the f(0) = 0 requirement");
      kmax = std::max(kmax, m.degree());
    }
  std::vector<std::vector<Entry>> triplets(static_cast<std::size_t>(kmax));
  for (int r = 0; r < n; ++r)
    for (const Monomial& m : rhs[static_cast<std::size_t>(r)]) {
      if (m.coeff == 0.0) continue;
      const int j = m.degree();
      triplets[static_cast<std::size_t>(j - 1)].push_back(
          {static_cast<std::int32_t>(r),
           static_cast<std::int32_t>(canonical_column(m.exponents, n)), m.coeff});
    }
  std::vector<SparseMatrix> F;
  F.reserve(static_cast<std::size_t>(kmax));
  for (int j = 1; j <= kmax; ++j)
    F.emplace_back(n, dim_power(n, j), std::move(triplets[static_cast<std::size_t>(j - 1)]));
  return make_ode(n, std::move(F));
}

PolyODE compile(const ModelInput& in) { return compile(in.rhs, in.n); }

void normalize(ModelInput& in) {
  for (auto& row : in.rhs) {
    std::map<std::vector<int>, double> acc;
    for (const Monomial& m : row) acc[m.exponents] += m.coeff;
    row.clear();
    for (auto& [e, c] : acc)
      if (c != 0.0) row.push_back({c, e});
    std::stable_sort(row.begin(), row.end(), [](const Monomial& a, const Monomial& b) {
      const int da = a.degree(), db = b.degree();
      return da != db ? da < db : a.exponents < b.exponents;
    });
  }
}

// ---------------------------------------------------------------------------
// Expression DSL
// ---------------------------------------------------------------------------

namespace {

struct Token {
  enum Kind {
    Ident,
    Var,
    Number,
    KwParam,
    Prime,
    Equals,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End
  };
  Kind kind;
  std::string text;
  double number = 0.0;
  int var_index = 0;
  int line = 1;
  int col = 1;
};

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// "x" followed by a positive integer without a leading zero is a state
// variable; any other identifier is a parameter name.
int var_index_of(const std::string& s) {
  if (s.size() < 2 || s[0] != 'x' || s[1] == '0') return 0;
  int idx = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!is_digit(s[i])) return 0;
    if (idx > 100000000) return 0;
    idx = idx * 10 + (s[i] - '0');
  }
  return idx;
}

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto push = [&](Token::Kind k, std::string s, int l, int c) {
    Token t;
    t.kind = k;
    t.text = std::move(s);
    t.line = l;
    t.col = c;
    out.push_back(std::move(t));
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++col;
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    const int l = line, cl = col;
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && is_ident_char(text[j])) ++j;
      std::string word = text.substr(i, j - i);
      col += static_cast<int>(j - i);
      i = j;
      if (word == "param") {
        push(Token::KwParam, std::move(word), l, cl);
      } else if (int v = var_index_of(word); v > 0) {
        push(Token::Var, std::move(word), l, cl);
        out.back().var_index = v;
      } else {
        push(Token::Ident, std::move(word), l, cl);
      }
      continue;
    }
    if (is_digit(c) || (c == '.' && i + 1 < text.size() && is_digit(text[i + 1]))) {
      std::size_t j = i;
      while (j < text.size() && is_digit(text[j])) ++j;
      if (j < text.size() && text[j] == '.') {
        ++j;
        while (j < text.size() && is_digit(text[j])) ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t e = j + 1;
        if (e < text.size() && (text[e] == '+' || text[e] == '-')) ++e;
        if (e < text.size() && is_digit(text[e])) {
          while (e < text.size() && is_digit(text[e])) ++e;
          j = e;
        }
      }
      std::string word = text.substr(i, j - i);
      double value = 0.0;
      auto res = std::from_chars(word.data(), word.data() + word.size(), value);
      if (res.ec != std::errc{} || res.ptr != word.data() + word.size())
        throw SyntaxError("malformed number '" + word + "'", l, cl);
      col += static_cast<int>(j - i);
      i = j;
      push(Token::Number, std::move(word), l, cl);
      out.back().number = value;
      continue;
    }
    Token::Kind k;
    switch (c) {
      case '\'': k = Token::Prime; break;
      case '=': k = Token::Equals; break;
      case '+': k = Token::Plus; break;
      case '-': k = Token::Minus; break;
      case '*': k = Token::Star; break;
      case '^': k = Token::Caret; break;
      case '(': k = Token::LParen; break;
      case ')': k = Token::RParen; break;
      default:
        throw SyntaxError(std::string("unexpected character '") + c + "'", l, cl);
    }
    push(k, std::string(1, c), l, cl);
    ++col;
    ++i;
  }
  push(Token::End, "", line, col);
  return out;
}

// Sparse exponent maps keep the parser independent of the (yet unknown)
// state dimension; polynomials live on them until the whole file is read.
using Expo = std::map<int, int>;
using Poly = std::map<Expo, double>;

void poly_add(Poly& acc, const Poly& p, double sign) {
  for (const auto& [e, c] : p) {
    auto it = acc.find(e);
    const double v = (it == acc.end() ? 0.0 : it->second) + sign * c;
    if (v == 0.0) {
      if (it != acc.end()) acc.erase(it);
    } else if (it == acc.end()) {
      acc.emplace(e, v);
    } else {
      it->second = v;
    }
  }
}

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out;
  for (const auto& [ea, ca] : a)
    for (const auto& [eb, cb] : b) {
      Expo e = ea;
      for (const auto& [v, p] : eb) e[v] += p;
      out[e] += ca * cb;
    }
  for (auto it = out.begin(); it != out.end();)
    it = it->second == 0.0 ? out.erase(it) : std::next(it);
  return out;
}

constexpr int kMaxExponent = 64;

struct Parser {
  std::vector<Token> toks;
  std::size_t pos = 0;
  std::map<std::string, double> params;
  std::map<int, Poly> equations;
  std::map<int, std::pair<int, int>> eq_loc;
  int max_var = 0;

  const Token& cur() const { return toks[pos]; }
  void advance() {
    if (cur().kind != Token::End) ++pos;
  }
  bool accept(Token::Kind k) {
    if (cur().kind != k) return false;
    advance();
    return true;
  }
  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = cur();
    const std::string got = t.kind == Token::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError("expected " + what + ", found " + got, t.line, t.col);
  }

  void file() {
    while (cur().kind != Token::End) {
      if (cur().kind == Token::KwParam)
        param_decl();
      else if (cur().kind == Token::Var)
        eq_decl();
      else
        fail("'param' or an equation 'x<i>\' = ...'");
    }
    if (equations.empty()) fail("at least one equation");
  }

  void param_decl() {
    advance();  // param
    if (cur().kind == Token::Var)
      throw SyntaxError("parameter name '" + cur().text + "' collides with a state variable",
                        cur().line, cur().col);
    if (cur().kind != Token::Ident) fail("a parameter name");
    const Token name = cur();
    advance();
    if (!accept(Token::Equals)) fail("'='");
    double sign = 1.0;
    if (accept(Token::Minus)) sign = -1.0;
    if (cur().kind != Token::Number) fail("a number");
    if (params.count(name.text))
      throw SyntaxError("parameter '" + name.text + "' is already defined", name.line, name.col);
    params[name.text] = sign * cur().number;
    advance();
  }

  void eq_decl() {
    const Token var = cur();
    advance();
    if (!accept(Token::Prime)) fail("'''");
    if (!accept(Token::Equals)) fail("'='");
    if (equations.count(var.var_index))
      throw SyntaxError("equation for '" + var.text + "' is already defined", var.line, var.col);
    max_var = std::max(max_var, var.var_index);
    equations[var.var_index] = expr();
    eq_loc[var.var_index] = {var.line, var.col};
  }

  Poly expr() {
    double sign = 1.0;
    if (accept(Token::Minus))
      sign = -1.0;
    else
      accept(Token::Plus);
    Poly acc;
    poly_add(acc, term(), sign);
    while (cur().kind == Token::Plus || cur().kind == Token::Minus) {
      const double s = cur().kind == Token::Minus ? -1.0 : 1.0;
      advance();
      poly_add(acc, term(), s);
    }
    return acc;
  }

  Poly term() {
    Poly acc = factor();
    while (accept(Token::Star)) acc = poly_mul(acc, factor());
    return acc;
  }

  Poly factor() {
    Poly base = atom();
    if (accept(Token::Caret)) {
      if (cur().kind != Token::Number) fail("a positive integer exponent");
      const double v = cur().number;
      const int e = static_cast<int>(v);
      if (v != static_cast<double>(e) || e < 1)
        throw SyntaxError("exponent must be a positive integer, got '" + cur().text + "'",
                          cur().line, cur().col);
      if (e > kMaxExponent)
        throw SyntaxError("exponent " + cur().text + " exceeds the supported maximum " +
                              std::to_string(kMaxExponent),
                          cur().line, cur().col);
      advance();
      Poly acc = base;
      for (int m = 1; m < e; ++m) acc = poly_mul(acc, base);
      return acc;
    }
    return base;
  }

  Poly atom() {
    const Token t = cur();
    switch (t.kind) {
      case Token::Number:
        advance();
        return t.number == 0.0 ? Poly{} : Poly{{Expo{}, t.number}};
      case Token::Var: {
        advance();
        max_var = std::max(max_var, t.var_index);
        return Poly{{Expo{{t.var_index, 1}}, 1.0}};
      }
      case Token::Ident: {
        auto it = params.find(t.text);
        if (it == params.end())
          throw UnknownIdentifier("unknown identifier '" + t.text + "'", t.line, t.col);
        advance();
        return it->second == 0.0 ? Poly{} : Poly{{Expo{}, it->second}};
      }
      case Token::LParen: {
        advance();
        Poly inner = expr();
        if (!accept(Token::RParen)) fail("')'");
        return inner;
      }
      default:
        fail("a number, identifier, variable, or '('");
    }
  }
};

}  // namespace

ModelInput parse_dsl(const std::string& text) {
  Parser parser;
  parser.toks = lex(text);
  parser.file();

  if (parser.max_var > kSizeGuard)
    throw AssemblyLimitExceeded("state dimension " + std::to_string(parser.max_var) +
                                " exceeds the size guard (2^26)");

  ModelInput in;
  in.n = parser.max_var;
  in.rhs.resize(static_cast<std::size_t>(in.n));
  for (const auto& [var, poly] : parser.equations) {
    auto& row = in.rhs[static_cast<std::size_t>(var - 1)];
    for (const auto& [expo, coeff] : poly) {
      if (expo.empty()) {
        const auto loc = parser.eq_loc.at(var);
        throw ConstantTermError("right-hand side of x" + std::to_string(var) +
                                    " has constant term " + fmt_double(coeff) +
                                    "; the model requires f(0) = 0",
                                loc.first, loc.second);
      }
      Monomial m;
      m.coeff = coeff;
      m.exponents.assign(static_cast<std::size_t>(in.n), 0);
      for (const auto& [v, e] : expo) m.exponents[static_cast<std::size_t>(v - 1)] = e;
      row.push_back(std::move(m));
    }
  }
  normalize(in);
  return in;
}

std::string to_dsl(const ModelInput& in) {
  std::string out;
  for (int i = 1; i <= in.n; ++i) {
    const auto& row = in.rhs[static_cast<std::size_t>(i - 1)];
    out += "x" + std::to_string(i) + "' = ";
    if (row.empty()) {
      out += "0\n";
      continue;
    }
    for (std::size_t m = 0; m < row.size(); ++m) {
      const Monomial& mono = row[m];
      if (m == 0)
        out += mono.coeff < 0 ? "-" : "";
      else
        out += mono.coeff < 0 ? " - " : " + ";
      out += fmt_double(std::abs(mono.coeff));
      for (int v = 0; v < in.n; ++v) {
        const int e = mono.exponents[static_cast<std::size_t>(v)];
        if (e == 0) continue;
        out += "*x" + std::to_string(v + 1);
        if (e > 1) out += "^" + std::to_string(e);
      }
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON interchange
// ---------------------------------------------------------------------------

ModelInput model_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SyntaxError(std::string("malformed JSON: ") + e.what(), 0, 0);
  }
  if (!doc.is_object() || !doc.contains("n") || !doc.contains("rhs"))
    throw SyntaxError("model JSON must be an object with fields \"n\" and \"rhs\"", 0, 0);
  if (!doc["n"].is_number_integer() || doc["n"].get<std::int64_t>() < 1)
    throw SyntaxError("\"n\" must be a positive integer", 0, 0);
  const int n = doc["n"].get<int>();
  if (!doc["rhs"].is_array() || static_cast<int>(doc["rhs"].size()) != n)
    throw SyntaxError("\"rhs\" must be an array of length n = " + std::to_string(n), 0, 0);
  ModelInput in;
  in.n = n;
  in.rhs.resize(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    const auto& row = doc["rhs"][static_cast<std::size_t>(r)];
    if (!row.is_array())
      throw SyntaxError("\"rhs\"[" + std::to_string(r) + "] must be an array of monomials", 0, 0);
    for (const auto& item : row) {
      if (!item.is_object() || !item.contains("coeff") || !item.contains("exponents") ||
          !item["coeff"].is_number() || !item["exponents"].is_array() ||
          static_cast<int>(item["exponents"].size()) != n)
        throw SyntaxError("each monomial must be {\"coeff\": number, \"exponents\": [" +
                              std::to_string(n) + " nonnegative integers]}",
                          0, 0);
      Monomial m;
      m.coeff = item["coeff"].get<double>();
      if (!std::isfinite(m.coeff)) throw SyntaxError("monomial coefficient must be finite", 0, 0);
      for (const auto& e : item["exponents"]) {
        if (!e.is_number_integer() || e.get<std::int64_t>() < 0)
          throw SyntaxError("exponents must be nonnegative integers", 0, 0);
        m.exponents.push_back(e.get<int>());
      }
      in.rhs[static_cast<std::size_t>(r)].push_back(std::move(m));
    }
  }
  normalize(in);
  return in;
}

std::string model_to_json(const ModelInput& in) {
  nlohmann::json doc;
  doc["n"] = in.n;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : in.rhs) {
    nlohmann::json items = nlohmann::json::array();
    for (const Monomial& m : row) items.push_back({{"coeff", m.coeff}, {"exponents", m.exponents}});
    rows.push_back(std::move(items));
  }
  doc["rhs"] = std::move(rows);
  return doc.dump(2) + "\n";
}

ModelInput monomials_from_ode(const PolyODE& ode) {
  ModelInput in;
  in.n = ode.n;
  in.rhs.resize(static_cast<std::size_t>(ode.n));
  for (int j = 1; j <= ode.k; ++j) {
    for (const Entry& e : ode.coeff(j).entries()) {
      Monomial m;
      m.coeff = e.value;
      m.exponents.assign(static_cast<std::size_t>(ode.n), 0);
      index_t word = e.col;
      for (int pos = 0; pos < j; ++pos) {
        ++m.exponents[static_cast<std::size_t>(word % ode.n)];
        word /= ode.n;
      }
      in.rhs[static_cast<std::size_t>(e.row)].push_back(std::move(m));
    }
  }
  normalize(in);
  return in;
}

std::vector<double> degree_norms(const PolyODE& ode) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(ode.k));
  for (int j = 1; j <= ode.k; ++j) out.push_back(sup_norm_mat(ode.coeff(j)));
  return out;
}

Vector eval_rhs(const PolyODE& ode, const Vector& x) {
  if (static_cast<int>(x.size()) != ode.n)
    throw DimensionMismatch("state has length " + std::to_string(x.size()) + ", expected " +
                            std::to_string(ode.n));
  Vector out(x.size(), 0.0);
  for (int j = 1; j <= ode.k; ++j) {
    const Vector xj = kron_power_vec(x, j);
    const Vector fj = matvec(ode.coeff(j), xj);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += fj[i];
  }
  return out;
}

Vector eval_monomials(const ModelInput& in, const Vector& x) {
  Vector out(static_cast<std::size_t>(in.n), 0.0);
  for (int r = 0; r < in.n; ++r)
    for (const Monomial& m : in.rhs[static_cast<std::size_t>(r)]) {
      double v = m.coeff;
      for (int var = 0; var < in.n; ++var)
        for (int e = 0; e < m.exponents[static_cast<std::size_t>(var)]; ++e)
          v *= x[static_cast<std::size_t>(var)];
      out[static_cast<std::size_t>(r)] += v;
    }
  return out;
}

}  // namespace carleman
