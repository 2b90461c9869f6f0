// Copyright 2026 The qbudget Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "qbudget/circuit.hpp"
#include "qbudget/errors.hpp"

namespace qbudget {

namespace {

struct Statement {
  std::string text;
  std::size_t line;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Comment-stripped, ';'-terminated statements tagged with their first line.
std::vector<Statement> split_statements(std::string_view src) {
  std::vector<Statement> out;
  std::string current;
  std::size_t start_line = 0;
  std::size_t line = 1;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const char c = src[i];
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') ++i;
      if (i == src.size()) break;
    }
    const char ch = src[i];
    if (ch == '\n') {
      ++line;
      current.push_back(' ');
      continue;
    }
    if (ch == ';') {
      if (trim(current).empty()) throw SyntaxError(line, "empty statement");
      out.push_back({std::string(trim(current)), start_line});
      current.clear();
      continue;
    }
    if (trim(current).empty() && !std::isspace(static_cast<unsigned char>(ch))) {
      current.clear();
      start_line = line;
    }
    current.push_back(ch);
  }
  if (!trim(current).empty()) throw SyntaxError(start_line, "missing ';'");
  return out;
}

// Angle expressions: numbers, pi, + - * / and parentheses.
class AngleParser {
 public:
  AngleParser(std::string_view text, std::size_t line) : s_(text), line_(line) {}

  double parse() {
    const double v = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "' in angle");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const { throw SyntaxError(line_, why); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  double expr() {
    double v = term();
    for (;;) {
      if (accept('+')) v += term();
      else if (accept('-')) v -= term();
      else return v;
    }
  }

  double term() {
    double v = unary();
    for (;;) {
      if (accept('*')) {
        v *= unary();
      } else if (accept('/')) {
        const double d = unary();
        if (d == 0.0) fail("division by zero in angle");
        v /= d;
      } else {
        return v;
      }
    }
  }

  double unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return primary();
  }

  double primary() {
    skip_ws();
    if (accept('(')) {
      const double v = expr();
      if (!accept(')')) fail("expected ')' in angle");
      return v;
    }
    if (pos_ < s_.size() && is_ident_start(s_[pos_])) {
      std::size_t end = pos_;
      while (end < s_.size() && is_ident_char(s_[end])) ++end;
      const std::string_view word = s_.substr(pos_, end - pos_);
      if (word != "pi") fail("unknown identifier '" + std::string(word) + "' in angle");
      pos_ = end;
      return std::numbers::pi;
    }
    double v = 0.0;
    const char* first = s_.data() + pos_;
    const char* last = s_.data() + s_.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr == first) fail("malformed angle");
    pos_ += static_cast<std::size_t>(ptr - first);
    return v;
  }

  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

struct Register {
  std::uint64_t offset;
  std::uint64_t size;
};

// One operand: a whole register (index unset) or a single element.
struct Operand {
  const Register* reg;
  std::optional<std::uint64_t> index;
};

class Parser {
 public:
  GateCounts run(std::string_view source) {
    const auto statements = split_statements(source);
    for (std::size_t i = 0; i < statements.size(); ++i) {
      handle(statements[i], i == 0);
    }
    if (qregs_.empty()) throw EmptyCircuit();
    counts_.qubit_count = next_qubit_;
    return counts_;
  }

 private:
  void handle(const Statement& st, bool first) {
    const std::string_view text = st.text;
    std::size_t end = 0;
    while (end < text.size() && is_ident_char(text[end])) ++end;
    if (end == 0) throw SyntaxError(st.line, "expected a statement, found '" + std::string(text) + "'");
    const std::string_view head = text.substr(0, end);
    const std::string_view rest = trim(text.substr(end));

    if (head == "OPENQASM") {
      if (!first) throw SyntaxError(st.line, "version line must come first");
      if (rest != "2.0" && rest != "2") throw SyntaxError(st.line, "unsupported version '" + std::string(rest) + "'");
      return;
    }
    if (head == "include") {
      if (rest.size() < 2 || rest.front() != '"' || rest.back() != '"') {
        throw SyntaxError(st.line, "include expects a quoted file name");
      }
      return;
    }
    if (head == "qreg" || head == "creg") {
      declare(head == "qreg", rest, st.line);
      return;
    }
    if (head == "barrier") {
      for (auto op : split_operands(rest, st.line)) resolve_qubit(op, st.line);
      return;
    }
    if (head == "measure") {
      measure(rest, st.line);
      return;
    }
    apply_gate(head, rest, st.line);
  }

  void declare(bool quantum, std::string_view decl, std::size_t line) {
    const auto open = decl.find('[');
    const auto close = decl.find(']');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open ||
        trim(decl.substr(close + 1)) != "") {
      throw SyntaxError(line, "malformed register declaration");
    }
    const std::string name(trim(decl.substr(0, open)));
    check_identifier(name, line);
    const std::uint64_t size = parse_index(decl.substr(open + 1, close - open - 1), line);
    if (size == 0) throw SyntaxError(line, "register '" + name + "' has size 0");
    if (qregs_.count(name) || cregs_.count(name)) throw SyntaxError(line, "register '" + name + "' redeclared");
    if (quantum) {
      qregs_.emplace(name, Register{next_qubit_, size});
      next_qubit_ += size;
    } else {
      cregs_.emplace(name, Register{0, size});
    }
  }

  static void check_identifier(std::string_view name, std::size_t line) {
    if (name.empty() || !is_ident_start(name.front())) throw SyntaxError(line, "invalid identifier '" + std::string(name) + "'");
    for (char c : name) {
      if (!is_ident_char(c)) throw SyntaxError(line, "invalid identifier '" + std::string(name) + "'");
    }
  }

  static std::uint64_t parse_index(std::string_view text, std::size_t line) {
    text = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
      throw SyntaxError(line, "invalid index '" + std::string(text) + "'");
    }
    return v;
  }

  struct RawOperand {
    std::string name;
    std::optional<std::uint64_t> index;
  };

  static std::vector<RawOperand> split_operands(std::string_view text, std::size_t line) {
    std::vector<RawOperand> out;
    if (trim(text).empty()) throw SyntaxError(line, "missing operands");
    std::size_t start = 0;
    for (;;) {
      const auto comma = text.find(',', start);
      const std::string_view piece =
          trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      RawOperand op;
      const auto open = piece.find('[');
      if (open == std::string_view::npos) {
        op.name = std::string(piece);
      } else {
        if (piece.back() != ']') throw SyntaxError(line, "malformed operand '" + std::string(piece) + "'");
        op.name = std::string(trim(piece.substr(0, open)));
        op.index = parse_index(piece.substr(open + 1, piece.size() - open - 2), line);
      }
      check_identifier(op.name, line);
      out.push_back(std::move(op));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return out;
  }

  Operand resolve(const RawOperand& raw, const std::map<std::string, Register>& regs, std::size_t line) const {
    const auto it = regs.find(raw.name);
    if (it == regs.end()) throw SyntaxError(line, "undeclared register '" + raw.name + "'");
    if (raw.index && *raw.index >= it->second.size) {
      throw SyntaxError(line, "index " + std::to_string(*raw.index) + " out of range for '" + raw.name + "'");
    }
    return {&it->second, raw.index};
  }

  Operand resolve_qubit(const RawOperand& raw, std::size_t line) const { return resolve(raw, qregs_, line); }

  // Number of applications implied by register broadcasting.
  static std::uint64_t broadcast_width(const std::vector<Operand>& ops, std::size_t line) {
    std::optional<std::uint64_t> width;
    for (const auto& op : ops) {
      if (op.index) continue;
      if (width && *width != op.reg->size) throw SyntaxError(line, "register size mismatch in broadcast");
      width = op.reg->size;
    }
    return width.value_or(1);
  }

  static std::uint64_t element(const Operand& op, std::uint64_t i) {
    return op.reg->offset + (op.index ? *op.index : i);
  }

  void measure(std::string_view rest, std::size_t line) {
    const auto arrow = rest.find("->");
    if (arrow == std::string_view::npos) throw SyntaxError(line, "measure expects 'qubit -> bit'");
    const auto q = split_operands(rest.substr(0, arrow), line);
    const auto c = split_operands(rest.substr(arrow + 2), line);
    if (q.size() != 1 || c.size() != 1) throw SyntaxError(line, "measure takes one qubit and one bit");
    const Operand qop = resolve_qubit(q[0], line);
    const Operand cop = resolve(c[0], cregs_, line);
    const std::uint64_t qn = qop.index ? 1 : qop.reg->size;
    const std::uint64_t cn = cop.index ? 1 : cop.reg->size;
    if (qn != cn) throw SyntaxError(line, "measure operand sizes differ");
    counts_[Gate::Measure] += qn;
  }

  void apply_gate(std::string_view name, std::string_view rest, std::size_t line) {
    const auto gate = gate_from_name(name);
    if (!gate || *gate == Gate::Measure) throw UnsupportedGate(std::string(name), line);

    const bool rotation = *gate == Gate::RX || *gate == Gate::RY || *gate == Gate::RZ;
    double angle = 0.0;
    if (!rest.empty() && rest.front() == '(') {
      const auto close = rest.rfind(')');
      if (close == std::string_view::npos) throw SyntaxError(line, "unbalanced '(' in gate parameters");
      if (!rotation) throw SyntaxError(line, "gate '" + std::string(name) + "' takes no parameters");
      const std::string_view params = rest.substr(1, close - 1);
      if (params.find(',') != std::string_view::npos) throw SyntaxError(line, "rotation takes one angle");
      angle = AngleParser(params, line).parse();
      rest = trim(rest.substr(close + 1));
    } else if (rotation) {
      throw SyntaxError(line, "rotation '" + std::string(name) + "' requires an angle");
    }

    const std::size_t arity = *gate == Gate::CCX ? 3 : (*gate == Gate::CX || *gate == Gate::CZ) ? 2 : 1;
    const auto raw = split_operands(rest, line);
    if (raw.size() != arity) {
      throw SyntaxError(line, "gate '" + std::string(name) + "' expects " + std::to_string(arity) + " operand(s)");
    }
    std::vector<Operand> ops;
    for (const auto& r : raw) ops.push_back(resolve_qubit(r, line));

    const std::uint64_t width = broadcast_width(ops, line);
    for (std::uint64_t i = 0; i < width; ++i) {
      for (std::size_t a = 0; a < ops.size(); ++a) {
        for (std::size_t b = a + 1; b < ops.size(); ++b) {
          if (element(ops[a], i) == element(ops[b], i)) throw SyntaxError(line, "repeated qubit operand");
        }
      }
      counts_[*gate] += 1;
      if (rotation) {
        counts_.rotation_angles.push_back(angle);
        if (!is_clifford_angle(angle)) place_rotation(element(ops[0], i));
      }
    }
  }

  // Greedy layering: a new layer starts only when the qubit is already
  // occupied by a rotation in the current layer.
  void place_rotation(std::uint64_t qubit) {
    if (layer_of_.size() <= qubit) layer_of_.resize(qubit + 1, 0);
    if (counts_.rotation_layer_count == 0 || layer_of_[qubit] == counts_.rotation_layer_count) {
      ++counts_.rotation_layer_count;
    }
    layer_of_[qubit] = counts_.rotation_layer_count;
  }

  GateCounts counts_;
  std::map<std::string, Register> qregs_;
  std::map<std::string, Register> cregs_;
  std::uint64_t next_qubit_ = 0;
  std::vector<std::uint64_t> layer_of_;
};

}  // namespace

GateCounts parse_qasm(std::string_view source) { return Parser{}.run(source); }

}  // namespace qbudget
