/*
 * Copyright 2026 The FeatureBox Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "featurebox/viewpipe/predicate.h"

#include <cctype>
#include <charconv>
#include <set>

#include "featurebox/common/error.h"

namespace featurebox::viewpipe {

using columnstore::ColumnBatch;
using columnstore::ColumnKind;

struct Predicate::Node {
  enum class Type { kAnd, kOr, kNot, kCompare } type;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
  std::string column;
  Op op = Op::kEq;
  Literal literal;
};

namespace {

using NodePtr = std::shared_ptr<const Predicate::Node>;
using Node = Predicate::Node;

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    auto n = parse_or();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("filter '" + std::string(text_) + "': " + what + " at offset " +
                      std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(std::string_view tok) {
    skip_ws();
    if (text_.substr(pos_, tok.size()) != tok) return false;
    // Keyword operators must not run into an identifier.
    if (std::isalpha(static_cast<unsigned char>(tok.front())) && pos_ + tok.size() < text_.size()) {
      char next = text_[pos_ + tok.size()];
      if (std::isalnum(static_cast<unsigned char>(next)) || next == '_') return false;
    }
    pos_ += tok.size();
    return true;
  }

  NodePtr binary(Node::Type type, NodePtr l, NodePtr r) {
    auto n = std::make_shared<Node>();
    n->type = type;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
  }

  NodePtr parse_or() {
    auto l = parse_and();
    while (accept("||") || accept("or")) l = binary(Node::Type::kOr, l, parse_and());
    return l;
  }

  NodePtr parse_and() {
    auto l = parse_unary();
    while (accept("&&") || accept("and")) l = binary(Node::Type::kAnd, l, parse_unary());
    return l;
  }

  NodePtr parse_unary() {
    if (accept("!=")) fail("unexpected '!='");
    if (accept("!") || accept("not")) {
      auto n = std::make_shared<Node>();
      n->type = Node::Type::kNot;
      n->lhs = parse_unary();
      return n;
    }
    if (accept("(")) {
      auto n = parse_or();
      if (!accept(")")) fail("expected ')'");
      return n;
    }
    return parse_compare();
  }

  NodePtr parse_compare() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
            text_[pos_] == '.')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a column name");
    auto n = std::make_shared<Node>();
    n->type = Node::Type::kCompare;
    n->column = std::string(text_.substr(start, pos_ - start));
    if (accept("==")) n->op = Predicate::Op::kEq;
    else if (accept("!=")) n->op = Predicate::Op::kNe;
    else if (accept("<=")) n->op = Predicate::Op::kLe;
    else if (accept(">=")) n->op = Predicate::Op::kGe;
    else if (accept("<")) n->op = Predicate::Op::kLt;
    else if (accept(">")) n->op = Predicate::Op::kGt;
    else fail("expected a comparison operator");
    n->literal = parse_literal();
    return n;
  }

  Predicate::Literal parse_literal() {
    skip_ws();
    if (pos_ >= text_.size()) fail("expected a literal");
    char q = text_[pos_];
    if (q == '"' || q == '\'') {
      size_t end = text_.find(q, pos_ + 1);
      if (end == std::string_view::npos) fail("unterminated string literal");
      std::string s(text_.substr(pos_ + 1, end - pos_ - 1));
      pos_ = end + 1;
      return s;
    }
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '-' ||
            text_[pos_] == '+' || text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
    }
    std::string_view num = text_.substr(start, pos_ - start);
    if (num.empty()) fail("expected a literal");
    int64_t i = 0;
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), i);
    if (ec == std::errc() && p == num.data() + num.size()) return i;
    double d = 0;
    auto [pd, ecd] = std::from_chars(num.data(), num.data() + num.size(), d);
    if (ecd == std::errc() && pd == num.data() + num.size()) return d;
    fail("malformed number '" + std::string(num) + "'");
  }

  std::string_view text_;
  size_t pos_ = 0;
};

template <typename A, typename B>
bool compare(const A& a, Predicate::Op op, const B& b) {
  switch (op) {
    case Predicate::Op::kEq: return a == b;
    case Predicate::Op::kNe: return a != b;
    case Predicate::Op::kLt: return a < b;
    case Predicate::Op::kLe: return a <= b;
    case Predicate::Op::kGt: return a > b;
    case Predicate::Op::kGe: return a >= b;
  }
  return false;
}

std::vector<bool> eval(const Node& n, const ColumnBatch& batch) {
  const size_t rows = batch.row_count();
  switch (n.type) {
    case Node::Type::kAnd:
    case Node::Type::kOr: {
      auto l = eval(*n.lhs, batch);
      auto r = eval(*n.rhs, batch);
      for (size_t i = 0; i < rows; ++i) l[i] = n.type == Node::Type::kAnd ? (l[i] && r[i]) : (l[i] || r[i]);
      return l;
    }
    case Node::Type::kNot: {
      auto v = eval(*n.lhs, batch);
      v.flip();
      return v;
    }
    case Node::Type::kCompare:
      break;
  }
  const auto& col = batch.column(n.column);
  std::vector<bool> out(rows, false);
  const bool lit_string = std::holds_alternative<std::string>(n.literal);
  auto mismatch = [&] {
    throw SchemaError("filter compares column '" + n.column + "' of kind " +
                      std::string(columnstore::kind_name(col.kind())) +
                      " with an incompatible literal");
  };
  switch (col.kind()) {
    case ColumnKind::kInt64: {
      if (lit_string) mismatch();
      const auto& v = col.int64s();
      for (size_t i = 0; i < rows; ++i) {
        if (col.is_null(i)) continue;
        out[i] = std::holds_alternative<int64_t>(n.literal)
                     ? compare(v[i], n.op, std::get<int64_t>(n.literal))
                     : compare(static_cast<double>(v[i]), n.op, std::get<double>(n.literal));
      }
      break;
    }
    case ColumnKind::kFloat32: {
      if (lit_string) mismatch();
      double lit = std::holds_alternative<int64_t>(n.literal)
                       ? static_cast<double>(std::get<int64_t>(n.literal))
                       : std::get<double>(n.literal);
      const auto& v = col.float32s();
      for (size_t i = 0; i < rows; ++i) {
        if (!col.is_null(i)) out[i] = compare(static_cast<double>(v[i]), n.op, lit);
      }
      break;
    }
    case ColumnKind::kUtf8:
    case ColumnKind::kJson: {
      if (!lit_string) mismatch();
      const auto& lit = std::get<std::string>(n.literal);
      const auto& v = col.strings();
      for (size_t i = 0; i < rows; ++i) {
        if (!col.is_null(i)) out[i] = compare(v[i], n.op, lit);
      }
      break;
    }
  }
  return out;
}

void collect(const Node& n, std::set<std::string>& out) {
  if (n.type == Node::Type::kCompare) {
    out.insert(n.column);
    return;
  }
  if (n.lhs) collect(*n.lhs, out);
  if (n.rhs) collect(*n.rhs, out);
}

}  // namespace

Predicate Predicate::parse(std::string_view text) {
  Predicate p;
  p.root_ = Parser(text).parse();
  p.text_ = std::string(text);
  return p;
}

std::vector<std::string> Predicate::columns() const {
  std::set<std::string> out;
  collect(*root_, out);
  return {out.begin(), out.end()};
}

std::vector<bool> Predicate::evaluate(const ColumnBatch& batch) const {
  return eval(*root_, batch);
}

}  // namespace featurebox::viewpipe
