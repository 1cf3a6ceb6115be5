#include "cflow/bracket.hpp"

#include <algorithm>
#include <cctype>

namespace cflow {

namespace {
constexpr int kMaxDepth = 16;

struct Parser {
  std::string_view s;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }

  int parse_index() {
    skip_ws();
    std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) throw SyntaxError("expected a leaf index", start);
    long v = 0;
    for (std::size_t i = start; i < pos; ++i) {
      v = v * 10 + (s[i] - '0');
      if (v > 1'000'000) throw SyntaxError("leaf index out of range", start);
    }
    if (v < 1) throw SyntaxError("leaf indices are 1-based", start);
    return static_cast<int>(v);
  }

  BracketExpr parse_expr(int depth) {
    if (depth > kMaxDepth) throw SyntaxError("bracket nesting deeper than 16", pos);
    char c = peek();
    if (c == '[') {
      ++pos;
      BracketExpr l = parse_expr(depth + 1);
      if (peek() != ',') throw SyntaxError("expected ','", pos);
      ++pos;
      BracketExpr r = parse_expr(depth + 1);
      if (peek() != ']') throw SyntaxError("expected ']'", pos);
      ++pos;
      return BracketExpr::node(std::move(l), std::move(r));
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return BracketExpr::leaf(parse_index());
    throw SyntaxError("expected '[' or a leaf index", pos);
  }
};

void collect_leaves(const BracketExpr& b, std::vector<int>& out) {
  if (b.is_leaf()) {
    out.push_back(b.leaf_index());
    return;
  }
  collect_leaves(b.left(), out);
  collect_leaves(b.right(), out);
}
}  // namespace

BracketExpr BracketExpr::leaf(int index) {
  if (index < 1) throw IndexError("leaf index must be >= 1");
  auto n = std::make_shared<Node>();
  n->leaf = index;
  return BracketExpr(std::move(n));
}

BracketExpr BracketExpr::node(BracketExpr left, BracketExpr right) {
  auto n = std::make_shared<Node>();
  n->leaf = 0;
  n->count = left.length() + right.length();
  n->l = left.n_;
  n->r = right.n_;
  return BracketExpr(std::move(n));
}

int BracketExpr::leaf_index() const {
  if (!is_leaf()) throw Error("leaf_index() on an interior node");
  return n_->leaf;
}

BracketExpr BracketExpr::left() const {
  if (is_leaf()) throw Error("left() on a leaf");
  return BracketExpr(n_->l);
}

BracketExpr BracketExpr::right() const {
  if (is_leaf()) throw Error("right() on a leaf");
  return BracketExpr(n_->r);
}

bool BracketExpr::equal(const Node& a, const Node& b) {
  if (a.leaf != b.leaf || a.count != b.count) return false;
  if (a.leaf != 0) return true;
  return equal(*a.l, *b.l) && equal(*a.r, *b.r);
}

BracketExpr parse_bracket(std::string_view text) {
  Parser p{text};
  BracketExpr b = p.parse_expr(1);
  p.skip_ws();
  if (p.pos != text.size()) throw SyntaxError("trailing input after bracket word", p.pos);

  std::vector<int> leaves;
  collect_leaves(b, leaves);
  const int k = static_cast<int>(leaves.size());
  std::vector<bool> seen(static_cast<std::size_t>(k), false);
  for (int idx : leaves) {
    if (idx > k)
      throw IndexError("leaf index " + std::to_string(idx) + " exceeds word length " +
                       std::to_string(k));
    if (seen[static_cast<std::size_t>(idx - 1)])
      throw IndexError("leaf index " + std::to_string(idx) + " repeats");
    seen[static_cast<std::size_t>(idx - 1)] = true;
  }
  return b;
}

std::string format_bracket(const BracketExpr& b) {
  if (b.is_leaf()) return std::to_string(b.leaf_index());
  return "[" + format_bracket(b.left()) + "," + format_bracket(b.right()) + "]";
}

}  // namespace cflow
