#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cflow/errors.hpp"

namespace cflow {

/// Immutable binary bracket word.
///
/// A bracket expression of length k is either a leaf holding a 1-based slot
/// index, or a node [l, r] pairing two sub-expressions. The leaves of a
/// well-formed expression carry each index 1..k exactly once, so the word can
/// be instantiated over any carrier with a binary bracket operation.
class BracketExpr {
 public:
  static BracketExpr leaf(int index);
  static BracketExpr node(BracketExpr left, BracketExpr right);

  bool is_leaf() const { return n_->leaf != 0; }
  /// 1-based slot index; only valid on leaves.
  int leaf_index() const;
  BracketExpr left() const;
  BracketExpr right() const;
  /// Number of leaves.
  int length() const { return n_->count; }

  friend bool operator==(const BracketExpr& a, const BracketExpr& b) {
    return equal(*a.n_, *b.n_);
  }
  friend bool operator!=(const BracketExpr& a, const BracketExpr& b) { return !(a == b); }

 private:
  struct Node {
    int leaf = 0;  // 0 marks an interior node
    std::shared_ptr<const Node> l, r;
    int count = 1;
  };
  static bool equal(const Node& a, const Node& b);
  explicit BracketExpr(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
  std::shared_ptr<const Node> n_;
};

/// Parses "[[1,2],3]"-style text. Nesting is limited to depth 16.
/// Throws SyntaxError on malformed text and IndexError when the leaf set is
/// not a permutation of 1..k.
BracketExpr parse_bracket(std::string_view text);

/// Canonical text form; parse_bracket(format_bracket(b)) == b.
std::string format_bracket(const BracketExpr& b);

inline int bracket_length(const BracketExpr& b) { return b.length(); }

namespace detail {
template <typename Carrier, typename Bracket>
Carrier eval_bracket_rec(const BracketExpr& b, const std::vector<Carrier>& leaves,
                         Bracket& bracket) {
  if (b.is_leaf()) return leaves[static_cast<std::size_t>(b.leaf_index() - 1)];
  return bracket(eval_bracket_rec(b.left(), leaves, bracket),
                 eval_bracket_rec(b.right(), leaves, bracket));
}
}  // namespace detail

/// Folds a bracket word over concrete leaves with the supplied bracket
/// operation. Works for any copyable carrier (matrices, vector fields,
/// local curves, group elements).
template <typename Carrier, typename Bracket>
Carrier eval_bracket(const BracketExpr& b, const std::vector<Carrier>& leaves,
                     Bracket&& bracket) {
  if (static_cast<int>(leaves.size()) != b.length())
    throw ArityError("bracket word of length " + std::to_string(b.length()) +
                     " applied to " + std::to_string(leaves.size()) + " operands");
  return detail::eval_bracket_rec(b, leaves, bracket);
}

}  // namespace cflow
