// Bounded-time STL formulas over discrete-time output signals.
//
// A Formula is an immutable handle to a tree of nodes. And/Or nodes are
// n-ary and kept flat: the factories splice nested conjunctions (resp.
// disjunctions) into their parent, so one smooth min/max spans all of them.

#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stlsmooth {

/// Predicate whose robustness is an arbitrary differentiable function of y_t.
/// Supplied programmatically; the text grammar only produces linear ones.
struct NonlinearPredicate {
  std::string label;
  std::function<double(std::span<const double>)> value;
  /// Writes d value / d y_t into the second argument (same length as y_t).
  std::function<void(std::span<const double>, std::span<double>)> gradient;
};

/// mu(y_t) - c >= 0 with mu(y) = coefficients . y, or a nonlinear callback.
class Predicate {
 public:
  Predicate(std::vector<double> coefficients, double offset, std::string label = {});
  explicit Predicate(std::shared_ptr<const NonlinearPredicate> nonlinear);

  bool is_linear() const { return nonlinear_ == nullptr; }
  std::size_t dim() const { return coefficients_.size(); }
  const std::vector<double>& coefficients() const { return coefficients_; }
  double offset() const { return offset_; }
  const std::string& label() const { return label_; }
  const NonlinearPredicate* nonlinear() const { return nonlinear_.get(); }

  /// Robustness mu(y_t) - c.
  double robustness(std::span<const double> y) const;
  /// Accumulates scale * d robustness / d y_t into out.
  void accumulate_gradient(std::span<const double> y, double scale, std::span<double> out) const;

  /// Structural equality; labels are ignored.
  bool operator==(const Predicate& other) const;

 private:
  std::vector<double> coefficients_;
  double offset_ = 0.0;
  std::string label_;
  std::shared_ptr<const NonlinearPredicate> nonlinear_;
};

/// Closed integer interval [lo, hi] of timesteps.
struct Interval {
  std::size_t lo = 0;
  std::size_t hi = 0;

  Interval() = default;
  Interval(std::size_t lo_, std::size_t hi_);
  std::size_t width() const { return hi - lo + 1; }
  bool operator==(const Interval&) const = default;
};

enum class Kind { Pred, Not, And, Or, Always, Eventually, Until, Release };

const char* to_string(Kind kind);

class Formula {
 public:
  static Formula pred(Predicate predicate);
  static Formula negate(Formula child);
  /// Flattens nested And nodes. A single child is returned unchanged.
  static Formula conj(std::vector<Formula> children);
  static Formula disj(std::vector<Formula> children);
  static Formula always(Interval interval, Formula child);
  static Formula eventually(Interval interval, Formula child);
  static Formula until(Interval interval, Formula lhs, Formula rhs);
  static Formula release(Interval interval, Formula lhs, Formula rhs);

  Kind kind() const { return node_->kind; }
  const Predicate& predicate() const;
  std::span<const Formula> children() const { return node_->children; }
  const Formula& child(std::size_t i) const { return node_->children.at(i); }
  const Interval& interval() const;

  bool is_temporal() const;
  /// Node count.
  std::size_t size() const;

  bool operator==(const Formula& other) const;

 private:
  struct Node {
    Kind kind;
    std::optional<Predicate> predicate;
    std::vector<Formula> children;
    Interval interval;
  };

  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Formula make(Kind kind, std::vector<Formula> children, Interval interval = {});

  std::shared_ptr<const Node> node_;
};

/// Negation-normal form: Not appears only directly above predicates.
Formula to_nnf(const Formula& phi);
bool is_nnf(const Formula& phi);

/// Minimal T such that the robustness at time 0 depends only on y_0..y_T.
std::size_t horizon(const Formula& phi);

/// Largest signal dimension referenced by a linear predicate, plus one.
/// Returns 0 when the formula has no linear predicate.
std::size_t required_dim(const Formula& phi);

/// Fully parenthesized text that parse() maps back to an equal formula.
std::string to_string(const Formula& phi);

/// Axis-aligned box over a subset of signal dimensions.
struct Box {
  std::map<std::size_t, std::pair<double, double>> bounds;
};

/// Named regions; atoms in formula text refer to these.
using RegionTable = std::map<std::string, Box>;

/// Conjunction of the box's face half-planes: y_d - min >= 0 and max - y_d >= 0.
Formula region_formula(const std::string& name, const Box& box, std::size_t p);
/// Disjunction of the negated face predicates (outside the box).
Formula region_complement(const std::string& name, const Box& box, std::size_t p);

void validate_regions(const RegionTable& regions);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Parses formula text against a region table for signals of dimension p.
Formula parse(std::string_view text, const RegionTable& regions, std::size_t p);

}  // namespace stlsmooth
