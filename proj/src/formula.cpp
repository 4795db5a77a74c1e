#include "stlsmooth/formula.hpp"

#include <algorithm>
#include <cmath>

#include "stlsmooth/text.hpp"

namespace stlsmooth {

Predicate::Predicate(std::vector<double> coefficients, double offset, std::string label)
    : coefficients_(std::move(coefficients)), offset_(offset), label_(std::move(label)) {
  for (double c : coefficients_) {
    if (!std::isfinite(c)) throw std::invalid_argument("predicate coefficient is not finite");
  }
  if (!std::isfinite(offset_)) throw std::invalid_argument("predicate offset is not finite");
}

Predicate::Predicate(std::shared_ptr<const NonlinearPredicate> nonlinear)
    : nonlinear_(std::move(nonlinear)) {
  if (!nonlinear_ || !nonlinear_->value) {
    throw std::invalid_argument("nonlinear predicate needs a value callback");
  }
  label_ = nonlinear_->label;
}

double Predicate::robustness(std::span<const double> y) const {
  if (nonlinear_) return nonlinear_->value(y);
  double acc = 0.0;
  for (std::size_t j = 0; j < coefficients_.size(); ++j) acc += coefficients_[j] * y[j];
  return acc - offset_;
}

void Predicate::accumulate_gradient(std::span<const double> y, double scale,
                                    std::span<double> out) const {
  if (nonlinear_) {
    if (!nonlinear_->gradient) {
      throw std::invalid_argument("nonlinear predicate '" + label_ + "' has no gradient callback");
    }
    std::vector<double> g(out.size(), 0.0);
    nonlinear_->gradient(y, g);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += scale * g[j];
    return;
  }
  for (std::size_t j = 0; j < coefficients_.size(); ++j) out[j] += scale * coefficients_[j];
}

bool Predicate::operator==(const Predicate& other) const {
  if (nonlinear_ || other.nonlinear_) return nonlinear_ == other.nonlinear_;
  return offset_ == other.offset_ && coefficients_ == other.coefficients_;
}

Interval::Interval(std::size_t lo_, std::size_t hi_) : lo(lo_), hi(hi_) {
  if (lo > hi) throw std::invalid_argument("interval lower bound exceeds upper bound");
}

const char* to_string(Kind kind) {
  switch (kind) {
    case Kind::Pred: return "Pred";
    case Kind::Not: return "Not";
    case Kind::And: return "And";
    case Kind::Or: return "Or";
    case Kind::Always: return "Always";
    case Kind::Eventually: return "Eventually";
    case Kind::Until: return "Until";
    case Kind::Release: return "Release";
  }
  return "?";
}

Formula Formula::make(Kind kind, std::vector<Formula> children, Interval interval) {
  auto node = std::make_shared<Node>();
  node->kind = kind;
  node->children = std::move(children);
  node->interval = interval;
  return Formula(std::move(node));
}

Formula Formula::pred(Predicate predicate) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::Pred;
  node->predicate = std::move(predicate);
  return Formula(std::move(node));
}

Formula Formula::negate(Formula child) { return make(Kind::Not, {std::move(child)}); }

namespace {

std::vector<Formula> flatten(Kind kind, std::vector<Formula> children) {
  std::vector<Formula> flat;
  flat.reserve(children.size());
  for (auto& c : children) {
    if (c.kind() == kind) {
      flat.insert(flat.end(), c.children().begin(), c.children().end());
    } else {
      flat.push_back(std::move(c));
    }
  }
  return flat;
}

}  // namespace

Formula Formula::conj(std::vector<Formula> children) {
  if (children.empty()) throw std::invalid_argument("conjunction needs at least one operand");
  auto flat = flatten(Kind::And, std::move(children));
  if (flat.size() == 1) return flat.front();
  return make(Kind::And, std::move(flat));
}

Formula Formula::disj(std::vector<Formula> children) {
  if (children.empty()) throw std::invalid_argument("disjunction needs at least one operand");
  auto flat = flatten(Kind::Or, std::move(children));
  if (flat.size() == 1) return flat.front();
  return make(Kind::Or, std::move(flat));
}

Formula Formula::always(Interval interval, Formula child) {
  return make(Kind::Always, {std::move(child)}, interval);
}

Formula Formula::eventually(Interval interval, Formula child) {
  return make(Kind::Eventually, {std::move(child)}, interval);
}

Formula Formula::until(Interval interval, Formula lhs, Formula rhs) {
  return make(Kind::Until, {std::move(lhs), std::move(rhs)}, interval);
}

Formula Formula::release(Interval interval, Formula lhs, Formula rhs) {
  return make(Kind::Release, {std::move(lhs), std::move(rhs)}, interval);
}

const Predicate& Formula::predicate() const {
  if (!node_->predicate) throw std::logic_error("not a predicate node");
  return *node_->predicate;
}

const Interval& Formula::interval() const {
  if (!is_temporal()) throw std::logic_error("not a temporal node");
  return node_->interval;
}

bool Formula::is_temporal() const {
  switch (kind()) {
    case Kind::Always:
    case Kind::Eventually:
    case Kind::Until:
    case Kind::Release: return true;
    default: return false;
  }
}

std::size_t Formula::size() const {
  std::size_t n = 1;
  for (const auto& c : children()) n += c.size();
  return n;
}

bool Formula::operator==(const Formula& other) const {
  if (node_ == other.node_) return true;
  if (kind() != other.kind()) return false;
  if (kind() == Kind::Pred) return predicate() == other.predicate();
  if (is_temporal() && !(interval() == other.interval())) return false;
  if (children().size() != other.children().size()) return false;
  return std::equal(children().begin(), children().end(), other.children().begin());
}

namespace {

Formula nnf(const Formula& phi, bool negated) {
  switch (phi.kind()) {
    case Kind::Pred: return negated ? Formula::negate(phi) : phi;
    case Kind::Not: return nnf(phi.child(0), !negated);
    case Kind::And:
    case Kind::Or: {
      std::vector<Formula> out;
      out.reserve(phi.children().size());
      for (const auto& c : phi.children()) out.push_back(nnf(c, negated));
      bool conj = (phi.kind() == Kind::And) != negated;
      return conj ? Formula::conj(std::move(out)) : Formula::disj(std::move(out));
    }
    case Kind::Always:
    case Kind::Eventually: {
      auto body = nnf(phi.child(0), negated);
      bool always = (phi.kind() == Kind::Always) != negated;
      return always ? Formula::always(phi.interval(), body)
                    : Formula::eventually(phi.interval(), body);
    }
    case Kind::Until:
    case Kind::Release: {
      auto lhs = nnf(phi.child(0), negated);
      auto rhs = nnf(phi.child(1), negated);
      bool until = (phi.kind() == Kind::Until) != negated;
      return until ? Formula::until(phi.interval(), lhs, rhs)
                   : Formula::release(phi.interval(), lhs, rhs);
    }
  }
  throw std::logic_error("unknown formula kind");
}

}  // namespace

Formula to_nnf(const Formula& phi) { return nnf(phi, false); }

bool is_nnf(const Formula& phi) {
  if (phi.kind() == Kind::Not) return phi.child(0).kind() == Kind::Pred;
  return std::all_of(phi.children().begin(), phi.children().end(),
                     [](const Formula& c) { return is_nnf(c); });
}

std::size_t horizon(const Formula& phi) {
  switch (phi.kind()) {
    case Kind::Pred: return 0;
    case Kind::Not: return horizon(phi.child(0));
    case Kind::And:
    case Kind::Or: {
      std::size_t h = 0;
      for (const auto& c : phi.children()) h = std::max(h, horizon(c));
      return h;
    }
    case Kind::Always:
    case Kind::Eventually: return phi.interval().hi + horizon(phi.child(0));
    case Kind::Until:
    case Kind::Release:
      return phi.interval().hi + std::max(horizon(phi.child(0)), horizon(phi.child(1)));
  }
  return 0;
}

std::size_t required_dim(const Formula& phi) {
  if (phi.kind() == Kind::Pred) {
    const auto& pr = phi.predicate();
    if (!pr.is_linear()) return 0;
    const auto& c = pr.coefficients();
    for (std::size_t j = c.size(); j > 0; --j) {
      if (c[j - 1] != 0.0) return j;
    }
    return 0;
  }
  std::size_t d = 0;
  for (const auto& c : phi.children()) d = std::max(d, required_dim(c));
  return d;
}

namespace {

std::string predicate_text(const Predicate& pr) {
  if (!pr.is_linear()) return "<" + pr.label() + ">";
  std::string out;
  const auto& c = pr.coefficients();
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (c[j] == 0.0) continue;
    if (!out.empty()) out += " + ";
    out += format_double(c[j]) + "*y" + std::to_string(j);
  }
  if (out.empty()) out = "0*y0";
  return out + " >= " + format_double(pr.offset());
}

std::string interval_text(const Interval& i) {
  return "[" + std::to_string(i.lo) + "," + std::to_string(i.hi) + "]";
}

}  // namespace

std::string to_string(const Formula& phi) {
  switch (phi.kind()) {
    case Kind::Pred: return "(" + predicate_text(phi.predicate()) + ")";
    case Kind::Not: return "not " + to_string(phi.child(0));
    case Kind::And:
    case Kind::Or: {
      std::string sep = phi.kind() == Kind::And ? " and " : " or ";
      std::string out = "(";
      for (std::size_t i = 0; i < phi.children().size(); ++i) {
        if (i) out += sep;
        out += to_string(phi.child(i));
      }
      return out + ")";
    }
    case Kind::Always: return "(G" + interval_text(phi.interval()) + " " + to_string(phi.child(0)) + ")";
    case Kind::Eventually:
      return "(F" + interval_text(phi.interval()) + " " + to_string(phi.child(0)) + ")";
    case Kind::Until:
    case Kind::Release: {
      std::string op = phi.kind() == Kind::Until ? " U" : " R";
      return "(" + to_string(phi.child(0)) + op + interval_text(phi.interval()) + " " +
             to_string(phi.child(1)) + ")";
    }
  }
  return {};
}

void validate_regions(const RegionTable& regions) {
  for (const auto& [name, box] : regions) {
    if (box.bounds.empty()) throw std::invalid_argument("region '" + name + "' has no bounds");
    for (const auto& [dim, range] : box.bounds) {
      if (!(range.first < range.second)) {
        throw std::invalid_argument("region '" + name + "' has min >= max on dimension " +
                                    std::to_string(dim));
      }
    }
  }
}

namespace {

std::vector<Formula> box_faces(const std::string& name, const Box& box, std::size_t p) {
  std::vector<Formula> faces;
  for (const auto& [dim, range] : box.bounds) {
    if (dim >= p) {
      throw std::invalid_argument("region '" + name + "' uses dimension " + std::to_string(dim) +
                                  " but the signal has " + std::to_string(p));
    }
    std::vector<double> lower(p, 0.0);
    std::vector<double> upper(p, 0.0);
    lower[dim] = 1.0;
    upper[dim] = -1.0;
    auto dim_name = "y" + std::to_string(dim);
    faces.push_back(Formula::pred(Predicate(lower, range.first, name + "." + dim_name + ">=min")));
    faces.push_back(Formula::pred(Predicate(upper, -range.second, name + "." + dim_name + "<=max")));
  }
  return faces;
}

}  // namespace

Formula region_formula(const std::string& name, const Box& box, std::size_t p) {
  return Formula::conj(box_faces(name, box, p));
}

Formula region_complement(const std::string& name, const Box& box, std::size_t p) {
  auto faces = box_faces(name, box, p);
  for (auto& f : faces) f = Formula::negate(f);
  return Formula::disj(std::move(faces));
}

ParseError::ParseError(const std::string& message, std::size_t position)
    : std::runtime_error(message + " at position " + std::to_string(position)),
      position_(position) {}

}  // namespace stlsmooth
