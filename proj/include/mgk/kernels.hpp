#ifndef MGK_KERNELS_HPP
#define MGK_KERNELS_HPP

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mgk/graph.hpp"

namespace mgk {

enum class KernelRole { vertex, edge };

class KernelShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/**
 * Positive-definite similarity between two labels.
 *
 * Variants:
 *   constant-one         1 for any pair (unlabeled mode)
 *   kronecker-delta(h)   1 on equal labels, h otherwise
 *   square-exponential   exp(-alpha * |a - b|^2)
 *   compact-polynomial   sum_i c_i |a - b|^i, clamped to [0, 1]
 *   product              product of per-component kernels
 *   r-convolution        mean of the inner kernel over all component pairs
 *
 * Vertex kernels must return values in (0, 1], edge kernels in [0, 1]. With
 * strict range checking enabled, out-of-range values throw instead of being
 * clamped.
 */
class BaseKernel {
 public:
  enum class Kind {
    constant_one,
    kronecker_delta,
    square_exponential,
    compact_polynomial,
    product,
    r_convolution
  };

  BaseKernel() = default;

  static BaseKernel constant_one() { return BaseKernel(Kind::constant_one); }

  static BaseKernel kronecker_delta(double h) {
    if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("kronecker-delta h must lie in (0, 1]");
    BaseKernel k(Kind::kronecker_delta);
    k.param_ = h;
    return k;
  }

  static BaseKernel square_exponential(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("square-exponential alpha must be > 0");
    BaseKernel k(Kind::square_exponential);
    k.param_ = alpha;
    return k;
  }

  static BaseKernel compact_polynomial(std::vector<double> coeffs) {
    if (coeffs.empty()) throw std::invalid_argument("compact-polynomial needs at least one coefficient");
    BaseKernel k(Kind::compact_polynomial);
    k.coeffs_ = std::move(coeffs);
    return k;
  }

  static BaseKernel product(std::vector<BaseKernel> components) {
    if (components.empty()) throw std::invalid_argument("product kernel needs components");
    BaseKernel k(Kind::product);
    k.children_ = std::move(components);
    return k;
  }

  static BaseKernel r_convolution(BaseKernel inner) {
    BaseKernel k(Kind::r_convolution);
    k.children_.push_back(std::move(inner));
    return k;
  }

  Kind kind() const { return kind_; }
  KernelRole role() const { return role_; }
  bool strict() const { return strict_; }
  double parameter() const { return param_; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  const std::vector<BaseKernel>& components() const { return children_; }
  bool is_constant_one() const { return kind_ == Kind::constant_one; }

  BaseKernel& with_role(KernelRole r) {
    role_ = r;
    return *this;
  }

  /// Error on out-of-range values instead of clamping.
  BaseKernel& with_strict_range(bool on = true) {
    strict_ = on;
    for (auto& c : children_) c.with_strict_range(on);
    return *this;
  }

  double operator()(const Label& a, const Label& b) const {
    const double v = raw(a, b);
    if (kind_ == Kind::compact_polynomial) {
      if (v < 0.0 || v > 1.0) {
        if (strict_) throw std::domain_error("compact-polynomial value outside [0, 1]");
        return std::clamp(v, 0.0, 1.0);
      }
    }
    if (strict_) {
      const bool bad = role_ == KernelRole::vertex ? !(v > 0.0 && v <= 1.0) : !(v >= 0.0 && v <= 1.0);
      if (bad) throw std::domain_error("kernel value " + std::to_string(v) + " outside the admissible range");
    }
    return v;
  }

  /// Throws KernelShapeError unless labels of the given shape can be evaluated.
  void check_shape(const LabelShape& s) const {
    auto fail = [&](const char* why) {
      throw KernelShapeError(describe() + " cannot evaluate " + to_string(s) + " labels: " + why);
    };
    switch (kind_) {
      case Kind::constant_one: return;
      case Kind::kronecker_delta:
        if (s.kind == LabelKind::none) fail("labels absent");
        return;
      case Kind::square_exponential:
      case Kind::compact_polynomial:
        if (s.kind != LabelKind::vector) fail("real-valued labels required");
        return;
      case Kind::product:
        if (s.kind == LabelKind::none) fail("labels absent");
        if (s.kind == LabelKind::category) {
          if (children_.size() != 1) fail("categorical label has one component");
          children_[0].check_shape(s);
          return;
        }
        if (children_.size() != s.dim) fail("component count differs from label dimension");
        for (const auto& c : children_) c.check_shape(LabelShape::vector(1));
        return;
      case Kind::r_convolution:
        if (s.kind != LabelKind::vector) fail("real vector labels required");
        children_[0].check_shape(LabelShape::vector(1));
        return;
    }
  }

  /// Floating-point operations per evaluation under the abstract cost model.
  int flops(const LabelShape& s) const {
    const int d = static_cast<int>(s.kind == LabelKind::vector ? s.dim : 1);
    switch (kind_) {
      case Kind::constant_one: return 0;
      case Kind::kronecker_delta: return 1;
      case Kind::square_exponential: return 3 * d + 1;
      case Kind::compact_polynomial: return 3 * d + 2 * static_cast<int>(coeffs_.size());
      case Kind::product: {
        int f = static_cast<int>(children_.size()) - 1;
        for (const auto& c : children_) f += c.flops(LabelShape::vector(1));
        return f;
      }
      case Kind::r_convolution:
        return d * d * (children_[0].flops(LabelShape::vector(1)) + 1) + 1;
    }
    return 0;
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
      case Kind::constant_one: os << "const1"; break;
      case Kind::kronecker_delta: os << "delta:" << param_; break;
      case Kind::square_exponential: os << "se:" << param_; break;
      case Kind::compact_polynomial:
        os << "poly:";
        for (std::size_t i = 0; i < coeffs_.size(); ++i) os << (i ? "," : "") << coeffs_[i];
        break;
      case Kind::product:
        os << "product(";
        for (std::size_t i = 0; i < children_.size(); ++i) os << (i ? "," : "") << children_[i].describe();
        os << ")";
        break;
      case Kind::r_convolution: os << "rconv(" << children_[0].describe() << ")"; break;
    }
    return os.str();
  }

 private:
  explicit BaseKernel(Kind k) : kind_(k) {}

  static double distance_sq(const Label& a, const Label& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.dim; ++k) {
      const double t = a.x[k] - b.x[k];
      s += t * t;
    }
    return s;
  }

  void require_vector(const Label& a, const Label& b) const {
    if (a.kind != LabelKind::vector || b.kind != LabelKind::vector || a.dim != b.dim)
      throw KernelShapeError(describe() + ": real vector labels of equal dimension required");
  }

  double raw(const Label& a, const Label& b) const {
    switch (kind_) {
      case Kind::constant_one: return 1.0;
      case Kind::kronecker_delta:
        if (a.kind != b.kind || a.kind == LabelKind::none)
          throw KernelShapeError(describe() + ": mismatched or absent labels");
        return a == b ? 1.0 : param_;
      case Kind::square_exponential:
        require_vector(a, b);
        return std::exp(-param_ * distance_sq(a, b));
      case Kind::compact_polynomial: {
        require_vector(a, b);
        const double r = std::sqrt(distance_sq(a, b));
        double v = 0.0;
        for (std::size_t i = coeffs_.size(); i-- > 0;) v = v * r + coeffs_[i];
        return v;
      }
      case Kind::product: {
        if (a.kind == LabelKind::category && b.kind == LabelKind::category && children_.size() == 1)
          return children_[0](a, b);
        require_vector(a, b);
        if (a.dim != children_.size())
          throw KernelShapeError(describe() + ": component count differs from label dimension");
        double v = 1.0;
        for (std::size_t k = 0; k < children_.size(); ++k)
          v *= children_[k](Label::real(a.x[k]), Label::real(b.x[k]));
        return v;
      }
      case Kind::r_convolution: {
        require_vector(a, b);
        // Fixed summation order so that k(a, b) == k(b, a) bit for bit.
        const bool swap = std::lexicographical_compare(b.x.begin(), b.x.begin() + b.dim, a.x.begin(),
                                                       a.x.begin() + a.dim);
        const Label& u = swap ? b : a;
        const Label& w = swap ? a : b;
        double v = 0.0;
        for (std::size_t i = 0; i < u.dim; ++i)
          for (std::size_t j = 0; j < w.dim; ++j)
            v += children_[0](Label::real(u.x[i]), Label::real(w.x[j]));
        return v / static_cast<double>(u.dim * w.dim);
      }
    }
    return 0.0;
  }

  Kind kind_ = Kind::constant_one;
  KernelRole role_ = KernelRole::vertex;
  bool strict_ = false;
  double param_ = 0.0;
  std::vector<double> coeffs_;
  std::vector<BaseKernel> children_;
};

/// Parses "const1", "delta:H", "se:ALPHA" or "poly:C0,C1,...".
inline BaseKernel parse_kernel_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size())
      throw std::invalid_argument("bad number '" + s + "' in kernel spec '" + spec + "'");
    return v;
  };
  if (name == "const1" && colon == std::string::npos) return BaseKernel::constant_one();
  if (name == "delta") return BaseKernel::kronecker_delta(number(args));
  if (name == "se") return BaseKernel::square_exponential(number(args));
  if (name == "poly") {
    std::vector<double> c;
    std::size_t pos = 0;
    while (true) {
      const auto comma = args.find(',', pos);
      c.push_back(number(args.substr(pos, comma - pos)));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return BaseKernel::compact_polynomial(std::move(c));
  }
  throw std::invalid_argument("unknown kernel spec '" + spec + "'");
}

}  // namespace mgk

#endif  // MGK_KERNELS_HPP
