#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace codednet {

// Concave increasing session utility U(a), a > 0.
struct UtilityCurve {
  enum class Kind { Log, AlphaFair };

  Kind kind = Kind::Log;
  double weight = 1.0;
  double alpha = 2.0;  // AlphaFair only, alpha > 0, alpha != 1

  double value(double a) const {
    switch (kind) {
      case Kind::Log:
        return weight * std::log(a);
      case Kind::AlphaFair:
        return weight * std::pow(a, 1.0 - alpha) / (1.0 - alpha);
    }
    return 0.0;
  }

  double deriv(double a) const {
    switch (kind) {
      case Kind::Log:
        return weight / a;
      case Kind::AlphaFair:
        return weight * std::pow(a, -alpha);
    }
    return 0.0;
  }

  double dderiv(double a) const {
    switch (kind) {
      case Kind::Log:
        return -weight / (a * a);
      case Kind::AlphaFair:
        return -weight * alpha * std::pow(a, -alpha - 1.0);
    }
    return 0.0;
  }

  bool has_closed_form() const { return kind == Kind::Log; }
};

// Convex increasing node power cost V(p), p >= 0.
struct CostCurve {
  enum class Kind { Quadratic, PowerLaw };

  Kind kind = Kind::Quadratic;
  double coeff = 10.0;
  double exponent = 3.0;  // PowerLaw only, exponent >= 2

  double value(double p) const {
    switch (kind) {
      case Kind::Quadratic:
        return coeff * p * p;
      case Kind::PowerLaw:
        return coeff * std::pow(p, exponent);
    }
    return 0.0;
  }

  double deriv(double p) const {
    switch (kind) {
      case Kind::Quadratic:
        return 2.0 * coeff * p;
      case Kind::PowerLaw:
        return coeff * exponent * std::pow(p, exponent - 1.0);
    }
    return 0.0;
  }

  double dderiv(double p) const {
    switch (kind) {
      case Kind::Quadratic:
        return 2.0 * coeff;
      case Kind::PowerLaw:
        return coeff * exponent * (exponent - 1.0) * std::pow(p, exponent - 2.0);
    }
    return 0.0;
  }

  bool has_closed_form() const { return kind == Kind::Quadratic; }
};

inline UtilityCurve parse_utility(const std::string& kind, double weight,
                                  double alpha) {
  UtilityCurve u;
  u.weight = weight;
  if (kind == "log") {
    u.kind = UtilityCurve::Kind::Log;
  } else if (kind == "alpha-fair") {
    if (alpha <= 0.0 || alpha == 1.0)
      throw std::invalid_argument("alpha-fair utility needs alpha > 0, != 1");
    u.kind = UtilityCurve::Kind::AlphaFair;
    u.alpha = alpha;
  } else {
    throw std::invalid_argument("unknown utility kind: " + kind);
  }
  return u;
}

inline CostCurve parse_cost(const std::string& kind, double coeff,
                            double exponent) {
  CostCurve c;
  c.coeff = coeff;
  if (kind == "quadratic") {
    c.kind = CostCurve::Kind::Quadratic;
  } else if (kind == "power") {
    if (exponent < 2.0)
      throw std::invalid_argument("power cost needs exponent >= 2");
    c.kind = CostCurve::Kind::PowerLaw;
    c.exponent = exponent;
  } else {
    throw std::invalid_argument("unknown cost kind: " + kind);
  }
  return c;
}

}  // namespace codednet
