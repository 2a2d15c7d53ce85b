#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "angcorr/errors.hpp"
#include "angcorr/units.hpp"

namespace angcorr {

// Catalog of closed-form correlation functions.  All angles are radians and
// amplitudes are used as given (no rescaling).

/// Sum of two exponentials; analytic for theta > 0.
struct DoubleExp {
  double A11, A12, theta11, theta12;
};

/// Two exponentials glued at theta_star.  Neither value nor slope match
/// there in general.
struct BrokenExp {
  double A21, A22, theta21, theta22, theta_star;
};

/// Poisson disks with radii uniform in [R_min, R_max], A = 1, h(x) = 1 - x/2.
struct Toy2Uniform {
  double R_min, R_max;
};

/// Spheres of size L at distances uniform in [r_min, r_max] (angular radius
/// R = L/r), amplitude A(R) = (A0/R)^2, h(x) = 1 - x/2.
struct Toy2Distance {
  double A0, L, r_min, r_max;

  double theta1() const noexcept { return 2.0 * L / r_max; }
  double theta2() const noexcept { return 2.0 * L / r_min; }
};

enum class ModelKind { DoubleExp, BrokenExp, Toy2Uniform, Toy2Distance };

class CorrelationModel {
 public:
  using Variant = std::variant<DoubleExp, BrokenExp, Toy2Uniform, Toy2Distance>;

  explicit CorrelationModel(Variant v) : v_(v) { validate(); }

  const Variant& variant() const noexcept { return v_; }

  ModelKind kind() const noexcept { return static_cast<ModelKind>(v_.index()); }

  double operator()(double theta) const {
    if (!(theta >= 0.0)) throw DomainError("CorrelationModel: theta must be >= 0");
    return std::visit([theta](const auto& m) { return eval(m, theta); }, v_);
  }

  /// Angles where some derivative of C is discontinuous, ascending.
  std::vector<double> breakpoints() const {
    return std::visit(
        [](const auto& m) -> std::vector<double> {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, DoubleExp>) {
            return {};
          } else if constexpr (std::is_same_v<T, BrokenExp>) {
            return {m.theta_star};
          } else if constexpr (std::is_same_v<T, Toy2Uniform>) {
            return {2.0 * m.R_min, 2.0 * m.R_max};
          } else {
            return {m.theta1(), m.theta2()};
          }
        },
        v_);
  }

 private:
  static double eval(const DoubleExp& m, double t) {
    return m.A11 * std::exp(-t / m.theta11) + m.A12 * std::exp(-t / m.theta12);
  }

  static double eval(const BrokenExp& m, double t) {
    return t <= m.theta_star ? m.A21 * std::exp(-t / m.theta21) : m.A22 * std::exp(-t / m.theta22);
  }

  // Integral over R in [R_min, R_max] of (1 - t/(2R)) for t < 2R.  The middle
  // branch is the same integral with lower limit t/2:
  //   R_max - (1 + ln 2)/2 t + (t/2) ln(t / R_max).
  static double eval(const Toy2Uniform& m, double t) {
    if (t <= 2.0 * m.R_min) return (m.R_max - m.R_min) - 0.5 * std::log(m.R_max / m.R_min) * t;
    if (t < 2.0 * m.R_max) {
      return m.R_max - 0.5 * (1.0 + std::numbers::ln2) * t + 0.5 * t * std::log(t / m.R_max);
    }
    return 0.0;
  }

  static double eval(const Toy2Distance& m, double t) {
    const double a2 = m.A0 * m.A0;
    const double L2 = m.L * m.L;
    if (t <= m.theta1()) {
      return a2 * ((m.r_max - m.r_min) / m.L - (m.r_max * m.r_max - m.r_min * m.r_min) * t / (4.0 * L2));
    }
    if (t < m.theta2()) return a2 * (-m.r_min / m.L + 1.0 / t + m.r_min * m.r_min * t / (4.0 * L2));
    return 0.0;
  }

  void validate() const {
    std::visit(
        [](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          auto positive = [](double x, const char* name) {
            if (!(x > 0.0) || !std::isfinite(x)) {
              throw DomainError(std::string("CorrelationModel: ") + name + " must be > 0");
            }
          };
          if constexpr (std::is_same_v<T, DoubleExp>) {
            positive(m.theta11, "theta11");
            positive(m.theta12, "theta12");
            if (!std::isfinite(m.A11) || !std::isfinite(m.A12)) throw DomainError("CorrelationModel: non-finite amplitude");
          } else if constexpr (std::is_same_v<T, BrokenExp>) {
            positive(m.theta21, "theta21");
            positive(m.theta22, "theta22");
            positive(m.theta_star, "theta_star");
            if (!std::isfinite(m.A21) || !std::isfinite(m.A22)) throw DomainError("CorrelationModel: non-finite amplitude");
          } else if constexpr (std::is_same_v<T, Toy2Uniform>) {
            positive(m.R_min, "R_min");
            positive(m.R_max, "R_max");
            if (!(m.R_min < m.R_max)) throw DomainError("CorrelationModel: requires R_min < R_max");
          } else {
            positive(m.A0, "A0");
            positive(m.L, "L");
            positive(m.r_min, "r_min");
            positive(m.r_max, "r_max");
            if (!(m.r_min < m.r_max)) throw DomainError("CorrelationModel: requires r_min < r_max");
          }
        },
        v_);
  }

  Variant v_;
};

/// Parameter sets used for the published figures.
inline CorrelationModel default_paper_params(ModelKind kind) {
  switch (kind) {
    case ModelKind::DoubleExp:
      return CorrelationModel(DoubleExp{9744.0, 3000.0, deg_to_rad(0.45), deg_to_rad(13.0)});
    case ModelKind::BrokenExp:
      // The published list repeats the name theta_{1,2} for the tail scale; it
      // is the second scale of C2.
      return CorrelationModel(BrokenExp{12000.0, 3600.0, deg_to_rad(0.79), deg_to_rad(11.45), deg_to_rad(1.03)});
    case ModelKind::Toy2Uniform:
      return CorrelationModel(Toy2Uniform{deg_to_rad(1.0), deg_to_rad(2.0)});
    case ModelKind::Toy2Distance:
      return CorrelationModel(Toy2Distance{0.02, 1.0, 3.0, 50.0});
  }
  throw DomainError("default_paper_params: unknown model kind");
}

inline std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::DoubleExp: return "c1";
    case ModelKind::BrokenExp: return "c2";
    case ModelKind::Toy2Uniform: return "toy2_uniform";
    case ModelKind::Toy2Distance: return "toy2_distance";
  }
  return "unknown";
}

inline ModelKind parse_model_kind(std::string_view name) {
  if (name == "c1" || name == "double_exp") return ModelKind::DoubleExp;
  if (name == "c2" || name == "broken_exp") return ModelKind::BrokenExp;
  if (name == "toy2_uniform" || name == "uniform") return ModelKind::Toy2Uniform;
  if (name == "toy2_distance" || name == "distance") return ModelKind::Toy2Distance;
  throw DomainError("unknown model '" + std::string(name) + "' (expected c1, c2, toy2_uniform, toy2_distance)");
}

/// Flat key/value parameters.  Angle keys carry a _deg suffix.
using ModelParams = std::map<std::string, double>;

inline ModelParams model_to_params(const CorrelationModel& model) {
  return std::visit(
      [](const auto& m) -> ModelParams {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DoubleExp>) {
          return {{"A11", m.A11}, {"A12", m.A12}, {"theta11_deg", rad_to_deg(m.theta11)},
                  {"theta12_deg", rad_to_deg(m.theta12)}};
        } else if constexpr (std::is_same_v<T, BrokenExp>) {
          return {{"A21", m.A21},
                  {"A22", m.A22},
                  {"theta21_deg", rad_to_deg(m.theta21)},
                  {"theta22_deg", rad_to_deg(m.theta22)},
                  {"theta_star_deg", rad_to_deg(m.theta_star)}};
        } else if constexpr (std::is_same_v<T, Toy2Uniform>) {
          return {{"R_min_deg", rad_to_deg(m.R_min)}, {"R_max_deg", rad_to_deg(m.R_max)}};
        } else {
          return {{"A0", m.A0}, {"L", m.L}, {"r_min", m.r_min}, {"r_max", m.r_max}};
        }
      },
      model.variant());
}

/// Builds a model of `kind` from the published defaults overridden by any
/// keys present in `params`.  Keys belonging to other models are rejected.
inline CorrelationModel model_from_params(ModelKind kind, const ModelParams& params) {
  ModelParams merged = model_to_params(default_paper_params(kind));
  for (const auto& [key, value] : params) {
    auto it = merged.find(key);
    if (it == merged.end()) {
      throw DomainError("parameter '" + key + "' does not apply to model " + std::string(model_name(kind)));
    }
    it->second = value;
  }
  const auto& p = merged;
  switch (kind) {
    case ModelKind::DoubleExp:
      return CorrelationModel(
          DoubleExp{p.at("A11"), p.at("A12"), deg_to_rad(p.at("theta11_deg")), deg_to_rad(p.at("theta12_deg"))});
    case ModelKind::BrokenExp:
      return CorrelationModel(BrokenExp{p.at("A21"), p.at("A22"), deg_to_rad(p.at("theta21_deg")),
                                        deg_to_rad(p.at("theta22_deg")), deg_to_rad(p.at("theta_star_deg"))});
    case ModelKind::Toy2Uniform:
      return CorrelationModel(Toy2Uniform{deg_to_rad(p.at("R_min_deg")), deg_to_rad(p.at("R_max_deg"))});
    case ModelKind::Toy2Distance:
      return CorrelationModel(Toy2Distance{p.at("A0"), p.at("L"), p.at("r_min"), p.at("r_max")});
  }
  throw DomainError("model_from_params: unknown model kind");
}

}  // namespace angcorr
