#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "creepdb/formula/equation.hpp"

namespace creepdb::models {

using Values = std::map<std::string, double>;

enum class ModelKind {
  ClosedForm,  // strain = f(t, ...)
  RateForm,    // d(strain)/d(t) = f(t, ...), integrated from zero strain
  Ode,         // first-order system with an observable
};

struct Bounds {
  double lower = -1e300;
  double upper = 1e300;
};

/// A constitutive law in canonical units (K, MPa, s, strain fraction).
class ConstitutiveModel {
 public:
  /// `eq` must have the strain symbol (or its time derivative) as lhs.
  static ConstitutiveModel closed_form(std::string name, formula::Equation eq,
                                       std::string strain_symbol, std::string time_symbol,
                                       std::vector<std::string> parameters,
                                       std::vector<std::string> conditions,
                                       Values constants = {});

  /// First-order system `d(state_i)/dt = rhs_i`. `initial` names optional
  /// parameters holding initial values (0 when unbound). `equation` is the
  /// published form used by the validator.
  static ConstitutiveModel ode(std::string name, formula::Equation equation,
                               std::string time_symbol, std::vector<std::string> states,
                               std::vector<formula::Expression> rhs,
                               std::vector<std::string> initial, formula::Expression observable,
                               std::vector<std::string> parameters,
                               std::vector<std::string> conditions, Values constants = {});

  const std::string& name() const { return name_; }
  ModelKind kind() const { return kind_; }
  const formula::Equation& equation() const { return equation_; }
  const std::string& time_symbol() const { return time_; }
  const std::string& strain_symbol() const { return strain_; }
  const std::vector<std::string>& parameters() const { return parameters_; }
  /// Parameters that default to zero when not supplied (ODE initial values).
  const std::vector<std::string>& optional_parameters() const { return optional_; }
  const std::vector<std::string>& conditions() const { return conditions_; }
  const Values& constants() const { return constants_; }
  const std::vector<std::string>& states() const { return states_; }
  const std::vector<formula::Expression>& rhs() const { return rhs_; }
  const formula::Expression& observable() const { return observable_; }

  Values defaults;
  std::map<std::string, Bounds> bounds;

  nlohmann::json to_json() const;
  static ConstitutiveModel from_json(const nlohmann::json& j);

 private:
  ConstitutiveModel() = default;
  void check_ode_symbols() const;

  std::string name_;
  ModelKind kind_ = ModelKind::ClosedForm;
  formula::Equation equation_;
  std::string strain_;
  std::string time_;
  std::vector<std::string> parameters_;
  std::vector<std::string> optional_;
  std::vector<std::string> conditions_;
  Values constants_;
  std::vector<std::string> states_;
  std::vector<formula::Expression> rhs_;
  formula::Expression observable_;
};

// ---------------------------------------------------------------------------
// Integration

/// dy/dt = f(t, y); `dy` has the size of `y`.
using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

/// Classical fixed-step RK4. Returns the state at every node (steps + 1 rows).
std::vector<std::vector<double>> integrate_rk4(const OdeRhs& f, std::vector<double> y0,
                                               double t0, double t1, std::size_t steps);

/// Integration steps used for a request spanning [t_min, t_max]: the step is
/// at most (t_max - t_min)/2000 and integration starts at t = 0.
std::size_t integration_steps(double t_min, double t_max);

// ---------------------------------------------------------------------------
// Evaluation

/// Strain at each time. `params` and `conditions` are canonical values.
/// Throws UnboundSymbol, NumericalOverflow, or Precondition (times not
/// strictly increasing, negative times for integrated models).
std::vector<double> evaluate(const ConstitutiveModel& model, const Values& params,
                             const Values& conditions, std::span<const double> times);

struct Jacobian {
  std::vector<double> values;
  /// d(value_i)/d(wrt_j), row-major: times x wrt.
  std::vector<double> derivatives;
  std::size_t columns = 0;
  double at(std::size_t row, std::size_t col) const { return derivatives[row * columns + col]; }
};

/// Values plus analytic parameter derivatives: symbolic differentiation for
/// closed forms, forward sensitivities for integrated forms.
Jacobian evaluate_with_jacobian(const ConstitutiveModel& model, const Values& params,
                                const Values& conditions, std::span<const double> times,
                                const std::vector<std::string>& wrt);

/// 1 - SS_res/SS_tot. Throws DegenerateObservations on zero variance and
/// Precondition for mismatched or short inputs.
double r_squared(std::span<const double> observed, std::span<const double> predicted);

// ---------------------------------------------------------------------------
// Fitting

struct FitOptions {
  std::size_t max_iterations = 200;
  double relative_tolerance = 1e-9;
  double step_tolerance = 1e-12;
};

struct FitResult {
  Values params;  // all parameters, fitted and fixed
  std::map<std::string, std::string> units;  // unit tag per parameter
  std::vector<std::string> fitted;
  double rss = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  /// SS_res after each accepted step, starting with the initial value.
  std::vector<double> rss_history;
};

/// Levenberg-Marquardt on the free parameters named in `init`; `fixed` holds
/// parameters that are not adjusted. Throws Precondition when there are
/// fewer than |init| + 1 points and SingularJacobian when a free parameter
/// has no influence.
FitResult fit_parameters(const ConstitutiveModel& model, std::span<const double> times,
                         std::span<const double> strains, const Values& conditions,
                         const Values& init, const Values& fixed = {},
                         const FitOptions& options = {});

}  // namespace creepdb::models
