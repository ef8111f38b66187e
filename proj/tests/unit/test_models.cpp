#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "creepdb/error.hpp"
#include "creepdb/models/catalog.hpp"

using namespace creepdb;
using namespace creepdb::models;
namespace f = creepdb::formula;

namespace {

ConstitutiveModel power_law() {
  auto eq = f::make_equation("eps = A*t^m", {f::SymbolBinding::make("eps", f::Role::Strain, "1"),
                                              f::SymbolBinding::make("t", f::Role::Time, "s"),
                                              f::SymbolBinding::make("A", f::Role::Parameter, "s^-m"),
                                              f::SymbolBinding::make("m", f::Role::Parameter, "1")});
  return ConstitutiveModel::closed_form("power_law", eq, "eps", "t", {"A", "m"}, {});
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Precondition;  // unreachable in these tests
}

// Interior parameter points for each catalog model, in canonical units.
struct Sample {
  Values params;
  Values conditions;
  std::vector<double> times;
};

Sample sample_for(const std::string& name, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.8, 1.2);
  Sample s;
  if (name == "norton") {
    s.params = {{"A", 2e-6 * u(rng)}, {"n", 4.0 * u(rng)}, {"Q", 2.0e5 * u(rng)}};
    s.conditions = {{"sigma", 80.0 * u(rng)}, {"T", 900.0 * u(rng)}};
    s.times = {100.0, 1000.0, 5000.0};
  } else if (name == "norton_bailey") {
    s.params = {{"A", 1e-6 * u(rng)}, {"n", 2.0 * u(rng)}, {"m", 0.4 * u(rng)}};
    s.conditions = {{"sigma", 30.0 * u(rng)}};
    s.times = {10.0, 100.0, 1000.0};
  } else if (name == "theta_projection") {
    s.params = {{"theta1", 0.01 * u(rng)}, {"theta2", 0.1 * u(rng)},
                {"theta3", 0.001 * u(rng)}, {"theta4", 0.05 * u(rng)}};
    s.times = {1.0, 10.0, 30.0};
  } else if (name == "logarithmic") {
    s.params = {{"eps0", 0.001 * u(rng)}, {"a", 0.01 * u(rng)}, {"b", 0.05 * u(rng)}};
    s.times = {1.0, 50.0, 400.0};
  } else {
    s.params = {{"delta", 0.3 * u(rng)}, {"alpha", 1.0 * u(rng)}, {"beta", 0.5 * u(rng)},
                {"gamma", 0.4 * u(rng)}, {"omega", 1.3 * u(rng)}, {"scale", 0.01 * u(rng)},
                {"offset", 0.002 * u(rng)}};
    s.times = {1.0, 4.0, 9.0, 15.0};
  }
  return s;
}

}  // namespace

TEST_CASE("closed-form and catalog examples") {
  auto eq = f::make_equation("eps = 0.001*t^0.5", {f::SymbolBinding::make("eps", f::Role::Strain, "1"),
                                                  f::SymbolBinding::make("t", f::Role::Time, "s")});
  auto sqrt_law = ConstitutiveModel::closed_form("sqrt", eq, "eps", "t", {}, {});
  std::vector<double> t4{4.0};
  CHECK(evaluate(sqrt_law, {}, {}, t4)[0] == doctest::Approx(0.002).epsilon(1e-14));

  const auto& theta = builtin_catalog().at("theta_projection");
  std::vector<double> t10{10.0};
  double expected = 0.01 * (1.0 - std::exp(-1.0)) + 0.001 * (std::exp(0.5) - 1.0);
  double got = evaluate(theta, {{"theta1", 0.01}, {"theta2", 0.1}, {"theta3", 0.001}, {"theta4", 0.05}},
                        {}, t10)[0];
  CHECK(std::abs(got - expected) < 1e-12);
  CHECK(std::abs(got - 0.0069699) < 1e-6);
}

TEST_CASE("Duffing harmonic limit") {
  const auto& duffing = builtin_catalog().at("duffing");
  Values p{{"delta", 0.0}, {"alpha", 1.0}, {"beta", 0.0}, {"gamma", 0.0}, {"omega", 1.0},
           {"scale", 1.0}, {"offset", 0.0}, {"x0", 1.0}};
  std::vector<double> times{1.0, std::numbers::pi};
  auto x = evaluate(duffing, p, {}, times);
  CHECK(std::abs(x[1] + 1.0) < 1e-5);
  CHECK(std::abs(x[0] - std::cos(1.0)) < 1e-5);
}

TEST_CASE("rate form integrates from zero strain") {
  const auto& norton = builtin_catalog().at("norton");
  Values p{{"A", 1e-5}, {"n", 3.0}, {"Q", 1.5e5}};
  Values c{{"sigma", 50.0}, {"T", 800.0}};
  std::vector<double> times{0.0, 10.0, 3600.0};
  auto eps = evaluate(norton, p, c, times);
  double rate = 1e-5 * std::pow(50.0, 3.0) * std::exp(-1.5e5 / (8.314462618 * 800.0));
  CHECK(eps[0] == 0.0);
  for (std::size_t i = 1; i < times.size(); ++i)
    CHECK(eps[i] == doctest::Approx(rate * times[i]).epsilon(1e-10));
}

TEST_CASE("evaluation errors") {
  const auto& theta = builtin_catalog().at("theta_projection");
  std::vector<double> t{1.0, 10.0};
  CHECK(code_of([&] { evaluate(theta, {{"theta1", 0.01}}, {}, t); }) == ErrorCode::UnboundSymbol);
  Values blow{{"theta1", 0.01}, {"theta2", 0.1}, {"theta3", 0.001}, {"theta4", 1000.0}};
  CHECK(code_of([&] { evaluate(theta, blow, {}, t); }) == ErrorCode::NumericalOverflow);
  std::vector<double> unordered{10.0, 1.0};
  Values ok{{"theta1", 0.01}, {"theta2", 0.1}, {"theta3", 0.001}, {"theta4", 0.05}};
  CHECK(code_of([&] { evaluate(theta, ok, {}, unordered); }) == ErrorCode::Precondition);
}

TEST_CASE("RK4 is fourth order on the harmonic oscillator") {
  OdeRhs f = [](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  const double period = 2.0 * std::numbers::pi;
  auto error = [&](std::size_t steps) {
    auto nodes = integrate_rk4(f, {1.0, 0.0}, 0.0, period, steps);
    return std::abs(nodes.back()[0] - 1.0) + std::abs(nodes.back()[1]);
  };
  for (std::size_t n : {20u, 40u, 80u, 160u}) {
    double ratio = error(n) / error(2 * n);
    CAPTURE(n);
    CHECK(ratio >= 8.0);
  }
}

TEST_CASE("r_squared") {
  std::vector<double> a{1, 2, 3};
  std::vector<double> mean{2, 2, 2};
  CHECK(r_squared(a, a) == 1.0);
  CHECK(r_squared(a, mean) == 0.0);
  std::vector<double> flat{5, 5, 5};
  CHECK(code_of([&] { r_squared(flat, a); }) == ErrorCode::DegenerateObservations);
  std::vector<double> two{1, 2};
  CHECK(code_of([&] { r_squared(two, two); }) == ErrorCode::Precondition);

  std::mt19937 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t len = 3 + trial % 20;
    std::vector<double> obs(len), pred(len);
    for (std::size_t i = 0; i < len; ++i) {
      obs[i] = n(rng);
      pred[i] = obs[i] + 0.3 * n(rng);
    }
    double scale = std::pow(10.0, u(rng));
    if (trial % 2) scale = -scale;
    // Shifts far beyond the data scale destroy the data's own precision, so
    // keep them within three decades of it.
    double shift = 200.0 * std::abs(scale) * u(rng);
    std::vector<double> obs2(len), pred2(len);
    for (std::size_t i = 0; i < len; ++i) {
      obs2[i] = scale * obs[i] + shift;
      pred2[i] = scale * pred[i] + shift;
    }
    CHECK(std::abs(r_squared(obs, pred) - r_squared(obs2, pred2)) < 1e-10);
    CHECK(r_squared(obs, pred) <= 1.0);
  }
}

TEST_CASE("analytic Jacobian matches central differences for every catalog model") {
  std::mt19937 rng(2024);
  for (const auto& model : builtin_catalog().models()) {
    for (int trial = 0; trial < 4; ++trial) {
      Sample s = sample_for(model.name(), rng);
      std::vector<std::string> wrt = model.parameters();
      auto jac = evaluate_with_jacobian(model, s.params, s.conditions, s.times, wrt);
      for (std::size_t k = 0; k < wrt.size(); ++k) {
        double p0 = s.params[wrt[k]];
        double h = 1e-5 * std::abs(p0);
        Values up = s.params, down = s.params;
        up[wrt[k]] = p0 + h;
        down[wrt[k]] = p0 - h;
        auto fu = evaluate(model, up, s.conditions, s.times);
        auto fd = evaluate(model, down, s.conditions, s.times);
        for (std::size_t i = 0; i < s.times.size(); ++i) {
          double numeric = (fu[i] - fd[i]) / (2.0 * h);
          double analytic = jac.at(i, k);
          double tol = 1e-6 * std::max(std::abs(numeric), std::abs(jac.values[i]) / std::abs(p0));
          CAPTURE(model.name());
          CAPTURE(wrt[k]);
          CAPTURE(s.times[i]);
          CHECK(std::abs(analytic - numeric) <= tol);
        }
      }
    }
  }
}

TEST_CASE("catalog models are homogeneous and round-trip through JSON") {
  const auto& cat = builtin_catalog();
  CHECK(cat.models().size() == 5);
  for (const auto& m : cat.models()) {
    CAPTURE(m.name());
    CHECK(f::check_homogeneity(m.equation()).pass);
  }
  auto again = Catalog::from_json(cat.to_json());
  CHECK(again.to_json() == cat.to_json());
  nlohmann::json bad = cat.to_json();
  bad["version"] = 99;
  CHECK_THROWS_AS(Catalog::from_json(bad), Error);
}

TEST_CASE("LM recovers a noisy power law") {
  auto model = power_law();
  std::mt19937 rng(12345);
  std::normal_distribution<double> noise(0.0, 0.005);
  std::vector<double> t, y;
  for (int i = 1; i <= 50; ++i) {
    t.push_back(20.0 * i);
    y.push_back(1e-4 * std::pow(20.0 * i, 0.4) * (1.0 + noise(rng)));
  }
  auto fit = fit_parameters(model, t, y, {}, {{"A", 1e-3}, {"m", 0.3}});
  CHECK(fit.converged);
  CHECK(fit.iterations <= 200);
  CHECK(std::abs(fit.params["A"] / 1e-4 - 1.0) < 0.05);
  CHECK(std::abs(fit.params["m"] / 0.4 - 1.0) < 0.02);
  for (std::size_t i = 1; i < fit.rss_history.size(); ++i)
    CHECK(fit.rss_history[i] <= fit.rss_history[i - 1]);
  CHECK(fit.units.at("m") == "1");
}

TEST_CASE("LM fixed point, preconditions and singular Jacobian") {
  auto model = power_law();
  std::vector<double> t, y;
  for (int i = 1; i <= 20; ++i) {
    t.push_back(i);
    y.push_back(2e-4 * std::pow(double(i), 0.3));
  }
  auto fit = fit_parameters(model, t, y, {}, {{"A", 2e-4}, {"m", 0.3}});
  CHECK(fit.converged);
  CHECK(fit.iterations <= 2);
  CHECK(fit.rss < 1e-20);

  const auto& theta = builtin_catalog().at("theta_projection");
  std::vector<double> t2{1.0, 2.0}, y2{0.001, 0.002};
  CHECK(code_of([&] {
          fit_parameters(theta, t2, y2, {}, {{"theta1", 0.01}, {"theta2", 0.1}, {"theta3", 0.001}, {"theta4", 0.05}});
        }) == ErrorCode::Precondition);

  // sigma = 1 makes the stress exponent invisible
  const auto& nb = builtin_catalog().at("norton_bailey");
  CHECK(code_of([&] {
          fit_parameters(nb, t, y, {{"sigma", 1.0}}, {{"A", 1e-4}, {"n", 3.0}}, {{"m", 0.3}});
        }) == ErrorCode::SingularJacobian);
}

TEST_CASE("fitting an ODE model recovers perturbed parameters") {
  const auto& duffing = builtin_catalog().at("duffing");
  Values truth{{"delta", 0.4}, {"alpha", 1.2}, {"beta", 0.3}, {"gamma", 0.5}, {"omega", 1.1},
               {"scale", 0.01}, {"offset", 0.001}};
  std::vector<double> t;
  for (int i = 1; i <= 60; ++i) t.push_back(0.25 * i);
  auto y = evaluate(duffing, truth, {}, t);
  Values init = truth;
  init["delta"] *= 1.1;
  init["gamma"] *= 0.9;
  Values fixed{{"alpha", 1.2}, {"beta", 0.3}, {"omega", 1.1}, {"scale", 0.01}, {"offset", 0.001}};
  auto fit = fit_parameters(duffing, t, y, {}, {{"delta", init["delta"]}, {"gamma", init["gamma"]}}, fixed);
  CHECK(fit.converged);
  CHECK(fit.params["delta"] == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(fit.params["gamma"] == doctest::Approx(0.5).epsilon(1e-6));
}
