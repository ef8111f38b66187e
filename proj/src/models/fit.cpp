#include <cmath>

#include <Eigen/Dense>

#include "creepdb/error.hpp"
#include "creepdb/models/model.hpp"

namespace creepdb::models {

namespace {

struct Residuals {
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  double rss = 0.0;
};

Residuals residuals(const ConstitutiveModel& model, const Values& params, const Values& conditions,
                    std::span<const double> times, std::span<const double> strains,
                    const std::vector<std::string>& wrt, bool with_jacobian) {
  Jacobian jac = evaluate_with_jacobian(model, params, conditions, times,
                                        with_jacobian ? wrt : std::vector<std::string>{});
  const auto n = static_cast<Eigen::Index>(times.size());
  Residuals out;
  out.r.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) out.r[i] = strains[i] - jac.values[i];
  out.rss = out.r.squaredNorm();
  if (with_jacobian) {
    out.J.resize(n, static_cast<Eigen::Index>(wrt.size()));
    for (Eigen::Index i = 0; i < n; ++i)
      for (std::size_t k = 0; k < wrt.size(); ++k) {
        double g = jac.at(i, k);
        if (!std::isfinite(g))
          fail(ErrorCode::NumericalOverflow, "non-finite Jacobian entry for " + wrt[k]);
        out.J(i, static_cast<Eigen::Index>(k)) = g;
      }
  }
  return out;
}

double clamp_to(const ConstitutiveModel& model, const std::string& name, double v) {
  auto it = model.bounds.find(name);
  if (it == model.bounds.end()) return v;
  return std::min(std::max(v, it->second.lower), it->second.upper);
}

}  // namespace

FitResult fit_parameters(const ConstitutiveModel& model, std::span<const double> times,
                         std::span<const double> strains, const Values& conditions,
                         const Values& init, const Values& fixed, const FitOptions& options) {
  require(times.size() == strains.size(), "times and strains differ in length");
  require(!init.empty(), "no free parameters");
  require(times.size() >= init.size() + 1,
          "need at least " + std::to_string(init.size() + 1) + " points to fit " +
              std::to_string(init.size()) + " parameters");
  for (double s : strains) require(std::isfinite(s), "non-finite observation");

  FitResult result;
  for (const auto& [k, v] : init) result.fitted.push_back(k);
  Values params = fixed;
  for (const auto& [k, v] : init) params[k] = v;
  const auto& wrt = result.fitted;
  const auto p = static_cast<Eigen::Index>(wrt.size());

  Residuals cur = residuals(model, params, conditions, times, strains, wrt, true);
  result.rss_history.push_back(cur.rss);

  double lambda = 1e-3;
  while (result.iterations < options.max_iterations) {
    ++result.iterations;
    if (cur.rss == 0.0) {
      result.converged = true;
      break;
    }
    Eigen::MatrixXd jtj = cur.J.transpose() * cur.J;
    Eigen::VectorXd g = cur.J.transpose() * cur.r;
    Eigen::VectorXd diag = jtj.diagonal();
    for (Eigen::Index k = 0; k < p; ++k)
      if (!(diag[k] > 0.0))
        fail(ErrorCode::SingularJacobian, "parameter '" + wrt[k] + "' has no influence on the curve");

    Eigen::MatrixXd a = jtj;
    a.diagonal() += lambda * diag;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      lambda *= 10.0;
      continue;
    }
    Eigen::VectorXd step = ldlt.solve(g);

    Values trial = params;
    double pnorm = 0.0;
    for (Eigen::Index k = 0; k < p; ++k) {
      trial[wrt[k]] = clamp_to(model, wrt[k], params[wrt[k]] + step[k]);
      pnorm += params[wrt[k]] * params[wrt[k]];
    }
    double rel_step = step.norm() / std::max(std::sqrt(pnorm), 1e-300);

    double trial_rss = std::numeric_limits<double>::infinity();
    try {
      trial_rss = residuals(model, trial, conditions, times, strains, wrt, false).rss;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NumericalOverflow) throw;
    }

    if (std::isfinite(trial_rss) && trial_rss <= cur.rss) {
      double rel_change = (cur.rss - trial_rss) / cur.rss;
      params = std::move(trial);
      cur = residuals(model, params, conditions, times, strains, wrt, true);
      result.rss_history.push_back(cur.rss);
      lambda = std::max(lambda / 10.0, 1e-12);
      if (rel_change < options.relative_tolerance || rel_step < options.step_tolerance) {
        result.converged = true;
        break;
      }
    } else {
      if (rel_step < options.step_tolerance) {
        result.converged = true;
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e16) break;
    }
  }
  result.params = params;
  for (const auto& [k, v] : params)
    if (const auto* b = model.equation().find(k)) result.units[k] = b->unit;
  result.rss = cur.rss;
  return result;
}

}  // namespace creepdb::models
