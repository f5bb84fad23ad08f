#pragma once

#include <string>

#include <Eigen/Dense>

#include "uwc/distribution.hpp"
#include "uwc/friction.hpp"

namespace uwc {

struct DecisionProblem {
  Eigen::VectorXd mu;
  CovarianceEstimate sigma;
  double gamma = 1.0;
  double eta_l1 = 0.0;
  double eta_quad = 0.0;
  Eigen::VectorXd w_prev;
  FeasibleSet feasible;
  /// Per-asset volume, used only by the participation cap.
  Eigen::VectorXd volume;

  DecisionProblem(Eigen::VectorXd mu_, CovarianceEstimate sigma_, double gamma_, double eta_l1_, double eta_quad_,
                  Eigen::VectorXd w_prev_, FeasibleSet feasible_);
  Eigen::Index dim() const { return mu.size(); }
};

enum class SolverStatus { optimal, fallback_previous, infeasible_relaxed };
const char* to_string(SolverStatus s);

struct Multipliers {
  double turnover = 0.0;
  double leverage = 0.0;
  double budget = 0.0;
};

struct BindingFlags {
  bool budget = false;
  bool box = false;
  bool turnover = false;
  bool leverage = false;
  bool participation = false;
  bool any_inequality() const { return box || turnover || leverage || participation; }
};

struct DecisionOutcome {
  Eigen::VectorXd weights;
  Eigen::VectorXd delta_w;
  double objective_value = 0.0;
  double turnover = 0.0;
  double kkt_residual = 0.0;
  Multipliers multipliers;
  BindingFlags binding;
  SolverStatus status = SolverStatus::optimal;
  int iterations = 0;
};

struct SolverSettings {
  int max_iterations = 10000;
  double tolerance = 1e-6;
  /// Stop when successive iterates differ by less than this (max-norm, relative to max(1, |w|)).
  double step_tolerance = 1e-14;
  int dykstra_max_iterations = 5000;
  bool recover_multipliers = true;
};

/// w = (gamma * Sigma + eta_quad * I)^{-1} (mu + eta_quad * w_prev)
Eigen::VectorXd solve_closed_form(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, double gamma,
                                  double eta_quad, const Eigen::VectorXd& w_prev);

DecisionOutcome solve_constrained(const DecisionProblem& problem, const SolverSettings& settings = {});

/// Objective in maximisation form: mu'w - gamma/2 w'Sw - eta |dw|_1 - eta_quad/2 |dw|^2.
double objective_value(const DecisionProblem& problem, const Eigen::VectorXd& w);

struct KktReport {
  bool applicable = true;
  double stationarity = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;
  double max_residual() const;
  bool passes(double tol = 1e-6) const { return applicable && max_residual() <= tol; }
};

KktReport kkt_report(const DecisionProblem& problem, const DecisionOutcome& outcome);

/// Smallest and largest eigenvalue of gamma * Sigma + eta_quad * I.
std::pair<double, double> curvature_bounds(const DecisionProblem& problem);

}  // namespace uwc
