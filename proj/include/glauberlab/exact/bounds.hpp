#pragma once

#include "glauberlab/exact/walk.hpp"

namespace glauberlab::exact {

struct MixingBounds {
  double lower_gamma = 0.0;
  double upper_gamma = 0.0;
  double upper_mlsi = 0.0;
};

/// (1/gamma - 1) log(1/2eps) <= tau(eps) <= (1/gamma) log(1/(eps min_prob)),
/// tau(eps) <= (1/rho) (log log(1/min_prob) + log(1/(2 eps^2))).
MixingBounds mixing_time_bounds(double gamma, double rho, double min_prob, double eps);

/// Smallest t with max_x TV(e_x P^t, pi) <= eps, by exact propagation from
/// every start state. Returns -1 if not reached within max_steps.
long measured_mixing_time(const WalkOperator& op, double eps, long max_steps = 1'000'000);

/// Worst-start total variation distance after t steps.
double worst_tv_after(const WalkOperator& op, long steps);

/// Spectral independence implied by a contraction kappa of the coupling:
/// eps = n (1 - kappa), eta = 1/eps.
double si_from_contraction(double kappa, int n);

}  // namespace glauberlab::exact
