#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "prandtl/field.hpp"
#include "prandtl/solver.hpp"
#include "prandtl/spectral.hpp"
#include "prandtl/weights.hpp"
#include "prandtl/ygrid.hpp"

namespace prandtl {

/// u_j = M_j d_x^j u and v_j = -int_0^y d_x u_j.
struct DerivedSeq {
  int j = 0;
  double mj = 0.0;
  Field uj;
  Field vj;
};

/// Spectral evaluation of u_j, v_j at time t. Throws std::domain_error if
/// j exceeds nx/4.
DerivedSeq compute_uj(const Field& u, const GevreyParams& p, double t, int j);

/// The scalar c_j with d_x u_j = c_j u_{j+1}:
///   c_j = M_j / M_{j+1} = ((j+1)/(j+2))^r (j+1)^gamma / tau(t).
double index_ratio(int j, const GevreyParams& p, double t);

/// Homogenized unknown plus the full flow (U^P, V^P) at one time.
struct FlowState {
  double t = 0.0;
  Field u;
  Field v;
  Lift lift;
  Field fe;
};

FlowState make_flow_state(const Field& u, const EulerTrace& trace, double t);

/// The right-hand side F_j of the x-differentiated equation
///   (d_t + beta<j> + U^P d_x + <j> d_x U^P + V^P d_y - d_y^2) u_j
///     + d_y U^P v_j + j d_xy U^P d_x^{-1} v_j = F_j,
/// assembled from f^e_j and the commutator groups, each commutator
/// expanded as a Leibniz sum. All products are dealiased.
Field assemble_Fj(const FlowState& flow, const GevreyParams& p, int j);
Field assemble_Fj(const Field& u, const EulerTrace& trace, const GevreyParams& p, double t, int j);

/// The terms of the u_j equation that act on u_j and v_j, excluding d_t:
///   beta<j> u_j + U^P d_x u_j + <j> d_x U^P u_j + V^P d_y u_j - d_y^2 u_j
///     + d_y U^P v_j + j d_xy U^P d_x^{-1} v_j.
Field uj_operator(const FlowState& flow, const DerivedSeq& seq, const GevreyParams& p);

/// Residual of the u_j equation between two consecutive solver states,
/// discretised in time the way the solver advances u: d_t u_j becomes
///   M_j(t) d_x^j (u^{n+1} - u^n) / dt - beta<j> u_j,
/// d_y^2 (and the tangential term eps d_x^2) act on the new level, every
/// other term on the old one. The remainder is then the mismatch between
/// F_j and M_j d_x^j of the solver's explicit tendency. Boundary rows
/// (y = 0, y = ymax), where the equation is replaced by the boundary
/// conditions, are set to zero. Exact only for steps without CFL substeps.
struct HierarchyResidual {
  Field residual;
  Field fj;
  Field uj;
};

HierarchyResidual hierarchy_residual(const Field& u_now, const Field& u_next, double t, double dt,
                                     const EulerTrace& trace, const GevreyParams& p, int j,
                                     double eps = 0.0);

/// Flow coefficients U^P, V^P, d_x U^P sampled at the time levels t_n = n dt.
struct FlowTrajectory {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<Field> up;
  std::vector<Field> vp;
  std::vector<Field> up_x;

  std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
  /// Builds from homogenized states u(t_n) and the Euler trace.
  static std::shared_ptr<const FlowTrajectory> from_states(const std::vector<State>& states,
                                                           const EulerTrace& trace, double dt);
  /// U^P = V^P = 0 at every level, for frozen-flow checks.
  static std::shared_ptr<const FlowTrajectory> quiescent(std::size_t nx,
                                                         std::shared_ptr<const YGrid> grid,
                                                         double dt, std::size_t steps);
};

/// Discretisation of the A_j = int_0^y H_j problem and its adjoint.
///
/// Unknowns live on y-nodes 1..ny-1 (A_j = 0 at the wall, zero-gradient
/// ghost row at ymax). With the rho_j-weighted inner product
/// <a, b>_j = sum a b rho_j w_y (2 pi / nx), the adjoint of every spatial
/// piece is its exact weighted transpose, so
///   <L a, phi>_j = <a, L* phi>_j
/// holds to round-off for fields vanishing at y = 0.
///
/// Forward scheme, n = 0..N-1:
///   P A^{n+1} = A^n / dt - T^n A^n + S^n,  A^0 = 0,
/// with P = 1/dt + beta<j> - d_y^2 and T^n = U^P d_x + <j> d_x U^P + V^P d_y.
/// Backward scheme, the exact space-time adjoint of the forward one:
///   P* phi^{n-1} = phi^n / dt - (T^n)* phi^n + G^n,  phi^N = 0.
class AuxProblem {
 public:
  AuxProblem(const WeightTable& weights, int j, double beta,
             std::shared_ptr<const FlowTrajectory> flow);

  int j() const { return j_; }
  double beta() const { return beta_; }
  std::size_t steps() const { return flow_->steps(); }
  const FlowTrajectory& flow() const { return *flow_; }

  /// Spatial operator L^n = beta<j> - d_y^2 + T^n and its adjoint.
  Field apply(const Field& a, std::size_t n) const;
  Field apply_adjoint(const Field& phi, std::size_t n) const;

  Field transport(const Field& a, std::size_t n) const;
  Field transport_adjoint(const Field& phi, std::size_t n) const;
  Field implicit_apply(const Field& a) const;
  Field implicit_apply_adjoint(const Field& phi) const;

  /// sources[n] = S^n for n = 0..N-1; returns A^0..A^N.
  std::vector<Field> solve_forward(const std::vector<Field>& sources) const;
  /// forcing[n] = G^n for n = 1..N (forcing[0] is ignored); returns phi^0..phi^N.
  std::vector<Field> solve_backward(const std::vector<Field>& forcing) const;

  /// Weighted inner product <a, b>_j.
  double inner(const Field& a, const Field& b) const;

 private:
  Field zero_field() const;

  const WeightTable* weights_;
  int j_;
  double beta_;
  std::shared_ptr<const FlowTrajectory> flow_;
  std::vector<double> w_;  // rho_j * quadrature weight
  Tridiagonal diffusion_;  // beta<j> - d_y^2, wall row decoupled
  Tridiagonal implicit_;   // 1/dt + beta<j> - d_y^2
  TridiagonalFactor implicit_lu_;
  TridiagonalFactor implicit_adj_lu_;
};

/// H_j trajectory: A_j from the forward scheme forced by int_0^y u_j(t_n),
/// H_j = d_y A_j. u_j uses the Gevrey parameters p (its own beta), the
/// auxiliary problem its own beta.
struct AuxFields {
  int j = 0;
  double beta = 0.0;
  std::vector<Field> a;
  std::vector<Field> h;
  std::vector<Field> phi;
};

AuxFields solve_Hj(const AuxProblem& problem, const std::vector<State>& states,
                   const GevreyParams& p);
/// Fills aux.phi from aux.h by the backward scheme.
void solve_phij(const AuxProblem& problem, AuxFields& aux);

struct PhiBoundReport {
  int j = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  bool holds = false;
};

/// ||phi(0)||_j^2 + beta<j> int_0^T ||phi||_j^2 + int_0^T ||d_y phi||_j^2
///   <= 2 / (beta<j>) int_0^T ||H||_j^2, time integrals by the trapezoid rule.
PhiBoundReport verify_phi_bound(const AuxProblem& problem, const AuxFields& aux);

struct LowNormTerm {
  std::string name;
  double value = 0.0;
};

struct LowNormReport {
  double value = 0.0;
  std::vector<LowNormTerm> terms;
};

/// Every sup-norm and L^inf_x L^2_y(rho_0) term of the low-order norm of
/// (U^P, V^P) at one time. x-derivatives are spectral, y-derivatives finite
/// differences.
LowNormReport low_norm(const Field& up, const Field& vp, const WeightTable& weights);

/// Largest low norm over every level of a flow trajectory.
double sup_low_norm(const FlowTrajectory& flow, const WeightTable& weights);

/// ||f||_{H^s}^2 = sum_{a1 + a2 <= s} int |d_x^{a1} d_y^{a2} f|^2 (1+y)^{2 a2} rho_0.
/// s must be even and at most 6.
double hs_norm(const Field& f, int s, const WeightTable& weights);

/// Five-term triple norm from per-sample squared Gevrey norms. Throws
/// std::invalid_argument for fewer than two samples or unsorted times.
double triple_norm(const std::vector<TripleSample>& samples, double beta);

}  // namespace prandtl
