#include "prandtl/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "prandtl/parallel.hpp"

namespace prandtl {

namespace {

double binomial(int n, int k) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

// d_x^l f for l = 0..lmax, all from one forward transform.
std::vector<Field> x_derivatives(const Field& f, int lmax) {
  const SpectralField fh = to_spectral(f);
  std::vector<Field> out;
  out.reserve(static_cast<std::size_t>(lmax) + 1);
  out.push_back(f);
  for (int l = 1; l <= lmax; ++l) out.push_back(to_physical(dx_pow(fh, l)));
  return out;
}

// acc += c * a * b, pointwise.
void add_product(Field& acc, double c, const Field& a, const Field& b) {
  auto r = acc.values();
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += c * av[i] * bv[i];
}

void zero_wall_row(Field& f) {
  for (std::size_t ix = 0; ix < f.nx(); ++ix) f(ix, 0) = 0.0;
}

void zero_boundary_rows(Field& f) {
  for (std::size_t ix = 0; ix < f.nx(); ++ix) {
    f(ix, 0) = 0.0;
    f(ix, f.ny() - 1) = 0.0;
  }
}

double sup_abs(const Field& f) { return max_abs(f); }

// max over x of (int |f|^2 rho_0 dy)^{1/2}
double sup_x_l2_rho0(const Field& f, const WeightTable& weights) {
  double worst = 0.0;
  for (std::size_t ix = 0; ix < f.nx(); ++ix) {
    worst = std::max(worst, weighted_norm_y(f.row(ix), 0, weights));
  }
  return worst;
}

Field scale_by_y_power(const Field& f, int power) {
  Field out = f;
  for (std::size_t ix = 0; ix < f.nx(); ++ix) {
    for (std::size_t iy = 0; iy < f.ny(); ++iy) {
      out(ix, iy) *= std::pow(1.0 + f.grid().node(iy), power);
    }
  }
  return out;
}

double trapezoid(const std::vector<double>& values, double dt) {
  if (values.size() < 2) return 0.0;
  double acc = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) acc += values[i];
  return acc * dt;
}

}  // namespace

DerivedSeq compute_uj(const Field& u, const GevreyParams& p, double t, int j) {
  if (j < 0) throw std::invalid_argument("compute_uj: negative j");
  if (static_cast<std::size_t>(j) > u.nx() / 4) {
    throw std::domain_error("compute_uj: j = " + std::to_string(j) + " exceeds nx/4");
  }
  DerivedSeq seq;
  seq.j = j;
  seq.mj = m_coefficient(j, p.tau(t), p.gamma, p.r);
  const SpectralField uh = to_spectral(u);
  SpectralField ujh = dx_pow(uh, j);
  for (auto& c : ujh.coefficients()) c *= seq.mj;
  seq.uj = to_physical(ujh);
  seq.vj = antideriv_field(to_physical(dx_pow(ujh, 1)));
  seq.vj *= -1.0;
  return seq;
}

double index_ratio(int j, const GevreyParams& p, double t) {
  const double jp = j + 1.0;
  return std::pow(jp / (jp + 1.0), p.r) * std::pow(jp, p.gamma) / p.tau(t);
}

FlowState make_flow_state(const Field& u, const EulerTrace& trace, double t) {
  FlowState s;
  s.t = t;
  s.u = dealias(u);
  s.v = v_from_u(s.u);
  s.lift = lift_fields(trace, t, u.nx(), u.grid_ptr());
  s.fe = forcing_fe(trace, t, u.nx(), u.grid_ptr());
  return s;
}

Field assemble_Fj(const FlowState& flow, const GevreyParams& p, int j) {
  if (j < 0) throw std::invalid_argument("assemble_Fj: negative j");
  const double mj = m_coefficient(j, p.tau(flow.t), p.gamma, p.r);
  const Field uy = dy_field(flow.u);
  const Field ue_x = -1.0 * flow.lift.ve_y;

  const auto Du = x_derivatives(flow.u, j + 1);
  const auto Duy = x_derivatives(uy, j);
  const auto Dv = x_derivatives(flow.v, j);
  const auto DUe = x_derivatives(flow.lift.ue, j + 1);
  const auto DVe = x_derivatives(flow.lift.ve, j);
  const auto DUey = x_derivatives(flow.lift.ue_y, j + 1);
  const auto DUex = x_derivatives(ue_x, j);

  Field acc(flow.u.nx(), flow.u.grid_ptr());
  for (int l = 1; l <= j; ++l) {
    const double c = -binomial(j, l);
    add_product(acc, c, Du[l], Du[j - l + 1]);    // [u d_x, d_x^j] u
    add_product(acc, c, Duy[l], Dv[j - l]);       // [d_y u, d_x^j] v
    add_product(acc, c, DUe[l], Du[j - l + 1]);   // [U^e d_x, d_x^j] u
    add_product(acc, c, DVe[l], Duy[j - l]);      // [V^e d_y, d_x^j] u
    add_product(acc, c, DUex[l], Du[j - l]);      // [d_x U^e, d_x^j] u
    add_product(acc, c, DUey[l], Dv[j - l]);      // [d_y U^e, d_x^j] v
  }
  add_product(acc, j + 1.0, Du[1], Du[j]);
  add_product(acc, 1.0, flow.v, Duy[j]);
  add_product(acc, static_cast<double>(j), DUe[1], Du[j]);
  if (j >= 1) {
    add_product(acc, static_cast<double>(j), Duy[1], Dv[j - 1]);
    add_product(acc, static_cast<double>(j), DUey[1], Dv[j - 1]);
  }

  SpectralField fh = to_spectral(acc);
  const SpectralField feh = dx_pow(to_spectral(flow.fe), j);
  auto out = fh.coefficients();
  const auto fe = feh.coefficients();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mj * (out[i] + fe[i]);
  dealias(fh);
  return to_physical(fh);
}

Field assemble_Fj(const Field& u, const EulerTrace& trace, const GevreyParams& p, double t, int j) {
  return assemble_Fj(make_flow_state(u, trace, t), p, j);
}

Field uj_operator(const FlowState& flow, const DerivedSeq& seq, const GevreyParams& p) {
  const int j = seq.j;
  const Field& uj = seq.uj;
  const Field up = flow.u + flow.lift.ue;
  const Field vp = flow.v + flow.lift.ve;
  const Field upy = dy_field(flow.u) + flow.lift.ue_y;
  const Field up_x = dx_pow(up, 1);
  const Field up_xy = dx_pow(upy, 1);
  const Field uj_x = dx_pow(uj, 1);
  const Field uj_y = dy_field(uj);

  Field acc(uj.nx(), uj.grid_ptr());
  add_product(acc, 1.0, up, uj_x);
  add_product(acc, j + 1.0, up_x, uj);
  add_product(acc, 1.0, vp, uj_y);
  add_product(acc, 1.0, upy, seq.vj);
  if (j >= 1) {
    // d_x^{-1} v_j = M_j d_x^{j-1} v
    SpectralField vh = dx_pow(to_spectral(flow.v), j - 1);
    for (auto& c : vh.coefficients()) c *= seq.mj;
    add_product(acc, static_cast<double>(j), up_xy, to_physical(vh));
  }
  Field out = dealias(acc);
  out -= dyy_field(uj);
  const double damping = p.beta * (j + 1.0);
  auto o = out.values();
  const auto u = uj.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += damping * u[i];
  return out;
}

HierarchyResidual hierarchy_residual(const Field& u_now, const Field& u_next, double t, double dt,
                                     const EulerTrace& trace, const GevreyParams& p, int j,
                                     double eps) {
  if (!(dt > 0.0)) throw std::invalid_argument("hierarchy_residual: dt must be positive");
  const FlowState flow = make_flow_state(u_now, trace, t);
  const DerivedSeq now = compute_uj(flow.u, p, t, j);
  // w = M_j(t) d_x^j (u^{n+1} - u^n): the increment with the weight frozen
  // at t, so that w / dt + beta<j> u_j replaces d_t u_j.
  const Field w = compute_uj(dealias(u_next) - flow.u, p, t, j).uj;

  HierarchyResidual out;
  out.fj = assemble_Fj(flow, p, j);
  out.uj = now.uj;
  out.residual = uj_operator(flow, now, p);
  out.residual -= out.fj;
  out.residual -= dyy_field(w);
  if (eps > 0.0) {
    const Field reg = dx_pow(now.uj + w, 2);
    out.residual -= eps * reg;
  }
  auto r = out.residual.values();
  const auto wv = w.values();
  const auto uj = now.uj.values();
  const double damping = p.beta * (j + 1.0);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += wv[i] / dt - damping * uj[i];
  zero_boundary_rows(out.residual);
  return out;
}

std::shared_ptr<const FlowTrajectory> FlowTrajectory::from_states(const std::vector<State>& states,
                                                                  const EulerTrace& trace,
                                                                  double dt) {
  if (states.empty()) throw std::invalid_argument("FlowTrajectory: no states");
  auto traj = std::make_shared<FlowTrajectory>();
  traj->dt = dt;
  for (const State& s : states) {
    const Lift lift = lift_fields(trace, s.t, s.u.nx(), s.u.grid_ptr());
    traj->times.push_back(s.t);
    traj->up.push_back(s.u + lift.ue);
    traj->vp.push_back(v_from_u(s.u) + lift.ve);
    traj->up_x.push_back(dx_pow(traj->up.back(), 1));
  }
  return traj;
}

std::shared_ptr<const FlowTrajectory> FlowTrajectory::quiescent(std::size_t nx,
                                                                std::shared_ptr<const YGrid> grid,
                                                                double dt, std::size_t steps) {
  auto traj = std::make_shared<FlowTrajectory>();
  traj->dt = dt;
  const Field zero(nx, std::move(grid));
  for (std::size_t n = 0; n <= steps; ++n) {
    traj->times.push_back(static_cast<double>(n) * dt);
    traj->up.push_back(zero);
    traj->vp.push_back(zero);
    traj->up_x.push_back(zero);
  }
  return traj;
}

AuxProblem::AuxProblem(const WeightTable& weights, int j, double beta,
                       std::shared_ptr<const FlowTrajectory> flow)
    : weights_(&weights), j_(j), beta_(beta), flow_(std::move(flow)) {
  if (j < 0 || j > weights.jmax()) throw std::invalid_argument("AuxProblem: j outside weight table");
  if (!(beta > 0.0)) throw std::invalid_argument("AuxProblem: beta must be positive");
  if (!flow_ || flow_->times.empty() || !(flow_->dt > 0.0)) {
    throw std::invalid_argument("AuxProblem: empty flow trajectory");
  }
  const YGrid& g = weights.grid();
  const auto rho = weights.rho(j);
  const auto q = g.qweights();
  w_.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) w_[i] = rho[i] * q[i];

  const EndConditions bc{EndCondition::Dirichlet0, EndCondition::Neumann0};
  const double damping = beta * (j + 1.0);
  auto decouple_wall = [](Tridiagonal& m) {
    m.upper[0] = 0.0;
    m.lower[1] = 0.0;
  };
  std::vector<double> a(g.size(), damping);
  diffusion_ = helmholtz_matrix(g, a, 1.0, bc);
  decouple_wall(diffusion_);
  std::fill(a.begin(), a.end(), 1.0 / flow_->dt + damping);
  implicit_ = helmholtz_matrix(g, a, 1.0, bc);
  decouple_wall(implicit_);
  implicit_lu_ = TridiagonalFactor(implicit_);
  implicit_adj_lu_ = TridiagonalFactor(implicit_.weighted_transpose(w_));
}

Field AuxProblem::zero_field() const { return Field(flow_->up.front().nx(), weights_->grid_ptr()); }

Field AuxProblem::transport(const Field& a, std::size_t n) const {
  Field a0 = a;
  zero_wall_row(a0);
  const Field ax = dx_pow(a0, 1);
  const Field ay = dy_field(a0);
  Field out = zero_field();
  add_product(out, 1.0, flow_->up[n], ax);
  add_product(out, j_ + 1.0, flow_->up_x[n], a0);
  add_product(out, 1.0, flow_->vp[n], ay);
  zero_wall_row(out);
  return out;
}

Field AuxProblem::transport_adjoint(const Field& phi, std::size_t n) const {
  Field p0 = phi;
  zero_wall_row(p0);
  Field out = zero_field();
  // (U^P d_x)^T = -d_x (U^P .), since the spectral d_x is antisymmetric.
  const Field flux = pointwise(flow_->up[n], p0);
  out -= dx_pow(flux, 1);
  add_product(out, j_ + 1.0, flow_->up_x[n], p0);
  // (V^P d_y)* phi = W^{-1} D_y^T (W V^P phi)
  const std::size_t ny = p0.ny();
  parallel_for(p0.nx(), [&](std::size_t ix) {
    std::vector<double> z(ny);
    std::vector<double> dz(ny);
    const auto prow = p0.row(ix);
    const auto vrow = flow_->vp[n].row(ix);
    for (std::size_t i = 0; i < ny; ++i) z[i] = w_[i] * vrow[i] * prow[i];
    d_y_transpose(p0.grid(), z, dz);
    auto o = out.row(ix);
    for (std::size_t i = 0; i < ny; ++i) o[i] += dz[i] / w_[i];
  });
  zero_wall_row(out);
  return out;
}

Field AuxProblem::implicit_apply(const Field& a) const {
  Field out = zero_field();
  parallel_for(a.nx(), [&](std::size_t ix) { implicit_.apply(a.row(ix), out.row(ix)); });
  return out;
}

Field AuxProblem::implicit_apply_adjoint(const Field& phi) const {
  const Tridiagonal adj = implicit_.weighted_transpose(w_);
  Field out = zero_field();
  parallel_for(phi.nx(), [&](std::size_t ix) { adj.apply(phi.row(ix), out.row(ix)); });
  return out;
}

Field AuxProblem::apply(const Field& a, std::size_t n) const {
  Field out = zero_field();
  parallel_for(a.nx(), [&](std::size_t ix) { diffusion_.apply(a.row(ix), out.row(ix)); });
  out += transport(a, n);
  return out;
}

Field AuxProblem::apply_adjoint(const Field& phi, std::size_t n) const {
  const Tridiagonal adj = diffusion_.weighted_transpose(w_);
  Field out = zero_field();
  parallel_for(phi.nx(), [&](std::size_t ix) { adj.apply(phi.row(ix), out.row(ix)); });
  out += transport_adjoint(phi, n);
  return out;
}

double AuxProblem::inner(const Field& a, const Field& b) const {
  double acc = 0.0;
  for (std::size_t ix = 0; ix < a.nx(); ++ix) {
    const auto ar = a.row(ix);
    const auto br = b.row(ix);
    for (std::size_t i = 0; i < ar.size(); ++i) acc += ar[i] * br[i] * w_[i];
  }
  return acc * 2.0 * std::numbers::pi / static_cast<double>(a.nx());
}

std::vector<Field> AuxProblem::solve_forward(const std::vector<Field>& sources) const {
  const std::size_t N = steps();
  if (sources.size() < N) throw std::invalid_argument("AuxProblem: too few source levels");
  const double inv_dt = 1.0 / flow_->dt;
  std::vector<Field> a;
  a.reserve(N + 1);
  a.push_back(zero_field());
  for (std::size_t n = 0; n < N; ++n) {
    Field rhs = transport(a[n], n);
    rhs *= -1.0;
    auto r = rhs.values();
    const auto an = a[n].values();
    const auto s = sources[n].values();
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += inv_dt * an[i] + s[i];
    zero_wall_row(rhs);
    parallel_for(rhs.nx(), [&](std::size_t ix) { implicit_lu_.solve_in_place(rhs.row(ix)); });
    if (!rhs.all_finite()) {
      throw BlowUp("auxiliary forward solve produced non-finite values", flow_->times[n + 1]);
    }
    a.push_back(std::move(rhs));
  }
  return a;
}

std::vector<Field> AuxProblem::solve_backward(const std::vector<Field>& forcing) const {
  const std::size_t N = steps();
  if (forcing.size() < N + 1) throw std::invalid_argument("AuxProblem: too few forcing levels");
  const double inv_dt = 1.0 / flow_->dt;
  std::vector<Field> phi(N + 1, zero_field());
  for (std::size_t n = N; n >= 1; --n) {
    Field rhs = transport_adjoint(phi[n], n);
    rhs *= -1.0;
    auto r = rhs.values();
    const auto pn = phi[n].values();
    const auto g = forcing[n].values();
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += inv_dt * pn[i] + g[i];
    zero_wall_row(rhs);
    parallel_for(rhs.nx(), [&](std::size_t ix) { implicit_adj_lu_.solve_in_place(rhs.row(ix)); });
    if (!rhs.all_finite()) {
      throw BlowUp("auxiliary backward solve produced non-finite values", flow_->times[n - 1]);
    }
    phi[n - 1] = std::move(rhs);
  }
  return phi;
}

AuxFields solve_Hj(const AuxProblem& problem, const std::vector<State>& states,
                   const GevreyParams& p) {
  const std::size_t N = problem.steps();
  if (states.size() < N + 1) throw std::invalid_argument("solve_Hj: trajectory too short");
  std::vector<Field> sources;
  sources.reserve(N);
  for (std::size_t n = 0; n < N; ++n) {
    const DerivedSeq seq = compute_uj(states[n].u, p, states[n].t, problem.j());
    sources.push_back(antideriv_field(seq.uj));
  }
  AuxFields aux;
  aux.j = problem.j();
  aux.beta = problem.beta();
  aux.a = problem.solve_forward(sources);
  aux.h.reserve(aux.a.size());
  for (const Field& a : aux.a) aux.h.push_back(dy_field(a));
  return aux;
}

void solve_phij(const AuxProblem& problem, AuxFields& aux) {
  aux.phi = problem.solve_backward(aux.h);
}

PhiBoundReport verify_phi_bound(const AuxProblem& problem, const AuxFields& aux) {
  const std::size_t N = problem.steps();
  if (aux.h.size() != N + 1 || aux.phi.size() != N + 1) {
    throw std::invalid_argument("verify_phi_bound: trajectories do not match the problem");
  }
  std::vector<double> phi_sq(N + 1);
  std::vector<double> dphi_sq(N + 1);
  std::vector<double> h_sq(N + 1);
  for (std::size_t n = 0; n <= N; ++n) {
    phi_sq[n] = problem.inner(aux.phi[n], aux.phi[n]);
    const Field d = dy_field(aux.phi[n]);
    dphi_sq[n] = problem.inner(d, d);
    h_sq[n] = problem.inner(aux.h[n], aux.h[n]);
  }
  const double dt = problem.flow().dt;
  const double bj = problem.beta() * (problem.j() + 1.0);
  PhiBoundReport rep;
  rep.j = problem.j();
  rep.lhs = phi_sq[0] + bj * trapezoid(phi_sq, dt) + trapezoid(dphi_sq, dt);
  rep.rhs = 2.0 / bj * trapezoid(h_sq, dt);
  rep.margin = rep.rhs - rep.lhs;
  rep.holds = rep.lhs <= rep.rhs;
  return rep;
}

LowNormReport low_norm(const Field& up, const Field& vp, const WeightTable& weights) {
  if (!up.same_shape(vp)) throw std::invalid_argument("low_norm: shape mismatch");
  LowNormReport rep;
  auto add = [&rep](std::string name, double value) {
    rep.terms.push_back({std::move(name), value});
  };
  const auto DU = x_derivatives(up, 3);
  for (int k = 0; k <= 3; ++k) add("sup|dx^" + std::to_string(k) + " U|", sup_abs(DU[k]));
  const Field uy = dy_field(up);
  const Field uyy = dyy_field(up);
  const auto DUy = x_derivatives(uy, 2);
  const Field uxyy = dx_pow(uyy, 1);
  add("sup|dx dy^2 U|", sup_abs(uxyy));
  add("sup|(1+y) dy U|", sup_abs(scale_by_y_power(uy, 1)));
  add("sup|(1+y) dy^2 U|", sup_abs(scale_by_y_power(uyy, 1)));
  add("L2rho0|(1+y) dy U|", sup_x_l2_rho0(scale_by_y_power(uy, 1), weights));
  add("L2rho0|dxy U|", sup_x_l2_rho0(DUy[1], weights));
  add("L2rho0|dxxy U|", sup_x_l2_rho0(DUy[2], weights));
  add("L2rho0|(1+y)^2 dy^2 U|", sup_x_l2_rho0(scale_by_y_power(uyy, 2), weights));
  add("L2rho0|(1+y) dx dy^2 U|", sup_x_l2_rho0(scale_by_y_power(uxyy, 1), weights));
  const auto DV = x_derivatives(vp, 2);
  for (int k = 0; k <= 2; ++k) {
    add("sup|dx^" + std::to_string(k) + " V/(1+y)|", sup_abs(scale_by_y_power(DV[k], -1)));
  }
  for (const auto& t : rep.terms) rep.value = std::max(rep.value, t.value);
  return rep;
}

double sup_low_norm(const FlowTrajectory& flow, const WeightTable& weights) {
  double low = 0.0;
  for (std::size_t n = 0; n < flow.times.size(); ++n) {
    low = std::max(low, low_norm(flow.up[n], flow.vp[n], weights).value);
  }
  return low;
}

double hs_norm(const Field& f, int s, const WeightTable& weights) {
  if (s < 0 || s > 6 || s % 2 != 0) {
    throw std::invalid_argument("hs_norm: s must be even and in [0, 6], got " + std::to_string(s));
  }
  const YGrid& g = weights.grid();
  if (g.size() != f.ny()) throw std::invalid_argument("hs_norm: grid mismatch");
  const auto rho = weights.rho(0);
  const auto q = g.qweights();
  double acc = 0.0;
  Field dy_pow = f;
  for (int a2 = 0; a2 <= s; ++a2) {
    if (a2 > 0) dy_pow = dy_field(dy_pow);
    const auto Dx = x_derivatives(dy_pow, s - a2);
    for (int a1 = 0; a1 + a2 <= s; ++a1) {
      const Field& d = Dx[a1];
      double term = 0.0;
      for (std::size_t ix = 0; ix < d.nx(); ++ix) {
        for (std::size_t iy = 0; iy < d.ny(); ++iy) {
          const double v = d(ix, iy);
          term += v * v * std::pow(1.0 + g.node(iy), 2 * a2) * rho[iy] * q[iy];
        }
      }
      acc += term;
    }
  }
  return std::sqrt(acc * 2.0 * std::numbers::pi / static_cast<double>(f.nx()));
}

double triple_norm(const std::vector<TripleSample>& samples, double beta) {
  if (samples.size() < 2) throw std::invalid_argument("triple_norm: need at least two samples");
  if (!(beta > 0.0)) throw std::invalid_argument("triple_norm: beta must be positive");
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].t > samples[i - 1].t)) {
      throw std::invalid_argument("triple_norm: sample times must increase");
    }
  }
  double int_u = 0.0;
  double int_w = 0.0;
  double int_wy = 0.0;
  double sup_u = 0.0;
  double sup_w = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    sup_u = std::max(sup_u, samples[i].u_r_half);
    sup_w = std::max(sup_w, samples[i].w_rhalf);
    if (i == 0) continue;
    const double h = 0.5 * (samples[i].t - samples[i - 1].t);
    int_u += h * (samples[i].u_r + samples[i - 1].u_r);
    int_w += h * (samples[i].w_r1 + samples[i - 1].w_r1);
    int_wy += h * (samples[i].wy_rhalf + samples[i - 1].wy_rhalf);
  }
  const double total =
      int_u + sup_u / beta + int_w / beta + sup_w / (beta * beta) + int_wy / (beta * beta);
  return std::sqrt(total);
}

}  // namespace prandtl
