#include <catch2/catch_amalgamated.hpp>

#include "netbridge/dynamics.hpp"
#include "netbridge/lyapunov.hpp"
#include "netbridge/rng.hpp"

using namespace netbridge;

namespace {

// Fine-step RK4 on ydot = A y, used as the reference integrator.
Eigen::VectorXd rk4_substeps(const Eigen::MatrixXd& a, Eigen::VectorXd y, double dt, int substeps) {
  const double h = dt / substeps;
  for (int k = 0; k < substeps; ++k) {
    const Eigen::VectorXd k1 = a * y;
    const Eigen::VectorXd k2 = a * (y + 0.5 * h * k1);
    const Eigen::VectorXd k3 = a * (y + 0.5 * h * k2);
    const Eigen::VectorXd k4 = a * (y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

}  // namespace

TEST_CASE("equilibrium is a fixed point") {
  const LtiModel model = make_planar2d_model();
  const Eigen::VectorXd sp = model.embed_planar({0.4, 0.6});
  const AgentState next = step(model, AgentState{sp, 0.0}, sp);
  CHECK(next.x == sp);
  CHECK(next.time == model.dt());
}

TEST_CASE("scalar exponential halves the offset at dt = ln 2") {
  const LtiModel model(-Eigen::MatrixXd::Identity(2, 2), std::log(2.0), "contract", {0, 1});
  Eigen::VectorXd x(2), sp(2);
  x << 1.0, 0.0;
  sp << 0.0, 0.0;
  const AgentState next = step(model, AgentState{x, 0.0}, sp);
  CHECK(std::abs(next.x[0] - 0.5) < 1e-14);
  CHECK(std::abs(next.x[1]) < 1e-14);
}

TEST_CASE("exact map agrees with a fine-step RK4 oracle on quad-12") {
  const LtiModel model = make_quad12_model();
  Rng rng(5);
  Eigen::VectorXd sp = Eigen::VectorXd::Zero(12);
  Eigen::VectorXd x(12);
  for (int i = 0; i < 12; ++i) x[i] = rng.uniform(-1.0, 1.0);

  AgentState exact{x, 0.0};
  Eigen::VectorXd y = x;  // RK4 trajectory of the offset
  double max_rel = 0.0;
  for (int k = 0; k < 100; ++k) {
    exact = step(model, exact, sp);
    y = rk4_substeps(model.a(), y, model.dt(), 100);
    max_rel = std::max(max_rel, (exact.x - y).norm() / (y.norm() + 1e-300));
  }
  CHECK(max_rel <= 1e-6);
}

TEST_CASE("one dt step equals two dt/2 steps") {
  const LtiModel full = make_quad12_model(0.02);
  const LtiModel half = make_quad12_model(0.01);
  Rng rng(6);
  Eigen::VectorXd sp = half.embed_planar({0.2, 0.8});
  Eigen::VectorXd x(12);
  for (int i = 0; i < 12; ++i) x[i] = rng.uniform(-1.0, 1.0);

  const AgentState one = step(full, AgentState{x, 0.0}, sp);
  const AgentState two = step(half, step(half, AgentState{x, 0.0}, sp), sp);
  CHECK((one.x - two.x).norm() <= 1e-12 * (1.0 + one.x.norm()));
}

TEST_CASE("reached_setpoint is the closed inner sublevel set") {
  const LtiModel model = make_planar2d_model();
  const SpdMatrix p = solve_lyapunov(model.a(), SpdMatrix::identity(4)).p;
  const Eigen::VectorXd sp = model.embed_planar({0.5, 0.5});
  const double s = 0.01;
  CHECK(reached_setpoint(AgentState{sp, 0.0}, sp, p, s));

  // Scale a fixed offset to sit exactly on, then just outside, the boundary.
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(4);
  dir[0] = 1.0;
  const double raw = p_norm_sq(p, sp + dir, sp);
  const Eigen::VectorXd on = sp + dir * std::sqrt(s / raw);
  CHECK(p_norm_sq(p, on, sp) <= s * (1.0 + 1e-12));
  CHECK(reached_setpoint(AgentState{on, 0.0}, sp, p, s * (1.0 + 1e-12)));
  const Eigen::VectorXd out = sp + dir * std::sqrt(1.01 * s / raw);
  CHECK_FALSE(reached_setpoint(AgentState{out, 0.0}, sp, p, s));
}

TEST_CASE("default models: poles and Hurwitz property") {
  const auto models = default_models();
  REQUIRE(models.size() >= 2);
  CHECK(models[0].label() == "planar-2d");
  CHECK(models[1].label() == "quad-12");

  // planar-2d: characteristic polynomial per axis is l^2 + 4l + 4, double pole -2.
  Eigen::EigenSolver<Eigen::MatrixXd> es(models[0].a());
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(es.eigenvalues()[i].real() + 2.0) < 1e-9);
    CHECK(std::abs(es.eigenvalues()[i].imag()) < 1e-9);
  }
  for (const auto& model : models) CHECK(is_hurwitz(model.a()));
  CHECK_THROWS_AS(make_model_by_label("bogus"), ConfigError);
}

TEST_CASE("Lyapunov value decreases along trajectories") {
  for (const LtiModel& model : default_models()) {
    const SpdMatrix p = solve_lyapunov(model.a(), SpdMatrix::identity(model.dim())).p;
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::VectorXd sp(model.dim());
      Eigen::VectorXd x(model.dim());
      for (int i = 0; i < model.dim(); ++i) {
        sp[i] = rng.uniform(-1.0, 1.0);
        x[i] = rng.uniform(-1.0, 1.0);
      }
      AgentState state{x, 0.0};
      double v = p_norm_sq(p, state.x, sp);
      for (int k = 0; k < 100 && v > 1e-12; ++k) {
        state = step(model, state, sp);
        const double v_next = p_norm_sq(p, state.x, sp);
        CHECK(v_next < v);
        v = v_next;
      }
    }
  }
}

TEST_CASE("sublevel sets are positively invariant under stepping") {
  const LtiModel model = make_planar2d_model();
  const SpdMatrix p = solve_lyapunov(model.a(), SpdMatrix::identity(4)).p;
  const double c = 0.5;
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd sp(4);
    for (int i = 0; i < 4; ++i) sp[i] = rng.uniform(-1.0, 1.0);
    const Ellipsoid e(sp, p, c);
    // Start on the boundary: the worst case.
    AgentState state{sample_boundary(e, 100 + trial, 1)[0], 0.0};
    for (int k = 0; k < 200; ++k) {
      state = step(model, state, sp);
      CHECK(contains(e, state.x));
    }
  }
}
