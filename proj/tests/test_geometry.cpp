#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "qgeo/geometry.hpp"

using namespace qgeo;
using namespace qgeo::geom;
using namespace qgeo::models;
namespace ts = qgeo::models::three_state;

namespace {

HamiltonianFamily constant_family() {
  Mat m(2, 2);
  m << 0.3, cxd(0.1, 0.2), cxd(0.1, -0.2), -0.4;
  return make_matrix_polynomial(2, 2, {{m, {0, 0}}});
}

// Real symmetric two-parameter family with a safely isolated ground level.
HamiltonianFamily real_family() {
  Mat m0(3, 3), m1(3, 3), m2(3, 3), m3(3, 3);
  m0 << -2, 0.3, 0.1, 0.3, 0.5, -0.2, 0.1, -0.2, 1.5;
  m1 << 0.2, 0.4, 0, 0.4, -0.1, 0.3, 0, 0.3, 0.1;
  m2 << 0.1, -0.2, 0.3, -0.2, 0.2, 0.1, 0.3, 0.1, -0.3;
  m3 << 0, 0.1, 0, 0.1, 0.2, -0.1, 0, -0.1, 0.1;
  return make_matrix_polynomial(
      3, 2, {{m0, {0, 0}}, {m1, {1, 0}}, {m2, {0, 1}}, {m3, {1, 1}}});
}

RVec random_real_point(std::mt19937& gen) {
  RVec x(2);
  x << oracles::uniform(gen, -0.4, 0.4), oracles::uniform(gen, -0.4, 0.4);
  return x;
}

// Phase aligning the computed tracked state to a reference vector.
cxd alignment_phase(const Vec& computed, const Vec& reference) {
  cxd overlap = computed.dot(reference);
  return overlap / std::abs(overlap);
}

}  // namespace

TEST_CASE("covariant_frame: constant family has zero dkets") {
  auto fam = constant_family();
  RVec x(2);
  x << 0.3, -0.7;
  for (auto backend : {DerivativeBackend::kSumOverStates,
                       DerivativeBackend::kFiniteDifference}) {
    GeomOptions opts;
    opts.backend = backend;
    auto tf = covariant_frame(fam, x, 0, opts);
    CHECK(tf.dkets.cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("covariant_frame: Bloch chart has <D_theta|D_theta> = 1/4") {
  auto fam = make_two_level_bloch();
  auto& gen = oracles::rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    RVec x(2);
    x << oracles::uniform(gen, 0.3, M_PI - 0.3),
        oracles::uniform(gen, 0.0, 2 * M_PI);
    auto tf = covariant_frame(fam, x, 0);
    cxd htt = tf.dkets.col(0).dot(tf.dkets.col(0));
    CHECK(htt.real() == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(std::abs(tf.frame.state().dot(tf.dkets.col(0))) < 1e-10);
    CHECK(std::abs(tf.frame.state().dot(tf.dkets.col(1))) < 1e-10);
  }
}

TEST_CASE("covariant_frame: three-state dkets match the closed forms") {
  auto fam = make_three_state();
  auto& gen = oracles::rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    auto c = oracles::random_canonical(gen);
    auto tf = covariant_frame(fam, c.coords(), 0);
    Vec ref_state = ts::state(c);
    cxd phase = alignment_phase(tf.frame.state(), ref_state);
    Mat aligned = tf.dkets * phase;
    CHECK((aligned - ts::reference_dkets(c)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("covariant_frame: backend equivalence on builtin models") {
  auto& gen = oracles::rng(23);
  GeomOptions fd;
  fd.backend = DerivativeBackend::kFiniteDifference;

  auto three = make_three_state();
  auto two = make_two_level();
  for (int trial = 0; trial < 5; ++trial) {
    auto c = oracles::random_canonical(gen);
    auto a = covariant_frame(three, c.coords(), 0);
    auto b = covariant_frame(three, c.coords(), 0, fd);
    CHECK((a.dkets - b.dkets).cwiseAbs().maxCoeff() < 1e-6);

    RVec qp = oracles::random_qp(gen);
    auto a2 = covariant_frame(two, qp, 0);
    auto b2 = covariant_frame(two, qp, 0, fd);
    CHECK((a2.dkets - b2.dkets).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("qgt: two-level metric in canonical coordinates") {
  auto fam = make_two_level();
  auto& gen = oracles::rng(24);
  for (int trial = 0; trial < 20; ++trial) {
    RVec x = oracles::random_qp(gen);
    QGT q = qgt_at(fam, x, 0);
    CHECK((q.g - two_level_metric(x[1])).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("qgt: three-state Berry curvature is the symplectic constant") {
  auto fam = make_three_state();
  auto& gen = oracles::rng(25);
  for (int trial = 0; trial < 10; ++trial) {
    auto c = oracles::random_canonical(gen);
    QGT q = qgt_at(fam, c.coords(), 0);
    CHECK((q.b - ts::reference_curvature()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((q.g - ts::reference_metric(c)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("qgt: h depends on the p coordinates only") {
  auto fam = make_three_state();
  ts::CanonicalState a{0.4, 1.1, 0.55, -0.2};
  ts::CanonicalState b{2.9, 0.3, 0.55, -0.2};
  QGT qa = qgt_at(fam, a.coords(), 0);
  QGT qb = qgt_at(fam, b.coords(), 0);
  CHECK((qa.h - qb.h).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("qgt: real-symmetric family has vanishing Berry curvature") {
  auto fam = real_family();
  auto& gen = oracles::rng(26);
  for (int trial = 0; trial < 5; ++trial) {
    RVec x = random_real_point(gen);
    QGT q = qgt_at(fam, x, 0);
    CHECK(q.b.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("qgt: Hermitian h with positive semidefinite metric") {
  auto fam = make_three_state();
  auto& gen = oracles::rng(27);
  for (int trial = 0; trial < 10; ++trial) {
    auto c = oracles::random_canonical(gen);
    QGT q = qgt_at(fam, c.coords(), 0);
    CHECK(hermiticity_defect(q.h) < 1e-10);
    CHECK((q.g - q.g.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((q.b + q.b.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<RMat> es(q.g);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("second_covariant: constant family vanishes") {
  auto fam = constant_family();
  RVec x(2);
  x << 0.1, 0.2;
  CHECK(second_covariant(fam, x, 0, 0, 1).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("second_covariant: normal component equals -h") {
  auto fam = make_three_state();
  auto& gen = oracles::rng(28);
  for (int trial = 0; trial < 3; ++trial) {
    auto c = oracles::random_canonical(gen);
    auto tf = covariant_frame(fam, c.coords(), 0);
    QGT q = qgt(tf);
    for (int mu = 0; mu < 4; ++mu)
      for (int nu = 0; nu < 4; ++nu) {
        Vec dd = second_covariant(fam, c.coords(), 0, mu, nu);
        cxd normal = tf.frame.state().dot(dd);
        CHECK(std::abs(normal + q.h(mu, nu)) < 1e-8);
      }
  }
}

TEST_CASE("christoffel: symbols symmetric in the last index pair") {
  auto fam = make_three_state();
  auto& gen = oracles::rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    auto c = oracles::random_canonical(gen);
    Tensor3 first = christoffel_first(fam, c.coords(), 0);
    double resid = 0.0;
    for (int l = 0; l < 4; ++l)
      for (int m = 0; m < 4; ++m)
        for (int k = 0; k < 4; ++k)
          resid = std::max(resid, std::abs(first(l, m, k) - first(l, k, m)));
    CHECK(resid < 1e-7);
  }
}

TEST_CASE("christoffel: raising and lowering round-trips on a 2-chart") {
  auto fam = make_three_state_chart2();
  auto& gen = oracles::rng(30);
  for (int trial = 0; trial < 5; ++trial) {
    RVec x(2);
    x << oracles::uniform(gen, -1.0, 1.0), oracles::uniform(gen, -1.0, 1.0);
    auto chr = christoffel(fam, x, 0);
    CHECK(chr.h_cond < 1e6);
    double resid = 0.0;
    for (int l = 0; l < 2; ++l)
      for (int m = 0; m < 2; ++m)
        for (int k = 0; k < 2; ++k) {
          cxd lowered = 0.0;
          for (int r = 0; r < 2; ++r)
            lowered += chr.metric.h(l, r) * chr.second(r, m, k);
          resid = std::max(resid, std::abs(lowered - chr.first(l, m, k)));
        }
    CHECK(resid < 1e-8);
  }
}

TEST_CASE("christoffel: full-dimension charts of a projective state space "
          "have rank-deficient h") {
  // Four parameters but a two-complex-dimensional tangent space: (h) is
  // structurally singular, so raising must refuse.
  auto fam = make_three_state();
  auto& gen = oracles::rng(52);
  auto c = oracles::random_canonical(gen);
  CHECK_THROWS_AS(christoffel(fam, c.coords(), 0), SingularQGT);
}

TEST_CASE("christoffel: real-symmetric family has real symbols") {
  auto fam = real_family();
  RVec x(2);
  x << 0.2, -0.1;
  auto chr = christoffel(fam, x, 0);
  double imag_max = 0.0;
  for (int l = 0; l < 2; ++l)
    for (int m = 0; m < 2; ++m)
      for (int k = 0; k < 2; ++k)
        imag_max = std::max(imag_max, std::abs(chr.c(l, m, k)));
  CHECK(imag_max < 1e-9);
}

TEST_CASE("christoffel: singular chart raises") {
  auto fam = constant_family();  // h = 0 everywhere
  RVec x(2);
  x << 0.0, 0.0;
  CHECK_THROWS_AS(christoffel(fam, x, 0), SingularQGT);
}

TEST_CASE("compatibility_check: three-state residuals") {
  auto fam = make_three_state();
  auto& gen = oracles::rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    auto c = oracles::random_canonical(gen);
    auto rep = compatibility_check(fam, c.coords(), 0);
    CHECK(rep.dh_identity < 1e-6);
    CHECK(rep.real_identity < 1e-6);
    CHECK(rep.imag_identity < 1e-6);
    CHECK(rep.symmetry < 1e-7);
  }
}

TEST_CASE("compatibility_check: two-level residuals") {
  auto fam = make_two_level();
  auto& gen = oracles::rng(32);
  for (int trial = 0; trial < 5; ++trial) {
    RVec x = oracles::random_qp(gen, 0.2);
    auto rep = compatibility_check(fam, x, 0);
    CHECK(rep.dh_identity < 1e-7);
  }
}

TEST_CASE("compatibility_check: real family imaginary identity is 0 = 0") {
  auto fam = real_family();
  RVec x(2);
  x << -0.15, 0.25;
  auto rep = compatibility_check(fam, x, 0);
  CHECK(rep.imag_identity < 1e-9);
}

TEST_CASE("christoffel: imaginary part matches the connection identity") {
  // C_{l m n} = Im <d_l psi | d_m d_n psi> + A_l g_{mn} + A_m g_{ln}
  //             + A_n g_{lm} + A_l A_m A_n, evaluated on the exact chart.
  auto fam = make_three_state();
  auto& gen = oracles::rng(33);
  auto state_map = [](const RVec& x) {
    return ts::state(ts::CanonicalState::from(x));
  };
  for (int trial = 0; trial < 20; ++trial) {
    auto c = oracles::random_canonical(gen);
    Tensor3 first = christoffel_first(fam, c.coords(), 0);
    RMat g = ts::reference_metric(c);
    RVec a = ts::reference_connection(c);

    std::array<Vec, 4> dpsi;
    for (int mu = 0; mu < 4; ++mu)
      dpsi[mu] = oracles::richardson_vec(state_map, c.coords(), mu, 1e-3);

    double resid = 0.0;
    for (int l = 0; l < 4; ++l)
      for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) {
          Vec ddpsi =
              oracles::mixed_second_vec(state_map, c.coords(), m, n, 1e-3);
          double rhs = dpsi[l].dot(ddpsi).imag() + a[l] * g(m, n) +
                       a[m] * g(l, n) + a[n] * g(l, m) + a[l] * a[m] * a[n];
          resid = std::max(resid, std::abs(first(l, m, n).imag() - rhs));
        }
    CHECK(resid < 1e-6);
  }
}

TEST_CASE("curvature: single-parameter manifold is flat") {
  Mat sz(2, 2), sx(2, 2), id(2, 2);
  sz << 1, 0, 0, -1;
  sx << 0, 1, 1, 0;
  id << 1, 0, 0, 1;
  auto fam = make_matrix_polynomial(2, 1, {{sz, {0}}, {sx, {1}}});
  RVec x(1);
  x << 0.4;
  auto r = curvature(fam, x, 0);
  CHECK(r.mixed.max_abs() < 1e-10);
  CHECK(r.covariant.max_abs() < 1e-10);
}

TEST_CASE("curvature: three-state 2-chart symmetry residuals") {
  auto fam = make_three_state_chart2();
  auto& gen = oracles::rng(34);
  for (int trial = 0; trial < 3; ++trial) {
    RVec x(2);
    x << oracles::uniform(gen, -1.0, 1.0), oracles::uniform(gen, -1.0, 1.0);
    auto r = curvature(fam, x, 0);
    double scale = r.covariant.max_abs();
    REQUIRE(scale > 1e-3);  // genuinely curved
    double anti_last = 0.0, anti_herm = 0.0;
    for (int k = 0; k < 2; ++k)
      for (int nu = 0; nu < 2; ++nu)
        for (int l = 0; l < 2; ++l)
          for (int m = 0; m < 2; ++m) {
            anti_last = std::max(
                anti_last, std::abs(r.covariant(k, nu, l, m) +
                                    r.covariant(k, nu, m, l)));
            anti_herm = std::max(
                anti_herm, std::abs(r.covariant(k, nu, l, m) +
                                    std::conj(r.covariant(nu, k, l, m))));
          }
    CHECK(anti_last / scale < 1e-5);
    CHECK(anti_herm / scale < 1e-5);
  }
}

TEST_CASE("gauge invariance: twisted frames leave h, Upsilon, R unchanged") {
  auto fam = make_three_state();
  GeomOptions twisted;
  twisted.gauge_phase = [](const RVec& x) {
    return 0.8 * std::sin(x[0] + 0.3 * x[2]) - 1.1 * std::cos(x[1] - x[3]) +
           0.4 * x[2] * x[3];
  };
  auto& gen = oracles::rng(35);
  auto c = oracles::random_canonical(gen, 0.2);

  QGT q0 = qgt_at(fam, c.coords(), 0);
  QGT q1 = qgt_at(fam, c.coords(), 0, twisted);
  CHECK((q0.h - q1.h).cwiseAbs().maxCoeff() < 1e-8);

  Tensor3 f0 = christoffel_first(fam, c.coords(), 0);
  Tensor3 f1 = christoffel_first(fam, c.coords(), 0, twisted);
  CHECK((f0.raw() - f1.raw()).cwiseAbs().maxCoeff() < 1e-8);

  auto chart = make_three_state_chart2();
  GeomOptions chart_twist;
  chart_twist.gauge_phase = [](const RVec& x) {
    return 0.6 * std::sin(x[0] - 0.4 * x[1]) + 0.9 * std::cos(2.0 * x[1]);
  };
  RVec x(2);
  x << 0.35, -0.2;
  auto chr0 = christoffel(chart, x, 0);
  auto chr1 = christoffel(chart, x, 0, chart_twist);
  CHECK((chr0.second.raw() - chr1.second.raw()).cwiseAbs().maxCoeff() < 1e-8);

  // The stacked differences amplify phase rounding by 1/(h_in * h_out), so
  // the curvature comparison runs at steps where the stochastic floor is
  // far below the target; the truncation bias is gauge-exact and cancels.
  GeomOptions coarse = chart_twist;
  coarse.stencil_step = 3e-4;
  coarse.curvature_step = 3e-3;
  GeomOptions coarse_plain;
  coarse_plain.stencil_step = 3e-4;
  coarse_plain.curvature_step = 3e-3;
  auto r0 = curvature(chart, x, 0, coarse_plain);
  auto r1 = curvature(chart, x, 0, coarse);
  CHECK((r0.covariant.raw() - r1.covariant.raw()).cwiseAbs().maxCoeff() <
        1e-8);
}

TEST_CASE("pullback: three-state tensors transform by the chain rule") {
  auto fam = make_three_state();
  // Smooth embedding of a 2-parameter configuration space into the chart.
  auto map = [](const RVec& y) {
    RVec xi(4);
    xi << 0.5 + 0.3 * std::sin(y[0]), 0.7 + 0.2 * y[1],
        0.55 + 0.1 * std::cos(y[0] + y[1]), 0.15 + 0.05 * std::sin(y[1]);
    return xi;
  };
  auto jac = [](const RVec& y) {
    RMat j = RMat::Zero(4, 2);
    j(0, 0) = 0.3 * std::cos(y[0]);
    j(1, 1) = 0.2;
    j(2, 0) = j(2, 1) = -0.1 * std::sin(y[0] + y[1]);
    j(3, 1) = 0.05 * std::cos(y[1]);
    return j;
  };
  auto pulled = models::reparametrize(fam, map, 2, jac);

  RVec y(2);
  y << 0.3, -0.4;
  QGT q = qgt_at(pulled, y, 0);
  RMat j = jac(y);
  auto c = ts::CanonicalState::from(map(y));
  RMat g_expect = j.transpose() * ts::reference_metric(c) * j;
  RMat b_expect = j.transpose() * ts::reference_curvature() * j;
  CHECK((q.g - g_expect).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((q.b - b_expect).cwiseAbs().maxCoeff() < 1e-10);
}
