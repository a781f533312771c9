#include <doctest.h>

#include "coopccm/allocation.hpp"
#include "oracles.hpp"

using namespace coopccm;

TEST_CASE("select_group picks the largest metrics") {
  VecR m(3);
  m << 0.1, 0.9, 0.5;
  const auto g = select_group(m, 2);
  REQUIRE(g.size() == 2);
  CHECK(g[0] == 1);
  CHECK(g[1] == 2);

  const auto all = select_group(m, 3);
  CHECK(all.size() == 3);
  CHECK(all[0] == 1);
  CHECK(all[1] == 2);
  CHECK(all[2] == 0);

  VecR eq = VecR::Ones(4);
  const auto tie = select_group(eq, 2);
  CHECK(tie[0] == 0);
  CHECK(tie[1] == 1);

  CHECK_THROWS_AS(select_group(m, 0), std::invalid_argument);
  CHECK_THROWS_AS(select_group(m, 4), std::invalid_argument);
}

TEST_CASE("select_group is scale equivariant") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VecR m(6);
  for (int i = 0; i < 6; ++i) m[i] = u(rng);
  const auto a = select_group(m, 3);
  const auto b = select_group(VecR(7.5 * m), 3);
  CHECK(a == b);
}

TEST_CASE("group signature matrix block layout") {
  std::mt19937_64 rng(2);
  const int seg = 4, n_p = 3;
  std::vector<VecC> sigs;
  for (int g = 0; g < 2; ++g) {
    sigs.push_back(oracle::random_cvec(rng, seg * n_p));
  }
  const MatC P_S = build_group_signature_matrix(sigs, seg);
  REQUIRE(P_S.rows() == seg * n_p);
  REQUIRE(P_S.cols() == 2 * n_p);
  for (int g = 0; g < 2; ++g) {
    for (int j = 0; j < n_p; ++j) {
      const VecC col = P_S.col(g * n_p + j);
      CHECK((col.segment(j * seg, seg) - sigs[g].segment(j * seg, seg))
                .norm() == 0.0);
      // zero outside the phase block
      CHECK(col.norm() ==
            doctest::Approx(sigs[g].segment(j * seg, seg).norm()));
    }
  }
  CHECK_THROWS_AS(build_group_signature_matrix({}, seg),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_group_signature_matrix(sigs, 5),
                  std::invalid_argument);
}

TEST_CASE("build_regressor") {
  std::mt19937_64 rng(3);
  const MatC P_S = oracle::random_cmat(rng, 6, 4);
  const VecC b = oracle::random_cvec(rng, 4);

  CHECK(build_regressor(b, P_S, VecC::Zero(6)).norm() == 0.0);

  // scalar case: v = conj(b) * (p^H w)
  const VecC p = oracle::random_cvec(rng, 5);
  const VecC w1 = oracle::random_cvec(rng, 5);
  VecC bs(1);
  bs << qpsk_point(true, true);
  const VecC v1 = build_regressor(bs, p, w1);
  CHECK(std::abs(v1[0] - std::conj(bs[0]) * oracle::naive_inner(p, w1)) <
        1e-12);

  // general case against the naive diagonal product
  const VecC w = oracle::random_cvec(rng, 6);
  const VecC v = build_regressor(b, P_S, w);
  const VecC ptw = oracle::naive_matvec(P_S.adjoint(), w);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(v[i] - std::conj(b[i]) * ptw[i]) < 1e-12);
  }
  CHECK_THROWS_AS(build_regressor(b, P_S, VecC::Zero(5)),
                  std::invalid_argument);
}

TEST_CASE("allocation closed form") {
  std::mt19937_64 rng(4);
  const int dim = 4;
  const VecC d = oracle::random_cvec(rng, dim);

  const auto unit = allocation_closed_form(MatC::Identity(dim, dim), d, 0.0,
                                           1.0);
  CHECK_FALSE(unit.degenerate);
  CHECK((unit.a - d / d.norm()).norm() < 1e-12);

  // heavy ridge: direction approaches d
  const MatC R = oracle::random_hpd(rng, dim);
  const auto ridge = allocation_closed_form(R, d, 1e12, 1.0);
  CHECK(oracle::subspace_angle(ridge.a, d) < 1e-4);

  // dense solve-then-normalize oracle
  const MatC R6 = oracle::random_hpd(rng, 6);
  const VecC d6 = oracle::random_cvec(rng, 6);
  const double lambda = 0.025, P_G = 30.0;
  const auto out = allocation_closed_form(R6, d6, lambda, P_G);
  const VecC raw =
      (R6 + lambda * MatC::Identity(6, 6)).fullPivLu().solve(d6);
  const VecC ref = raw * (std::sqrt(P_G) / raw.norm());
  CHECK((out.a - ref).norm() < 1e-10 * (1.0 + ref.norm()));
  CHECK(out.a.squaredNorm() == doctest::Approx(P_G).epsilon(1e-12));

  const auto deg = allocation_closed_form(R6, VecC::Zero(6), lambda, P_G);
  CHECK(deg.degenerate);
  CHECK(deg.a.squaredNorm() == doctest::Approx(P_G).epsilon(1e-12));
  CHECK((deg.a - VecC::Constant(6, std::sqrt(P_G / 6.0))).norm() < 1e-12);

  CHECK_THROWS_AS(allocation_closed_form(R6, d6, -1.0, P_G),
                  std::invalid_argument);
}

TEST_CASE("out_of_group_allocation equal split") {
  const VecR a0 = out_of_group_allocation(4.0, 0);
  REQUIRE(a0.size() == 1);
  CHECK(a0[0] == doctest::Approx(2.0));

  const VecR a2 = out_of_group_allocation(3.0, 2);
  REQUIRE(a2.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(a2[i] == doctest::Approx(1.0));
  CHECK(a2.squaredNorm() == doctest::Approx(3.0).epsilon(1e-12));
  CHECK_THROWS_AS(out_of_group_allocation(0.0, 1), std::invalid_argument);
}

TEST_CASE("allocation RLS: zero regressor keeps the direction") {
  std::mt19937_64 rng(5);
  AllocationRls rls(4, 0.998, 12.0);
  for (int i = 0; i < 5; ++i) {
    rls.update(oracle::random_cvec(rng, 4), cxd(0.7, 0.2));
  }
  const MatC pmat_before = rls.pmat();
  const VecC d_before = rls.dvec();
  const VecC a_before = rls.allocation();
  rls.update(VecC::Zero(4), cxd(1.0, 0.0));
  CHECK((rls.pmat() - pmat_before / 0.998).cwiseAbs().maxCoeff() <
        1e-12 * pmat_before.cwiseAbs().maxCoeff());
  CHECK((rls.dvec() - 0.998 * d_before).norm() <
        1e-12 * (1.0 + d_before.norm()));
  CHECK((rls.allocation() - a_before).norm() <
        1e-10 * (1.0 + a_before.norm()));
}

TEST_CASE("allocation RLS single-step hand evaluation") {
  AllocationRls rls(2, 1.0, 1.0);
  VecC e1 = VecC::Zero(2);
  e1[0] = 1.0;
  rls.update(e1, cxd(1.0, 0.0));
  CHECK(rls.pmat()(0, 0).real() ==
        doctest::Approx(0.01 - 0.0001 / 1.01).epsilon(1e-10));
  CHECK(rls.pmat()(1, 1).real() == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("allocation RLS matches the batch form at alpha = 1") {
  std::mt19937_64 rng(6);
  const int dim = 4;
  AllocationRls rls(dim, 1.0, 9.0);
  MatC R = 100.0 * MatC::Identity(dim, dim);
  VecC d = VecC::Zero(dim);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const VecC v = oracle::random_cvec(rng, dim);
    const cxd z(g(rng), g(rng));
    rls.update(v, z);
    R += std::norm(z) * v * v.adjoint();
    d += z * v;
  }
  const VecC raw = rls.pmat() * rls.dvec();  // unnormalized allocation
  const VecC ref = R.fullPivLu().solve(d);
  CHECK((raw - ref).norm() < 1e-6 * (1.0 + ref.norm()));
  CHECK((rls.dvec() - d).norm() < 1e-9 * (1.0 + d.norm()));
  CHECK(rls.allocation().squaredNorm() ==
        doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("allocation RLS norm constraint across dimensions") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int dim = 2; dim <= 8; ++dim) {
    const double P_G = 1.0 + dim;
    AllocationRls rls(dim, 0.998, P_G);
    CHECK(rls.allocation().squaredNorm() ==
          doctest::Approx(P_G).epsilon(1e-12));
    for (int i = 0; i < 200; ++i) {
      const VecC& a =
          rls.update(oracle::random_cvec(rng, dim), cxd(g(rng), g(rng)));
      CHECK(a.squaredNorm() == doctest::Approx(P_G).epsilon(1e-12));
    }
  }
}

TEST_CASE("closed-form allocation is stationary for the regularized cost") {
  // J(a) = mean |a^H (z v) - 1|^2 + lambda ||a||^2; the unnormalized
  // solution of (R + lambda I) a = d_S zeroes the finite-difference
  // gradient in every direction
  std::mt19937_64 rng(8);
  const int dim = 5, S = 60;
  const double lambda = 0.025;
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<VecC> x;
  for (int l = 0; l < S; ++l) {
    x.push_back(cxd(g(rng), g(rng)) * oracle::random_cvec(rng, dim));
  }
  MatC R = MatC::Zero(dim, dim);
  VecC d = VecC::Zero(dim);
  for (const auto& xl : x) {
    R += xl * xl.adjoint() / static_cast<double>(S);
    d += xl / static_cast<double>(S);
  }
  const VecC a =
      (R + lambda * MatC::Identity(dim, dim)).fullPivLu().solve(d);
  auto cost = [&](const VecC& q) {
    double c = 0.0;
    for (const auto& xl : x) c += std::norm(q.dot(xl) - cxd(1.0, 0.0));
    return c / S + lambda * q.squaredNorm();
  };
  const double scale = cost(a) + 1.0;
  const double eps = 1e-6;
  for (int dir = 0; dir < 10; ++dir) {
    const VecC delta = oracle::random_cvec(rng, dim).normalized();
    const double fd = (cost(a + eps * delta) - cost(a - eps * delta)) /
                      (2.0 * eps);
    CHECK(std::abs(fd) < 1e-5 * scale);
  }
}
