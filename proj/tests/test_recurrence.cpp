#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "heunlock/errors.hpp"
#include "heunlock/recurrence.hpp"

using namespace heunlock;

namespace {

RecurrenceContext ctx_for(double A, double B, double w, int p, double kappa) {
  return {derive(ProblemParams(A, B, w, p)), p, kappa};
}

}  // namespace

TEST_SUITE("recurrence") {
  TEST_CASE("Z and Z~ from their definitions") {
    const auto ctx = ctx_for(2.0, 1.0, 1.0, 0, 0.29);
    const cplx I(0, 1);
    const double n = -2.0, c = 0.5 * (n + 1.0);
    for (int k : {0, 1, 5, 40}) {
      const cplx zk = std::pow(k + (0 - 1) / 2.0 - I * 0.29, 2) - c * c;
      const cplx zt = std::pow(k + (1 - 0) / 2.0 + I * 0.29, 2) - c * c;
      CHECK(std::abs(Z(ctx, k) - zk) < 1e-13 * std::abs(zk));
      CHECK(std::abs(Z_tilde(ctx, k) - zt) < 1e-13 * std::abs(zt));
    }
  }

  TEST_CASE("recurrence factors") {
    const auto ctx = ctx_for(1.0, 0.7, 0.6, 1, 0.4);
    const DerivedParams& d = ctx.derived;
    const Mat2 m = M(ctx, 3);
    const cplx z3 = Z(ctx, 3);
    CHECK(std::abs(m(0, 0) - (1.0 + d.lambda / z3)) < 1e-15);
    CHECK(std::abs(m(0, 1) - d.mu * d.mu / z3) < 1e-15);
    CHECK(m(1, 0) == cplx(1.0));
    CHECK(m(1, 1) == cplx(0.0));
    const Mat2 mt = M_tilde(ctx, 3);
    CHECK(std::abs(mt(1, 0) - Z_tilde(ctx, 2) / Z_tilde(ctx, 3)) < 1e-15);
    const Mat2 inf = M_infinity();
    CHECK((inf * inf - inf).norm() == 0.0);
    // M_j tends to the cap like 1/j^2
    CHECK((M(ctx, 10000) - inf).norm() < 1e-6);
  }

  TEST_CASE("pole of a factor is reported") {
    // kappa = 0, p = 1, n = 3: Z_2 = 4 - 4 = 0
    const auto ctx = ctx_for(0.5, -4.0, 1.0, 1, 0.0);
    CHECK(ctx.derived.n == doctest::Approx(3.0));
    CHECK_THROWS_AS(M(ctx, 2), NearPoleError);
    CHECK_NOTHROW(M(ctx, 3));
  }

  TEST_CASE("second column of the capped product vanishes") {
    const auto ctx = ctx_for(2.0, 1.3, 0.6, 1, 0.42);
    for (std::int64_t j0 : {10, 100, 1000}) {
      const Mat2 r = truncated_product(ctx, 1, j0, false);
      CHECK(std::abs(r(0, 1)) == 0.0);
      CHECK(std::abs(r(1, 1)) == 0.0);
    }
    // With the identity as seed the second column decays with j0.
    const Mat2 a = truncated_product(ctx, 1, 100, false, Mat2::Identity());
    const Mat2 b = truncated_product(ctx, 1, 10000, false, Mat2::Identity());
    CHECK(b.col(1).norm() < 0.05 * a.col(1).norm());
  }

  TEST_CASE("converged products agree with a brute-force truncation") {
    const auto ctx = ctx_for(2.0, 1.0, 1.0, 0, 0.29);
    const ProductResult pr = product(ctx, 1, false);
    const Mat2 big = truncated_product(ctx, 1, std::int64_t{1} << 22, false);
    // Direct truncation at 2^22 carries an O(1/j0) error.
    CHECK(std::abs(pr.alpha - big(0, 0)) < 1e-5 * std::abs(pr.alpha));
    CHECK(std::abs(pr.gamma - big(1, 0)) < 1e-5 * std::abs(pr.gamma));
    CHECK(pr.est_error < 1e-11);
  }

  TEST_CASE("table rows are consistent with single products") {
    const auto ctx = ctx_for(1.0, 0.7, 0.6, 0, 0.39);
    for (bool tilde : {false, true}) {
      const ProductTable t = product_table(ctx, 0, 20, tilde);
      for (int k = 0; k < 20; ++k) {
        // The second row of M_k is (1, 0), so gamma^(k) = alpha^(k+1); for the
        // tilde factors it is (Z~_{k-1}/Z~_k, 0).
        const cplx factor = tilde ? Z_tilde(ctx, k - 1) / Z_tilde(ctx, k) : cplx(1.0);
        CHECK(std::abs(t.at(k).gamma - factor * t.at(k + 1).alpha) <
              1e-11 * std::abs(t.at(k).gamma));
      }
      const ProductResult single = product(ctx, 7, tilde);
      CHECK(std::abs(single.alpha - t.at(7).alpha) < 1e-11 * std::abs(single.alpha));
    }
  }

  TEST_CASE("truncation cap") {
    const auto ctx = ctx_for(2.0, 1.0, 1.0, 0, 0.29);
    TruncationOptions o;
    o.j_max = 128;
    CHECK_THROWS_AS(product(ctx, 1, false, o), TruncationLimitError);
    o.tol = -1.0;
    CHECK_THROWS_AS(product(ctx, 1, false, o), InvalidParameterError);

    setenv("HEUNLOCK_J_MAX", "4096", 1);
    CHECK(TruncationOptions::default_j_max() == 4096);
    setenv("HEUNLOCK_J_MAX", "garbage", 1);
    CHECK_THROWS_AS(TruncationOptions::default_j_max(), InvalidParameterError);
    unsetenv("HEUNLOCK_J_MAX");
    CHECK(TruncationOptions::default_j_max() == (std::int64_t{1} << 20));
  }

  TEST_CASE("prefactor equals the sine over linear form") {
    const cplx I(0, 1);
    for (int p : {0, 1})
      for (double kappa : {0.13, 0.4, 0.9}) {
        const auto ctx = ctx_for(1.0, 0.37, 0.6, p, kappa);
        const double n = ctx.derived.n;
        const double pi = M_PI;
        const cplx expect = 4.0 / (pi * pi) * std::sin(pi / 2 * (n + p - 2.0 * I * kappa)) *
                            std::sin(pi / 2 * (n + p + 2.0 * I * kappa)) /
                            ((n + p - 2.0 * I * kappa) * (n + 2 - p + 2.0 * I * kappa));
        CHECK(std::abs(regularizing_prefactor(ctx) - expect) < 1e-14 * std::abs(expect));
      }
    // Continuous through the removable point n + p - 2 i kappa = 0.
    const auto at = ctx_for(0.5, 0.6, 0.6, 1, 0.0);  // n = -2, p = 1
    const RecurrenceContext near(at.derived, 1, cplx(0.0, 0.5 + 1e-6));
    const RecurrenceContext on(at.derived, 1, cplx(0.0, 0.5));
    CHECK(std::abs(regularizing_prefactor(near) - regularizing_prefactor(on)) < 1e-5);
  }

  TEST_CASE("omega from derived parameters") {
    CHECK(omega_of(derive(ProblemParams(1.3, 0.2, 0.75))) == doctest::Approx(0.75));
  }
}
