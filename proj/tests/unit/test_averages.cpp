#include <cmath>

#include <gtest/gtest.h>

#include "support.hpp"
#include "varlab/averages.hpp"
#include "varlab/field_ops.hpp"
#include "varlab/martingale.hpp"
#include "varlab/weights.hpp"

namespace varlab {
namespace {

using testing::ball_scan;
using testing::Gen;

// Constants frozen from the geometry calibration run.
constexpr double kBoundaryConstant = 16.0;
constexpr double kSmoothnessConstant = 4.5;

double max_diff(const Field& a, const Field& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

/// Ball or cube mean at every point by direct enumeration.
Field average_scan(const Field& f, double t, Kernel kernel) {
  const GridSpec& g = f.grid();
  Field out(g, f.family_size());
  for (std::size_t x = 0; x < g.size(); ++x) {
    std::vector<std::size_t> pts;
    if (kernel == Kernel::ball) {
      for (std::size_t p : ball_scan(g, g.point(x), t)) pts.push_back(p);
    } else {
      const int h = int(std::floor(t));
      const Point c = g.point(x);
      pts = box_points(g, {c[0] - h, c[1] - (g.d() == 2 ? h : 0)}, 2 * h + 1);
    }
    for (std::size_t i = 0; i < f.family_size(); ++i) {
      double s = 0;
      for (std::size_t p : pts) s += f.component(i)[p];
      out.component(i)[x] = s / double(pts.size());
    }
  }
  return out;
}

/// Level-(k+i) cubes meeting both B(x,t) and its complement, by lattice scan.
std::size_t boundary_scan(int d, Point x, double t, int k, int i) {
  const int s = 1 << (k + i);
  const int R = int(std::floor(t)) + 2 * s;
  auto fdiv = [](int a, int b) { return int(std::floor(double(a) / b)); };
  std::size_t count = 0;
  for (int by = d == 2 ? fdiv(x[1] - R, s) : 0; by <= (d == 2 ? fdiv(x[1] + R, s) : 0); ++by)
    for (int bx = fdiv(x[0] - R, s); bx <= fdiv(x[0] + R, s); ++bx) {
      bool in = false, out = false;
      for (int py = 0; py < (d == 2 ? s : 1); ++py)
        for (int px = 0; px < s; ++px) {
          const double dx = bx * s + px - x[0], dy = d == 2 ? by * s + py - x[1] : 0;
          (dx * dx + dy * dy <= t * t ? in : out) = true;
        }
      count += in && out;
    }
  return count;
}

std::size_t symm_diff_scan(int d, Point x, Point y, double t) {
  const int R = int(std::ceil(t)) + 1;
  std::size_t n = 0;
  for (int py = d == 2 ? std::min(x[1], y[1]) - R : 0; py <= (d == 2 ? std::max(x[1], y[1]) + R : 0); ++py)
    for (int px = std::min(x[0], y[0]) - R; px <= std::max(x[0], y[0]) + R; ++px) {
      auto inside = [&](Point c) {
        const double dx = px - c[0], dy = d == 2 ? py - c[1] : 0;
        return dx * dx + dy * dy <= t * t;
      };
      n += inside(x) != inside(y);
    }
  return n;
}

ScaleSet scales(int k_min, int k_max, int M = 8, Kernel kernel = Kernel::ball) { return {k_min, k_max, M, kernel}; }

TEST(ErgodicAverage, FixesConstants) {
  const Field c(GridSpec(2, 5), 1, 1.75);
  for (double t : {1.0, 2.5, 7.9}) {
    EXPECT_LT(max_diff(ergodic_avg(c, t), c), 1e-12);
    EXPECT_LT(max_diff(ergodic_avg(c, t, Kernel::cube), c), 1e-12);
  }
}

TEST(ErgodicAverage, DeltaAtOrigin) {
  const GridSpec g(1, 5);
  Field delta(g);
  delta[0] = 1;
  const Field a = ergodic_avg(delta, 1.0);
  for (std::size_t x = 0; x < g.size(); ++x) EXPECT_NEAR(a[x], (x == 0 || x == 1 || x == 31) ? 1.0 / 3 : 0.0, 1e-15);
}

TEST(ErgodicAverage, MatchesDirectEnumeration) {
  Gen gen(51);
  for (const GridSpec g : {GridSpec(1, 6), GridSpec(2, 4)})
    for (Kernel kernel : {Kernel::ball, Kernel::cube})
      for (int trial = 0; trial < 6; ++trial) {
        const Field f = gen.field(g, 2);
        const double t = gen.uniform(1.0, double(g.side() / 4));
        EXPECT_LT(max_diff(ergodic_avg(f, t, kernel), average_scan(f, t, kernel)), 1e-12)
            << to_string(kernel) << " t=" << t;
      }
}

TEST(ErgodicAverage, CubeKernelIsExactOnIntegers) {
  Gen gen(52);
  const GridSpec g(2, 5);
  Field f(g);
  for (double& v : f.values()) v = gen.integer(-50, 50);
  const Field a = ergodic_avg(f, 3.0, Kernel::cube), b = average_scan(f, 3.0, Kernel::cube);
  for (std::size_t x = 0; x < g.size(); ++x) EXPECT_DOUBLE_EQ(a[x] * 49, b[x] * 49);
}

TEST(ErgodicAverage, LinearMeanPreservingContraction) {
  Gen gen(53);
  const GridSpec g(2, 5);
  for (int trial = 0; trial < 8; ++trial) {
    const Field f = gen.field(g), h = gen.field(g);
    const double alpha = gen.uniform(-3, 3), t = gen.uniform(1, 8);
    EXPECT_LT(max_diff(ergodic_avg(alpha * f + h, t), alpha * ergodic_avg(f, t) + ergodic_avg(h, t)), 1e-11);
    const Field a = ergodic_avg(f, t);
    EXPECT_NEAR(sum(a.values()), sum(f.values()), 1e-9);
    EXPECT_LE(max_abs(a.values()), max_abs(f.values()) * (1 + 1e-12));
  }
}

TEST(ErgodicAverage, RadiusOutOfRangeThrows) {
  const Field f(GridSpec(1, 5));
  EXPECT_THROW(ergodic_avg(f, 9.0), precondition_error);
  EXPECT_THROW(ergodic_avg(f, 0.0), precondition_error);
}

TEST(ErgodicAverage, DominatedByMaximalFunctionInOneDimension) {
  Gen gen(54);
  const GridSpec g(1, 8);
  const Field f = gen.field(g);
  const Field m = maximal(f, 1.0);
  const AvgStack st = avg_stack(f, scales(0, 5));
  for (const Field& s : st.slices)
    for (std::size_t x = 0; x < g.size(); ++x) EXPECT_LE(std::abs(s[x]), m[x] * (1 + 1e-12) + 1e-12);
}

TEST(ScaleSet, RadiiAndValidation) {
  const ScaleSet s = scales(1, 2, 4);
  EXPECT_EQ(s.radii(), (std::vector<double>{2, 2.5, 3, 3.5, 4, 5, 6, 7, 8}));
  EXPECT_EQ(s.first_index(2), 4u);
  EXPECT_NO_THROW(s.validate(GridSpec(1, 5)));
  EXPECT_THROW(s.validate(GridSpec(1, 4)), precondition_error);
  EXPECT_THROW(scales(0, 1, 3).validate(GridSpec(1, 8)), precondition_error);
  EXPECT_THROW(s.first_index(3), precondition_error);
}

TEST(AvgStack, SlicesMatchSingleAverages) {
  Gen gen(55);
  const Field f = gen.field(GridSpec(2, 5));
  const ScaleSet sc = scales(0, 2, 4);
  const AvgStack st = avg_stack(f, sc);
  ASSERT_EQ(st.size(), sc.radii().size());
  for (std::size_t r = 0; r < st.size(); ++r) EXPECT_LT(max_diff(st.slices[r], ergodic_avg(f, st.radii[r])), 1e-15);
}

TEST(AvgStack, DeltaSlicesHaveUnitMass) {
  const GridSpec g(2, 6);
  Field delta(g);
  delta.at({5, 9}) = 1;
  const AvgStack st = avg_stack(delta, scales(0, 3));
  for (std::size_t r = 0; r < st.size(); ++r) {
    EXPECT_NEAR(sum(st.slices[r].values()), 1.0, 1e-12);
    EXPECT_NEAR(max_abs(st.slices[r].values()) * double(ball_scan(g, {0, 0}, st.radii[r]).size()), 1.0, 1e-12);
  }
}

TEST(ShortVariation, VanishesOnConstantsAndIgnoresShifts) {
  Gen gen(56);
  const GridSpec g(1, 8);
  const ScaleSet sc = scales(0, 5);
  EXPECT_LT(max_abs(short_variation(avg_stack(Field(g, 1, 3.0), sc), 2).values()), 1e-12);
  Field f = gen.field(g);
  const Field base = short_variation(avg_stack(f, sc), 3);
  for (double& v : f.values()) v += 7.5;
  EXPECT_LT(max_diff(short_variation(avg_stack(f, sc), 3), base), 1e-10);
}

TEST(ShortVariation, MatchesPointwiseVariationOracle) {
  Gen gen(57);
  const GridSpec g(1, 8);
  const Field f = gen.field(g);
  const ScaleSet sc = scales(0, 5);
  const AvgStack st = avg_stack(f, sc);
  const int k = 2;
  const Field sv = short_variation(st, k);
  const Field ek = cond_expect(f, k);
  const auto radii = sc.radii();
  std::vector<Field> averages;
  for (int m = 0; m <= sc.M; ++m) averages.push_back(average_scan(f, radii[sc.first_index(k) + std::size_t(m)], Kernel::ball));
  for (std::size_t x = 0; x < g.size(); ++x) {
    std::vector<double> path;
    for (const Field& a : averages) path.push_back(a[x] - ek[x]);
    EXPECT_NEAR(sv[x], var_inhom(SampledPath::from_values(path), 2.0), 1e-12);
  }
}

TEST(SmoothedShortVariation, ZeroStaysZeroAndDominates) {
  Gen gen(58);
  const GridSpec g(2, 5);
  EXPECT_EQ(max_abs(smoothed_short_variation(Field(g), 2).values()), 0);
  const Field f = gen.field(g);
  const Field sv = short_variation(avg_stack(f, scales(0, 2)), 1);
  const Field smooth = smoothed_short_variation(sv, 1);
  for (std::size_t x = 0; x < g.size(); ++x) EXPECT_GE(smooth[x], sv[x]);
}

TEST(SmoothedShortVariation, SpikeSpreadsToNeighbouringCubes) {
  for (const GridSpec g : {GridSpec(1, 6), GridSpec(2, 5)}) {
    const int k = 2;
    Field sv(g);
    const Point spike{9, g.d() == 2 ? 22 : 0};
    sv.at(spike) = 2.0;
    const Field smooth = smoothed_short_variation(sv, k);
    std::set<std::size_t> expect;
    for (std::size_t x = 0; x < g.size(); ++x)
      for (std::size_t p : concentric_3Q(g, dyadic_cube_of(g, g.point(x), k)))
        if (p == g.index(spike)) expect.insert(x);
    EXPECT_EQ(expect.size(), (g.d() == 1 ? 3u : 9u) << (k * g.d()));
    for (std::size_t x = 0; x < g.size(); ++x) EXPECT_EQ(smooth[x], expect.count(x) ? 2.0 : 0.0);
  }
}

TEST(SquareFunction, ConstantHomogeneousAndDominatesLevels) {
  Gen gen(59);
  const GridSpec g(1, 8);
  const ScaleSet sc = scales(0, 5);
  EXPECT_LT(max_abs(square_function(Field(g, 1, -2.0), sc).values()), 1e-12);
  const Field f = gen.field(g);
  const Field s = square_function(f, sc);
  EXPECT_LT(max_diff(square_function(2.0 * f, sc), 2.0 * s), 1e-10);
  const AvgStack st = avg_stack(f, sc);
  for (int k = sc.k_min; k <= sc.k_max; ++k) {
    const Field sk = smoothed_short_variation(short_variation(st, k), k);
    for (std::size_t x = 0; x < g.size(); ++x) EXPECT_GE(s[x] * (1 + 1e-12), sk[x]);
  }
}

TEST(RkOperator, ConstantsZeroAndExponentRange) {
  const GridSpec g(1, 8);
  const ScaleSet sc = scales(0, 5);
  const AvgStack c = avg_stack(Field(g, 1, -1.25), sc);
  EXPECT_LT(max_diff(rk_operator(c, 3, 2.5), Field(g, 1, 1.25)), 1e-12);
  EXPECT_EQ(max_abs(rk_operator(avg_stack(Field(g), sc), 3, 2.5).values()), 0);
  EXPECT_THROW(rk_operator(c, 3, 1.0), precondition_error);
}

TEST(RkOperator, MatchesPointwiseVariationOracle) {
  Gen gen(60);
  const GridSpec g(2, 5);
  const Field b = gen.field(g);
  const ScaleSet sc = scales(0, 2);
  const AvgStack st = avg_stack(b, sc);
  const auto radii = sc.radii();
  for (int k = 0; k <= 2; ++k) {
    const Field rk = rk_operator(st, k, 3.0);
    for (std::size_t x = 0; x < g.size(); x += 7) {
      std::vector<double> path;
      for (int m = 0; m <= sc.M; ++m) path.push_back(st.slices[sc.first_index(k) + std::size_t(m)][x]);
      EXPECT_NEAR(rk[x], var_inhom(SampledPath::from_values(path), 3.0), 1e-12);
    }
  }
}

TEST(FrakR, ZeroAndDominatesEveryLevel) {
  Gen gen(61);
  const GridSpec g(1, 8);
  const ScaleSet sc = scales(0, 5);
  EXPECT_EQ(max_abs(frak_r(Field(g), 2.5, sc).values()), 0);
  const AvgStack st = avg_stack(gen.field(g), sc);
  const Field total = frak_r(st, 2.5);
  for (int k = sc.k_min; k <= sc.k_max; ++k) {
    const Field fk = frak_r_k(st, k, 2.5);
    for (std::size_t x = 0; x < g.size(); ++x) EXPECT_GE(total[x] * (1 + 1e-12), fk[x]);
  }
}

TEST(FrakR, EqualsSmoothedShortVariationOnLevelMeanZeroInput) {
  Gen gen(62);
  const GridSpec g(2, 5);
  const int k = 2;
  const Field f = gen.field(g);
  const Field b = f - cond_expect(f, k);
  const AvgStack st = avg_stack(b, scales(0, 2));
  const Field sk = smoothed_short_variation(short_variation(st, k), k);
  const Field rk = frak_r_k(st, k, 2.0);
  for (std::size_t x = 0; x < g.size(); ++x) EXPECT_LE(sk[x], rk[x] * (1 + 1e-12) + 1e-15);
}

TEST(BoundaryCount, MatchesLatticeScan) {
  Gen gen(63);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = trial % 3 ? 2 : 1;
    const int k = gen.integer(1, 5), i = gen.integer(-k, 0);
    const double t = std::ldexp(gen.uniform(1, 2), k);
    const Point x{gen.integer(-40, 40), d == 2 ? gen.integer(-40, 40) : 0};
    ASSERT_EQ(boundary_cube_count(d, x, t, k, i), boundary_scan(d, x, t, k, i))
        << "d=" << d << " x=(" << x[0] << "," << x[1] << ") t=" << t << " k=" << k << " i=" << i;
  }
}

TEST(BoundaryCount, OneDimensionalSphereHasTwoPoints) {
  Gen gen(64);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = gen.integer(0, 8), i = gen.integer(-k, 0);
    EXPECT_LE(boundary_cube_count(1, {gen.integer(-300, 300), 0}, std::ldexp(gen.uniform(1, 2), k), k, i), 2u);
  }
}

TEST(BoundaryCount, TwoDimensionalScalesLikeShellThickness) {
  Gen gen(65);
  for (int trial = 0; trial < 400; ++trial) {
    const int k = gen.integer(3, 6), i = gen.integer(-std::min(k, 6), 0);
    const Point x{gen.integer(0, 255), gen.integer(0, 255)};
    const double t = std::ldexp(gen.uniform(1, 2), k);
    EXPECT_LE(double(boundary_cube_count(2, x, t, k, i)) * std::ldexp(1.0, i), kBoundaryConstant)
        << "k=" << k << " i=" << i << " t=" << t;
  }
}

TEST(BoundaryCount, RejectsRadiusOutsideLevel) {
  EXPECT_THROW(boundary_cube_count(2, {0, 0}, 3.0, 2, 0), precondition_error);
  EXPECT_THROW(boundary_cube_count(2, {0, 0}, 5.0, 2, -3), precondition_error);
}

TEST(SymmetricDifference, ByHand) {
  EXPECT_EQ(ball_symm_diff(2, {3, 4}, {3, 4}, 5.5), 0u);
  for (double t : {1.0, 2.5, 10.0, 33.3}) EXPECT_EQ(ball_symm_diff(1, {0, 0}, {1, 0}, t), 2u);
}

TEST(SymmetricDifference, MatchesLatticeScanAndSmoothnessBound) {
  Gen gen(66);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = trial % 4 ? 2 : 1;
    const Point x{gen.integer(-20, 20), d == 2 ? gen.integer(-20, 20) : 0};
    const Point v{gen.integer(-8, 8), d == 2 ? gen.integer(-8, 8) : 0};
    const Point y{x[0] + v[0], x[1] + v[1]};
    const double t = gen.uniform(4, 64);
    const std::size_t n = ball_symm_diff(d, x, y, t);
    ASSERT_EQ(n, symm_diff_scan(d, x, y, t)) << "t=" << t;
    const double len = std::hypot(double(v[0]), double(v[1]));
    if (d == 2 && len > 0 && len <= 8) {
      EXPECT_LE(double(n), kSmoothnessConstant * len * t);
    }
  }
}

TEST(ShellIdentity, ExactForRandomFields) {
  Gen gen(67);
  const GridSpec g(2, 6);
  const Field b = gen.field(g);
  for (int trial = 0; trial < 10; ++trial) {
    const Point x = gen.point(g);
    for (const ShellCheck& c : shell_derivative_check(b, x, scales(0, 3), gen.integer(0, 3)))
      EXPECT_NEAR(c.discrepancy, 0, 1e-11);
  }
}

TEST(ShellIdentity, CountsAndDeltas) {
  const GridSpec g(2, 6);
  const ShellCheck ones = shell_derivative_check(Field(g, 1, 1.0), {3, 3}, 4.0, 5.0);
  EXPECT_EQ(ones.shell_sum, double(ball_scan(g, {3, 3}, 5.0).size() - ball_scan(g, {3, 3}, 4.0).size()));
  EXPECT_EQ(double(ones.shell_points), ones.shell_sum);
  Field delta(g);
  delta.at({3 + 5, 3}) = 1;
  const ShellCheck c = shell_derivative_check(delta, {3, 3}, 4.0, 5.0);
  EXPECT_EQ(c.outer_sum - c.inner_sum, 1);
  EXPECT_EQ(c.shell_sum, 1);
}

}  // namespace
}  // namespace varlab
