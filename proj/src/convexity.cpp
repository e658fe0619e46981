#include "opconv/convexity.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>

#include "opconv/error.hpp"

namespace opconv {

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

void require_range(const ScalarFunction& f, double lo, double hi, const char* what) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorKind::BadRange, std::string(what) + ": need finite lo < hi, got [" + fmt(lo) + ", " + fmt(hi) + "]");
  }
  if (!f.interval.contains(lo) || !f.interval.contains(hi)) {
    throw Error(ErrorKind::BadRange, std::string(what) + ": [" + fmt(lo) + ", " + fmt(hi) + "] leaves the domain of " + f.name);
  }
}

std::vector<double> mesh(double lo, double hi, int grid) {
  std::vector<double> points(static_cast<std::size_t>(grid));
  const double step = (hi - lo) / (grid - 1);
  for (int i = 0; i < grid; ++i) points[static_cast<std::size_t>(i)] = lo + i * step;
  points.back() = hi;
  return points;
}

double one_sided_difference(const ScalarFunction& f, double x, double h, Side side) {
  if (side == Side::Plus) return (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h);
  return (3.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h)) / (2.0 * h);
}

}  // namespace

ChordWitness ChordWitness::make(const ScalarFunction& f, double x, double y, double t) {
  const double mid = f(t * x + (1.0 - t) * y);
  const double chord = t * f(x) + (1.0 - t) * f(y);
  return {x, y, t, mid - chord};
}

double one_sided_derivative(const ScalarFunction& f, double x, Side side) {
  const Interval& dom = f.interval;
  const bool inside = dom.contains(x);
  const bool blocked = (side == Side::Plus && x >= dom.hi) || (side == Side::Minus && x <= dom.lo);
  if (!inside || blocked) {
    throw Error(ErrorKind::OutsideInterval,
                "one-sided derivative of " + f.name + " at " + fmt(x) + (side == Side::Plus ? "+" : "-"));
  }
  if (side == Side::Plus && f.deriv_plus) return f.deriv_plus(x);
  if (side == Side::Minus && f.deriv_minus) return f.deriv_minus(x);

  double h = std::max(1e-6, 1e-6 * std::fabs(x));
  const double room = side == Side::Plus ? dom.hi - x : x - dom.lo;
  if (2.0 * h > room) h = 0.5 * room;
  const double coarse = one_sided_difference(f, x, h, side);
  const double fine = one_sided_difference(f, x, 0.5 * h, side);
  return (4.0 * fine - coarse) / 3.0;
}

double golden_section_minimize(const RealFn& objective, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective(c);
  double fd = objective(d);

  double best_x = c;
  double best_f = fc;
  auto record = [&](double x, double fx) {
    if (fx < best_f || (fx == best_f && x < best_x)) {
      best_x = x;
      best_f = fx;
    }
  };
  record(d, fd);

  for (int iter = 0; iter < 400 && (b - a) > tol; ++iter) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
      record(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
      record(d, fd);
    }
  }
  return best_x;
}

std::optional<ChordWitness> find_affine_chord(const ScalarFunction& f, double lo, double hi, int grid, double tol) {
  require_range(f, lo, hi, "find_affine_chord");
  if (grid < 3) throw Error(ErrorKind::BadRange, "find_affine_chord: grid must be >= 3");
  if (!(tol >= 0.0)) throw Error(ErrorKind::BadRange, "find_affine_chord: tolerance must be >= 0");

  const auto points = mesh(lo, hi, grid);
  constexpr double kWeights[] = {0.5, 0.25, 0.75};

  // Preference: widest chord, then t nearest 1/2, then rightmost.
  std::optional<ChordWitness> best;
  auto better = [](const ChordWitness& cand, const ChordWitness& cur) {
    const double wc = cand.y - cand.x;
    const double wb = cur.y - cur.x;
    if (wc != wb) return wc > wb;
    const double tc = std::fabs(cand.t - 0.5);
    const double tb = std::fabs(cur.t - 0.5);
    if (tc != tb) return tc < tb;
    return cand.x > cur.x;
  };

  std::size_t tightest = 0;
  double tightest_defect = kInf;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      for (double t : kWeights) {
        const auto w = ChordWitness::make(f, points[i], points[j], t);
        if (j == i + 1 && t == 0.5 && std::fabs(w.defect) < tightest_defect) {
          tightest_defect = std::fabs(w.defect);
          tightest = i;
        }
        if (std::fabs(w.defect) <= tol && (!best || better(w, *best))) best = w;
      }
    }
  }
  if (best) return best;

  // Slide a window around the flattest adjacent pair, halving its width
  // until a flat chord fits.
  const double width = points[1] - points[0];
  for (int halving = 0; halving <= 8; ++halving) {
    const double w = std::ldexp(width, -halving);
    const double c_lo = std::max(lo + 0.5 * w, points[tightest] - 0.5 * width);
    const double c_hi = std::min(hi - 0.5 * w, points[tightest + 1] + 0.5 * width);
    if (!(c_lo < c_hi)) continue;
    auto mid_defect = [&](double center) {
      return std::fabs(ChordWitness::make(f, center - 0.5 * w, center + 0.5 * w, 0.5).defect);
    };
    const double center = golden_section_minimize(mid_defect, c_lo, c_hi);
    const auto found = ChordWitness::make(f, center - 0.5 * w, center + 0.5 * w, 0.5);
    if (std::fabs(found.defect) <= tol) return found;
  }
  return std::nullopt;
}

ChordNormalization chord_normalize(const ScalarFunction& f, double a, double x) {
  require_range(f, a, x, "chord_normalize");
  const double fa = f(a);
  const double fx = f(x);
  const double span = x - a;
  // Endpoint-weighted form reproduces f(a) and f(x) exactly at z = a and z = x.
  auto chord = [=](double z) { return fa * ((x - z) / span) + fx * ((z - a) / span); };

  ChordNormalization out;
  out.a = a;
  out.x = x;
  out.slope = (fx - fa) / span;
  out.intercept = fa - out.slope * a;
  const RealFn base = f.eval;
  out.g = functions::custom("chord-normalized " + f.name, f.interval, [base, chord](double z) { return base(z) - chord(z); });
  if (f.deriv_plus) {
    const RealFn dp = f.deriv_plus;
    const double s = out.slope;
    out.g.deriv_plus = [dp, s](double z) { return dp(z) - s; };
  }
  if (f.deriv_minus) {
    const RealFn dm = f.deriv_minus;
    const double s = out.slope;
    out.g.deriv_minus = [dm, s](double z) { return dm(z) - s; };
  }

  const double scale = std::max({1.0, std::fabs(fa), std::fabs(fx)});
  const double flat = 1e-12 * scale;
  // A convex f keeps g <= 0 on [a, x]; any sample above the chord refutes it.
  for (int k = 1; k < 64; ++k) {
    const double z = a + span * k / 64.0;
    if (out.g(z) > flat) {
      throw Error(ErrorKind::NotConvexDetected,
                  f.name + " rises above its chord on [" + fmt(a) + ", " + fmt(x) + "] at " + fmt(z));
    }
  }
  out.c = golden_section_minimize(out.g.eval, a, x);
  out.gamma = -out.g(out.c);
  if (!(out.gamma > flat) || !(out.c > a && out.c < x)) {
    throw Error(ErrorKind::NotConvexDetected,
                f.name + " is affine or non-convex on [" + fmt(a) + ", " + fmt(x) + "] (gamma = " + fmt(out.gamma) + ")");
  }
  return out;
}

PartitionResult epsilon_partition(const ScalarFunction& f, double x0, double x, double eps) {
  require_range(f, x0, x, "epsilon_partition");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(ErrorKind::BadRange, "epsilon_partition: eps must be > 0");
  if (!f.has_analytic_derivatives() && eps < convexity::kNumericEpsFloor) {
    throw Error(ErrorKind::BelowNumericFloor,
                "eps " + fmt(eps) + " is below the numeric-derivative floor " + fmt(convexity::kNumericEpsFloor) +
                    " for " + f.name);
  }

  auto dplus = [&](double z) { return one_sided_derivative(f, z, Side::Plus); };
  auto dminus = [&](double z) { return one_sided_derivative(f, z, Side::Minus); };
  auto gap = [&](double left, double right) { return dminus(right) - dplus(left); };
  auto jump = [&](double z) { return dplus(z) - dminus(z); };

  std::size_t work = 0;
  auto charge = [&](std::size_t n) {
    work += n;
    if (work > 4 * convexity::kMaxPartitionPoints) {
      throw Error(ErrorKind::TooManyPoints, "epsilon_partition: kink search exceeded its work budget");
    }
  };

  // Kinks with jump >= eps: grid scan, then bisection inside any cell whose
  // derivative variation is large enough to hide one.
  constexpr int kCells = 256;
  const auto grid = mesh(x0, x, kCells + 1);
  std::set<double> kinks;
  for (std::size_t k = 1; k + 1 < grid.size(); ++k) {
    if (jump(grid[k]) >= eps) kinks.insert(grid[k]);
  }
  std::vector<std::pair<double, double>> pending;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) pending.emplace_back(grid[k], grid[k + 1]);
  while (!pending.empty()) {
    const auto [l, r] = pending.back();
    pending.pop_back();
    charge(1);
    if (gap(l, r) < eps) continue;
    const double m = l + 0.5 * (r - l);
    if (!(m > l && m < r)) continue;
    if (jump(m) >= eps) kinks.insert(m);
    pending.emplace_back(m, r);
    pending.emplace_back(l, m);
  }

  std::vector<double> breaks{x0};
  breaks.insert(breaks.end(), kinks.begin(), kinks.end());
  breaks.push_back(x);

  // Greedy refinement of each kink-free piece: extend from the current point
  // to (nearly) the farthest admissible point, bracketing by doubling and
  // closing by bisection.
  std::vector<double> points{x0};
  for (std::size_t piece = 0; piece + 1 < breaks.size(); ++piece) {
    const std::size_t piece_start = points.size();
    double s = breaks[piece];
    const double e = breaks[piece + 1];
    while (true) {
      if (points.size() >= convexity::kMaxPartitionPoints) {
        throw Error(ErrorKind::TooManyPoints, "epsilon_partition exceeded " +
                                                  std::to_string(convexity::kMaxPartitionPoints) + " points");
      }
      if (gap(s, e) < eps) {
        points.push_back(e);
        break;
      }
      double good = s + (e - s) * 0x1.0p-40;
      if (!(good > s) || gap(s, good) >= eps) {
        throw Error(ErrorKind::TooManyPoints,
                    "epsilon_partition cannot advance from " + fmt(s) + "; derivative gap does not shrink");
      }
      double bad = e;
      while (true) {
        const double next = s + 2.0 * (good - s);
        if (next >= e) break;
        if (gap(s, next) < eps) {
          good = next;
        } else {
          bad = next;
          break;
        }
      }
      for (int iter = 0; iter < 200; ++iter) {
        const double mid = good + 0.5 * (bad - good);
        if (!(mid > good && mid < bad)) break;
        if (gap(s, mid) < eps) {
          good = mid;
        } else {
          bad = mid;
        }
      }
      points.push_back(good);
      s = good;
    }
    // Rebalance to a uniform mesh with the same cell count when it passes.
    const std::size_t cells = points.size() - piece_start;
    if (cells > 1) {
      const auto uniform = mesh(breaks[piece], e, static_cast<int>(cells + 1));
      bool ok = true;
      for (std::size_t k = 0; ok && k + 1 < uniform.size(); ++k) {
        ok = uniform[k + 1] > uniform[k] && gap(uniform[k], uniform[k + 1]) < eps;
      }
      if (ok) {
        points.resize(piece_start);
        points.insert(points.end(), uniform.begin() + 1, uniform.end());
      }
    }
  }

  PartitionResult out;
  out.partition.points = points;
  out.kinks.assign(kinks.begin(), kinks.end());
  for (std::size_t j = 1; j < points.size(); ++j) {
    if (!(points[j] > points[j - 1])) {
      throw Error(ErrorKind::VerificationFailed, "epsilon_partition produced a non-ascending point");
    }
    const double g = gap(points[j - 1], points[j]);
    if (!(g < eps)) {
      throw Error(ErrorKind::VerificationFailed, "derivative gap " + fmt(g) + " >= eps on [" + fmt(points[j - 1]) +
                                                     ", " + fmt(points[j]) + "]");
    }
    out.gaps.push_back({points[j - 1], points[j], g});
  }
  return out;
}

double strictness_margin(const ScalarFunction& f, double lo, double hi, int grid) {
  require_range(f, lo, hi, "strictness_margin");
  if (grid < 3) throw Error(ErrorKind::BadRange, "strictness_margin: grid must be >= 3");
  const auto points = mesh(lo, hi, grid);
  std::vector<double> values(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) values[i] = f(points[i]);
  double margin = kInf;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double defect = 0.5 * (values[i] + values[j]) - f(0.5 * (points[i] + points[j]));
      margin = std::min(margin, defect);
    }
  }
  return std::max(0.0, margin);
}

}  // namespace opconv
