#include "eegx/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "eegx/error.hpp"

namespace eegx {

namespace {

struct Vertex {
  std::vector<double> x;
  double f;
};

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> start, const NelderMeadOptions& options) {
  const std::size_t dim = start.size();
  if (dim == 0) throw UsageError("nelder_mead: empty start vector");

  std::size_t evaluations = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  std::vector<Vertex> simplex;
  simplex.reserve(dim + 1);
  simplex.push_back({start, eval(start)});
  if (!std::isfinite(simplex[0].f)) throw FitError("nelder_mead: infeasible start");
  for (std::size_t i = 0; i < dim; ++i) {
    Vertex v{start, 0.0};
    double step = options.initial_step;
    v.x[i] += step;
    v.f = eval(v.x);
    if (!std::isfinite(v.f)) {
      v.x[i] = start[i] - step;
      v.f = eval(v.x);
    }
    simplex.push_back(std::move(v));
  }

  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
  bool converged = false;
  std::vector<double> centroid(dim), trial(dim);

  auto point = [&](double t, const std::vector<double>& worst) {
    for (std::size_t j = 0; j < dim; ++j) trial[j] = centroid[j] + t * (worst[j] - centroid[j]);
    return trial;
  };

  while (evaluations < options.max_evaluations) {
    std::sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });

    double spread = std::abs(simplex.back().f - simplex.front().f);
    double size = 0.0;
    for (std::size_t i = 1; i <= dim; ++i)
      for (std::size_t j = 0; j < dim; ++j)
        size = std::max(size, std::abs(simplex[i].x[j] - simplex[0].x[j]));
    if (spread <= options.f_tolerance * (1.0 + std::abs(simplex.front().f)) && size <= options.x_tolerance) {
      converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[i].x[j] / static_cast<double>(dim);

    Vertex& worst = simplex.back();
    std::vector<double> xr = point(-kReflect, worst.x);
    const double fr = eval(xr);

    if (fr < simplex.front().f) {
      std::vector<double> xe = point(-kExpand, worst.x);
      const double fe = eval(xe);
      if (fe < fr) worst = {std::move(xe), fe};
      else worst = {std::move(xr), fr};
      continue;
    }
    if (fr < simplex[dim - 1].f) {
      worst = {std::move(xr), fr};
      continue;
    }
    // contraction: outside if the reflection improved on the worst, inside otherwise
    const bool outside = fr < worst.f;
    std::vector<double> xc = point(outside ? -kContract : kContract, worst.x);
    const double fc = eval(xc);
    if (fc < (outside ? fr : worst.f)) {
      worst = {std::move(xc), fc};
      continue;
    }
    for (std::size_t i = 1; i <= dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j)
        simplex[i].x[j] = simplex[0].x[j] + kShrink * (simplex[i].x[j] - simplex[0].x[j]);
      simplex[i].f = eval(simplex[i].x);
    }
  }

  const auto best = std::min_element(simplex.begin(), simplex.end(),
                                     [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
  return {best->x, best->f, evaluations, converged};
}

}  // namespace eegx
