#pragma once

// NSGA-II for box-bounded real-valued problems with maximized objectives.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "tourism/error.hpp"
#include "tourism/rng.hpp"
#include "tourism/sd_core.hpp"

namespace tourism::moea {

using sd::Bounds;

template <std::size_t M>
using ObjVec = std::array<double, M>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Maximization dominance: `a` no worse everywhere and better somewhere.
template <std::size_t M>
bool dominates(const ObjVec<M>& a, const ObjVec<M>& b) {
  bool strictly = false;
  for (std::size_t m = 0; m < M; ++m) {
    if (std::isnan(a[m]) || std::isnan(b[m])) {
      throw NumericError("dominance test on NaN objective");
    }
    if (a[m] < b[m]) return false;
    if (a[m] > b[m]) strictly = true;
  }
  return strictly;
}

template <std::size_t M>
struct Individual {
  std::vector<double> genome;
  ObjVec<M> objectives{};
  std::size_t rank = 0;
  double crowding = 0.0;
};

/// Deb's fast non-dominated sort. Returns fronts as index lists; front 0 is
/// the non-dominated set. Within a front indices ascend.
template <std::size_t M>
std::vector<std::vector<std::size_t>> fast_nondominated_sort(
    std::span<const ObjVec<M>> pts) {
  const std::size_t n = pts.size();
  std::vector<std::vector<std::size_t>> dominated_by(n);
  std::vector<std::size_t> count(n, 0);
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;

  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      if (dominates<M>(pts[p], pts[q])) {
        dominated_by[p].push_back(q);
        ++count[q];
      } else if (dominates<M>(pts[q], pts[p])) {
        dominated_by[q].push_back(p);
        ++count[p];
      }
    }
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (count[p] == 0) current.push_back(p);
  }
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t p : current) {
      for (std::size_t q : dominated_by[p]) {
        if (--count[q] == 0) next.push_back(q);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

template <std::size_t M>
std::vector<std::vector<std::size_t>> fast_nondominated_sort(
    std::vector<Individual<M>>& pop) {
  std::vector<ObjVec<M>> objs;
  objs.reserve(pop.size());
  for (const auto& ind : pop) objs.push_back(ind.objectives);
  auto fronts = fast_nondominated_sort<M>(std::span<const ObjVec<M>>(objs));
  for (std::size_t r = 0; r < fronts.size(); ++r) {
    for (std::size_t i : fronts[r]) pop[i].rank = r;
  }
  return fronts;
}

/// Crowding distance of every member of one front. Extremes of each
/// objective get +inf; objectives with zero range contribute nothing.
template <std::size_t M>
std::vector<double> crowding_distance(std::span<const ObjVec<M>> front) {
  const std::size_t n = front.size();
  std::vector<double> d(n, 0.0);
  if (n <= 2) {
    std::fill(d.begin(), d.end(), kInf);
    return d;
  }
  std::vector<std::size_t> idx(n);
  for (std::size_t m = 0; m < M; ++m) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return front[a][m] < front[b][m];
    });
    const double lo = front[idx.front()][m];
    const double hi = front[idx.back()][m];
    const double range = hi - lo;
    if (!(range > 0.0)) continue;
    d[idx.front()] = kInf;
    d[idx.back()] = kInf;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (d[idx[k]] == kInf) continue;
      d[idx[k]] += (front[idx[k + 1]][m] - front[idx[k - 1]][m]) / range;
    }
  }
  return d;
}

template <std::size_t M>
void assign_crowding(std::vector<Individual<M>>& pop,
                     const std::vector<std::size_t>& front) {
  std::vector<ObjVec<M>> objs;
  objs.reserve(front.size());
  for (std::size_t i : front) objs.push_back(pop[i].objectives);
  const auto d = crowding_distance<M>(std::span<const ObjVec<M>>(objs));
  for (std::size_t k = 0; k < front.size(); ++k) pop[front[k]].crowding = d[k];
}

/// Crowded comparison: lower rank first, then larger crowding distance.
template <std::size_t M>
bool crowded_better(const Individual<M>& a, const Individual<M>& b) {
  if (a.rank != b.rank) return a.rank < b.rank;
  return a.crowding > b.crowding;
}

/// Binary tournament over two uniformly drawn members (with replacement).
/// Ties on both rank and crowding go to the first draw.
template <std::size_t M>
std::size_t tournament_select(const std::vector<Individual<M>>& pop, Rng& rng) {
  if (pop.empty()) throw DomainError("tournament on empty population");
  const std::size_t a = rng.below(pop.size());
  const std::size_t b = rng.below(pop.size());
  return crowded_better(pop[b], pop[a]) ? b : a;
}

// ---------------------------------------------------------------------------
// Variation operators

/// SBX spread factor for a uniform draw `u` in [0, 1).
inline double sbx_spread(double u, double eta_c) {
  if (u <= 0.5) return std::pow(2.0 * u, 1.0 / (eta_c + 1.0));
  return std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta_c + 1.0));
}

/// Children of one gene pair for a given spread factor. Their sum equals
/// the parents' sum; a spread of 1 reproduces the parents.
inline std::pair<double, double> sbx_pair(double x1, double x2, double spread) {
  return {0.5 * ((1.0 + spread) * x1 + (1.0 - spread) * x2),
          0.5 * ((1.0 - spread) * x1 + (1.0 + spread) * x2)};
}

/// Simulated binary crossover. Each gene crosses with probability 1/2 and
/// the two children are swapped at random per gene, which makes each child
/// an unbiased estimate of the parents' midpoint. Results are clipped.
inline std::pair<std::vector<double>, std::vector<double>> sbx_crossover(
    std::span<const double> a, std::span<const double> b, double eta_c,
    std::span<const Bounds> bounds, Rng& rng) {
  if (a.size() != b.size() || a.size() != bounds.size()) {
    throw DomainError("sbx_crossover: genome/bounds size mismatch");
  }
  std::vector<double> c1(a.begin(), a.end());
  std::vector<double> c2(b.begin(), b.end());
  for (std::size_t i = 0; i < a.size(); ++i) {
    // Fixed draw count per gene keeps the stream layout independent of data.
    const double u_cross = rng.uniform();
    const double u_spread = rng.uniform();
    const double u_swap = rng.uniform();
    if (u_cross > 0.5 || std::abs(a[i] - b[i]) <= 1e-14) continue;
    auto [y1, y2] = sbx_pair(a[i], b[i], sbx_spread(u_spread, eta_c));
    if (u_swap < 0.5) std::swap(y1, y2);
    c1[i] = bounds[i].clamp(y1);
    c2[i] = bounds[i].clamp(y2);
  }
  return {std::move(c1), std::move(c2)};
}

/// Polynomial mutation perturbation (fraction of the bound width) for a
/// uniform draw `u`.
inline double polynomial_delta(double u, double eta_m) {
  if (u < 0.5) return std::pow(2.0 * u, 1.0 / (eta_m + 1.0)) - 1.0;
  return 1.0 - std::pow(2.0 * (1.0 - u), 1.0 / (eta_m + 1.0));
}

inline void polynomial_mutation(std::vector<double>& genome, double eta_m,
                                double prob, std::span<const Bounds> bounds,
                                Rng& rng) {
  if (genome.size() != bounds.size()) {
    throw DomainError("polynomial_mutation: genome/bounds size mismatch");
  }
  for (std::size_t i = 0; i < genome.size(); ++i) {
    const double u_apply = rng.uniform();
    const double u = rng.uniform();
    if (!(u_apply < prob)) continue;
    genome[i] = bounds[i].clamp(genome[i] +
                                polynomial_delta(u, eta_m) * bounds[i].width());
  }
}

// ---------------------------------------------------------------------------
// Survival

/// Assigns ranks and crowding to `pool`, then keeps the best `n` by front
/// order, truncating the last admitted front by descending crowding
/// distance (stable on pool order).
template <std::size_t M>
std::vector<Individual<M>> environmental_selection(
    std::vector<Individual<M>> pool, std::size_t n) {
  if (n > pool.size()) throw DomainError("selection larger than pool");
  const auto fronts = fast_nondominated_sort<M>(pool);
  std::vector<Individual<M>> next;
  next.reserve(n);
  for (const auto& front : fronts) {
    assign_crowding<M>(pool, front);
    if (next.size() + front.size() <= n) {
      for (std::size_t i : front) next.push_back(pool[i]);
      if (next.size() == n) break;
      continue;
    }
    std::vector<std::size_t> order(front);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return pool[a].crowding > pool[b].crowding;
                     });
    for (std::size_t k = 0; next.size() < n; ++k) next.push_back(pool[order[k]]);
    break;
  }
  return next;
}

// ---------------------------------------------------------------------------
// Hypervolume

using Obj3 = ObjVec<3>;

/// Exact dominated hypervolume of 3-objective points (maximization) with
/// respect to `ref`. Sweeps the third objective downward while keeping the
/// area of the 2-D staircase of the first two objectives up to date, so the
/// cost is O(n log n).
inline double hypervolume_3d(std::span<const Obj3> pts, const Obj3& ref) {
  if (pts.empty()) return 0.0;
  for (const auto& p : pts) {
    if (!dominates<3>(p, ref)) {
      throw DomainError("hypervolume: point does not dominate the reference");
    }
  }
  std::vector<Obj3> sorted(pts.begin(), pts.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Obj3& a, const Obj3& b) { return a[2] > b[2]; });

  // x ascending, y strictly descending.
  std::map<double, double> stair;
  double area = 0.0;
  const double rx = ref[0];
  const double ry = ref[1];

  auto insert = [&](double px, double py) {
    auto it = stair.lower_bound(px);
    if (it != stair.end() && it->second >= py) return;  // weakly dominated
    // Old area over (x_left, px] is rebuilt from the points p covers.
    double removed_area = 0.0;
    double x_prev;
    // Height over (x_prev, px] before the insert comes from the first point
    // at or right of px.
    const double y_right = it != stair.end() ? it->second : ry;
    if (it != stair.end() && it->first == px) it = stair.erase(it);
    // Walk left over points with y <= py.
    auto left = it;
    std::vector<std::pair<double, double>> covered;
    while (left != stair.begin()) {
      auto prev = std::prev(left);
      if (prev->second > py) break;
      covered.emplace_back(prev->first, prev->second);
      left = prev;
    }
    x_prev = (left == stair.begin()) ? rx : std::prev(left)->first;
    const double x_left = x_prev;
    for (auto c = covered.rbegin(); c != covered.rend(); ++c) {
      removed_area += (c->first - x_prev) * (c->second - ry);
      x_prev = c->first;
    }
    removed_area += (px - x_prev) * (y_right - ry);
    stair.erase(left, it);
    stair.emplace(px, py);
    area += (px - x_left) * (py - ry) - removed_area;
  };

  double volume = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    insert(sorted[i][0], sorted[i][1]);
    const double z_next = i + 1 < sorted.size() ? sorted[i + 1][2] : ref[2];
    volume += area * (sorted[i][2] - z_next);
  }
  return volume;
}

// ---------------------------------------------------------------------------
// Evolution loop

using Objectives = Obj3;

struct EAConfig {
  std::size_t population_size = 100;
  std::size_t generations = 100;
  double crossover_probability = 0.9;
  double eta_c = 15.0;
  double eta_m = 20.0;
  double mutation_probability = -1.0;  // negative means 1 / genome length
  std::uint64_t seed = 1;
  std::size_t plateau_window = 10;
  double plateau_tolerance = 1e-4;  // relative hypervolume gain over the window

  void validate() const {
    if (population_size < 4 || population_size % 2 != 0) {
      throw ConfigError("population_size must be even and >= 4");
    }
    if (!(eta_c > 0.0) || !(eta_m > 0.0)) {
      throw ConfigError("distribution indices must be positive");
    }
    if (!(crossover_probability >= 0.0 && crossover_probability <= 1.0)) {
      throw ConfigError("crossover_probability must lie in [0, 1]");
    }
    if (mutation_probability > 1.0) {
      throw ConfigError("mutation_probability must lie in [0, 1]");
    }
    if (!(plateau_tolerance >= 0.0)) {
      throw ConfigError("plateau_tolerance must be non-negative");
    }
  }
};

/// Box-bounded maximization problem with three objectives.
struct Problem {
  std::vector<Bounds> bounds;
  std::function<Objectives(std::span<const double>)> evaluate;
  Objectives reference{};  // for the hypervolume log
};

struct ParetoFront {
  std::vector<Individual<3>> individuals;
  Objectives reference{};
};

struct EvolveResult {
  ParetoFront front;                     // rank-0 members of the final population
  std::vector<Individual<3>> archive;    // every non-dominated point ever evaluated
  std::vector<double> hypervolume_log;   // archive hypervolume per generation
  std::size_t generations_run = 0;
  bool stopped_on_plateau = false;
};

namespace detail {

inline void archive_insert(std::vector<Individual<3>>& archive,
                           const Individual<3>& cand) {
  for (const auto& a : archive) {
    if (a.objectives == cand.objectives || dominates<3>(a.objectives, cand.objectives)) {
      return;
    }
  }
  std::erase_if(archive, [&](const Individual<3>& a) {
    return dominates<3>(cand.objectives, a.objectives);
  });
  archive.push_back(cand);
}

inline double archive_hypervolume(const std::vector<Individual<3>>& archive,
                                  const Objectives& ref) {
  std::vector<Obj3> pts;
  for (const auto& a : archive) {
    if (dominates<3>(a.objectives, ref)) pts.push_back(a.objectives);
  }
  return hypervolume_3d(pts, ref);
}

inline Objectives checked_eval(const Problem& problem,
                               std::span<const double> genome) {
  auto f = problem.evaluate(genome);
  for (double v : f) {
    if (!std::isfinite(v)) {
      throw NumericError("objective evaluation produced a non-finite value");
    }
  }
  return f;
}

}  // namespace detail

/// Runs NSGA-II until `generations` offspring rounds are done or the archive
/// hypervolume stops improving by more than `plateau_tolerance` (relative)
/// over `plateau_window` generations. All randomness comes from one stream
/// seeded by `config.seed`, consumed only by the operator phase.
inline EvolveResult evolve(const Problem& problem, const EAConfig& config) {
  config.validate();
  if (problem.bounds.empty() || !problem.evaluate) {
    throw ConfigError("problem needs bounds and an evaluation function");
  }
  for (const auto& b : problem.bounds) {
    if (!(b.lo <= b.hi)) throw ConfigError("problem bound with lo > hi");
  }
  const std::size_t n = config.population_size;
  const std::size_t dim = problem.bounds.size();
  const double pm = config.mutation_probability < 0.0
                        ? 1.0 / static_cast<double>(dim)
                        : config.mutation_probability;
  std::span<const Bounds> bounds(problem.bounds);

  Rng rng(config.seed);
  EvolveResult out;

  std::vector<Individual<3>> pop(n);
  for (auto& ind : pop) {
    ind.genome.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      ind.genome[i] = bounds[i].lo + bounds[i].width() * rng.uniform();
    }
  }
  for (auto& ind : pop) ind.objectives = detail::checked_eval(problem, ind.genome);
  for (const auto& front : fast_nondominated_sort<3>(pop)) {
    assign_crowding<3>(pop, front);
  }
  for (const auto& ind : pop) detail::archive_insert(out.archive, ind);
  out.hypervolume_log.push_back(
      detail::archive_hypervolume(out.archive, problem.reference));

  for (std::size_t gen = 1; gen <= config.generations; ++gen) {
    std::vector<Individual<3>> offspring;
    offspring.reserve(n);
    while (offspring.size() < n) {
      const auto& p1 = pop[tournament_select<3>(pop, rng)];
      const auto& p2 = pop[tournament_select<3>(pop, rng)];
      Individual<3> c1, c2;
      if (rng.coin(config.crossover_probability)) {
        auto kids = sbx_crossover(p1.genome, p2.genome, config.eta_c, bounds, rng);
        c1.genome = std::move(kids.first);
        c2.genome = std::move(kids.second);
      } else {
        c1.genome = p1.genome;
        c2.genome = p2.genome;
      }
      polynomial_mutation(c1.genome, config.eta_m, pm, bounds, rng);
      polynomial_mutation(c2.genome, config.eta_m, pm, bounds, rng);
      offspring.push_back(std::move(c1));
      offspring.push_back(std::move(c2));
    }
    for (auto& ind : offspring) {
      ind.objectives = detail::checked_eval(problem, ind.genome);
    }
    for (const auto& ind : offspring) detail::archive_insert(out.archive, ind);

    std::vector<Individual<3>> pool = std::move(pop);
    pool.insert(pool.end(), std::make_move_iterator(offspring.begin()),
                std::make_move_iterator(offspring.end()));
    pop = environmental_selection<3>(std::move(pool), n);
    // Ranks and crowding relative to the survivors, for the next tournament.
    for (const auto& front : fast_nondominated_sort<3>(pop)) {
      assign_crowding<3>(pop, front);
    }

    out.hypervolume_log.push_back(
        detail::archive_hypervolume(out.archive, problem.reference));
    out.generations_run = gen;

    const std::size_t w = config.plateau_window;
    if (w > 0 && gen >= w) {
      const double before = out.hypervolume_log[gen - w];
      const double now = out.hypervolume_log[gen];
      if (now - before <= config.plateau_tolerance * std::abs(before)) {
        out.stopped_on_plateau = true;
        break;
      }
    }
  }

  out.front.reference = problem.reference;
  for (const auto& ind : pop) {
    if (ind.rank != 0) continue;
    const bool dup = std::any_of(
        out.front.individuals.begin(), out.front.individuals.end(),
        [&](const Individual<3>& f) { return f.genome == ind.genome; });
    if (!dup) out.front.individuals.push_back(ind);
  }
  return out;
}

/// The tourism policy search: seven genes within `bounds`, objectives from a
/// full simulation run. The ship limit gene stays continuous.
inline Problem policy_problem(const sd::PolicyBounds& bounds,
                              const sd::ExogenousSeries& exog,
                              const sd::ModelCoefficients& coeffs,
                              const sd::SimState& init,
                              Objectives reference = {0.0, 0.0, 0.0}) {
  Problem p;
  p.bounds.assign(bounds.bounds.begin(), bounds.bounds.end());
  p.evaluate = [exog, coeffs, init](std::span<const double> g) {
    return sd::simulate(sd::PolicyVector::from_array(g), exog, coeffs, init)
        .objectives;
  };
  p.reference = reference;
  return p;
}

}  // namespace tourism::moea
