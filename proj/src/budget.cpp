#include "emdet/budget.hpp"

#include <cmath>
#include <stdexcept>

namespace emdet::budget {

namespace {

long buy(double budget, double cost) {
  if (budget <= 0.0) return 0;
  return static_cast<long>(std::floor(budget / cost));
}

}  // namespace

double estimate_cost(const Allocation& a, const weak::AnnotationCost& costs) {
  return a.poly * costs.polygon + a.tight * costs.tight + a.loose * costs.loose +
         a.coarse * costs.coarse + a.tag * costs.tag;
}

Allocation plan(const AnnotationPolicy& policy, double budget_seconds,
                const weak::AnnotationCost& costs, long strong_base) {
  if (budget_seconds <= 0.0) throw std::invalid_argument("plan: budget must be positive");
  if (costs.polygon <= 0.0 || costs.tight <= 0.0 || costs.loose <= 0.0 || costs.coarse <= 0.0 ||
      costs.tag <= 0.0)
    throw std::invalid_argument("plan: costs must be positive");

  Allocation a;
  switch (policy.kind) {
    case PolicyKind::Strong: {
      a.poly = buy(budget_seconds, costs.polygon);
      if (a.poly == 0) a.feasible = false;
      break;
    }
    case PolicyKind::EqualTime: {
      a.poly = strong_base;
      const double remaining = budget_seconds - strong_base * costs.polygon;
      if (remaining < 0.0) {
        a.feasible = false;
        a.poly = buy(budget_seconds, costs.polygon);
        break;
      }
      const double quarter = remaining / 4.0;
      a.tight = buy(quarter, costs.tight);
      a.loose = buy(quarter, costs.loose);
      a.coarse = buy(quarter, costs.coarse);
      a.tag = buy(quarter, costs.tag);
      break;
    }
    case PolicyKind::EqualNumber: {
      a.poly = strong_base;
      const double remaining = budget_seconds - strong_base * costs.polygon;
      if (remaining < 0.0) {
        a.feasible = false;
        a.poly = buy(budget_seconds, costs.polygon);
        break;
      }
      const double per_set = costs.tight + costs.loose + costs.coarse + costs.tag;
      const long n = buy(remaining, per_set);
      a.tight = a.loose = a.coarse = a.tag = n;
      break;
    }
    case PolicyKind::MixedFraction: {
      if (policy.poly_fraction <= 0.0 || policy.poly_fraction >= 1.0)
        throw std::invalid_argument("plan: poly_fraction must be in (0,1)");
      a.poly = buy(policy.poly_fraction * budget_seconds, costs.polygon);
      // The weak share is the complementary budget fraction, not the unspent
      // rest: that keeps both counts monotone in the total budget.
      const double remaining = (1.0 - policy.poly_fraction) * budget_seconds;
      const double cost = policy.weak_kind == weak::WeakKind::Tight   ? costs.tight
                          : policy.weak_kind == weak::WeakKind::Loose ? costs.loose
                          : policy.weak_kind == weak::WeakKind::Coarse ? costs.coarse
                                                                       : costs.tag;
      const long n = buy(remaining, cost);
      switch (policy.weak_kind) {
        case weak::WeakKind::Tight: a.tight = n; break;
        case weak::WeakKind::Loose: a.loose = n; break;
        case weak::WeakKind::Coarse: a.coarse = n; break;
        case weak::WeakKind::Tag: a.tag = n; break;
      }
      break;
    }
  }
  a.total_cost = estimate_cost(a, costs);
  return a;
}

}  // namespace emdet::budget
