#ifndef EMDET_BUDGET_HPP_
#define EMDET_BUDGET_HPP_

#include <cstdint>

#include "emdet/weak_labels.hpp"

namespace emdet::budget {

enum class PolicyKind { Strong, EqualTime, EqualNumber, MixedFraction };

struct AnnotationPolicy {
  PolicyKind kind = PolicyKind::Strong;
  double poly_fraction = 0.8;                       // MixedFraction only
  weak::WeakKind weak_kind = weak::WeakKind::Tight;  // MixedFraction only
};

struct Allocation {
  long poly = 0;
  long tight = 0;
  long loose = 0;
  long coarse = 0;
  long tag = 0;
  double total_cost = 0.0;
  bool feasible = true;  // false when the budget buys nothing under the policy
};

double estimate_cost(const Allocation& a, const weak::AnnotationCost& costs);

/// Image allocation for a time budget under the given policy; floor rounding
/// everywhere, so total_cost never exceeds the budget.
Allocation plan(const AnnotationPolicy& policy, double budget_seconds,
                const weak::AnnotationCost& costs, long strong_base);

}  // namespace emdet::budget

#endif
