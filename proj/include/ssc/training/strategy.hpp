#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssc/networks/builders.hpp"
#include "ssc/networks/surgery.hpp"

namespace ssc {

enum class Strategy { kRandomInit, kFeatureLearning, kFineTuning, kSurgery };

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kRandomInit: return "random";
    case Strategy::kFeatureLearning: return "feature";
    case Strategy::kFineTuning: return "finetune";
    case Strategy::kSurgery: return "surgery";
  }
  return "?";
}

inline Strategy parse_strategy(const std::string& s) {
  for (Strategy k : {Strategy::kRandomInit, Strategy::kFeatureLearning, Strategy::kFineTuning,
                     Strategy::kSurgery})
    if (s == strategy_name(k)) return k;
  throw UsageError("unknown strategy '" + s + "' (expected random, feature, finetune or surgery)");
}

inline bool needs_donor(Strategy s) { return s != Strategy::kRandomInit; }

/// Donor layers learn at this fraction of the base rate under fine tuning.
inline constexpr double kDonorRateRatio = 0.2;

struct StrategyResult {
  std::vector<std::string> donor_blocks;  // copied from the donor
  std::vector<std::string> new_blocks;    // freshly initialised
};

inline void check_strategy(Strategy s, Variant v, bool have_donor) {
  if (needs_donor(s) && !have_donor) {
    throw UsageError(std::string("strategy '") + strategy_name(s) + "' needs a donor model");
  }
  if (s == Strategy::kSurgery && v != Variant::kEarly) {
    throw UsageError(std::string("surgery applies only to the early-fusion variant, not '") +
                     variant_name(v) + "'");
  }
}

/// Initialises parameters and sets per-block trainability and learning-rate
/// ratios. Donor blocks are those whose name and shape match a donor block.
/// Surgery's first layer mixes donor and fresh kernels and learns at the
/// full rate; every other block follows fine tuning.
template <typename T>
StrategyResult apply_strategy(NetworkGraph<T>& net, Strategy s, const NetworkGraph<T>* donor,
                              std::uint64_t seed, double donor_ratio = kDonorRateRatio) {
  check_strategy(s, net.variant, donor != nullptr);
  StrategyResult r;
  init_params(net, seed);
  if (s == Strategy::kSurgery) surgery_init(net, *donor, seed);
  for (auto& [name, b] : net.params()) {
    b.weight_velocity = Tensor<T>();
    b.bias_velocity = Tensor<T>();
    b.trainable = true;
    b.lr_ratio = 1.0;
    bool from_donor = false;
    if (donor && s != Strategy::kRandomInit) {
      const auto it = donor->params().find(name);
      from_donor = it != donor->params().end() && it->second.weight.shape() == b.weight.shape() &&
                   it->second.bias.shape() == b.bias.shape();
      if (from_donor) {
        b.weight = it->second.weight;
        b.bias = it->second.bias;
      }
    }
    if (!from_donor) {
      r.new_blocks.push_back(name);
      continue;
    }
    r.donor_blocks.push_back(name);
    if (s == Strategy::kFeatureLearning) {
      b.trainable = false;
    } else {
      b.lr_ratio = donor_ratio;
    }
  }
  return r;
}

}  // namespace ssc
