#pragma once

#include <cstdio>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ssc/evaluation/iou.hpp"
#include "ssc/synth/label_set.hpp"
#include "ssc/training/examples.hpp"
#include "ssc/training/predict.hpp"

namespace ssc {

struct SampleMetrics {
  std::string id;
  std::optional<double> completion;
  std::optional<double> mean_semantic;
};

struct EvalReport {
  std::vector<std::string> class_names;
  std::optional<double> completion;
  SemanticIoU semantic;       // occluded-or-occupied mask
  SemanticIoU semantic_full;  // every voxel
  std::vector<SampleMetrics> samples;

  /// The two headline numbers are defined.
  bool defined() const { return completion.has_value() && semantic.mean.has_value(); }
};

/// Dataset-level IoU: counts are summed over all samples before dividing.
template <typename T>
EvalReport evaluate_predictions(const std::vector<LabelVolume>& preds, const std::vector<Example<T>>& data,
                                const LabelSet& labels) {
  if (preds.size() != data.size()) throw ShapeError("evaluate: prediction count does not match dataset");
  const std::size_t classes = labels.size();
  SemanticCounts sem(classes), full(classes);
  CompletionCounts comp;
  EvalReport r;
  r.class_names = labels.names();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Example<T>& ex = data[i];
    SemanticCounts s(classes);
    CompletionCounts c;
    s.add(preds[i], ex.labels, ex.semantic);
    c.add(preds[i], ex.labels, ex.completion);
    full.add(preds[i], ex.labels, ex.semantic_full);
    sem += s;
    comp += c;
    r.samples.push_back({ex.id, c.iou(), semantic_iou(s).mean});
  }
  r.completion = comp.iou();
  r.semantic = semantic_iou(sem);
  r.semantic_full = semantic_iou(full);
  return r;
}

template <typename T>
EvalReport evaluate_dataset(const NetworkGraph<T>& net, const std::vector<Example<T>>& data,
                            const LabelSet& labels) {
  if (data.empty()) throw DataError("evaluate: dataset is empty");
  if (net.output_shape()[0] != labels.size()) {
    throw ShapeError("evaluate: network scores " + std::to_string(net.output_shape()[0]) +
                     " classes, label set has " + std::to_string(labels.size()));
  }
  std::vector<LabelVolume> preds;
  preds.reserve(data.size());
  for (const auto& ex : data) preds.push_back(predict(net, ex.input));
  return evaluate_predictions(preds, data, labels);
}

namespace detail {

inline std::string metric(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

}  // namespace detail

/// One header line, then completion, mean semantic IoU and one row per
/// non-free class.
inline void write_report_csv(std::ostream& os, const EvalReport& r) {
  os << "metric,iou,iou_full_volume\n";
  os << "completion," << detail::metric(r.completion) << ",n/a\n";
  os << "mean_semantic," << detail::metric(r.semantic.mean) << ',' << detail::metric(r.semantic_full.mean)
     << '\n';
  for (std::size_t c = 1; c < r.class_names.size(); ++c)
    os << r.class_names[c] << ',' << detail::metric(r.semantic.per_class[c]) << ','
       << detail::metric(r.semantic_full.per_class[c]) << '\n';
}

inline void print_report(std::ostream& os, const EvalReport& r) {
  os << "scene completion IoU      " << detail::metric(r.completion) << '\n'
     << "mean semantic IoU         " << detail::metric(r.semantic.mean) << "   (full volume "
     << detail::metric(r.semantic_full.mean) << ")\n";
  for (std::size_t c = 1; c < r.class_names.size(); ++c)
    os << "  " << std::left << std::setw(12) << r.class_names[c] << std::right << ' '
       << detail::metric(r.semantic.per_class[c]) << "   " << detail::metric(r.semantic_full.per_class[c])
       << '\n';
  for (const auto& s : r.samples)
    os << "  sample " << s.id << "  completion " << detail::metric(s.completion) << "  semantic "
       << detail::metric(s.mean_semantic) << '\n';
}

}  // namespace ssc
