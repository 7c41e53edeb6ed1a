// Copyright 2026 The DSRG Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DSRG_EVAL_H_
#define DSRG_EVAL_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dsrg/aspects.h"
#include "dsrg/encoder.h"
#include "dsrg/linalg.h"
#include "dsrg/world.h"

namespace dsrg {

// aspect -> attribute
using Labels = std::map<std::string, std::string>;

struct GenerationRecord {
  std::string prompt;
  std::uint64_t seed = 0;
  Vector output;
  Labels labels;
  // Free-form description of the settings that produced the record.
  std::string config;

  friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

// Nearest-centroid classifier, one decision per aspect over the full vector.
class AttributeClassifier {
 public:
  AttributeClassifier() = default;
  // centroids[k][a] is attribute a of aspect k in registry order. Throws
  // InvalidInput when the layout does not match the registry.
  AttributeClassifier(AspectRegistry registry,
                      std::vector<std::vector<Vector>> centroids);
  static AttributeClassifier FromWorld(const ToyWorld& world);

  const AspectRegistry& registry() const { return registry_; }
  std::size_t dim() const { return dim_; }

  // Attribute index per aspect; ties go to the earlier attribute. Throws
  // InvalidInput on a dim mismatch.
  std::vector<std::size_t> ClassifyIndices(const Vector& x) const;
  Labels Classify(const Vector& x) const;

 private:
  AspectRegistry registry_;
  std::vector<std::vector<Vector>> centroids_;
  std::size_t dim_ = 0;
};

// max_a |N_a / N - 1/|A|| / (1 - 1/|A|). Throws InvalidInput for fewer than
// two attributes and DegenerateInput when N == 0.
double DeviationRatio(std::span<const std::size_t> counts);

struct ReportRow {
  std::string profession;
  std::string aspect;
  // Registry order.
  std::vector<std::size_t> counts;
  std::size_t total = 0;
  double delta = 0.0;
};

struct FairnessReport {
  // Aspects covered, registry order; fixes the column layout.
  std::vector<Aspect> aspects;
  // Profession-major, aspects in registry order within a profession.
  std::vector<ReportRow> rows;
  // Mean delta over professions per aspect.
  std::map<std::string, double> average_delta;
  std::string config;
};

// Tabulates records by the profession named in each prompt. Outputs are
// re-classified with `classifier`. `professions` fixes the row set and order
// (vocabulary order of the professions seen when empty). Throws
// DegenerateInput for no records and InvalidInput for a prompt without a
// known profession.
FairnessReport BuildReport(std::span<const GenerationRecord> records,
                           const Vocabulary& vocab, const AttributeClassifier& classifier,
                           std::span<const std::string> professions = {});

// Same table for an explicit empty row set (header-only output).
FairnessReport EmptyReport(const AspectRegistry& registry);

enum class ReportFormat { kCsv, kMarkdown };

// Throws InvalidInput for anything but "csv" / "md".
ReportFormat ParseReportFormat(std::string_view name);

// Columns: profession, aspect, one count column per attribute of the covered
// aspects (empty where the attribute belongs to another aspect), total,
// delta. Markdown adds a per-aspect average table.
std::string EmitReport(const FairnessReport& report, ReportFormat format);

}  // namespace dsrg

#endif  // DSRG_EVAL_H_
