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

#include "dsrg/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "dsrg/error.h"

namespace dsrg {

AttributeClassifier::AttributeClassifier(AspectRegistry registry,
                                         std::vector<std::vector<Vector>> centroids)
    : registry_(std::move(registry)), centroids_(std::move(centroids)) {
  if (centroids_.size() != registry_.size() || registry_.empty()) {
    Fail(ErrorCode::kInvalidInput, "classifier centroids do not match registry");
  }
  dim_ = centroids_.front().empty() ? 0 : centroids_.front().front().dim();
  for (std::size_t k = 0; k < registry_.size(); ++k) {
    if (centroids_[k].size() != registry_.aspects()[k].attributes.size()) {
      Fail(ErrorCode::kInvalidInput, "classifier centroids do not match aspect '" +
                                         registry_.aspects()[k].name + "'");
    }
    for (const Vector& c : centroids_[k]) {
      if (c.dim() != dim_ || dim_ == 0) {
        Fail(ErrorCode::kInvalidInput, "classifier centroids have mixed dims");
      }
    }
  }
}

AttributeClassifier AttributeClassifier::FromWorld(const ToyWorld& world) {
  return AttributeClassifier(world.registry(), world.centroids());
}

std::vector<std::size_t> AttributeClassifier::ClassifyIndices(const Vector& x) const {
  if (x.dim() != dim_) {
    Fail(ErrorCode::kInvalidInput,
         "classify: dim " + std::to_string(x.dim()) + " != " + std::to_string(dim_));
  }
  std::vector<std::size_t> out(centroids_.size());
  for (std::size_t k = 0; k < centroids_.size(); ++k) {
    double best = SquaredDistance(x, centroids_[k][0]);
    std::size_t arg = 0;
    for (std::size_t a = 1; a < centroids_[k].size(); ++a) {
      const double d = SquaredDistance(x, centroids_[k][a]);
      if (d < best) {
        best = d;
        arg = a;
      }
    }
    out[k] = arg;
  }
  return out;
}

Labels AttributeClassifier::Classify(const Vector& x) const {
  const auto idx = ClassifyIndices(x);
  Labels out;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Aspect& a = registry_.aspects()[k];
    out[a.name] = a.attributes[idx[k]];
  }
  return out;
}

double DeviationRatio(std::span<const std::size_t> counts) {
  if (counts.size() < 2) {
    Fail(ErrorCode::kInvalidInput, "deviation ratio needs >= 2 attributes");
  }
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  if (total == 0) Fail(ErrorCode::kDegenerateInput, "deviation ratio of zero counts");
  const double uniform = 1.0 / static_cast<double>(counts.size());
  double worst = 0.0;
  for (std::size_t c : counts) {
    worst = std::max(worst, std::abs(static_cast<double>(c) / total - uniform));
  }
  return worst / (1.0 - uniform);
}

FairnessReport EmptyReport(const AspectRegistry& registry) {
  FairnessReport report;
  report.aspects = registry.aspects();
  return report;
}

FairnessReport BuildReport(std::span<const GenerationRecord> records,
                           const Vocabulary& vocab, const AttributeClassifier& classifier,
                           std::span<const std::string> professions) {
  if (records.empty()) Fail(ErrorCode::kDegenerateInput, "no records to report");
  const AspectRegistry& registry = classifier.registry();
  // counts[profession][aspect][attribute]
  std::map<std::string, std::vector<std::vector<std::size_t>>> counts;
  auto fresh = [&] {
    std::vector<std::vector<std::size_t>> c;
    for (const Aspect& a : registry.aspects()) c.emplace_back(a.attributes.size(), 0);
    return c;
  };
  for (const GenerationRecord& r : records) {
    std::string profession;
    std::istringstream words(r.prompt);
    for (std::string w; words >> w;) {
      if (vocab.IsProfession(w)) profession = w;
    }
    if (profession.empty()) {
      Fail(ErrorCode::kInvalidInput,
           "record prompt '" + r.prompt + "' names no known profession");
    }
    auto [it, inserted] = counts.try_emplace(profession);
    if (inserted) it->second = fresh();
    const auto idx = classifier.ClassifyIndices(r.output);
    for (std::size_t k = 0; k < idx.size(); ++k) ++it->second[k][idx[k]];
  }

  std::vector<std::string> order;
  if (professions.empty()) {
    for (const std::string& p : vocab.professions()) {
      if (counts.contains(p)) order.push_back(p);
    }
  } else {
    for (const std::string& p : professions) {
      if (!vocab.IsProfession(p)) {
        Fail(ErrorCode::kInvalidInput, "unknown profession '" + p + "'");
      }
      order.push_back(p);
    }
  }

  FairnessReport report = EmptyReport(registry);
  std::vector<double> sums(registry.size(), 0.0);
  std::size_t used = 0;
  for (const std::string& p : order) {
    const auto it = counts.find(p);
    if (it == counts.end()) continue;  // listed but never generated
    ++used;
    for (std::size_t k = 0; k < registry.size(); ++k) {
      ReportRow row;
      row.profession = p;
      row.aspect = registry.aspects()[k].name;
      row.counts = it->second[k];
      for (std::size_t c : row.counts) row.total += c;
      row.delta = DeviationRatio(row.counts);
      sums[k] += row.delta;
      report.rows.push_back(std::move(row));
    }
  }
  if (used > 0) {
    for (std::size_t k = 0; k < registry.size(); ++k) {
      report.average_delta[registry.aspects()[k].name] = sums[k] / used;
    }
  }
  if (!records.empty()) report.config = records.front().config;
  return report;
}

ReportFormat ParseReportFormat(std::string_view name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "md") return ReportFormat::kMarkdown;
  Fail(ErrorCode::kInvalidInput, "unknown report format '" + std::string(name) + "'");
}

namespace {

std::string FormatDelta(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// RFC 4180 quoting for fields that need it.
std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::vector<std::string>> Table(const FairnessReport& report) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header = {"profession", "aspect"};
  for (const Aspect& a : report.aspects) {
    for (const std::string& attr : a.attributes) header.push_back(attr);
  }
  header.push_back("total");
  header.push_back("delta");
  rows.push_back(header);
  for (const ReportRow& r : report.rows) {
    std::vector<std::string> line = {r.profession, r.aspect};
    for (const Aspect& a : report.aspects) {
      for (std::size_t i = 0; i < a.attributes.size(); ++i) {
        line.push_back(
            a.name == r.aspect && i < r.counts.size() ? std::to_string(r.counts[i]) : "");
      }
    }
    line.push_back(std::to_string(r.total));
    line.push_back(FormatDelta(r.delta));
    rows.push_back(std::move(line));
  }
  return rows;
}

}  // namespace

std::string EmitReport(const FairnessReport& report, ReportFormat format) {
  const auto table = Table(report);
  std::string out;
  if (format == ReportFormat::kCsv) {
    for (const auto& line : table) {
      for (std::size_t i = 0; i < line.size(); ++i) {
        if (i) out += ',';
        out += CsvField(line[i]);
      }
      out += "\r\n";
    }
    return out;
  }
  for (std::size_t r = 0; r < table.size(); ++r) {
    out += '|';
    for (const std::string& cell : table[r]) out += ' ' + cell + " |";
    out += '\n';
    if (r == 0) {
      out += '|';
      for (std::size_t i = 0; i < table[r].size(); ++i) out += "---|";
      out += '\n';
    }
  }
  if (!report.average_delta.empty()) {
    out += "\n| aspect | mean delta |\n|---|---|\n";
    for (const Aspect& a : report.aspects) {
      const auto it = report.average_delta.find(a.name);
      if (it != report.average_delta.end()) {
        out += "| " + a.name + " | " + FormatDelta(it->second) + " |\n";
      }
    }
  }
  return out;
}

}  // namespace dsrg
