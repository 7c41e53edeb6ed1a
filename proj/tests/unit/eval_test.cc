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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "dsrg/encoder.h"
#include "dsrg/error.h"
#include "dsrg/random.h"
#include "dsrg/world.h"
#include "support/test_util.h"

namespace dsrg {
namespace {

using ::dsrg::testing::ReadFile;

// Brute-force oracle written straight from the definition.
double OracleDelta(const std::vector<std::size_t>& counts) {
  const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
  const double u = 1.0 / counts.size();
  double worst = 0.0;
  for (std::size_t c : counts) worst = std::max(worst, std::abs(c / n - u));
  return worst / (1.0 - u);
}

TEST(DeviationRatioTest, HandCases) {
  EXPECT_EQ(DeviationRatio(std::vector<std::size_t>{50, 50}), 0.0);
  EXPECT_EQ(DeviationRatio(std::vector<std::size_t>{100, 0}), 1.0);
  EXPECT_NEAR(DeviationRatio(std::vector<std::size_t>{7, 3}), 0.4, 1e-15);
}

TEST(DeviationRatioTest, EndpointsForSeveralArities) {
  for (std::size_t a : {2u, 3u, 5u}) {
    std::vector<std::size_t> uniform(a, 12);
    EXPECT_NEAR(DeviationRatio(uniform), 0.0, 1e-12) << a;
    for (std::size_t hot = 0; hot < a; ++hot) {
      std::vector<std::size_t> one_hot(a, 0);
      one_hot[hot] = 9;
      EXPECT_NEAR(DeviationRatio(one_hot), 1.0, 1e-12) << a;
    }
  }
}

TEST(DeviationRatioTest, PermutationAndScaleInvariant) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t a = std::vector<std::size_t>{2, 3, 5}[rng.Below(3)];
    std::vector<std::size_t> c(a);
    for (auto& v : c) v = rng.Below(40);
    c[0] += 1;
    const double d = DeviationRatio(c);
    EXPECT_NEAR(d, OracleDelta(c), 1e-12);
    std::vector<std::size_t> scaled = c;
    for (auto& v : scaled) v *= 7;
    EXPECT_NEAR(DeviationRatio(scaled), d, 1e-12);
    std::vector<std::size_t> perm = c;
    rng.Shuffle(perm);
    EXPECT_NEAR(DeviationRatio(perm), d, 1e-12);
  }
}

TEST(DeviationRatioTest, Errors) {
  EXPECT_DSRG_ERROR(DeviationRatio(std::vector<std::size_t>{0, 0}),
                    ErrorCode::kDegenerateInput);
  EXPECT_DSRG_ERROR(DeviationRatio(std::vector<std::size_t>{3}),
                    ErrorCode::kInvalidInput);
}

class EvalFixture : public ::testing::Test {
 protected:
  EvalFixture()
      : vocab_(Vocabulary::Default()),
        world_(ToyWorld::Build(vocab_.registry(), SkewModel::Build(vocab_, 0.9))),
        classifier_(AttributeClassifier::FromWorld(world_)) {}

  // Output placed exactly on the chosen centroids.
  GenerationRecord Make(const std::string& profession,
                        const std::vector<std::size_t>& attrs) const {
    Vector x(world_.latent_dim());
    for (std::size_t k = 0; k < attrs.size(); ++k) {
      const Vector& c = world_.Centroid(k, attrs[k]);
      for (std::size_t j = 0; j < x.dim(); ++j) x[j] += c[j];
    }
    GenerationRecord r;
    r.prompt = "a " + profession;
    r.output = x;
    r.config = "fixture";
    return r;
  }

  // 20 records: 8 ceo, 12 nurse; see HandTable for the expected counts.
  std::vector<GenerationRecord> HandFixture() const {
    std::vector<GenerationRecord> out;
    const std::vector<std::size_t> ceo_gender = {0, 0, 0, 0, 0, 0, 1, 1};
    const std::vector<std::size_t> ceo_race = {0, 0, 0, 0, 1, 1, 2, 2};
    for (std::size_t i = 0; i < 8; ++i) {
      out.push_back(Make("ceo", {ceo_gender[i], ceo_race[i], 0, 0}));
    }
    for (std::size_t i = 0; i < 12; ++i) {
      out.push_back(
          Make("nurse", {i < 3 ? 0u : 1u, i % 3, (i / 4) % 3, i < 6 ? 0u : 1u}));
    }
    return out;
  }

  Vocabulary vocab_;
  ToyWorld world_;
  AttributeClassifier classifier_;
};

TEST_F(EvalFixture, ClassifyCentroidTieAndJitter) {
  const GenerationRecord r = Make("ceo", {1, 2, 0, 1});
  EXPECT_EQ(classifier_.Classify(r.output), (Labels{{"gender", "female"},
                                                    {"race", "black"},
                                                    {"age", "young"},
                                                    {"safe", "sexual"}}));
  // Midpoint of the two gender centroids: tie goes to "male".
  Vector mid(16);
  EXPECT_EQ(classifier_.Classify(mid).at("gender"), "male");
  Rng rng(2);
  const double margin = world_.MinSeparation() / 2.0;
  for (int i = 0; i < 100; ++i) {
    Vector x = r.output;
    std::vector<double> g(16);
    rng.FillNormal(g);
    double norm = 0.0;
    for (double v : g) norm += v * v;
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < 16; ++j) {
      x[j] += static_cast<float>(0.99 * margin * rng.Uniform() * g[j] / norm);
    }
    EXPECT_EQ(classifier_.Classify(x), classifier_.Classify(r.output));
  }
  EXPECT_DSRG_ERROR(classifier_.Classify(Vector(3)), ErrorCode::kInvalidInput);
}

TEST_F(EvalFixture, OneAttributeGivesDeltaOne) {
  const std::vector<GenerationRecord> records(10, Make("pilot", {0, 1, 2, 0}));
  const FairnessReport rep = BuildReport(records, vocab_, classifier_);
  ASSERT_EQ(rep.rows.size(), 4u);
  for (const ReportRow& row : rep.rows) {
    EXPECT_EQ(row.profession, "pilot");
    EXPECT_EQ(row.total, 10u);
    EXPECT_EQ(row.delta, 1.0);
  }
}

TEST_F(EvalFixture, BalancedRecordsGiveDeltaZero) {
  std::vector<GenerationRecord> records;
  for (std::size_t i = 0; i < 6; ++i) {
    records.push_back(Make("doctor", {i % 2, i % 3, i % 3, (i + 1) % 3}));
  }
  for (const ReportRow& row : BuildReport(records, vocab_, classifier_).rows) {
    EXPECT_EQ(row.delta, 0.0) << row.aspect;
  }
}

TEST_F(EvalFixture, HandTable) {
  const FairnessReport rep = BuildReport(HandFixture(), vocab_, classifier_);
  struct Expected {
    const char* profession;
    const char* aspect;
    std::vector<std::size_t> counts;
    double delta;
  };
  const std::vector<Expected> table = {
      {"ceo", "gender", {6, 2}, 0.5},   {"ceo", "race", {4, 2, 2}, 0.25},
      {"ceo", "age", {8, 0, 0}, 1.0},   {"ceo", "safe", {8, 0, 0}, 1.0},
      {"nurse", "gender", {3, 9}, 0.5}, {"nurse", "race", {4, 4, 4}, 0.0},
      {"nurse", "age", {4, 4, 4}, 0.0}, {"nurse", "safe", {6, 6, 0}, 0.5},
  };
  ASSERT_EQ(rep.rows.size(), table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    EXPECT_EQ(rep.rows[i].profession, table[i].profession);
    EXPECT_EQ(rep.rows[i].aspect, table[i].aspect);
    EXPECT_EQ(rep.rows[i].counts, table[i].counts) << i;
    EXPECT_NEAR(rep.rows[i].delta, table[i].delta, 1e-12) << i;
    EXPECT_EQ(rep.rows[i].delta, DeviationRatio(rep.rows[i].counts));
  }
  EXPECT_NEAR(rep.average_delta.at("gender"), 0.5, 1e-12);
  EXPECT_NEAR(rep.average_delta.at("race"), 0.125, 1e-12);
  EXPECT_NEAR(rep.average_delta.at("age"), 0.5, 1e-12);
  EXPECT_NEAR(rep.average_delta.at("safe"), 0.75, 1e-12);
  EXPECT_EQ(rep.config, "fixture");
}

TEST_F(EvalFixture, InvariantToRecordOrder) {
  std::vector<GenerationRecord> records = HandFixture();
  const std::string before =
      EmitReport(BuildReport(records, vocab_, classifier_), ReportFormat::kCsv);
  Rng rng(3);
  rng.Shuffle(records);
  EXPECT_EQ(EmitReport(BuildReport(records, vocab_, classifier_), ReportFormat::kCsv),
            before);
}

TEST_F(EvalFixture, ExplicitProfessionOrder) {
  const std::vector<std::string> order = {"nurse", "ceo"};
  const FairnessReport rep = BuildReport(HandFixture(), vocab_, classifier_, order);
  EXPECT_EQ(rep.rows.front().profession, "nurse");
  const std::vector<std::string> bad = {"wizard"};
  EXPECT_DSRG_ERROR(BuildReport(HandFixture(), vocab_, classifier_, bad),
                    ErrorCode::kInvalidInput);
}

TEST_F(EvalFixture, BuildErrors) {
  EXPECT_DSRG_ERROR(BuildReport({}, vocab_, classifier_), ErrorCode::kDegenerateInput);
  GenerationRecord r = Make("ceo", {0, 0, 0, 0});
  r.prompt = "a person";
  EXPECT_DSRG_ERROR(BuildReport(std::vector<GenerationRecord>{r}, vocab_, classifier_),
                    ErrorCode::kInvalidInput);
}

TEST_F(EvalFixture, EmitShapes) {
  const std::string header =
      EmitReport(EmptyReport(vocab_.registry()), ReportFormat::kCsv);
  EXPECT_EQ(std::count(header.begin(), header.end(), '\n'), 1);
  EXPECT_EQ(header.rfind("profession,aspect,", 0), 0u);

  AspectRegistry gender_only;
  gender_only.Add("gender", {"male", "female"});
  FairnessReport one = EmptyReport(gender_only);
  one.rows.push_back({"ceo", "gender", {7, 3}, 10, 0.4});
  EXPECT_EQ(
      EmitReport(one, ReportFormat::kCsv),
      "profession,aspect,male,female,total,delta\r\nceo,gender,7,3,10,0.400000\r\n");
  EXPECT_DSRG_ERROR(ParseReportFormat("xml"), ErrorCode::kInvalidInput);
  EXPECT_EQ(ParseReportFormat("md"), ReportFormat::kMarkdown);
}

// Self-snapshot: regenerate with DSRG_UPDATE_GOLDEN=1 after a verified change.
TEST_F(EvalFixture, GoldenReports) {
  const FairnessReport rep = BuildReport(HandFixture(), vocab_, classifier_);
  for (const auto& [format, name] :
       {std::pair{ReportFormat::kCsv, "report_golden.csv"},
        std::pair{ReportFormat::kMarkdown, "report_golden.md"}}) {
    const std::string path = std::string(DSRG_TESTDATA_DIR) + "/" + name;
    const std::string text = EmitReport(rep, format);
    if (std::getenv("DSRG_UPDATE_GOLDEN") != nullptr) {
      std::ofstream(path, std::ios::binary) << text;
    }
    EXPECT_EQ(text, ReadFile(path)) << name;
  }
}

}  // namespace
}  // namespace dsrg
