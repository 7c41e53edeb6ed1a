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

#include "dsrg_cli/config.h"

#include <charconv>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "dsrg/error.h"
#include "dsrg/random.h"

namespace dsrg::cli {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void BadValue(std::string_view key, std::string_view value) {
  Fail(ErrorCode::kInvalidConfig,
       "bad value '" + std::string(value) + "' for " + std::string(key));
}

double ToDouble(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
    BadValue(key, v);
  }
  return out;
}

std::uint64_t ToU64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) BadValue(key, v);
  return out;
}

int ToInt(std::string_view key, std::string_view v) {
  int out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) BadValue(key, v);
  return out;
}

bool ToBool(std::string_view key, std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  BadValue(key, v);
}

std::vector<std::string> ToList(std::string_view v) {
  std::vector<std::string> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    const auto item = Trim(v.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

std::string JoinList(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ',';
    out += s;
  }
  return out;
}

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

// Binders from a member accessor to a Field.
template <typename Acc>
Field Real(std::string key, Acc acc) {
  return {
      key,
      [acc](const RunConfig& c) { return FormatDouble(acc(const_cast<RunConfig&>(c))); },
      [acc, key](RunConfig& c, std::string_view v) { acc(c) = ToDouble(key, v); }};
}

template <typename Acc>
Field Count(std::string key, Acc acc) {
  return {key,
          [acc](const RunConfig& c) {
            return std::to_string(acc(const_cast<RunConfig&>(c)));
          },
          [acc, key](RunConfig& c, std::string_view v) {
            acc(c) =
                static_cast<std::remove_reference_t<decltype(acc(c))>>(ToU64(key, v));
          }};
}

template <typename Acc>
Field Int(std::string key, Acc acc) {
  return {key,
          [acc](const RunConfig& c) {
            return std::to_string(acc(const_cast<RunConfig&>(c)));
          },
          [acc, key](RunConfig& c, std::string_view v) { acc(c) = ToInt(key, v); }};
}

template <typename Acc>
Field Flag(std::string key, Acc acc) {
  return {key,
          [acc](const RunConfig& c) {
            return std::string(acc(const_cast<RunConfig&>(c)) ? "true" : "false");
          },
          [acc, key](RunConfig& c, std::string_view v) { acc(c) = ToBool(key, v); }};
}

template <typename Acc>
Field Text(std::string key, Acc acc) {
  return {key, [acc](const RunConfig& c) { return acc(const_cast<RunConfig&>(c)); },
          [acc](RunConfig& c, std::string_view v) { acc(c) = std::string(v); }};
}

template <typename Acc>
Field List(std::string key, Acc acc) {
  return {key,
          [acc](const RunConfig& c) { return JoinList(acc(const_cast<RunConfig&>(c))); },
          [acc](RunConfig& c, std::string_view v) { acc(c) = ToList(v); }};
}

#define DSRG_ACC(member) [](RunConfig& c) -> auto& { return c.member; }

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      Count("seed", DSRG_ACC(seed)),
      Text("paths.out", DSRG_ACC(out_dir)),
      Text("paths.vocab", DSRG_ACC(vocab_path)),

      Real("world.skew", DSRG_ACC(skew)),
      Count("world.latent_dim", DSRG_ACC(world.latent_dim)),
      Real("world.centroid_radius", DSRG_ACC(world.centroid_radius)),
      Real("world.noise_scale", DSRG_ACC(world.noise_scale)),

      Count("encoder.dim", DSRG_ACC(teacher_encoder.dim)),
      Count("encoder.vocab_size", DSRG_ACC(vocab_size)),
      Count("encoder.max_length", DSRG_ACC(max_length)),
      Real("encoder.attribute_strength", DSRG_ACC(teacher_encoder.attribute_strength)),
      Real("encoder.skew_displacement", DSRG_ACC(teacher_encoder.skew_displacement)),
      Real("encoder.content_scale", DSRG_ACC(teacher_encoder.content_scale)),

      Int("diffusion.steps", DSRG_ACC(steps)),
      Count("diffusion.width", DSRG_ACC(teacher_diffusion.width)),

      Count("teacher_diff.prompts", DSRG_ACC(teacher_prompts)),
      Real("teacher_diff.per_aspect_rate", DSRG_ACC(teacher_per_aspect_rate)),
      Int("teacher_diff.epochs", DSRG_ACC(teacher_diffusion.epochs)),
      Count("teacher_diff.samples_per_epoch",
            DSRG_ACC(teacher_diffusion.samples_per_epoch)),
      Count("teacher_diff.batch", DSRG_ACC(teacher_diffusion.batch)),
      Real("teacher_diff.lr", DSRG_ACC(teacher_diffusion.lr)),
      Real("teacher_diff.final_lr_fraction",
           DSRG_ACC(teacher_diffusion.final_lr_fraction)),

      Count("rice.prompts", DSRG_ACC(rice_prompts)),
      Int("rice.epochs", DSRG_ACC(rice.epochs)),
      Count("rice.batch", DSRG_ACC(rice.batch)),
      Real("rice.lr", DSRG_ACC(rice.lr)),
      Real("rice.holdout_fraction", DSRG_ACC(rice.holdout_fraction)),
      Flag("rice.init_from_teacher", DSRG_ACC(rice.init_from_teacher)),

      Int("riidl.epochs", DSRG_ACC(riidl.epochs)),
      Count("riidl.samples_per_epoch", DSRG_ACC(riidl.samples_per_epoch)),
      Count("riidl.batch", DSRG_ACC(riidl.batch)),
      Real("riidl.lr", DSRG_ACC(riidl.lr)),
      Real("riidl.gamma_cap", DSRG_ACC(riidl.gamma_cap)),
      Count("riidl.holdout_items", DSRG_ACC(riidl.holdout_items)),
      Flag("riidl.init_from_teacher", DSRG_ACC(riidl.init_from_teacher)),

      List("concepts.aspects", DSRG_ACC(concept_aspects)),
      Real("concepts.alpha", DSRG_ACC(blend.alpha)),
      Real("concepts.beta", DSRG_ACC(blend.beta)),
      Real("concepts.relative_eps", DSRG_ACC(relative_eps)),
      Count("concepts.samples_per_attribute", DSRG_ACC(concepts.samples_per_attribute)),
      Text("concepts.subject", DSRG_ACC(concepts.subject)),
      Real("concepts.context_rate", DSRG_ACC(concepts.context_rate)),
      Flag("concepts.framed", DSRG_ACC(concepts.framed)),
      Real("concepts.latent_time", DSRG_ACC(concepts.latent_time)),

      Real("dual.lambda_e", DSRG_ACC(dual.lambda_e)),
      Real("dual.lambda_d", DSRG_ACC(dual.lambda_d)),
      Real("dual.window_lo", DSRG_ACC(dual.window.lo)),
      Real("dual.window_hi", DSRG_ACC(dual.window.hi)),
      {"dual.latent_target",
       [](const RunConfig& c) {
         return std::string(c.dual.latent_target == HookTarget::kNoise ? "noise"
                                                                       : "state");
       },
       [](RunConfig& c, std::string_view v) {
         if (v == "noise") {
           c.dual.latent_target = HookTarget::kNoise;
         } else if (v == "state") {
           c.dual.latent_target = HookTarget::kState;
         } else {
           BadValue("dual.latent_target", v);
         }
       }},
      {"dual.embedding",
       [](const RunConfig& c) { return FormatDirectives(c.dual.embedding_directives); },
       [](RunConfig& c, std::string_view v) {
         c.dual.embedding_directives = ParseDirectives(v);
       }},
      {"dual.latent",
       [](const RunConfig& c) { return FormatDirectives(c.dual.latent_directives); },
       [](RunConfig& c, std::string_view v) {
         c.dual.latent_directives = ParseDirectives(v);
       }},
      Real("dual.embedding_gamma_limit", DSRG_ACC(embedding_gamma_limit)),
      Real("dual.latent_gamma_limit", DSRG_ACC(latent_gamma_limit)),

      List("generate.professions", DSRG_ACC(professions)),
      Count("generate.samples_per_profession", DSRG_ACC(samples_per_profession)),
  };
  return fields;
}

#undef DSRG_ACC

const Field& FindField(std::string_view key) {
  for (const Field& f : Fields()) {
    if (f.key == key) return f;
  }
  Fail(ErrorCode::kInvalidConfig, "unknown config key '" + std::string(key) + "'");
}

std::pair<std::string_view, std::string_view> SplitAssignment(std::string_view line) {
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) {
    Fail(ErrorCode::kInvalidConfig,
         "expected key = value, got '" + std::string(line) + "'");
  }
  const auto key = Trim(line.substr(0, eq));
  if (key.empty()) Fail(ErrorCode::kInvalidConfig, "empty config key");
  return {key, Trim(line.substr(eq + 1))};
}

}  // namespace

std::string FormatDouble(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::vector<DirectiveSpec> ParseDirectives(std::string_view text) {
  std::vector<DirectiveSpec> out;
  for (const std::string& item : ToList(text)) {
    const auto slash = item.find('/');
    const auto colon = item.rfind(':');
    if (slash == std::string::npos || colon == std::string::npos || colon < slash ||
        slash == 0 || colon == slash + 1) {
      Fail(ErrorCode::kInvalidConfig,
           "directive '" + item + "' is not aspect/attribute:gamma");
    }
    DirectiveSpec d;
    d.aspect = std::string(Trim(std::string_view(item).substr(0, slash)));
    d.attribute =
        std::string(Trim(std::string_view(item).substr(slash + 1, colon - slash - 1)));
    d.gamma = ToDouble("directive gamma", Trim(std::string_view(item).substr(colon + 1)));
    out.push_back(std::move(d));
  }
  return out;
}

std::string FormatDirectives(const std::vector<DirectiveSpec>& directives) {
  std::string out;
  for (const DirectiveSpec& d : directives) {
    if (!out.empty()) out += ',';
    out += d.aspect + "/" + d.attribute + ":" + FormatDouble(d.gamma);
  }
  return out;
}

void Validate(const RunConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) Fail(ErrorCode::kInvalidConfig, what);
  };
  c.dual.Validate();
  require(c.skew >= 0.0 && c.skew <= 1.0, "world.skew must lie in [0, 1]");
  require(c.world.latent_dim > 0 && c.teacher_encoder.dim > 0 && c.max_length > 0,
          "dims must be positive");
  require(c.steps >= 2, "diffusion.steps must be at least 2");
  require(c.world.noise_scale > 0.0 && c.world.centroid_radius > 0.0,
          "world scales must be positive");
  require(c.teacher_diffusion.epochs > 0 && c.rice.epochs > 0 && c.riidl.epochs > 0,
          "epochs must be positive");
  require(c.teacher_diffusion.batch > 0 && c.rice.batch > 0 && c.riidl.batch > 0,
          "batch sizes must be positive");
  require(c.teacher_diffusion.lr > 0.0 && c.rice.lr > 0.0 && c.riidl.lr > 0.0,
          "learning rates must be positive");
  require(c.teacher_prompts > 0 && c.rice_prompts > 1, "prompt counts too small");
  require(c.blend.alpha >= 0.0 && c.blend.alpha <= 1.0 && c.blend.beta >= 0.0 &&
              c.blend.beta <= 1.0,
          "concepts.alpha and concepts.beta must lie in [0, 1]");
  require(c.concepts.latent_time > 0.0 && c.concepts.latent_time <= 1.0,
          "concepts.latent_time must lie in (0, 1]");
  require(c.embedding_gamma_limit >= 0.0 && c.latent_gamma_limit >= 0.0,
          "gamma limits must be non-negative");
  require(c.samples_per_profession > 0,
          "generate.samples_per_profession must be positive");
}

RunConfig ParseConfig(std::string_view text) {
  RunConfig config;
  std::set<std::string, std::less<>> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto [key, value] = SplitAssignment(line);
    if (!seen.insert(std::string(key)).second) {
      Fail(ErrorCode::kInvalidConfig, "line " + std::to_string(line_no) +
                                          ": repeated key '" + std::string(key) + "'");
    }
    FindField(key).set(config, value);
  }
  return config;
}

void ApplyOverride(RunConfig& config, std::string_view assignment) {
  const auto [key, value] = SplitAssignment(assignment);
  FindField(key).set(config, value);
}

std::string EmitConfig(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const Field& f : Fields()) {
    const auto dot = f.key.find('.');
    const std::string s = dot == std::string::npos ? "" : f.key.substr(0, dot);
    if (s != section && !out.empty()) out += '\n';
    section = s;
    out += f.key + " = " + f.get(config) + "\n";
  }
  return out;
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  for (const Field& f : Fields()) keys.push_back(f.key);
  return keys;
}

std::uint64_t StageSeed(const RunConfig& config, Stage stage) {
  return MixSeed(config.seed, static_cast<std::uint64_t>(stage));
}

}  // namespace dsrg::cli
