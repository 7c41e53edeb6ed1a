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

#include "dsrg_cli/artifacts.h"

#include <fstream>
#include <json.hpp>

#include "dsrg/error.h"

namespace dsrg::cli {
namespace {

using nlohmann::json;

void PutParams(Checkpoint& ckpt, const ParamSet<float>& params) {
  for (std::size_t i = 0; i < params.blocks().size(); ++i) {
    const ParamBlock& b = params.blocks()[i];
    const auto values = params.block(i);
    ckpt.Put(b.name,
             {static_cast<std::uint32_t>(b.rows), static_cast<std::uint32_t>(b.cols)},
             {values.begin(), values.end()});
  }
}

void GetParams(const Checkpoint& ckpt, ParamSet<float>& params) {
  if (ckpt.tensors().size() != params.blocks().size()) {
    Fail(ErrorCode::kCorruptCheckpoint, "unexpected tensor count in network checkpoint");
  }
  for (std::size_t i = 0; i < params.blocks().size(); ++i) {
    const ParamBlock& b = params.blocks()[i];
    const Tensor& t = ckpt.Get(b.name);
    if (t.dims != std::vector<std::uint32_t>{static_cast<std::uint32_t>(b.rows),
                                             static_cast<std::uint32_t>(b.cols)}) {
      Fail(ErrorCode::kCorruptCheckpoint, "tensor '" + b.name + "' has the wrong shape");
    }
    std::copy(t.values.begin(), t.values.end(), params.block(i).begin());
  }
}

const Tensor& Shaped(const Checkpoint& ckpt, const std::string& name) {
  const Tensor& t = ckpt.Get(name);
  if (t.dims.size() != 2) {
    Fail(ErrorCode::kCorruptCheckpoint, "tensor '" + name + "' is not a matrix");
  }
  return t;
}

json ParseJson(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kCorruptCheckpoint,
         std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

std::filesystem::path ArtifactPaths::concepts(ConceptSpaceTag tag) const {
  return dir / ("concepts_" + std::string(ConceptSpaceTagName(tag)) + ".dsrg");
}

Checkpoint EncoderToCheckpoint(const EncoderNet& net) {
  Checkpoint ckpt;
  PutParams(ckpt, net.params());
  return ckpt;
}

EncoderNet EncoderFromCheckpoint(const Checkpoint& ckpt) {
  const Tensor& emb = Shaped(ckpt, "embedding");
  EncoderNet net(emb.dims[0], emb.dims[1]);
  GetParams(ckpt, net.params());
  return net;
}

Checkpoint DenoiserToCheckpoint(const DenoiserNet& net) {
  Checkpoint ckpt;
  PutParams(ckpt, net.params());
  return ckpt;
}

DenoiserNet DenoiserFromCheckpoint(const Checkpoint& ckpt) {
  const Tensor& w1 = Shaped(ckpt, "w1");
  const Tensor& w3 = Shaped(ckpt, "w3");
  const std::size_t width = w1.dims[0];
  const std::size_t latent = w3.dims[0];
  if (w1.dims[1] < latent + kTimeEmbeddingDim) {
    Fail(ErrorCode::kCorruptCheckpoint, "denoiser input width too small");
  }
  DenoiserNet net(latent, w1.dims[1] - latent - kTimeEmbeddingDim, width);
  GetParams(ckpt, net.params());
  return net;
}

Checkpoint ConceptsToCheckpoint(const ConceptBank& bank, ConceptSpaceTag tag) {
  Checkpoint ckpt;
  json manifest = {{"tag", ConceptSpaceTagName(tag)}, {"spaces", json::array()}};
  for (const ConceptSpace& s : bank.spaces()) {
    if (s.tag() != tag) continue;
    const std::string root = "concept/" + s.aspect() + "/";
    ckpt.PutVector(root + "mean", s.mean());
    ckpt.PutMatrix(root + "whitening", s.whitening());
    json attrs = json::array();
    for (const AttributeConcept& a : s.attributes()) {
      ckpt.PutVector(root + a.name + "/distill", a.distill);
      ckpt.PutVector(root + a.name + "/zca", a.zca);
      ckpt.PutVector(root + a.name + "/resp", a.resp);
      attrs.push_back({{"name", a.name}, {"count", a.count}});
    }
    manifest["spaces"].push_back(
        {{"aspect", s.aspect()}, {"blend", s.blend()}, {"attributes", attrs}});
  }
  ckpt.PutText("concept/manifest", manifest.dump());
  return ckpt;
}

void ConceptsFromCheckpoint(const Checkpoint& ckpt, ConceptBank& bank) {
  const json manifest = ParseJson(ckpt.GetText("concept/manifest"), "concept manifest");
  try {
    const ConceptSpaceTag tag =
        ParseConceptSpaceTag(manifest.at("tag").get<std::string>());
    for (const json& s : manifest.at("spaces")) {
      const std::string aspect = s.at("aspect").get<std::string>();
      const std::string root = "concept/" + aspect + "/";
      std::vector<AttributeConcept> attrs;
      for (const json& a : s.at("attributes")) {
        AttributeConcept c;
        c.name = a.at("name").get<std::string>();
        c.count = a.at("count").get<std::size_t>();
        c.distill = ckpt.GetVector(root + c.name + "/distill");
        c.zca = ckpt.GetVector(root + c.name + "/zca");
        c.resp = ckpt.GetVector(root + c.name + "/resp");
        attrs.push_back(std::move(c));
      }
      bank.Add(ConceptSpace(aspect, tag, s.at("blend").get<double>(),
                            ckpt.GetVector(root + "mean"),
                            ckpt.GetMatrix(root + "whitening"), std::move(attrs)));
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kCorruptCheckpoint, std::string("bad concept manifest: ") + e.what());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInvalidInput) throw;
    Fail(ErrorCode::kCorruptCheckpoint, e.what());
  }
}

Checkpoint WorldToCheckpoint(const ToyWorld& world) {
  Checkpoint ckpt;
  const auto& aspects = world.registry().aspects();
  for (std::size_t k = 0; k < aspects.size(); ++k) {
    for (std::size_t a = 0; a < aspects[k].attributes.size(); ++a) {
      ckpt.PutVector("world/" + aspects[k].name + "/" + aspects[k].attributes[a],
                     world.Centroid(k, a));
    }
  }
  const json manifest = {{"latent_dim", world.latent_dim()},
                         {"noise_scale", world.noise_scale()}};
  ckpt.PutText("world/manifest", manifest.dump());
  return ckpt;
}

ToyWorld WorldFromCheckpoint(const Checkpoint& ckpt, const AspectRegistry& registry,
                             const SkewModel& skew) {
  const json manifest = ParseJson(ckpt.GetText("world/manifest"), "world manifest");
  std::vector<std::vector<Vector>> centroids;
  for (const Aspect& aspect : registry.aspects()) {
    auto& row = centroids.emplace_back();
    for (const std::string& attr : aspect.attributes) {
      row.push_back(ckpt.GetVector("world/" + aspect.name + "/" + attr));
    }
  }
  double noise = 0.0;
  try {
    noise = manifest.at("noise_scale").get<double>();
  } catch (const json::exception& e) {
    Fail(ErrorCode::kCorruptCheckpoint, std::string("bad world manifest: ") + e.what());
  }
  return ToyWorld::FromCentroids(registry, skew, noise, std::move(centroids));
}

std::string SkewToJson(const SkewModel& skew) {
  json dists = json::object();
  for (const auto& [prof, per_aspect] : skew.distributions()) dists[prof] = per_aspect;
  const json doc = {{"strength", skew.strength()}, {"distributions", dists}};
  return doc.dump(2) + "\n";
}

SkewModel SkewFromJson(const std::string& text, const AspectRegistry& registry) {
  const json doc = ParseJson(text, "skew file");
  try {
    return SkewModel::FromDistributions(
        registry, doc.at("strength").get<double>(),
        doc.at("distributions")
            .get<std::map<std::string, std::vector<std::vector<double>>>>());
  } catch (const json::exception& e) {
    Fail(ErrorCode::kCorruptCheckpoint, std::string("bad skew file: ") + e.what());
  }
}

void SaveWorldBundle(const ArtifactPaths& paths, const WorldBundle& bundle) {
  WriteFileBytes(paths.vocab(), bundle.vocab.Serialize());
  WriteFileBytes(paths.skew(), SkewToJson(bundle.skew));
  SaveCheckpoint(paths.world(), WorldToCheckpoint(bundle.world));
}

WorldBundle LoadWorldBundle(const ArtifactPaths& paths) {
  WorldBundle b;
  b.vocab = Vocabulary::Parse(ReadFileBytes(paths.vocab()));
  b.skew = SkewFromJson(ReadFileBytes(paths.skew()), b.vocab.registry());
  b.world =
      WorldFromCheckpoint(LoadCheckpoint(paths.world()), b.vocab.registry(), b.skew);
  return b;
}

std::string RecordToJson(const GenerationRecord& record) {
  std::vector<float> output(record.output.values().begin(), record.output.values().end());
  const json j = {{"prompt", record.prompt},
                  {"seed", record.seed},
                  {"output", output},
                  {"labels", record.labels},
                  {"config", record.config}};
  return j.dump();
}

GenerationRecord RecordFromJson(const std::string& line) {
  try {
    const json j = json::parse(line);
    GenerationRecord r;
    r.prompt = j.at("prompt").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.output = Vector(j.at("output").get<std::vector<float>>());
    r.labels = j.at("labels").get<Labels>();
    if (j.contains("config")) r.config = j.at("config").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidInput, std::string("malformed record: ") + e.what());
  }
}

void AppendRecords(const std::filesystem::path& path,
                   std::span<const GenerationRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) Fail(ErrorCode::kIoError, "cannot append to " + path.string());
  for (const GenerationRecord& r : records) out << RecordToJson(r) << '\n';
  out.close();
  if (!out) Fail(ErrorCode::kIoError, "write failed for " + path.string());
}

std::vector<GenerationRecord> ReadRecords(const std::filesystem::path& path) {
  const std::string text = ReadFileBytes(path);
  std::vector<GenerationRecord> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      out.push_back(RecordFromJson(line));
    }
    pos = end + 1;
  }
  return out;
}

std::string CurveCsv(std::span<const LossPoint> curve) {
  std::string out = "epoch,train_loss,holdout_loss\n";
  char buf[96];
  for (const LossPoint& p : curve) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g\n", p.epoch, p.train_loss,
                  p.holdout_loss);
    out += buf;
  }
  return out;
}

}  // namespace dsrg::cli
