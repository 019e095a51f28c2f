// Copyright 2026 The LGC Authors
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

#include "lgc/container.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lgc/errors.hpp"
#include "lgc/posemap_codec.hpp"
#include "lgc/smplx_codec.hpp"
#include "lgc/weight_quant.hpp"

namespace lgc {

const char* layer_name(LayerId id) {
  switch (id) {
    case LayerId::kStructural: return "structural";
    case LayerId::kSmplx: return "smplx";
    case LayerId::kPoseMap: return "posemap";
    case LayerId::kMetadata: return "metadata";
  }
  return "unknown";
}

namespace {

bool known_layer(std::uint8_t v) { return v <= static_cast<std::uint8_t>(LayerId::kMetadata); }

CodecId expected_codec(LayerId layer) {
  switch (layer) {
    case LayerId::kStructural: return CodecId::kQuantizedWeights;
    case LayerId::kSmplx: return CodecId::kSmplxHuffman;
    case LayerId::kPoseMap: return CodecId::kPoseMapPredictive;
    case LayerId::kMetadata: return CodecId::kJsonMetadata;
  }
  return CodecId::kQuantizedWeights;
}

}  // namespace

Bytes mux(std::span<const Section> sections) {
  if (sections.size() > 255) throw InvalidArgument("mux: at most 255 sections");
  std::set<LayerId> seen;
  for (const auto& s : sections) {
    if (!seen.insert(s.layer).second) {
      throw InvalidArgument(std::string("mux: duplicate layer ") + layer_name(s.layer));
    }
  }
  ByteWriter w;
  w.tag("HGCA");
  w.u16(kContainerVersion);
  w.u8(static_cast<std::uint8_t>(sections.size()));
  std::uint64_t offset = kContainerHeaderBytes + kSectionEntryBytes * sections.size();
  for (const auto& s : sections) {
    w.u8(static_cast<std::uint8_t>(s.layer));
    w.u8(static_cast<std::uint8_t>(s.codec));
    w.u64(offset);
    w.u64(s.payload.size());
    w.u32(crc32(s.payload));
    offset += s.payload.size();
  }
  for (const auto& s : sections) w.bytes(s.payload);
  return w.take();
}

Bytes MemorySource::read(std::uint64_t offset, std::uint64_t length) {
  if (offset > data_.size() || length > data_.size() - offset) {
    throw DecodeError("container: read past end of data");
  }
  return Bytes(data_.begin() + static_cast<std::ptrdiff_t>(offset),
               data_.begin() + static_cast<std::ptrdiff_t>(offset + length));
}

FileSource::FileSource(const std::filesystem::path& path) : in_(path, std::ios::binary) {
  if (!in_) throw InvalidArgument("cannot open " + path.string());
  in_.seekg(0, std::ios::end);
  size_ = static_cast<std::uint64_t>(in_.tellg());
}

Bytes FileSource::read(std::uint64_t offset, std::uint64_t length) {
  if (offset > size_ || length > size_ - offset) throw DecodeError("container: read past end of file");
  Bytes out(length);
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(offset));
  in_.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(length));
  if (!in_) throw DecodeError("container: I/O error");
  return out;
}

Bytes CountingSource::read(std::uint64_t offset, std::uint64_t length) {
  reads_.emplace_back(offset, length);
  return inner_.read(offset, length);
}

std::uint64_t CountingSource::bytes_read() const {
  std::uint64_t n = 0;
  for (const auto& r : reads_) n += r.second;
  return n;
}

bool CountingSource::touched(std::uint64_t offset, std::uint64_t length) const {
  return std::any_of(reads_.begin(), reads_.end(), [&](const auto& r) {
    return r.second > 0 && length > 0 && r.first < offset + length && offset < r.first + r.second;
  });
}

Demuxer::Demuxer(ByteSource& source) : source_(source) {
  if (source.size() < kContainerHeaderBytes) throw DecodeError("container: truncated header");
  const Bytes header = source.read(0, kContainerHeaderBytes);
  ByteReader r(header, "container header");
  r.expect_tag("HGCA");
  const std::uint16_t version = r.u16();
  if (version != kContainerVersion) {
    throw DecodeError("container: unsupported version " + std::to_string(version));
  }
  const std::uint8_t count = r.u8();
  const std::uint64_t table_end = kContainerHeaderBytes + kSectionEntryBytes * count;
  if (source.size() < table_end) throw DecodeError("container: truncated section table");
  const Bytes table = source.read(kContainerHeaderBytes, kSectionEntryBytes * count);
  ByteReader t(table, "section table");
  std::set<std::uint8_t> seen;
  for (int i = 0; i < count; ++i) {
    const std::uint8_t layer = t.u8();
    const std::uint8_t codec = t.u8();
    SectionEntry e;
    e.offset = t.u64();
    e.length = t.u64();
    e.crc = t.u32();
    if (!known_layer(layer)) throw DecodeError("container: unknown layer id " + std::to_string(layer));
    if (!seen.insert(layer).second) throw DecodeError("container: duplicate layer id " + std::to_string(layer));
    e.layer = static_cast<LayerId>(layer);
    e.codec = static_cast<CodecId>(codec);
    if (e.offset < table_end || e.offset > source.size() || e.length > source.size() - e.offset) {
      throw DecodeError(std::string("container: section ") + layer_name(e.layer) + " out of bounds");
    }
    entries_.push_back(e);
  }
  std::vector<SectionEntry> sorted = entries_;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.offset < b.offset; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i - 1].offset + sorted[i - 1].length > sorted[i].offset) {
      throw DecodeError(std::string("container: sections ") + layer_name(sorted[i - 1].layer) + " and " +
                        layer_name(sorted[i].layer) + " overlap");
    }
  }
}

const SectionEntry* Demuxer::find(LayerId layer) const {
  for (const auto& e : entries_) {
    if (e.layer == layer) return &e;
  }
  return nullptr;
}

Bytes Demuxer::read(LayerId layer) {
  const SectionEntry* e = find(layer);
  if (!e) throw DecodeError(std::string("container: no ") + layer_name(layer) + " section");
  Bytes payload = source_.read(e->offset, e->length);
  if (crc32(payload) != e->crc) {
    throw DecodeError(std::string("container: CRC mismatch in section ") + layer_name(layer));
  }
  return payload;
}

Bytes serialize_metadata(const StreamMetadata& meta) {
  using nlohmann::json;
  const Camera& c = meta.camera;
  json cam;
  cam["mode"] = c.mode == Projection::kOrthographic ? "orthographic" : "pinhole";
  std::vector<double> rot;
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k) rot.push_back(c.rotation(r, k));
  cam["rotation"] = rot;
  cam["translation"] = {c.translation.x(), c.translation.y(), c.translation.z()};
  cam["intrinsics"] = {c.fx, c.fy, c.cx, c.cy};
  cam["size"] = {c.width, c.height};
  cam["background"] = {c.background.x(), c.background.y(), c.background.z()};
  json tmpl;
  if (meta.synthetic_template) {
    tmpl["kind"] = "synthetic";
    tmpl["seed"] = meta.template_seed;
  } else {
    tmpl["kind"] = "file";
    tmpl["crc32"] = meta.template_crc;
  }
  json j;
  j["frames"] = meta.frames;
  j["map_resolution"] = meta.map_resolution;
  j["camera"] = cam;
  j["template"] = tmpl;
  j["bit_width"] = meta.bit_width;
  j["step"] = meta.step;
  const std::string s = j.dump();
  return Bytes(s.begin(), s.end());
}

StreamMetadata parse_metadata(std::span<const std::uint8_t> data) {
  using nlohmann::json;
  try {
    const json j = json::parse(data.begin(), data.end());
    StreamMetadata m;
    m.frames = j.at("frames").get<std::uint32_t>();
    m.map_resolution = j.at("map_resolution").get<int>();
    m.bit_width = j.at("bit_width").get<int>();
    m.step = j.at("step").get<double>();
    const json& cam = j.at("camera");
    const std::string mode = cam.at("mode").get<std::string>();
    if (mode == "orthographic") m.camera.mode = Projection::kOrthographic;
    else if (mode == "pinhole") m.camera.mode = Projection::kPinhole;
    else throw DecodeError("metadata: unknown camera mode " + mode);
    const auto rot = cam.at("rotation").get<std::vector<double>>();
    const auto tr = cam.at("translation").get<std::vector<double>>();
    const auto in = cam.at("intrinsics").get<std::vector<double>>();
    const auto size = cam.at("size").get<std::vector<int>>();
    const auto bg = cam.at("background").get<std::vector<double>>();
    if (rot.size() != 9 || tr.size() != 3 || in.size() != 4 || size.size() != 2 || bg.size() != 3) {
      throw DecodeError("metadata: malformed camera");
    }
    for (int r = 0; r < 3; ++r)
      for (int k = 0; k < 3; ++k) m.camera.rotation(r, k) = rot[r * 3 + k];
    m.camera.translation = {tr[0], tr[1], tr[2]};
    m.camera.fx = in[0];
    m.camera.fy = in[1];
    m.camera.cx = in[2];
    m.camera.cy = in[3];
    m.camera.width = size[0];
    m.camera.height = size[1];
    m.camera.background = {bg[0], bg[1], bg[2]};
    const json& t = j.at("template");
    const std::string kind = t.at("kind").get<std::string>();
    if (kind == "synthetic") {
      m.synthetic_template = true;
      m.template_seed = t.at("seed").get<std::uint64_t>();
    } else if (kind == "file") {
      m.synthetic_template = false;
      m.template_crc = t.at("crc32").get<std::uint32_t>();
    } else {
      throw DecodeError("metadata: unknown template kind " + kind);
    }
    try {
      m.camera.validate();
    } catch (const InvalidArgument& e) {
      throw DecodeError(std::string("metadata: ") + e.what());
    }
    return m;
  } catch (const json::exception& e) {
    throw DecodeError(std::string("metadata: ") + e.what());
  }
}

namespace {

void check_codec(const SectionEntry& e) {
  const auto codec = static_cast<std::uint8_t>(e.codec);
  if (codec < 1 || codec > 4) {
    throw DecodeError(std::string("container: unknown codec id ") + std::to_string(codec) + " in section " +
                      layer_name(e.layer));
  }
  if (e.codec != expected_codec(e.layer)) {
    throw DecodeError(std::string("container: codec ") + std::to_string(codec) + " cannot carry section " +
                      layer_name(e.layer));
  }
}

GeneratorWeights decode_weights_section(std::span<const std::uint8_t> payload) {
  try {
    return dequantize_network(parse_quantized(payload));
  } catch (const InvalidArgument& e) {
    throw DecodeError(std::string("structural section: ") + e.what());
  }
}

}  // namespace

DecodedLayers decode_all(ByteSource& source) {
  Demuxer demux(source);
  for (const auto& e : demux.entries()) check_codec(e);
  DecodedLayers out;
  if (demux.find(LayerId::kStructural)) out.weights = decode_weights_section(demux.read(LayerId::kStructural));
  if (demux.find(LayerId::kSmplx)) {
    out.poses = decode_smplx(parse_smplx_stream(demux.read(LayerId::kSmplx)));
  }
  if (demux.find(LayerId::kPoseMap)) {
    out.pose_maps = decode_posemaps(parse_posemap_stream(demux.read(LayerId::kPoseMap)));
  }
  if (demux.find(LayerId::kMetadata)) out.metadata = parse_metadata(demux.read(LayerId::kMetadata));
  return out;
}

GeneratorWeights decode_structural(ByteSource& source) {
  Demuxer demux(source);
  const SectionEntry* e = demux.find(LayerId::kStructural);
  if (!e) throw DecodeError("container: no structural section");
  check_codec(*e);
  return decode_weights_section(demux.read(LayerId::kStructural));
}

Composition report_composition(ByteSource& source) {
  Demuxer demux(source);
  Composition c;
  c.file_bytes = source.size();
  for (const auto& e : demux.entries()) {
    demux.read(e.layer);
    c.layers.push_back({e.layer, e.length, 0.0});
    c.payload_bytes += e.length;
  }
  for (auto& l : c.layers) {
    l.percent = c.payload_bytes ? 100.0 * static_cast<double>(l.bytes) / static_cast<double>(c.payload_bytes) : 0.0;
  }
  return c;
}

std::string composition_csv(const Composition& c) {
  std::ostringstream out;
  out << "layer,bytes,percent\n" << std::fixed << std::setprecision(4);
  for (const auto& l : c.layers) out << layer_name(l.layer) << ',' << l.bytes << ',' << l.percent << '\n';
  return out.str();
}

}  // namespace lgc
