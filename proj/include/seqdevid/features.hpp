#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "seqdevid/capture.hpp"
#include "seqdevid/csv.hpp"
#include "seqdevid/error.hpp"
#include "seqdevid/nn/tensor.hpp"

namespace seqdevid::features {

using capture::RawPacket;
using capture::SessionRecord;
using nn::Tensor2;
using FeatureVector = std::vector<double>;

// ---------------------------------------------------------------------------
// Extractor registry

/// The packet being featurized and its predecessor in the session, if any.
struct PacketContext {
  const RawPacket& packet;
  const RawPacket* previous;
};

/// Returns nullopt when the packet lacks the field; the manifest default
/// is substituted.
using Extractor = std::function<std::optional<double>(const PacketContext&)>;

namespace detail {

inline std::optional<double> flag_bit(const RawPacket& p, unsigned bit) {
  if (!p.tcp_flags) return std::nullopt;
  return (*p.tcp_flags >> bit) & 1u ? 1.0 : 0.0;
}

enum class PortClass { WellKnown, Registered, Ephemeral };

inline std::optional<double> port_bucket(const std::optional<std::uint16_t>& port, PortClass cls) {
  if (!port) return std::nullopt;
  const PortClass actual = *port < 1024 ? PortClass::WellKnown : *port < 49152 ? PortClass::Registered : PortClass::Ephemeral;
  return actual == cls ? 1.0 : 0.0;
}

inline std::optional<double> proto_is(const RawPacket& p, std::initializer_list<std::uint8_t> protos) {
  if (!p.ip_proto) return std::nullopt;
  return std::find(protos.begin(), protos.end(), *p.ip_proto) != protos.end() ? 1.0 : 0.0;
}

template <typename T>
std::optional<double> opt(const std::optional<T>& v) {
  if (!v) return std::nullopt;
  return static_cast<double>(*v);
}

}  // namespace detail

inline const std::map<std::string, Extractor>& extractor_registry() {
  using detail::PortClass;
  static const std::map<std::string, Extractor> registry = {
      {"packet_size", [](const PacketContext& c) -> std::optional<double> { return c.packet.wire_len; }},
      {"captured_size", [](const PacketContext& c) -> std::optional<double> { return c.packet.captured_len; }},
      {"payload_size", [](const PacketContext& c) -> std::optional<double> { return c.packet.payload_len; }},
      {"interarrival",
       [](const PacketContext& c) -> std::optional<double> {
         if (!c.previous) return 0.0;
         return c.packet.timestamp - c.previous->timestamp;
       }},
      {"direction",
       [](const PacketContext& c) -> std::optional<double> {
         switch (c.packet.direction) {
           case capture::Direction::FromDevice: return 1.0;
           case capture::Direction::ToDevice: return -1.0;
           case capture::Direction::Unknown: break;
         }
         return std::nullopt;
       }},
      {"ttl", [](const PacketContext& c) { return detail::opt(c.packet.ttl); }},
      {"ip_header_len", [](const PacketContext& c) { return detail::opt(c.packet.ip_header_len); }},
      {"ip_version",
       [](const PacketContext& c) -> std::optional<double> {
         switch (c.packet.ip_version) {
           case capture::IpVersion::V4: return 4.0;
           case capture::IpVersion::V6: return 6.0;
           case capture::IpVersion::None: break;
         }
         return std::nullopt;
       }},
      {"ip_proto", [](const PacketContext& c) { return detail::opt(c.packet.ip_proto); }},
      {"proto_tcp", [](const PacketContext& c) { return detail::proto_is(c.packet, {capture::kProtoTcp}); }},
      {"proto_udp", [](const PacketContext& c) { return detail::proto_is(c.packet, {capture::kProtoUdp}); }},
      {"proto_icmp",
       [](const PacketContext& c) {
         return detail::proto_is(c.packet, {capture::kProtoIcmp, capture::kProtoIcmpv6});
       }},
      {"proto_arp",
       [](const PacketContext& c) -> std::optional<double> {
         if (!c.packet.eth_type) return std::nullopt;
         return *c.packet.eth_type == capture::kEthArp ? 1.0 : 0.0;
       }},
      {"tcp_fin", [](const PacketContext& c) { return detail::flag_bit(c.packet, 0); }},
      {"tcp_syn", [](const PacketContext& c) { return detail::flag_bit(c.packet, 1); }},
      {"tcp_rst", [](const PacketContext& c) { return detail::flag_bit(c.packet, 2); }},
      {"tcp_psh", [](const PacketContext& c) { return detail::flag_bit(c.packet, 3); }},
      {"tcp_ack", [](const PacketContext& c) { return detail::flag_bit(c.packet, 4); }},
      {"tcp_urg", [](const PacketContext& c) { return detail::flag_bit(c.packet, 5); }},
      {"tcp_window", [](const PacketContext& c) { return detail::opt(c.packet.tcp_window); }},
      {"src_port", [](const PacketContext& c) { return detail::opt(c.packet.src_port); }},
      {"dst_port", [](const PacketContext& c) { return detail::opt(c.packet.dst_port); }},
      {"src_port_wellknown", [](const PacketContext& c) { return detail::port_bucket(c.packet.src_port, PortClass::WellKnown); }},
      {"src_port_registered", [](const PacketContext& c) { return detail::port_bucket(c.packet.src_port, PortClass::Registered); }},
      {"src_port_ephemeral", [](const PacketContext& c) { return detail::port_bucket(c.packet.src_port, PortClass::Ephemeral); }},
      {"dst_port_wellknown", [](const PacketContext& c) { return detail::port_bucket(c.packet.dst_port, PortClass::WellKnown); }},
      {"dst_port_registered", [](const PacketContext& c) { return detail::port_bucket(c.packet.dst_port, PortClass::Registered); }},
      {"dst_port_ephemeral", [](const PacketContext& c) { return detail::port_bucket(c.packet.dst_port, PortClass::Ephemeral); }},
      {"broadcast", [](const PacketContext& c) -> std::optional<double> { return c.packet.is_broadcast ? 1.0 : 0.0; }},
      {"eth_type_class",
       [](const PacketContext& c) -> std::optional<double> {
         // 1 IPv4, 2 IPv6, 3 ARP, 4 anything else
         if (!c.packet.eth_type) return std::nullopt;
         switch (*c.packet.eth_type) {
           case capture::kEthIpv4: return 1.0;
           case capture::kEthIpv6: return 2.0;
           case capture::kEthArp: return 3.0;
           default: return 4.0;
         }
       }},
  };
  return registry;
}

// ---------------------------------------------------------------------------
// Manifests

struct FeatureDef {
  std::string name;
  std::string extractor;
  double default_value = 0.0;

  friend bool operator==(const FeatureDef&, const FeatureDef&) = default;
};

struct FeatureManifest {
  std::string name;
  std::size_t seq_len = 12;
  std::vector<FeatureDef> features;

  std::size_t feature_count() const noexcept { return features.size(); }

  void validate() const {
    if (seq_len < 1) throw Error(Errc::BadConfig, "manifest '" + name + "': seq_len must be >= 1");
    if (features.empty()) throw Error(Errc::BadConfig, "manifest '" + name + "': no features");
    std::set<std::string> names;
    for (const auto& f : features) {
      if (!names.insert(f.name).second) {
        throw Error(Errc::BadConfig, "manifest '" + name + "': duplicate feature '" + f.name + "'");
      }
    }
  }

  friend bool operator==(const FeatureManifest&, const FeatureManifest&) = default;
};

/// 25 header-derived per-packet features, 12 packets per session.
inline FeatureManifest iotdevid25() {
  FeatureManifest m{"iotdevid25", 12, {}};
  for (const char* id : {"packet_size", "payload_size", "interarrival", "direction", "ttl", "ip_header_len",
                         "proto_tcp", "proto_udp", "proto_icmp", "proto_arp", "tcp_fin", "tcp_syn", "tcp_rst",
                         "tcp_psh", "tcp_ack", "tcp_urg", "tcp_window", "src_port_wellknown", "src_port_registered",
                         "src_port_ephemeral", "dst_port_wellknown", "dst_port_registered", "dst_port_ephemeral",
                         "broadcast", "eth_type_class"}) {
    m.features.push_back({id, id, 0.0});
  }
  return m;
}

/// Six raw header features over the first 20 packets of a flow.
inline FeatureManifest lopez6() {
  FeatureManifest m{"lopez6", 20, {}};
  for (const char* id : {"src_port", "dst_port", "payload_size", "tcp_window", "interarrival", "direction"}) {
    m.features.push_back({id, id, 0.0});
  }
  return m;
}

inline nlohmann::json manifest_to_json(const FeatureManifest& m) {
  nlohmann::json j;
  j["name"] = m.name;
  j["seq_len"] = m.seq_len;
  j["features"] = nlohmann::json::array();
  for (const auto& f : m.features) {
    j["features"].push_back({{"name", f.name}, {"extractor", f.extractor}, {"default", f.default_value}});
  }
  return j;
}

inline FeatureManifest manifest_from_json(const nlohmann::json& j) {
  try {
    FeatureManifest m;
    m.name = j.at("name").get<std::string>();
    m.seq_len = j.value("seq_len", std::size_t{12});
    for (const auto& f : j.at("features")) {
      FeatureDef d;
      d.extractor = f.at("extractor").get<std::string>();
      d.name = f.value("name", d.extractor);
      d.default_value = f.value("default", 0.0);
      m.features.push_back(std::move(d));
    }
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadConfig, std::string("feature manifest: ") + e.what());
  }
}

/// Built-in name (`iotdevid25`, `lopez6`) or path to a JSON manifest.
inline FeatureManifest resolve_manifest(const std::string& name_or_path) {
  if (name_or_path == "iotdevid25") return iotdevid25();
  if (name_or_path == "lopez6") return lopez6();
  std::ifstream in(name_or_path);
  if (!in) throw Error(Errc::MissingFile, "feature manifest " + name_or_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadConfig, name_or_path + ": " + e.what());
  }
  return manifest_from_json(j);
}

// ---------------------------------------------------------------------------
// Extraction

inline std::vector<FeatureVector> extract_features(const SessionRecord& session, const FeatureManifest& manifest) {
  const auto& registry = extractor_registry();
  std::vector<const Extractor*> fns;
  fns.reserve(manifest.features.size());
  for (const auto& f : manifest.features) {
    auto it = registry.find(f.extractor);
    if (it == registry.end()) {
      throw Error(Errc::UnknownExtractor, "feature '" + f.name + "' uses unknown extractor '" + f.extractor + "'");
    }
    fns.push_back(&it->second);
  }
  std::vector<FeatureVector> out;
  out.reserve(session.packets.size());
  for (std::size_t i = 0; i < session.packets.size(); ++i) {
    const PacketContext ctx{session.packets[i], i ? &session.packets[i - 1] : nullptr};
    FeatureVector v(fns.size());
    for (std::size_t k = 0; k < fns.size(); ++k) {
      v[k] = (*fns[k])(ctx).value_or(manifest.features[k].default_value);
    }
    out.push_back(std::move(v));
  }
  return out;
}

/// First T vectors; shorter inputs are padded with all-zero rows.
inline Tensor2 build_sequence(const std::vector<FeatureVector>& vectors, std::size_t seq_len) {
  if (vectors.empty()) throw Error(Errc::EmptySession, "cannot build a sequence from zero packets");
  const std::size_t F = vectors.front().size();
  Tensor2 m(seq_len, F);
  const std::size_t n = std::min(seq_len, vectors.size());
  for (std::size_t t = 0; t < n; ++t) {
    if (vectors[t].size() != F) throw Error(Errc::ShapeMismatch, "feature vectors differ in length");
    std::copy(vectors[t].begin(), vectors[t].end(), m.row(t).begin());
  }
  return m;
}

struct SessionMatrix {
  Tensor2 values;
  std::size_t label = 0;
  std::string device_name;
  std::string session_id;
  /// Number of leading rows that hold real packets; the rest are padding.
  std::size_t length = 0;

  friend bool operator==(const SessionMatrix&, const SessionMatrix&) = default;
};

/// Bijection between device names and dense class ids (sorted by name).
class LabelCodec {
 public:
  LabelCodec() = default;

  static LabelCodec from_names(std::vector<std::string> names) {
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    LabelCodec c;
    c.names_ = std::move(names);
    for (std::size_t i = 0; i < c.names_.size(); ++i) c.ids_[c.names_[i]] = i;
    return c;
  }

  /// Keeps the given order: names[i] gets id i.
  static LabelCodec from_ordered(std::vector<std::string> names) {
    LabelCodec c;
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (!c.ids_.emplace(names[i], i).second) throw Error(Errc::SchemaMismatch, "duplicate device '" + names[i] + "'");
    }
    c.names_ = std::move(names);
    return c;
  }

  /// Codec implied by an existing dataset; label ids must be consistent.
  static LabelCodec from_dataset(const std::vector<SessionMatrix>& data) {
    std::map<std::size_t, std::string> by_id;
    for (const auto& m : data) {
      auto [it, inserted] = by_id.emplace(m.label, m.device_name);
      if (!inserted && it->second != m.device_name) {
        throw Error(Errc::SchemaMismatch, "label " + std::to_string(m.label) + " maps to both '" + it->second +
                                              "' and '" + m.device_name + "'");
      }
    }
    LabelCodec c;
    std::size_t expect = 0;
    for (const auto& [id, name] : by_id) {
      if (id != expect++) throw Error(Errc::SchemaMismatch, "class ids are not contiguous from 0");
      if (c.ids_.count(name)) throw Error(Errc::SchemaMismatch, "device '" + name + "' has two class ids");
      c.ids_[name] = id;
      c.names_.push_back(name);
    }
    return c;
  }

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  std::size_t id(const std::string& name) const {
    auto it = ids_.find(name);
    if (it == ids_.end()) throw Error(Errc::LabelOutOfRange, "unknown device '" + name + "'");
    return it->second;
  }

  const std::string& name(std::size_t id) const {
    if (id >= names_.size()) throw Error(Errc::LabelOutOfRange, "class id " + std::to_string(id));
    return names_[id];
  }

  friend bool operator==(const LabelCodec&, const LabelCodec&) = default;

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::size_t> ids_;
};

inline SessionMatrix make_session_matrix(const SessionRecord& session, const FeatureManifest& manifest,
                                         const LabelCodec& codec) {
  const auto vectors = extract_features(session, manifest);
  SessionMatrix m;
  m.values = build_sequence(vectors, manifest.seq_len);
  m.length = std::min(vectors.size(), manifest.seq_len);
  m.label = codec.id(session.device_label);
  m.device_name = session.device_label;
  m.session_id = session.session_id;
  return m;
}

inline std::vector<SessionMatrix> build_dataset(const std::vector<SessionRecord>& sessions,
                                                const FeatureManifest& manifest, LabelCodec* codec_out = nullptr) {
  manifest.validate();
  std::vector<std::string> names;
  for (const auto& s : sessions) names.push_back(s.device_label);
  const LabelCodec codec = LabelCodec::from_names(std::move(names));
  std::vector<SessionMatrix> out;
  out.reserve(sessions.size());
  for (const auto& s : sessions) out.push_back(make_session_matrix(s, manifest, codec));
  if (codec_out) *codec_out = codec;
  return out;
}

// ---------------------------------------------------------------------------
// Normalization

enum class NormMode { MinMax01, None };

/// Per-feature min-max scaling fitted on real (non-padding) rows only.
/// Padding rows stay exactly zero.
class Normalizer {
 public:
  explicit Normalizer(NormMode mode = NormMode::MinMax01) : mode_(mode) {}

  static Normalizer fit(const std::vector<SessionMatrix>& train, NormMode mode = NormMode::MinMax01) {
    Normalizer n(mode);
    if (train.empty()) throw Error(Errc::EmptySession, "cannot fit a normalizer on zero sessions");
    const std::size_t F = train.front().values.cols();
    n.min_.assign(F, std::numeric_limits<double>::infinity());
    n.max_.assign(F, -std::numeric_limits<double>::infinity());
    for (const auto& m : train) {
      nn::require_shape(m.values, m.values.rows(), F, "normalizer fit");
      for (std::size_t t = 0; t < m.length; ++t) {
        for (std::size_t f = 0; f < F; ++f) {
          n.min_[f] = std::min(n.min_[f], m.values(t, f));
          n.max_[f] = std::max(n.max_[f], m.values(t, f));
        }
      }
    }
    for (std::size_t f = 0; f < F; ++f) {
      if (n.min_[f] > n.max_[f]) n.min_[f] = n.max_[f] = 0.0;  // no real rows at all
    }
    n.fitted_ = true;
    return n;
  }

  static Normalizer from_bounds(std::vector<double> min, std::vector<double> max, NormMode mode = NormMode::MinMax01) {
    if (min.size() != max.size()) throw Error(Errc::ShapeMismatch, "normalizer bounds differ in length");
    Normalizer n(mode);
    n.min_ = std::move(min);
    n.max_ = std::move(max);
    n.fitted_ = true;
    return n;
  }

  bool fitted() const noexcept { return fitted_ || mode_ == NormMode::None; }
  NormMode mode() const noexcept { return mode_; }
  const std::vector<double>& min() const noexcept { return min_; }
  const std::vector<double>& max() const noexcept { return max_; }

  double scale(std::size_t f, double x) const {
    const double lo = min_[f], hi = max_[f];
    if (!(hi > lo)) return 0.0;
    const double v = (x - lo) / (hi - lo);
    if (!std::isfinite(v)) return 0.0;
    return std::clamp(v, 0.0, 1.0);
  }

  SessionMatrix apply(const SessionMatrix& m) const {
    if (mode_ == NormMode::None) return m;
    if (!fitted_) throw Error(Errc::NotFitted, "normalizer applied before fit");
    nn::require_shape(m.values, m.values.rows(), min_.size(), "normalizer apply");
    SessionMatrix out = m;
    for (std::size_t t = 0; t < m.values.rows(); ++t) {
      for (std::size_t f = 0; f < min_.size(); ++f) {
        out.values(t, f) = t < m.length ? scale(f, m.values(t, f)) : 0.0;
      }
    }
    return out;
  }

  std::vector<SessionMatrix> apply(const std::vector<SessionMatrix>& data) const {
    std::vector<SessionMatrix> out;
    out.reserve(data.size());
    for (const auto& m : data) out.push_back(apply(m));
    return out;
  }

  friend bool operator==(const Normalizer&, const Normalizer&) = default;

 private:
  NormMode mode_;
  std::vector<double> min_, max_;
  bool fitted_ = false;
};

// ---------------------------------------------------------------------------
// Dataset CSV: header `device,session,label,t,f0..f{F-1}`, one row per step.

inline void write_dataset(std::ostream& out, const std::vector<SessionMatrix>& data, std::size_t feature_count) {
  out << "device,session,label,t";
  for (std::size_t f = 0; f < feature_count; ++f) out << ",f" << f;
  out << '\n';
  for (const auto& m : data) {
    nn::require_shape(m.values, m.values.rows(), feature_count, "save_dataset");
    const std::string prefix = csv::quote(m.device_name) + ',' + csv::quote(m.session_id) + ',' + std::to_string(m.label);
    for (std::size_t t = 0; t < m.values.rows(); ++t) {
      out << prefix << ',' << t;
      for (std::size_t f = 0; f < feature_count; ++f) out << ',' << csv::format_double(m.values(t, f));
      out << '\n';
    }
  }
}

inline void save_dataset(const std::filesystem::path& path, const std::vector<SessionMatrix>& data,
                         std::size_t feature_count) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  write_dataset(out, data, feature_count);
}

namespace detail {

/// Real-row count for a matrix read back from CSV: everything up to the last
/// non-zero row.
inline std::size_t infer_length(const Tensor2& m) {
  for (std::size_t t = m.rows(); t-- > 0;) {
    for (double v : m.row(t)) {
      if (v != 0.0) return t + 1;
    }
  }
  return 0;
}

}  // namespace detail

struct DatasetShape {
  std::size_t seq_len = 0;
  std::size_t feature_count = 0;
};

/// Reads a dataset. When `expect` is given the file must match it exactly.
inline std::vector<SessionMatrix> read_dataset(std::istream& in, std::optional<DatasetShape> expect = std::nullopt,
                                               DatasetShape* shape_out = nullptr) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::SchemaMismatch, "dataset is empty (no header)");
  const auto header = csv::split_line(line);
  if (header.size() < 5 || header[0] != "device" || header[1] != "session" || header[2] != "label" ||
      header[3] != "t") {
    throw Error(Errc::SchemaMismatch, "dataset header must start with device,session,label,t,f0");
  }
  const std::size_t F = header.size() - 4;
  for (std::size_t f = 0; f < F; ++f) {
    if (header[4 + f] != "f" + std::to_string(f)) {
      throw Error(Errc::SchemaMismatch, "dataset header column " + std::to_string(4 + f) + " is '" + header[4 + f] +
                                            "', expected f" + std::to_string(f));
    }
  }
  if (expect && expect->feature_count != F) {
    throw Error(Errc::SchemaMismatch, "dataset has " + std::to_string(F) + " features, manifest expects " +
                                          std::to_string(expect->feature_count));
  }

  struct Pending {
    std::string device, session;
    std::size_t label = 0;
    std::vector<double> values;
    std::size_t rows = 0;
  };
  std::vector<SessionMatrix> out;
  std::optional<Pending> cur;
  std::size_t seq_len = expect ? expect->seq_len : 0;

  auto flush = [&]() {
    if (!cur) return;
    if (seq_len == 0) seq_len = cur->rows;
    if (cur->rows != seq_len) {
      throw Error(Errc::SchemaMismatch, "session '" + cur->device + "/" + cur->session + "' has " +
                                            std::to_string(cur->rows) + " steps, expected " + std::to_string(seq_len));
    }
    SessionMatrix m;
    m.values = Tensor2(cur->rows, F, std::move(cur->values));
    m.label = cur->label;
    m.device_name = std::move(cur->device);
    m.session_id = std::move(cur->session);
    m.length = detail::infer_length(m.values);
    out.push_back(std::move(m));
    cur.reset();
  };

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = csv::split_line(line);
    if (cells.size() != header.size()) {
      throw Error(Errc::SchemaMismatch, "dataset line " + std::to_string(lineno) + " has " +
                                            std::to_string(cells.size()) + " columns, expected " +
                                            std::to_string(header.size()));
    }
    const auto label = csv::parse_int(cells[2]);
    const auto t = csv::parse_int(cells[3]);
    if (!label || *label < 0 || !t || *t < 0) {
      throw Error(Errc::SchemaMismatch, "dataset line " + std::to_string(lineno) + ": bad label or step index");
    }
    if (*t == 0) {
      flush();
      cur = Pending{cells[0], cells[1], static_cast<std::size_t>(*label), {}, 0};
      cur->values.reserve(F * std::max<std::size_t>(seq_len, 1));
    } else if (!cur || cells[0] != cur->device || cells[1] != cur->session ||
               static_cast<std::size_t>(*t) != cur->rows) {
      throw Error(Errc::SchemaMismatch, "dataset line " + std::to_string(lineno) + ": steps out of sequence");
    }
    for (std::size_t f = 0; f < F; ++f) {
      const auto v = csv::parse_double(cells[4 + f]);
      if (!v || !std::isfinite(*v)) {
        throw Error(Errc::SchemaMismatch, "dataset line " + std::to_string(lineno) + ": bad value '" + cells[4 + f] + "'");
      }
      cur->values.push_back(*v);
    }
    ++cur->rows;
  }
  flush();
  if (shape_out) *shape_out = {seq_len, F};
  return out;
}

inline std::vector<SessionMatrix> load_dataset(const std::filesystem::path& path,
                                               std::optional<DatasetShape> expect = std::nullopt,
                                               DatasetShape* shape_out = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingFile, path.string());
  return read_dataset(in, expect, shape_out);
}

inline DatasetShape shape_of(const FeatureManifest& m) { return {m.seq_len, m.feature_count()}; }

}  // namespace seqdevid::features
