#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "seqdevid/csv.hpp"
#include "seqdevid/error.hpp"

namespace seqdevid::capture {

using Bytes = std::vector<std::uint8_t>;
using MacAddress = std::array<std::uint8_t, 6>;

inline constexpr std::uint32_t kMagic = 0xA1B2C3D4;
inline constexpr std::uint32_t kMagicSwapped = 0xD4C3B2A1;
inline constexpr std::size_t kGlobalHeaderLen = 24;
inline constexpr std::size_t kRecordHeaderLen = 16;
inline constexpr std::uint32_t kLinkEthernet = 1;

inline constexpr std::uint16_t kEthIpv4 = 0x0800;
inline constexpr std::uint16_t kEthArp = 0x0806;
inline constexpr std::uint16_t kEthVlan = 0x8100;
inline constexpr std::uint16_t kEthIpv6 = 0x86DD;

inline constexpr std::uint8_t kProtoIcmp = 1;
inline constexpr std::uint8_t kProtoTcp = 6;
inline constexpr std::uint8_t kProtoUdp = 17;
inline constexpr std::uint8_t kProtoIcmpv6 = 58;

enum class IpVersion { None, V4, V6 };
enum class Direction { Unknown, FromDevice, ToDevice };

/// Decoded headers of one captured frame. Layers that could not be decoded
/// leave their fields empty.
struct RawPacket {
  double timestamp = 0.0;
  std::uint32_t captured_len = 0;
  std::uint32_t wire_len = 0;
  std::uint32_t link_type = kLinkEthernet;

  std::optional<MacAddress> eth_src;
  std::optional<MacAddress> eth_dst;
  std::optional<std::uint16_t> eth_type;

  IpVersion ip_version = IpVersion::None;
  std::optional<std::uint16_t> ip_header_len;
  std::optional<std::uint8_t> ttl;  // hop limit for IPv6
  std::optional<std::uint8_t> ip_proto;

  std::optional<std::uint16_t> src_port;
  std::optional<std::uint16_t> dst_port;
  std::optional<std::uint8_t> tcp_flags;
  std::optional<std::uint16_t> tcp_window;

  std::uint32_t payload_len = 0;
  bool is_broadcast = false;
  Direction direction = Direction::Unknown;

  friend bool operator==(const RawPacket&, const RawPacket&) = default;
};

struct CaptureRecord {
  double timestamp = 0.0;
  std::uint32_t wire_len = 0;
  Bytes data;
};

struct Capture {
  std::uint32_t link_type = kLinkEthernet;
  bool swapped = false;
  std::vector<CaptureRecord> records;
  std::size_t dropped_truncated = 0;
};

namespace detail {

inline std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t off, bool swapped) {
  const std::uint32_t le = std::uint32_t(b[off]) | std::uint32_t(b[off + 1]) << 8 |
                           std::uint32_t(b[off + 2]) << 16 | std::uint32_t(b[off + 3]) << 24;
  const std::uint32_t be = std::uint32_t(b[off + 3]) | std::uint32_t(b[off + 2]) << 8 |
                           std::uint32_t(b[off + 1]) << 16 | std::uint32_t(b[off]) << 24;
  return swapped ? be : le;
}

inline std::uint16_t be16(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] << 8 | b[off + 1]);
}

}  // namespace detail

/// Splits a classic capture file into records. Byte order follows the magic:
/// 0xA1B2C3D4 read little-endian means a little-endian file, read as
/// 0xD4C3B2A1 means the writer used big-endian.
inline Capture parse_capture(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kGlobalHeaderLen) {
    throw Error(Errc::TruncatedHeader, "capture shorter than 24-byte global header (" +
                                           std::to_string(bytes.size()) + " bytes)");
  }
  const std::uint32_t magic = detail::read_u32(bytes, 0, false);
  Capture cap;
  if (magic == kMagic) {
    cap.swapped = false;
  } else if (magic == kMagicSwapped) {
    cap.swapped = true;
  } else {
    std::ostringstream os;
    os << "unrecognized capture magic 0x" << std::hex << magic;
    throw Error(Errc::BadMagic, os.str());
  }
  cap.link_type = detail::read_u32(bytes, 20, cap.swapped);

  std::size_t off = kGlobalHeaderLen;
  while (off < bytes.size()) {
    if (bytes.size() - off < kRecordHeaderLen) {
      ++cap.dropped_truncated;
      break;
    }
    const std::uint32_t ts_sec = detail::read_u32(bytes, off, cap.swapped);
    const std::uint32_t ts_usec = detail::read_u32(bytes, off + 4, cap.swapped);
    const std::uint32_t incl = detail::read_u32(bytes, off + 8, cap.swapped);
    const std::uint32_t orig = detail::read_u32(bytes, off + 12, cap.swapped);
    off += kRecordHeaderLen;
    if (bytes.size() - off < incl) {
      ++cap.dropped_truncated;
      break;
    }
    CaptureRecord rec;
    rec.timestamp = static_cast<double>(ts_sec) + static_cast<double>(ts_usec) * 1e-6;
    rec.wire_len = std::max(orig, incl);
    rec.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(off),
                    bytes.begin() + static_cast<std::ptrdiff_t>(off + incl));
    cap.records.push_back(std::move(rec));
    off += incl;
  }
  return cap;
}

/// Writes a little-endian classic capture (microsecond timestamps).
inline Bytes encode_capture(const std::vector<CaptureRecord>& records, std::uint32_t link_type = kLinkEthernet,
                            std::uint32_t snaplen = 65535) {
  Bytes out;
  auto put32 = [&out](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  auto put16 = [&out](std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
  };
  put32(kMagic);
  put16(2);
  put16(4);
  put32(0);
  put32(0);
  put32(snaplen);
  put32(link_type);
  for (const auto& r : records) {
    const double whole = std::floor(r.timestamp);
    auto sec = static_cast<std::uint32_t>(whole);
    auto usec = static_cast<std::uint32_t>(std::llround((r.timestamp - whole) * 1e6));
    if (usec >= 1000000) {
      ++sec;
      usec -= 1000000;
    }
    put32(sec);
    put32(usec);
    put32(static_cast<std::uint32_t>(r.data.size()));
    put32(std::max<std::uint32_t>(r.wire_len, static_cast<std::uint32_t>(r.data.size())));
    out.insert(out.end(), r.data.begin(), r.data.end());
  }
  return out;
}

/// Decodes Ethernet / IPv4 / IPv6 / TCP / UDP headers. Never throws on
/// malformed input; whatever cannot be decoded stays absent.
inline RawPacket decode_frame(std::span<const std::uint8_t> frame, std::uint32_t link_type, double ts,
                              std::uint32_t wire_len = 0) {
  RawPacket p;
  p.timestamp = ts;
  p.link_type = link_type;
  p.captured_len = static_cast<std::uint32_t>(frame.size());
  p.wire_len = std::max(wire_len, p.captured_len);
  p.payload_len = p.captured_len;
  if (link_type != kLinkEthernet || frame.size() < 14) return p;

  MacAddress dst{}, src{};
  std::copy_n(frame.begin(), 6, dst.begin());
  std::copy_n(frame.begin() + 6, 6, src.begin());
  p.eth_dst = dst;
  p.eth_src = src;
  p.is_broadcast = std::all_of(dst.begin(), dst.end(), [](std::uint8_t b) { return b == 0xFF; });

  std::size_t off = 14;
  std::uint16_t type = detail::be16(frame, 12);
  if (type == kEthVlan && frame.size() >= 18) {
    type = detail::be16(frame, 16);
    off = 18;
  }
  p.eth_type = type;
  // Bytes belonging to this packet; shrinks to the IP total length so that
  // link-layer trailer padding is not counted as payload.
  std::size_t end = frame.size();

  std::optional<std::uint8_t> proto;
  if (type == kEthIpv4 && frame.size() - off >= 20 && (frame[off] >> 4) == 4) {
    const std::size_t ihl = static_cast<std::size_t>(frame[off] & 0x0F) * 4;
    if (ihl >= 20 && frame.size() - off >= ihl) {
      p.ip_version = IpVersion::V4;
      p.ip_header_len = static_cast<std::uint16_t>(ihl);
      p.ttl = frame[off + 8];
      p.ip_proto = frame[off + 9];
      const std::size_t total = detail::be16(frame, off + 2);
      if (total >= ihl && off + total < end) end = off + total;
      if (frame[off + 16] == 0xFF && frame[off + 17] == 0xFF && frame[off + 18] == 0xFF && frame[off + 19] == 0xFF) {
        p.is_broadcast = true;
      }
      const bool first_fragment = (detail::be16(frame, off + 6) & 0x1FFF) == 0;
      off += ihl;
      if (first_fragment) proto = p.ip_proto;
    }
  } else if (type == kEthIpv6 && frame.size() - off >= 40 && (frame[off] >> 4) == 6) {
    p.ip_version = IpVersion::V6;
    p.ip_header_len = 40;
    p.ip_proto = frame[off + 6];
    p.ttl = frame[off + 7];
    const std::size_t plen = detail::be16(frame, off + 4);
    if (off + 40 + plen < end) end = off + 40 + plen;
    off += 40;
    proto = p.ip_proto;
  }

  if (proto && off <= end) {
    const std::size_t avail = end - off;
    if (*proto == kProtoTcp && avail >= 20) {
      p.src_port = detail::be16(frame, off);
      p.dst_port = detail::be16(frame, off + 2);
      p.tcp_flags = frame[off + 13];
      p.tcp_window = detail::be16(frame, off + 14);
      const std::size_t doff = static_cast<std::size_t>(frame[off + 12] >> 4) * 4;
      off += std::clamp<std::size_t>(doff, 20, avail);
    } else if (*proto == kProtoUdp && avail >= 8) {
      p.src_port = detail::be16(frame, off);
      p.dst_port = detail::be16(frame, off + 2);
      off += 8;
    }
  }
  p.payload_len = static_cast<std::uint32_t>(end > off ? end - off : 0);
  return p;
}

struct SessionRecord {
  std::string device_label;
  std::string session_id;
  std::optional<MacAddress> device_mac;
  std::vector<RawPacket> packets;
};

inline std::optional<MacAddress> parse_mac(const std::string& text) {
  MacAddress mac{};
  std::size_t pos = 0;
  for (int i = 0; i < 6; ++i) {
    if (pos + 2 > text.size()) return std::nullopt;
    unsigned v = 0;
    for (int j = 0; j < 2; ++j) {
      const char c = text[pos + j];
      v <<= 4;
      if (c >= '0' && c <= '9') v |= unsigned(c - '0');
      else if (c >= 'a' && c <= 'f') v |= unsigned(c - 'a' + 10);
      else if (c >= 'A' && c <= 'F') v |= unsigned(c - 'A' + 10);
      else return std::nullopt;
    }
    mac[i] = static_cast<std::uint8_t>(v);
    pos += 2;
    if (i < 5) {
      if (pos >= text.size() || (text[pos] != ':' && text[pos] != '-')) return std::nullopt;
      ++pos;
    }
  }
  if (pos != text.size()) return std::nullopt;
  return mac;
}

inline Direction direction_of(const RawPacket& p, const std::optional<MacAddress>& device) {
  if (!device) return Direction::Unknown;
  if (p.eth_src && *p.eth_src == *device) return Direction::FromDevice;
  if (p.eth_dst && *p.eth_dst == *device) return Direction::ToDevice;
  return Direction::Unknown;
}

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::MissingFile, path.string());
  return Bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

/// Reads one capture file into a session with direction assigned and
/// timestamps clamped to be non-decreasing.
inline SessionRecord load_session(const std::filesystem::path& file, std::string device, std::string session,
                                  std::optional<MacAddress> device_mac) {
  if (!std::filesystem::is_regular_file(file)) throw Error(Errc::MissingFile, file.string());
  const Bytes bytes = read_file(file);
  Capture cap;
  try {
    cap = parse_capture(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), file.string() + ": " + e.what());
  }
  SessionRecord rec{std::move(device), std::move(session), device_mac, {}};
  rec.packets.reserve(cap.records.size());
  double last_ts = 0.0;
  for (const auto& r : cap.records) {
    RawPacket p = decode_frame(r.data, cap.link_type, r.timestamp, r.wire_len);
    if (!rec.packets.empty() && p.timestamp < last_ts) p.timestamp = last_ts;
    last_ts = p.timestamp;
    p.direction = direction_of(p, device_mac);
    rec.packets.push_back(std::move(p));
  }
  if (rec.packets.empty()) {
    throw Error(Errc::EmptySession, file.string() + " contains no packets");
  }
  return rec;
}

struct ManifestRow {
  std::string file;
  std::string device;
  std::string session;
  std::string device_mac;
};


/// Parses a session manifest: CSV with header `file,device,session[,device_mac]`.
inline std::vector<ManifestRow> read_session_manifest(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) return {};
  auto header = csv::split_line(line);
  for (auto& h : header) h = csv::trim(h);
  auto col = [&header](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  const auto c_file = col("file"), c_dev = col("device"), c_sess = col("session"), c_mac = col("device_mac");
  if (!c_file || !c_dev || !c_sess) {
    throw Error(Errc::SchemaMismatch, "session manifest header must contain file,device,session");
  }
  std::vector<ManifestRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    auto cells = csv::split_line(line);
    for (auto& c : cells) c = csv::trim(c);
    if (cells.size() < header.size()) cells.resize(header.size());
    ManifestRow row{cells[*c_file], cells[*c_dev], cells[*c_sess], c_mac ? cells[*c_mac] : std::string{}};
    if (row.device.empty()) {
      throw Error(Errc::SchemaMismatch, "session manifest line " + std::to_string(lineno) + ": empty device label");
    }
    if (row.file.empty()) {
      throw Error(Errc::SchemaMismatch, "session manifest line " + std::to_string(lineno) + ": empty file");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

/// One SessionRecord per manifest row, in manifest order. File paths are
/// resolved against `capture_root` unless absolute.
inline std::vector<SessionRecord> ingest_sessions(const std::vector<ManifestRow>& rows,
                                                  const std::filesystem::path& capture_root) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : rows) {
    if (!seen.emplace(r.device, r.session).second) {
      throw Error(Errc::DuplicateSession, "device '" + r.device + "' session '" + r.session + "' listed twice");
    }
  }
  std::vector<SessionRecord> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    std::optional<MacAddress> mac;
    if (!r.device_mac.empty()) {
      mac = parse_mac(r.device_mac);
      if (!mac) throw Error(Errc::SchemaMismatch, "bad device_mac '" + r.device_mac + "'");
    }
    const std::filesystem::path file = std::filesystem::path(r.file).is_absolute() ? std::filesystem::path(r.file)
                                                                                     : capture_root / r.file;
    out.push_back(load_session(file, r.device, r.session, mac));
  }
  return out;
}

inline std::vector<SessionRecord> ingest_sessions(const std::filesystem::path& manifest,
                                                  const std::filesystem::path& capture_root) {
  std::ifstream in(manifest);
  if (!in) throw Error(Errc::MissingFile, manifest.string());
  return ingest_sessions(read_session_manifest(in), capture_root);
}

}  // namespace seqdevid::capture
