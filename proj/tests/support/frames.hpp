#pragma once

// Test-only builders for raw Ethernet frames and capture fixtures.

#include <unistd.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <vector>

#include "seqdevid/capture.hpp"

namespace seqdevid::testing {

using capture::Bytes;
using capture::MacAddress;

inline void put16be(Bytes& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v >> 8));
  b.push_back(static_cast<std::uint8_t>(v));
}

inline void put32be(Bytes& b, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

struct FrameSpec {
  MacAddress dst{0x02, 0, 0, 0, 0, 0x01};
  MacAddress src{0x02, 0, 0, 0, 0, 0x02};
  std::uint16_t eth_type = capture::kEthIpv4;
  std::uint8_t ttl = 64;
  std::uint8_t proto = capture::kProtoUdp;
  std::uint8_t ip_options_words = 0;  // extra 32-bit words beyond 20 bytes
  std::uint32_t src_ip = 0x0A000001;
  std::uint32_t dst_ip = 0x0A000002;
  std::uint16_t src_port = 1234;
  std::uint16_t dst_port = 53;
  std::uint8_t tcp_flags = 0x18;
  std::uint16_t tcp_window = 8192;
  std::uint8_t tcp_options_words = 0;
  std::size_t payload = 0;
  std::size_t trailer = 0;  // link-layer padding after the IP packet
};

inline Bytes build_frame(const FrameSpec& s) {
  Bytes f;
  f.insert(f.end(), s.dst.begin(), s.dst.end());
  f.insert(f.end(), s.src.begin(), s.src.end());
  put16be(f, s.eth_type);
  if (s.eth_type == capture::kEthArp) {
    for (std::size_t i = 0; i < 28; ++i) f.push_back(static_cast<std::uint8_t>(i));
    return f;
  }
  if (s.eth_type != capture::kEthIpv4) {
    for (std::size_t i = 0; i < s.payload; ++i) f.push_back(0xAB);
    return f;
  }
  const std::size_t ihl = 20 + 4u * s.ip_options_words;
  std::size_t l4 = 0;
  if (s.proto == capture::kProtoTcp) l4 = 20 + 4u * s.tcp_options_words;
  else if (s.proto == capture::kProtoUdp) l4 = 8;
  const std::size_t total = ihl + l4 + s.payload;

  f.push_back(static_cast<std::uint8_t>(0x40 | (ihl / 4)));
  f.push_back(0);
  put16be(f, static_cast<std::uint16_t>(total));
  put16be(f, 0x1234);
  put16be(f, 0x4000);  // DF, offset 0
  f.push_back(s.ttl);
  f.push_back(s.proto);
  put16be(f, 0);
  put32be(f, s.src_ip);
  put32be(f, s.dst_ip);
  for (std::size_t i = 20; i < ihl; ++i) f.push_back(1);  // NOP options

  if (s.proto == capture::kProtoTcp) {
    put16be(f, s.src_port);
    put16be(f, s.dst_port);
    put32be(f, 1000);
    put32be(f, 2000);
    f.push_back(static_cast<std::uint8_t>((l4 / 4) << 4));
    f.push_back(s.tcp_flags);
    put16be(f, s.tcp_window);
    put16be(f, 0);
    put16be(f, 0);
    for (std::size_t i = 20; i < l4; ++i) f.push_back(1);
  } else if (s.proto == capture::kProtoUdp) {
    put16be(f, s.src_port);
    put16be(f, s.dst_port);
    put16be(f, static_cast<std::uint16_t>(8 + s.payload));
    put16be(f, 0);
  }
  for (std::size_t i = 0; i < s.payload; ++i) f.push_back(static_cast<std::uint8_t>(i * 7));
  for (std::size_t i = 0; i < s.trailer; ++i) f.push_back(0);
  return f;
}

inline void write_bytes(const std::filesystem::path& p, const Bytes& b) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("seqdevid_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace seqdevid::testing
