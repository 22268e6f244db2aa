#pragma once

// Test-only data generators.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "seqdevid/features.hpp"
#include "seqdevid/rng.hpp"
#include "support/frames.hpp"

namespace seqdevid::testing {

/// Each class gets its own mean vector (constant over time); samples add
/// Gaussian noise. Every row is a real step (no padding).
inline std::vector<features::SessionMatrix> mean_shift_dataset(std::size_t classes, std::size_t per_class,
                                                               std::size_t seq_len, std::size_t feature_count,
                                                               std::uint64_t seed, double shift = 1.0,
                                                               double noise = 0.3) {
  Rng rng(seed);
  std::vector<std::vector<double>> means(classes, std::vector<double>(feature_count));
  for (auto& m : means) {
    for (double& v : m) v = shift * rng.normal();
  }
  std::vector<features::SessionMatrix> out;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t s = 0; s < per_class; ++s) {
      features::SessionMatrix m;
      m.values = nn::Tensor2(seq_len, feature_count);
      for (std::size_t t = 0; t < seq_len; ++t) {
        for (std::size_t f = 0; f < feature_count; ++f) m.values(t, f) = means[c][f] + noise * rng.normal();
      }
      m.label = c;
      m.device_name = "dev" + std::string(c < 10 ? "0" : "") + std::to_string(c);
      m.session_id = "s" + std::to_string(s);
      m.length = seq_len;
      out.push_back(std::move(m));
    }
  }
  return out;
}

/// Two classes decided by the sign of feature 0 at every step.
inline std::vector<features::SessionMatrix> sign_dataset(std::size_t per_class, std::size_t seq_len,
                                                         std::size_t feature_count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<features::SessionMatrix> out;
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t s = 0; s < per_class; ++s) {
      features::SessionMatrix m;
      m.values = nn::Tensor2(seq_len, feature_count);
      for (std::size_t t = 0; t < seq_len; ++t) {
        for (std::size_t f = 0; f < feature_count; ++f) m.values(t, f) = rng.uniform(-1.0, 1.0);
        const double mag = rng.uniform(0.2, 1.0);
        m.values(t, 0) = c == 0 ? -mag : mag;
      }
      m.label = c;
      m.device_name = c == 0 ? "neg" : "pos";
      m.session_id = "s" + std::to_string(s);
      m.length = seq_len;
      out.push_back(std::move(m));
    }
  }
  return out;
}

struct CaptureCorpus {
  std::filesystem::path root;
  std::filesystem::path manifest;
  std::vector<std::size_t> packet_counts;  // per manifest row
};

/// Writes a devices x sessions capture corpus with a session manifest.
/// Packet counts cycle through 11, 12, 13 and 30 so both padding and
/// truncation occur; each device has its own port/size/TTL signature.
inline CaptureCorpus write_capture_corpus(const std::filesystem::path& root, std::size_t devices,
                                          std::size_t sessions, std::uint64_t seed) {
  static constexpr std::size_t kCounts[] = {11, 12, 13, 30};
  Rng rng(seed);
  CaptureCorpus c{root, root / "sessions.csv", {}};
  std::filesystem::create_directories(root / "captures");
  std::ofstream man(c.manifest);
  man << "file,device,session,device_mac\n";
  for (std::size_t d = 0; d < devices; ++d) {
    const std::string dev = "device" + std::string(d < 10 ? "0" : "") + std::to_string(d);
    const MacAddress mac{0x02, 0x00, 0x00, 0x00, 0x01, static_cast<std::uint8_t>(d)};
    const MacAddress gw{0x02, 0x00, 0x00, 0x00, 0x00, 0xFE};
    for (std::size_t s = 0; s < sessions; ++s) {
      const std::size_t n = kCounts[(d + s) % 4];
      std::vector<capture::CaptureRecord> recs;
      double ts = 1000.0 + static_cast<double>(s);
      for (std::size_t i = 0; i < n; ++i) {
        FrameSpec fs;
        const bool outbound = (i + d) % 3 != 0;
        fs.src = outbound ? mac : gw;
        fs.dst = outbound ? gw : mac;
        if (i == 0 && d % 2 == 0) fs.dst = MacAddress{0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF};
        if (d % 5 == 4 && i % 4 == 1) {
          fs.eth_type = capture::kEthArp;
        } else {
          fs.proto = (d + i) % 2 ? capture::kProtoTcp : capture::kProtoUdp;
          fs.ttl = static_cast<std::uint8_t>(32 + 8 * (d % 4));
          fs.src_port = static_cast<std::uint16_t>(outbound ? 40000 + d * 100 : 80 + d);
          fs.dst_port = static_cast<std::uint16_t>(outbound ? 80 + d : 40000 + d * 100);
          fs.tcp_window = static_cast<std::uint16_t>(1024 * (1 + d % 8));
          fs.payload = 10 * d + 3 * i + rng.below(4);
        }
        ts += 0.001 * static_cast<double>(1 + d % 7) + 0.0001 * static_cast<double>(rng.below(10));
        recs.push_back({ts, 0, build_frame(fs)});
      }
      const std::string file = "captures/" + dev + "_" + std::to_string(s) + ".pcap";
      write_bytes(root / file, capture::encode_capture(recs));
      char macbuf[32];
      std::snprintf(macbuf, sizeof(macbuf), "%02x:%02x:%02x:%02x:%02x:%02x", mac[0], mac[1], mac[2], mac[3], mac[4],
                    mac[5]);
      man << file << ',' << dev << ',' << s << ',' << macbuf << '\n';
      c.packet_counts.push_back(n);
    }
  }
  return c;
}

}  // namespace seqdevid::testing
