#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "seqdevid/error.hpp"
#include "seqdevid/nn/tensor.hpp"
#include "seqdevid/rng.hpp"

namespace seqdevid::nn {

struct NamedTensor {
  std::string name;
  Tensor2 value;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

/// Ordered collection of named parameter tensors. Gradients use the same
/// type with identical names and shapes.
class ParameterSet {
 public:
  std::size_t add(std::string name, std::size_t rows, std::size_t cols) {
    tensors_.push_back({std::move(name), Tensor2(rows, cols)});
    return tensors_.size() - 1;
  }

  std::size_t count() const noexcept { return tensors_.size(); }

  /// Total number of scalar parameters.
  std::size_t scalar_count() const noexcept {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += t.value.size();
    return n;
  }

  Tensor2& operator[](std::size_t i) { return tensors_[i].value; }
  const Tensor2& operator[](std::size_t i) const { return tensors_[i].value; }
  const std::string& name(std::size_t i) const { return tensors_[i].name; }

  std::vector<NamedTensor>& tensors() noexcept { return tensors_; }
  const std::vector<NamedTensor>& tensors() const noexcept { return tensors_; }

  /// Zero-valued copy with the same layout.
  ParameterSet zeros_like() const {
    ParameterSet out;
    for (const auto& t : tensors_) out.add(t.name, t.value.rows(), t.value.cols());
    return out;
  }

  void set_zero() {
    for (auto& t : tensors_) t.value.fill(0.0);
  }

  void require_same_layout(const ParameterSet& other, const char* what) const {
    if (other.count() != count()) throw Error(Errc::ShapeMismatch, std::string(what) + ": tensor count differs");
    for (std::size_t i = 0; i < count(); ++i) {
      require_shape(other[i], tensors_[i].value.rows(), tensors_[i].value.cols(), what);
    }
  }

  /// this += scale * other
  void axpy(double scale, const ParameterSet& other) {
    require_same_layout(other, "axpy");
    for (std::size_t i = 0; i < count(); ++i) {
      auto& dst = tensors_[i].value.data();
      const auto& src = other[i].data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += scale * src[k];
    }
  }

  void scale(double s) {
    for (auto& t : tensors_) {
      for (double& v : t.value.data()) v *= s;
    }
  }

  bool all_finite() const {
    for (const auto& t : tensors_) {
      if (!t.value.all_finite()) return false;
    }
    return true;
  }

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

 private:
  std::vector<NamedTensor> tensors_;
};

/// Glorot-uniform fill: U(-a, a), a = sqrt(6 / (fan_in + fan_out)).
inline void glorot_uniform(Tensor2& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : t.data()) v = rng.uniform(-a, a);
}

// Parameter file layout (all integers little-endian):
//   "SQDVPARM" | u32 version | u32 tensor count
//   per tensor: u32 name length | name bytes | u64 rows | u64 cols | rows*cols IEEE-754 f64
inline constexpr char kParamMagic[8] = {'S', 'Q', 'D', 'V', 'P', 'A', 'R', 'M'};
inline constexpr std::uint32_t kParamVersion = 1;

namespace detail {

template <typename T>
void put_le(std::string& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.append(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw Error(Errc::SchemaMismatch, "parameter file truncated");
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  pos += sizeof(T);
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace detail

inline std::string serialize_parameters(const ParameterSet& params) {
  std::string out(kParamMagic, sizeof(kParamMagic));
  detail::put_le<std::uint32_t>(out, kParamVersion);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.count()));
  for (const auto& t : params.tensors()) {
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    detail::put_le<std::uint64_t>(out, t.value.rows());
    detail::put_le<std::uint64_t>(out, t.value.cols());
    for (double v : t.value.data()) detail::put_le<double>(out, v);
  }
  return out;
}

inline ParameterSet deserialize_parameters(const std::string& bytes) {
  if (bytes.size() < sizeof(kParamMagic) || std::memcmp(bytes.data(), kParamMagic, sizeof(kParamMagic)) != 0) {
    throw Error(Errc::SchemaMismatch, "not a parameter file");
  }
  std::size_t pos = sizeof(kParamMagic);
  const auto version = detail::get_le<std::uint32_t>(bytes, pos);
  if (version != kParamVersion) {
    throw Error(Errc::SchemaMismatch, "unsupported parameter file version " + std::to_string(version));
  }
  const auto n = detail::get_le<std::uint32_t>(bytes, pos);
  ParameterSet params;
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto len = detail::get_le<std::uint32_t>(bytes, pos);
    if (pos + len > bytes.size()) throw Error(Errc::SchemaMismatch, "parameter file truncated");
    std::string name = bytes.substr(pos, len);
    pos += len;
    const auto rows = detail::get_le<std::uint64_t>(bytes, pos);
    const auto cols = detail::get_le<std::uint64_t>(bytes, pos);
    const auto idx = params.add(std::move(name), rows, cols);
    for (double& v : params[idx].data()) v = detail::get_le<double>(bytes, pos);
  }
  if (pos != bytes.size()) throw Error(Errc::SchemaMismatch, "trailing bytes in parameter file");
  return params;
}

inline void save_parameters(const std::string& path, const ParameterSet& params) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::Io, "cannot write " + path);
  const auto bytes = serialize_parameters(params);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline ParameterSet load_parameters(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::MissingFile, path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_parameters(bytes);
}

}  // namespace seqdevid::nn
