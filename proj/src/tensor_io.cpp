#include "uosam/tensor_io.hpp"

#include <fstream>
#include <iterator>

#include "uosam/protocol.hpp"

namespace uosam::tensor_io {

namespace {

constexpr std::uint8_t kMagic[4] = {'U', 'O', 'F', 'T'};

std::size_t element_count(const std::vector<std::uint32_t>& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

}  // namespace

wire::Bytes encode(const Tensor& tensor) {
  require(element_count(tensor.dims) == tensor.data.size(), ErrorCode::InvalidArgument,
          "tensor data length != product of dims");
  wire::Bytes out(std::begin(kMagic), std::end(kMagic));
  wire::put_u32_le(out, kVersion);
  wire::put_u32_le(out, static_cast<std::uint32_t>(tensor.dims.size()));
  for (auto d : tensor.dims) wire::put_u32_le(out, d);
  const auto body = wire::encode_f32_le(tensor.data);
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

Tensor decode(std::span<const std::uint8_t> bytes) {
  require(bytes.size() >= 12 && std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()),
          ErrorCode::InvalidArgument, "not a UOFT tensor");
  require(wire::get_u32_le(bytes.subspan(4, 4)) == kVersion, ErrorCode::InvalidArgument,
          "unsupported UOFT version");
  const std::uint32_t ndim = wire::get_u32_le(bytes.subspan(8, 4));
  require(ndim <= 16 && bytes.size() >= 12 + std::size_t{ndim} * 4, ErrorCode::Truncated, "UOFT header truncated");
  Tensor tensor;
  for (std::uint32_t k = 0; k < ndim; ++k) tensor.dims.push_back(wire::get_u32_le(bytes.subspan(12 + k * 4, 4)));
  const std::size_t offset = 12 + std::size_t{ndim} * 4;
  const std::size_t n = element_count(tensor.dims);
  require(bytes.size() - offset == n * 4, ErrorCode::Truncated, "UOFT body length != product of dims");
  tensor.data = wire::decode_f32_le(bytes.subspan(offset));
  return tensor;
}

void save(const std::filesystem::path& path, const Tensor& tensor) {
  const auto bytes = encode(tensor);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

Tensor load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  const wire::Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode(bytes);
}

Tensor from_features(const FeatureMap& features) {
  return {{static_cast<std::uint32_t>(features.rows()), static_cast<std::uint32_t>(features.cols()),
           static_cast<std::uint32_t>(features.channels())},
          std::vector<float>(features.data().begin(), features.data().end())};
}

FeatureMap to_features(const Tensor& tensor, double stride, Extent image) {
  require(tensor.dims.size() == 3, ErrorCode::InvalidArgument, "feature tensor must be (H, W, C)");
  return FeatureMap(static_cast<int>(tensor.dims[0]), static_cast<int>(tensor.dims[1]),
                    static_cast<int>(tensor.dims[2]), tensor.data, stride, image);
}

}  // namespace uosam::tensor_io
