#include "ragc/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "ragc/binary_io.hpp"
#include "ragc/error.hpp"

namespace ragc {

namespace le {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace le

namespace {
constexpr std::string_view kMagic = "RAGCCKPT";

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  void need(std::size_t n, const char* what) const {
    if (offset_ + n > bytes_.size()) {
      throw FormatError(std::string("corrupt checkpoint: truncated ") + what +
                        " at byte offset " + std::to_string(offset_));
    }
  }
  template <typename U>
  U uint(const char* what) {
    need(sizeof(U), what);
    const U v = le::get_uint<U>(bytes_, offset_);
    offset_ += sizeof(U);
    return v;
  }
  double f64() {
    need(8, "value");
    const double v = le::get_f64(bytes_, offset_);
    offset_ += 8;
    return v;
  }
  std::string str(std::size_t n) {
    need(n, "name");
    std::string s(bytes_.substr(offset_, n));
    offset_ += n;
    return s;
  }
  std::size_t offset() const { return offset_; }
  std::size_t size() const { return bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t offset_ = 0;
};
}  // namespace

std::string encode_checkpoint(const std::vector<NamedArray>& entries) {
  std::string out(kMagic);
  le::put_uint<std::uint32_t>(out, kCheckpointVersion);
  le::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    if (shape_numel(e.shape) != e.values.size()) {
      throw DimensionError("checkpoint entry '" + e.name + "' has shape " +
                           shape_to_string(e.shape) + " but " +
                           std::to_string(e.values.size()) + " values");
    }
    le::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
    out += e.name;
    le::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(e.shape.size()));
    for (auto extent : e.shape) le::put_uint<std::uint64_t>(out, extent);
    for (double v : e.values) le::put_f64(out, v);
  }
  return out;
}

std::vector<NamedArray> decode_checkpoint(const std::string& bytes) {
  if (bytes.compare(0, kMagic.size(), kMagic) != 0) {
    throw FormatError("unsupported format: missing checkpoint magic");
  }
  Reader r(std::string_view(bytes).substr(kMagic.size()));
  const auto version = r.uint<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = r.uint<std::uint32_t>("entry count");
  std::vector<NamedArray> entries;
  entries.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedArray e;
    e.name = r.str(r.uint<std::uint32_t>("name length"));
    const auto rank = r.uint<std::uint32_t>("rank");
    for (std::uint32_t k = 0; k < rank; ++k) {
      e.shape.push_back(static_cast<std::size_t>(r.uint<std::uint64_t>("extent")));
    }
    const std::size_t n = shape_numel(e.shape);
    r.need(n * 8, "values");
    e.values.resize(n);
    for (auto& v : e.values) v = r.f64();
    entries.push_back(std::move(e));
  }
  if (r.offset() != r.size()) {
    throw FormatError("corrupt checkpoint: " + std::to_string(r.size() - r.offset()) +
                      " trailing bytes");
  }
  return entries;
}

void save_checkpoint(const std::string& path, const std::vector<NamedArray>& entries) {
  le::write_file(path, encode_checkpoint(entries));
}

std::vector<NamedArray> load_checkpoint(const std::string& path) {
  return decode_checkpoint(le::read_file(path));
}

}  // namespace ragc
