#include "asrk/cli/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "asrk/errors.hpp"

namespace asrk::cli {

namespace {

constexpr std::size_t kMagicSize = sizeof(kCheckpointMagic) - 1;
constexpr std::uint64_t kMaxLength = std::uint64_t{1} << 40;

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

void put_string(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

[[noreturn]] void truncated(const char* what) {
  throw Error(ErrorKind::parse, std::string("checkpoint truncated while reading ") + what);
}

std::uint64_t get_u64(std::istream& in, const char* what) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) truncated(what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes[i]} << (8 * i);
  return v;
}

std::string get_string(std::istream& in, const char* what) {
  const std::uint64_t n = get_u64(in, what);
  if (n > kMaxLength) throw Error(ErrorKind::parse, std::string("implausible length for ") + what);
  std::string s(n, '\0');
  if (n && !in.read(s.data(), static_cast<std::streamsize>(n))) truncated(what);
  return s;
}

std::string shape_text(const tensor::Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) out += (i ? "," : "") + std::to_string(shape[i]);
  return out + "]";
}

}  // namespace

void write_checkpoint(std::ostream& out, const ExperimentConfig& config, const rerankers::RerankerModel& model) {
  const auto& base = rerankers::base_of(model);
  out.write(kCheckpointMagic, kMagicSize);
  put_string(out, config.serialize());
  put_string(out, base.vocab().serialize());
  put_u64(out, base.params().size());
  for (const auto& entry : base.params()) {
    put_string(out, entry.name);
    const auto& shape = entry.tensor.shape();
    put_u64(out, shape.size());
    for (std::size_t d : shape) put_u64(out, d);
    for (double v : entry.tensor.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw Error(ErrorKind::io, "failed writing checkpoint");
}

void save_checkpoint(const std::filesystem::path& path, const ExperimentConfig& config,
                     const rerankers::RerankerModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write checkpoint '" + path.string() + "'");
  write_checkpoint(out, config, model);
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[kMagicSize];
  if (!in.read(magic, kMagicSize) || std::memcmp(magic, kCheckpointMagic, kMagicSize) != 0) {
    throw Error(ErrorKind::parse, "not an ASRK1 checkpoint");
  }
  ExperimentConfig config = parse_config_text(get_string(in, "config"));
  std::istringstream vocab_text(get_string(in, "vocabulary"));
  auto vocab = std::make_shared<const encoder::Vocabulary>(encoder::Vocabulary::read(vocab_text));
  rerankers::RerankerModel model = rerankers::make_model(config.model_config(), vocab);
  auto& params = rerankers::base_of(model).params();

  const std::uint64_t count = get_u64(in, "tensor count");
  if (count != params.size()) {
    throw Error(ErrorKind::parse, "checkpoint holds " + std::to_string(count) + " tensors, model expects " +
                                      std::to_string(params.size()));
  }
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string name = get_string(in, "tensor name");
    if (!params.contains(name)) throw Error(ErrorKind::parse, "unexpected tensor '" + name + "' in checkpoint");
    auto& tensor = params.at(name);
    const std::uint64_t rank = get_u64(in, "tensor rank");
    if (rank > 8) throw Error(ErrorKind::parse, "implausible rank for '" + name + "'");
    tensor::Shape shape(rank);
    for (auto& d : shape) d = get_u64(in, "tensor shape");
    if (shape != tensor.shape()) {
      throw Error(ErrorKind::parse, "tensor '" + name + "' has shape " + shape_text(shape) + ", model expects " +
                                        shape_text(tensor.shape()));
    }
    for (double& v : tensor.mutable_data()) v = std::bit_cast<double>(get_u64(in, "tensor values"));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw Error(ErrorKind::parse, "trailing bytes after checkpoint");
  return {std::move(config), std::move(vocab), std::move(model)};
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open checkpoint '" + path.string() + "'");
  return read_checkpoint(in);
}

void copy_parameters(const tensor::ParameterSet& from, tensor::ParameterSet& to) {
  if (from.size() != to.size()) {
    throw Error(ErrorKind::incompatibility, "parameter sets differ in size (" + std::to_string(from.size()) +
                                                " vs " + std::to_string(to.size()) + ")");
  }
  for (const auto& entry : from) {
    if (!to.contains(entry.name)) {
      throw Error(ErrorKind::incompatibility, "parameter '" + entry.name + "' missing from target model");
    }
    auto& dst = to.at(entry.name);
    if (dst.shape() != entry.tensor.shape()) {
      throw Error(ErrorKind::incompatibility, "parameter '" + entry.name + "' has shape " +
                                                  shape_text(entry.tensor.shape()) + " vs " + shape_text(dst.shape()));
    }
    const auto src = entry.tensor.data();
    auto out = dst.mutable_data();
    std::copy(src.begin(), src.end(), out.begin());
  }
}

}  // namespace asrk::cli
