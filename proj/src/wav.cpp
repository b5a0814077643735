#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "kinebeat/audio.h"
#include "kinebeat/error.h"

namespace kinebeat {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class LeReader {
 public:
  explicit LeReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool has(std::size_t n) const { return pos_ + n <= bytes_.size(); }
  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }

  std::uint16_t u16() {
    need(2);
    auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 4;
    return v;
  }
  std::string tag() {
    need(4);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), 4);
    pos_ += 4;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (!has(n)) throw InputError("truncated WAV chunk");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

struct Format {
  std::uint16_t tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

}  // namespace

AudioClip read_wav(std::span<const std::uint8_t> bytes) {
  LeReader in(bytes);
  if (!in.has(12)) throw InputError("not a RIFF/WAVE file");
  if (in.tag() != "RIFF") throw InputError("not a RIFF/WAVE file");
  in.u32();
  if (in.tag() != "WAVE") throw InputError("not a RIFF/WAVE file");

  Format fmt;
  bool have_fmt = false;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  while (in.has(8) && !(have_fmt && have_data)) {
    const std::string id = in.tag();
    const std::uint32_t size = in.u32();
    const std::size_t body = in.pos();
    if (!in.has(size)) throw InputError("truncated WAV chunk '" + id + "'");
    if (id == "fmt ") {
      if (size < 16) throw InputError("truncated WAV chunk 'fmt '");
      fmt.tag = in.u16();
      fmt.channels = in.u16();
      fmt.sample_rate = in.u32();
      in.u32();  // byte rate
      fmt.block_align = in.u16();
      fmt.bits = in.u16();
      if (fmt.tag == kFormatExtensible) {
        if (size < 40) throw InputError("truncated WAVE_FORMAT_EXTENSIBLE header");
        in.u16();  // cbSize
        in.u16();  // valid bits
        in.u32();  // channel mask
        fmt.tag = in.u16();  // first two bytes of the sub-format GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      data = bytes.subspan(body, size);
      have_data = true;
    }
    in.seek(body + size + (size & 1u));
  }
  if (!have_fmt) throw InputError("WAV file has no fmt chunk");
  if (!have_data) throw InputError("WAV file has no data chunk");

  const bool pcm16 = fmt.tag == kFormatPcm && fmt.bits == 16;
  const bool float32 = fmt.tag == kFormatFloat && fmt.bits == 32;
  if (!pcm16 && !float32) {
    throw InputError("unsupported WAV encoding (format " + std::to_string(fmt.tag) + ", " +
                     std::to_string(fmt.bits) + " bits)");
  }
  if (fmt.channels < 1 || fmt.channels > 2) {
    throw InputError("unsupported channel count " + std::to_string(fmt.channels));
  }
  if (fmt.sample_rate == 0) throw InputError("WAV sample rate is zero");
  const std::size_t sample_bytes = fmt.bits / 8;
  const std::size_t frame_bytes = sample_bytes * fmt.channels;
  if (data.size() % frame_bytes != 0) throw InputError("truncated WAV data chunk");

  AudioClip clip;
  clip.sample_rate = static_cast<int>(fmt.sample_rate);
  const std::size_t frames = data.size() / frame_bytes;
  clip.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < fmt.channels; ++c) {
      const std::uint8_t* p = data.data() + i * frame_bytes + c * sample_bytes;
      double v = 0.0;
      if (pcm16) {
        const auto s = static_cast<std::int16_t>(static_cast<std::uint16_t>(p[0] | (p[1] << 8)));
        v = static_cast<double>(s) / 32768.0;
      } else {
        std::uint32_t raw = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                            (static_cast<std::uint32_t>(p[2]) << 16) |
                            (static_cast<std::uint32_t>(p[3]) << 24);
        float f;
        std::memcpy(&f, &raw, sizeof f);
        if (!std::isfinite(f)) throw InputError("non-finite float sample in WAV data");
        v = std::clamp(static_cast<double>(f), -1.0, 1.0);
      }
      acc += v;
    }
    clip.samples[i] = acc / fmt.channels;
  }
  if (clip.samples.empty()) throw InputError("WAV file contains no samples");
  return clip;
}

AudioClip read_wav_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return read_wav(bytes);
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip, WavEncoding encoding) {
  const bool pcm = encoding == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint16_t block = bits / 8;
  const auto data_size = static_cast<std::uint32_t>(clip.samples.size() * block);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, pcm ? kFormatPcm : kFormatFloat);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * block);
  put_u16(out, block);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_size);
  for (double s : clip.samples) {
    if (pcm) {
      const double scaled = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
    } else {
      const auto f = static_cast<float>(s);
      std::uint32_t raw;
      std::memcpy(&raw, &f, sizeof raw);
      put_u32(out, raw);
    }
  }
  return out;
}

}  // namespace kinebeat
