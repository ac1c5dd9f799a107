#include "noiseflood/audio.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "noiseflood/errors.hpp"
#include "spectrum.hpp"

namespace nflood {
namespace {

constexpr std::uint16_t kFormatPcm = 1;

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
  }
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << v;
  return os.str();
}

}  // namespace

void AudioSignal::validate() const {
  if (sample_rate <= 0) throw ConfigError("sample rate must be positive");
  if (samples.empty()) throw ConfigError("audio signal has no samples");
}

FrequencyBand FrequencyBand::range(double low_hz, double high_hz) {
  if (!(low_hz >= 0.0) || !(high_hz > low_hz) || !std::isfinite(high_hz)) {
    throw ConfigError("invalid frequency band [" + format_number(low_hz) + ", " +
                      format_number(high_hz) + "]");
  }
  FrequencyBand band;
  band.limits_ = Limits{low_hz, high_hz};
  return band;
}

double FrequencyBand::low_hz() const {
  if (!limits_) throw ConfigError("unfiltered band has no limits");
  return limits_->low;
}

double FrequencyBand::high_hz() const {
  if (!limits_) throw ConfigError("unfiltered band has no limits");
  return limits_->high;
}

std::string FrequencyBand::name() const {
  if (!limits_) return "unfiltered";
  return format_number(limits_->low) + "-" + format_number(limits_->high);
}

FrequencyBand FrequencyBand::parse(const std::string& text) {
  if (text == "unfiltered") return unfiltered();
  const auto dash = text.find('-', 1);
  if (dash == std::string::npos) throw ConfigError("bad band '" + text + "'");
  try {
    std::size_t used_low = 0;
    std::size_t used_high = 0;
    const std::string low = text.substr(0, dash);
    const std::string high = text.substr(dash + 1);
    const double lo = std::stod(low, &used_low);
    const double hi = std::stod(high, &used_high);
    if (used_low != low.size() || used_high != high.size()) {
      throw ConfigError("bad band '" + text + "'");
    }
    return range(lo, hi);
  } catch (const std::logic_error&) {
    throw ConfigError("bad band '" + text + "'");
  }
}

std::vector<std::uint8_t> encode_wav(const AudioSignal& signal) {
  signal.validate();
  const auto data_bytes = static_cast<std::uint32_t>(signal.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate) * 2);  // byte rate
  put_u16(out, 2);                                                    // block align
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (std::int16_t s : signal.samples) put_u16(out, static_cast<std::uint16_t>(s));
  return out;
}

AudioSignal decode_wav(std::span<const std::uint8_t> bytes, const std::string& origin) {
  auto malformed = [&](const std::string& what) {
    return WavFormatError(origin + ": malformed WAV: " + what);
  };
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    throw malformed("missing RIFF/WAVE header");
  }

  bool have_fmt = false;
  std::uint16_t channels = 0;
  std::uint16_t bits = 0;
  std::uint32_t rate = 0;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t chunk_size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (chunk_size > bytes.size() - body) throw malformed("chunk extends past end of file");
    if (tag_is(bytes, pos, "fmt ")) {
      if (chunk_size < 16) throw malformed("fmt chunk too short");
      const std::uint16_t format = read_u16(bytes, body);
      channels = read_u16(bytes, body + 2);
      rate = read_u32(bytes, body + 4);
      bits = read_u16(bytes, body + 14);
      if (format != kFormatPcm) {
        throw UnsupportedEncodingError(origin + ": unsupported WAV encoding: format code " +
                                       std::to_string(format) + " (only PCM is supported)");
      }
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      data = bytes.subspan(body, chunk_size);
      have_data = true;
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }

  if (!have_fmt) throw malformed("no fmt chunk");
  if (!have_data) throw malformed("no data chunk");
  if (channels != 1) {
    throw UnsupportedEncodingError(origin + ": unsupported WAV encoding: " +
                                   std::to_string(channels) + " channels (only mono)");
  }
  if (bits != 16) {
    throw UnsupportedEncodingError(origin + ": unsupported WAV encoding: " +
                                   std::to_string(bits) + "-bit samples (only 16-bit)");
  }
  if (rate == 0) throw malformed("sample rate is zero");
  if (data.size() % 2 != 0) throw malformed("data chunk has an odd byte count");
  if (data.empty()) throw malformed("data chunk is empty");

  AudioSignal signal;
  signal.sample_rate = static_cast<int>(rate);
  signal.samples.resize(data.size() / 2);
  for (std::size_t i = 0; i < signal.samples.size(); ++i) {
    signal.samples[i] = static_cast<std::int16_t>(read_u16(data, 2 * i));
  }
  return signal;
}

AudioSignal load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  AudioSignal signal = decode_wav(bytes, path.string());
  if (signal.sample_rate != kCanonicalSampleRate) {
    spdlog::warn("{}: sample rate {} Hz differs from the canonical {} Hz", path.string(),
                 signal.sample_rate, kCanonicalSampleRate);
  }
  return signal;
}

void save_wav(const AudioSignal& signal, const std::filesystem::path& path) {
  const auto bytes = encode_wav(signal);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

NoiseArray generate_noise(std::size_t n, int epsilon, NoiseRng& rng) {
  if (epsilon < 0) throw ConfigError("noise bound must be non-negative");
  NoiseArray noise(n, 0.0);
  if (epsilon == 0) return noise;
  std::uniform_int_distribution<int> uniform(-epsilon, epsilon);
  for (double& v : noise) v = uniform(rng);
  return noise;
}

NoiseArray band_pass(const NoiseArray& noise, const FrequencyBand& band, int sample_rate) {
  if (band.is_unfiltered()) return noise;
  if (sample_rate <= 0) throw ConfigError("sample rate must be positive");
  if (band.high_hz() > sample_rate / 2.0) {
    throw ConfigError("band " + band.name() + " exceeds the Nyquist frequency " +
                      format_number(sample_rate / 2.0) + " Hz");
  }
  const std::size_t n = noise.size();
  if (n == 0) return noise;

  auto bins = detail::real_dft(noise);
  const double low = band.low_hz() * static_cast<double>(n);
  const double high = band.high_hz() * static_cast<double>(n);
  for (std::size_t j = 0; j < bins.size(); ++j) {
    // Compare j * rate / n against the edges without dividing.
    const double scaled = static_cast<double>(j) * sample_rate;
    if (scaled < low || scaled > high) bins[j] = 0.0;
  }
  return detail::inverse_real_dft(bins, n);
}

AudioSignal mix(const AudioSignal& signal, std::span<const double> noise) {
  if (noise.size() != signal.samples.size()) {
    throw ConfigError("noise length " + std::to_string(noise.size()) +
                      " does not match signal length " + std::to_string(signal.samples.size()));
  }
  constexpr double kMin = std::numeric_limits<std::int16_t>::min();
  constexpr double kMax = std::numeric_limits<std::int16_t>::max();
  AudioSignal out;
  out.sample_rate = signal.sample_rate;
  out.samples.resize(signal.samples.size());
  for (std::size_t i = 0; i < noise.size(); ++i) {
    const double sum = std::round(signal.samples[i] + noise[i]);
    out.samples[i] = static_cast<std::int16_t>(std::clamp(sum, kMin, kMax));
  }
  return out;
}

}  // namespace nflood
