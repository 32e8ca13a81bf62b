#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "glovenet/dataset.hpp"
#include "glovenet/error.hpp"

// Synthetic multi-IMU gesture generator.
//
// Each gesture is a sum of Gaussian-windowed sinusoid bursts placed on the
// accelerometer/gyroscope axes of each finger sensor. Whole-hand gestures
// (single vocabulary) put the same motion on every sensor. Finger gestures
// (multi vocabulary) give every finger its own movement; neighbouring
// sensors pick up an attenuated copy through mechanical coupling. Every
// sample also carries white noise and a slow per-channel drift, which is
// all the null class contains.
namespace glovenet {

namespace {

constexpr std::size_t kSensors = 5;
constexpr std::size_t kAxes = 6;  // ax ay az gx gy gz
constexpr std::size_t kSubjects = 4;
constexpr double kSampleRate = 50.0;
constexpr double kNoiseSigma = 0.025;
constexpr double kDriftAmplitude = 0.03;
// Fraction of a finger's motion seen by a sensor 0, 1, 2, ... fingers away.
constexpr std::array<double, kSensors> kCoupling{1.0, 0.45, 0.18, 0.0, 0.0};
// Thumb sensor is mounted rotated relative to the other fingers.
constexpr std::array<std::size_t, kAxes> kThumbAxes{1, 2, 0, 4, 5, 3};

struct Burst {
  std::size_t axis;
  double amplitude;
  double frequency_hz;
  double width;   // Gaussian sigma as a fraction of the window
  double center;  // fraction of the window
};

// Whole-hand gestures, indexed by class - 1.
const std::array<std::vector<Burst>, 8> kHandGestures{{
    {{0, -1.0, 1.0, 0.12, 0.40}, {0, 0.6, 1.0, 0.10, 0.70}, {5, 0.3, 3.0, 0.12, 0.50}},   // swipe_left
    {{0, 1.0, 1.0, 0.12, 0.40}, {0, -0.6, 1.0, 0.10, 0.70}, {5, -0.3, 3.0, 0.12, 0.50}},  // swipe_right
    {{1, 1.0, 1.0, 0.12, 0.40}, {1, -0.6, 1.0, 0.10, 0.70}, {3, 0.3, 3.0, 0.12, 0.50}},   // swipe_up
    {{1, -1.0, 1.0, 0.12, 0.40}, {1, 0.6, 1.0, 0.10, 0.70}, {3, -0.3, 3.0, 0.12, 0.50}},  // swipe_down
    {{0, 0.8, 1.0, 0.12, 0.35}, {1, -0.8, 1.0, 0.12, 0.55}, {5, -1.0, 1.0, 0.25, 0.50}},  // circle_cw
    {{0, -0.8, 1.0, 0.12, 0.35}, {1, 0.8, 1.0, 0.12, 0.55}, {5, 1.0, 1.0, 0.25, 0.50}},   // circle_ccw
    {{2, 1.0, 1.0, 0.12, 0.50}, {4, 0.4, 4.0, 0.12, 0.50}},                               // push
    {{2, -1.0, 1.0, 0.12, 0.50}, {4, -0.4, 4.0, 0.12, 0.50}},                             // pull
}};

enum class FingerMove { none, flex, spread, tap };

// Finger-frame bursts of each movement; center is filled in per sample.
const std::vector<Burst>& move_bursts(FingerMove move) {
  static const std::vector<Burst> flex{{3, 1.0, 1.0, 0.12, 0.5}, {1, -0.6, 1.0, 0.12, 0.5}, {2, 0.4, 3.0, 0.12, 0.5}};
  static const std::vector<Burst> spread{{5, 0.8, 1.0, 0.14, 0.5}, {0, 0.5, 2.0, 0.14, 0.5}};
  static const std::vector<Burst> tap{{2, 0.9, 6.0, 0.15, 0.5}, {3, 0.5, 6.0, 0.15, 0.5}};
  static const std::vector<Burst> none;
  switch (move) {
    case FingerMove::flex:
      return flex;
    case FingerMove::spread:
      return spread;
    case FingerMove::tap:
      return tap;
    case FingerMove::none:
      break;
  }
  return none;
}

using FingerPattern = std::array<FingerMove, kSensors>;

// Finger gestures (thumb, index, middle, ring, pinky), indexed by class - 1.
// Several pairs differ in a single finger: pinch / thumb_flex (index),
// ring_pinky_curl / pinky_curl (ring), index_middle_tap / middle_tap
// (index), thumb_flex / thumb_pinky (pinky). pinky_curl and pinky_tap
// leave the index sensor untouched.
constexpr FingerMove N = FingerMove::none;
constexpr FingerMove F = FingerMove::flex;
constexpr FingerMove S = FingerMove::spread;
constexpr FingerMove P = FingerMove::tap;
constexpr std::array<FingerPattern, 10> kFingerGestures{{
    {F, F, F, F, F},  // fist
    {S, S, S, S, S},  // spread
    {F, F, N, N, N},  // pinch
    {F, N, N, N, N},  // thumb_flex
    {N, N, N, F, F},  // ring_pinky_curl
    {N, N, N, N, F},  // pinky_curl
    {N, N, N, N, P},  // pinky_tap
    {N, P, P, N, N},  // index_middle_tap
    {N, N, P, N, N},  // middle_tap
    {F, N, N, N, F},  // thumb_pinky
}};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ splitmix64(stream)) ^ index);
}

constexpr std::uint64_t kSampleStream = 1;
constexpr std::uint64_t kSessionStream = 2;
constexpr std::uint64_t kSubjectStream = 3;

double burst_value(double t, double window_seconds, double amplitude, double frequency, double width,
                   double center) {
  const double tc = center * window_seconds;
  const double sigma = width * window_seconds;
  const double dt = t - tc;
  return amplitude * std::exp(-dt * dt / (2.0 * sigma * sigma)) *
         std::cos(2.0 * std::numbers::pi * frequency * dt);
}

struct SubjectStyle {
  double gain = 1.0;
  double tempo = 1.0;
};

SubjectStyle subject_style(std::uint64_t seed, std::size_t subject) {
  std::mt19937_64 rng(derive_seed(seed, kSubjectStream, subject));
  std::uniform_real_distribution<double> gain(0.9, 1.1);
  std::uniform_real_distribution<double> tempo(0.92, 1.08);
  SubjectStyle style;
  style.gain = gain(rng);
  style.tempo = tempo(rng);
  return style;
}

void render_sample(Vocabulary vocabulary, int label, std::size_t window_length, std::uint64_t sample_seed,
                   const SubjectStyle& style, std::span<float> out) {
  std::mt19937_64 rng(sample_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const std::size_t channels = kSensors * kAxes;
  const double window_seconds = static_cast<double>(window_length) / kSampleRate;
  std::vector<double> signal(window_length * channels, 0.0);

  const double gain = uniform(0.75, 1.25) * style.gain;
  const double center_jitter = uniform(-0.08, 0.08);
  const double width_scale = uniform(0.85, 1.15);
  const double freq_scale = uniform(0.9, 1.1) * style.tempo;

  auto add_burst = [&](std::vector<double>& target, std::size_t stride, std::size_t offset, const Burst& b,
                       double amplitude_scale, double center) {
    for (std::size_t t = 0; t < window_length; ++t) {
      const double time = static_cast<double>(t) / kSampleRate;
      target[t * stride + offset] += burst_value(time, window_seconds, b.amplitude * amplitude_scale,
                                                 b.frequency_hz * freq_scale, b.width * width_scale, center);
    }
  };

  if (label > 0 && vocabulary == Vocabulary::single) {
    std::vector<double> hand(window_length * kAxes, 0.0);
    for (const Burst& b : kHandGestures[static_cast<std::size_t>(label - 1)]) {
      add_burst(hand, kAxes, b.axis, b, gain, b.center + center_jitter);
    }
    for (std::size_t s = 0; s < kSensors; ++s) {
      const double sensor_gain = uniform(0.9, 1.1);
      for (std::size_t t = 0; t < window_length; ++t) {
        for (std::size_t a = 0; a < kAxes; ++a) {
          signal[t * channels + s * kAxes + a] += sensor_gain * hand[t * kAxes + a];
        }
      }
    }
  } else if (label > 0) {
    const FingerPattern& pattern = kFingerGestures[static_cast<std::size_t>(label - 1)];
    std::vector<double> fingers(kSensors * window_length * kAxes, 0.0);
    for (std::size_t f = 0; f < kSensors; ++f) {
      if (pattern[f] == FingerMove::none) continue;
      const double finger_gain = gain * uniform(0.9, 1.1);
      const double finger_center = 0.5 + center_jitter + uniform(-0.03, 0.03);
      std::vector<double> finger(window_length * kAxes, 0.0);
      for (const Burst& b : move_bursts(pattern[f])) {
        const std::size_t axis = f == 0 ? kThumbAxes[b.axis] : b.axis;
        add_burst(finger, kAxes, axis, b, finger_gain, finger_center);
      }
      std::copy(finger.begin(), finger.end(), fingers.begin() + static_cast<std::ptrdiff_t>(f * finger.size()));
    }
    for (std::size_t s = 0; s < kSensors; ++s) {
      for (std::size_t f = 0; f < kSensors; ++f) {
        const double coupling = kCoupling[s > f ? s - f : f - s];
        if (coupling == 0.0) continue;
        const double* src = fingers.data() + f * window_length * kAxes;
        for (std::size_t t = 0; t < window_length; ++t) {
          for (std::size_t a = 0; a < kAxes; ++a) {
            signal[t * channels + s * kAxes + a] += coupling * src[t * kAxes + a];
          }
        }
      }
    }
  }

  std::normal_distribution<double> noise(0.0, kNoiseSigma);
  for (auto& v : signal) v += noise(rng);
  for (std::size_t c = 0; c < channels; ++c) {
    const double phase = uniform(0.0, 2.0 * std::numbers::pi);
    const double freq = uniform(0.2, 0.5);
    for (std::size_t t = 0; t < window_length; ++t) {
      const double time = static_cast<double>(t) / kSampleRate;
      signal[t * channels + c] += kDriftAmplitude * std::sin(2.0 * std::numbers::pi * freq * time + phase);
    }
  }
  for (std::size_t i = 0; i < signal.size(); ++i) out[i] = static_cast<float>(signal[i]);
}

}  // namespace

Vocabulary parse_vocabulary(std::string_view name) {
  if (name == "single") return Vocabulary::single;
  if (name == "multi") return Vocabulary::multi;
  throw UsageError("unknown vocabulary '" + std::string(name) + "' (expected single or multi)");
}

std::string_view to_string(Vocabulary vocabulary) {
  return vocabulary == Vocabulary::single ? "single" : "multi";
}

std::vector<SensorSpec> default_sensor_layout() {
  return {{"thumb", kAxes}, {"index", kAxes}, {"middle", kAxes}, {"ring", kAxes}, {"pinky", kAxes}};
}

std::vector<std::string> vocabulary_class_names(Vocabulary vocabulary) {
  if (vocabulary == Vocabulary::single) {
    return {"null", "swipe_left", "swipe_right", "swipe_up", "swipe_down",
            "circle_cw", "circle_ccw", "push", "pull"};
  }
  return {"null",          "fist",       "spread",    "pinch",          "thumb_flex", "ring_pinky_curl",
          "pinky_curl",    "pinky_tap",  "index_middle_tap", "middle_tap", "thumb_pinky"};
}

GestureDataset generate_synthetic(Vocabulary vocabulary, std::size_t n_samples, std::size_t window_length,
                                  std::uint64_t seed) {
  GestureDataset ds;
  ds.class_names = vocabulary_class_names(vocabulary);
  const std::size_t classes = ds.class_names.size();
  if (n_samples < classes) {
    throw UsageError("need at least " + std::to_string(classes) + " samples for the " +
                     std::string(to_string(vocabulary)) + " vocabulary, got " + std::to_string(n_samples));
  }
  if (window_length < 8) throw UsageError("window length must be at least 8, got " + std::to_string(window_length));

  ds.name = "synthetic-" + std::string(to_string(vocabulary));
  ds.window_length = window_length;
  ds.sensor_layout = default_sensor_layout();
  ds.channels = kSensors * kAxes;
  ds.sample_rate_hz = kSampleRate;
  ds.labels.resize(n_samples);
  ds.trial_ids.resize(n_samples);
  ds.subject_ids.resize(n_samples);
  ds.samples.assign(n_samples * ds.sample_stride(), 0.0f);

  // Sessions of two recordings per class in random order; the trailing
  // partial session keeps overall class counts within one of each other.
  const std::size_t session_length = 2 * classes;
  for (std::size_t start = 0, session = 0; start < n_samples; start += session_length, ++session) {
    const std::size_t end = std::min(n_samples, start + session_length);
    std::vector<int> block;
    for (std::size_t i = start; i < end; ++i) block.push_back(static_cast<int>(i % classes));
    std::mt19937_64 rng(derive_seed(seed, kSessionStream, session));
    std::shuffle(block.begin(), block.end(), rng);
    for (std::size_t i = start; i < end; ++i) {
      ds.labels[i] = block[i - start];
      ds.trial_ids[i] = static_cast<int>(session);
      ds.subject_ids[i] = static_cast<int>(session % kSubjects);
    }
  }

  std::array<SubjectStyle, kSubjects> styles;
  for (std::size_t s = 0; s < kSubjects; ++s) styles[s] = subject_style(seed, s);
  for (std::size_t i = 0; i < n_samples; ++i) {
    render_sample(vocabulary, ds.labels[i], window_length, derive_seed(seed, kSampleStream, i),
                  styles[static_cast<std::size_t>(ds.subject_ids[i])], ds.sample(i));
  }
  return ds;
}

}  // namespace glovenet
