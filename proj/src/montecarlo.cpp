#include "seqtpe/montecarlo.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace seqtpe::mc {

using protocol::CascadeParams;

double DetectorModel::efficiency_for(int channel) const {
  const auto it = efficiency_override.find(channel);
  return it == efficiency_override.end() ? efficiency : it->second;
}

std::vector<int> DetectorModel::channels() const {
  std::set<int> set{b_channels.first, b_channels.second, x_channels.first,
                    x_channels.second};
  return {set.begin(), set.end()};
}

void DetectorModel::validate() const {
  auto in01 = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (!in01(efficiency)) throw InvalidArgument("efficiency must be in [0, 1]");
  for (const auto& [ch, eff] : efficiency_override) {
    if (!in01(eff))
      throw InvalidArgument("efficiency of channel " + std::to_string(ch) +
                            " must be in [0, 1]");
  }
  if (!(std::isfinite(jitter_sigma_ps) && jitter_sigma_ps >= 0.0))
    throw InvalidArgument("jitter sigma must be >= 0");
  if (!(std::isfinite(deadtime_ps) && deadtime_ps >= 0.0))
    throw InvalidArgument("dead-time must be >= 0");
  if (!(std::isfinite(dark_rate_hz) && dark_rate_hz >= 0.0))
    throw InvalidArgument("dark rate must be >= 0");
  if (!in01(splitter_ratio)) throw InvalidArgument("splitter ratio must be in [0, 1]");
  if (channels().size() != 4)
    throw InvalidArgument("the four detection channel ids must be distinct");
}

DetectorModel DetectorModel::ideal() { return DetectorModel{}; }

DetectorModel DetectorModel::lab_defaults() {
  DetectorModel d;
  d.efficiency = 0.8;
  d.jitter_sigma_ps = 40.0;
  d.deadtime_ps = 100000.0;
  d.dark_rate_hz = 0.0;
  d.splitter_ratio = 0.5;
  return d;
}

void ExperimentConfig::validate() const {
  params.validate();
  detector.validate();
  if (rep_period_ps <= 0) throw InvalidArgument("repetition period must be positive");
  if (n_cycles < 0) throw InvalidArgument("cycle count must be >= 0");
  if (n_pulses != 1 && n_pulses != 2) throw InvalidArgument("pulse count must be 1 or 2");
  if (workers < 1) throw InvalidArgument("worker count must be >= 1");
  if (n_pulses == 2) {
    if (params.delta_t_ps >= static_cast<double>(rep_period_ps))
      throw InvalidArgument("pulse separation must be smaller than the repetition period");
    if (params.delta_t_ps < min_delta_t_ps)
      throw InvalidArgument("pulse separation below the supported minimum of " +
                            std::to_string(min_delta_t_ps) + " ps");
  }
}

std::vector<int> TagStream::channels_for(const std::string& role) const {
  std::vector<int> out;
  for (const auto& [ch, r] : channel_map)
    if (r == role) out.push_back(ch);
  return out;
}

std::optional<std::string> TagStream::extra(const std::string& key) const {
  for (const auto& [k, v] : extra_header)
    if (k == key) return v;
  return std::nullopt;
}

void HomSynthConfig::validate() const {
  params.validate();
  detector.validate();
  if (rep_period_ps <= 0) throw InvalidArgument("repetition period must be positive");
  if (!(std::isfinite(duration_s) && duration_s >= 0.0))
    throw InvalidArgument("duration must be >= 0");
  if (!(phase.stability_interval_s > 0.0))
    throw InvalidArgument("phase stability interval must be positive");
  if (protocol::mean_photon_number(params) <= 0.0)
    throw InvalidArgument("state emits no photons; nothing to synthesize");
}

namespace {

struct Cascade {
  double t_b, t_x;
  Polarization pol;
};

Cascade draw_cascade(const CascadeParams& p, double start_ps, Philox& rng) {
  Cascade c;
  c.t_b = start_ps + rng.exponential(p.tau_b_ps);
  c.t_x = c.t_b + rng.exponential(p.tau_x_ps);
  c.pol = rng.uniform01() < 0.5 ? Polarization::H : Polarization::V;
  return c;
}

void push_cascade(std::vector<EmissionEvent>& events, const Cascade& c, int index) {
  events.push_back({fock::Energy::B, index, c.t_b, c.pol});
  events.push_back({fock::Energy::X, index, c.t_x, c.pol});
}

}  // namespace

std::vector<EmissionEvent> simulate_cycle(const CascadeParams& params, int n_pulses,
                                          Philox& rng) {
  std::vector<EmissionEvent> events;
  const double f = params.prep_fidelity;

  if (rng.uniform01() >= f) return events;  // first pulse missed; cycle stays dark
  const Cascade first = draw_cascade(params, 0.0, rng);

  if (n_pulses == 1) {
    push_cascade(events, first, 1);
    return events;
  }

  const double dt = params.delta_t_ps;
  if (first.t_b >= dt) {
    // Still in B: the second pulse de-excites with probability f and the
    // stored cascade is erased; otherwise it survives into the late bin.
    if (rng.uniform01() >= f) push_cascade(events, first, 1);
  } else if (first.t_x >= dt) {
    // In X: the second pulse is detuned and has no effect.
    push_cascade(events, first, 1);
  } else {
    // Ground state again: both early photons are out and the second pulse
    // can start a fresh cascade.
    push_cascade(events, first, 1);
    if (rng.uniform01() < f) push_cascade(events, draw_cascade(params, dt, rng), 2);
  }
  return events;
}

namespace {

// Everything detect() does except the dead-time veto, which run_experiment
// applies once over the merged stream because 100 ns spans several cycles.
std::vector<TimeTag> detect_candidates(const std::vector<EmissionEvent>& events,
                                       const DetectorModel& det,
                                       std::int64_t cycle_start_ps,
                                       std::int64_t rep_period_ps, Philox& rng) {
  std::vector<TimeTag> tags;
  for (const auto& ev : events) {
    if (det.filter != PolarizationFilter::None) {
      const Polarization pass =
          det.filter == PolarizationFilter::H ? Polarization::H : Polarization::V;
      if (ev.polarization != pass) continue;
    }
    const ChannelPair& pair =
        ev.kind == fock::Energy::B ? det.b_channels : det.x_channels;
    const int channel = rng.uniform01() < det.splitter_ratio ? pair.first : pair.second;
    if (rng.uniform01() >= det.efficiency_for(channel)) continue;
    double t = static_cast<double>(cycle_start_ps) + ev.time_ps;
    if (det.jitter_sigma_ps > 0.0) t += rng.gaussian(det.jitter_sigma_ps);
    tags.push_back({channel, std::max<std::int64_t>(0, std::llround(t))});
  }

  if (det.dark_rate_hz > 0.0) {
    const double lambda = det.dark_rate_hz * static_cast<double>(rep_period_ps) * 1e-12;
    for (const int channel : det.channels()) {
      const std::uint64_t n = rng.poisson(lambda);
      for (std::uint64_t k = 0; k < n; ++k) {
        const auto offset =
            static_cast<std::int64_t>(rng.uniform01() * static_cast<double>(rep_period_ps));
        tags.push_back({channel, cycle_start_ps + offset});
      }
    }
  }
  std::sort(tags.begin(), tags.end(), tag_less);
  return tags;
}

}  // namespace

std::vector<TimeTag> detect(const std::vector<EmissionEvent>& events,
                            const DetectorModel& detector, std::int64_t cycle_start_ps,
                            std::int64_t rep_period_ps, Philox& rng) {
  auto tags = detect_candidates(events, detector, cycle_start_ps, rep_period_ps, rng);
  apply_deadtime(tags, detector.deadtime_ps);
  return tags;
}

void apply_deadtime(std::vector<TimeTag>& sorted_tags, double deadtime_ps) {
  if (deadtime_ps <= 0.0 || sorted_tags.empty()) return;
  std::unordered_map<int, std::int64_t> last_accepted;
  std::size_t kept = 0;
  for (const TimeTag& tag : sorted_tags) {
    const auto it = last_accepted.find(tag.channel);
    if (it != last_accepted.end() &&
        static_cast<double>(tag.time_ps - it->second) < deadtime_ps)
      continue;
    last_accepted[tag.channel] = tag.time_ps;
    sorted_tags[kept++] = tag;
  }
  sorted_tags.resize(kept);
}

TagStream run_experiment(const ExperimentConfig& config) {
  config.validate();

  const std::int64_t n = config.n_cycles;
  const int workers = static_cast<int>(
      std::min<std::int64_t>(config.workers, std::max<std::int64_t>(n, 1)));

  std::vector<std::vector<TimeTag>> chunks(static_cast<std::size_t>(workers));
  auto worker = [&](int w) {
    const std::int64_t begin = n * w / workers;
    const std::int64_t end = n * (w + 1) / workers;
    auto& out = chunks[static_cast<std::size_t>(w)];
    for (std::int64_t cycle = begin; cycle < end; ++cycle) {
      Philox rng(config.seed, Philox::kCycleStream, static_cast<std::uint64_t>(cycle));
      const auto events = simulate_cycle(config.params, config.n_pulses, rng);
      auto tags = detect_candidates(events, config.detector, cycle * config.rep_period_ps,
                                    config.rep_period_ps, rng);
      out.insert(out.end(), tags.begin(), tags.end());
    }
  };

  if (workers == 1) {
    worker(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) threads.emplace_back(worker, w);
    for (auto& t : threads) t.join();
  }

  TagStream stream;
  stream.rep_period_ps = config.rep_period_ps;
  stream.n_cycles = n;
  stream.seed = config.seed;
  stream.channel_map = {{config.detector.b_channels.first, "B"},
                        {config.detector.b_channels.second, "B"},
                        {config.detector.x_channels.first, "X"},
                        {config.detector.x_channels.second, "X"}};
  std::sort(stream.channel_map.begin(), stream.channel_map.end());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", config.params.delta_t_ps);
  stream.extra_header.emplace_back("dt_ps", config.n_pulses == 2 ? buf : "nan");
  stream.extra_header.emplace_back("pulses", std::to_string(config.n_pulses));

  std::size_t total = 0;
  for (const auto& c : chunks) total += c.size();
  stream.tags.reserve(total);
  for (auto& c : chunks) stream.tags.insert(stream.tags.end(), c.begin(), c.end());
  std::sort(stream.tags.begin(), stream.tags.end(), tag_less);
  apply_deadtime(stream.tags, config.detector.deadtime_ps);
  return stream;
}

namespace {

// Joint photon-number distribution of the interferometer outputs at a fixed
// phase, ready for inverse-CDF sampling.
struct HomSampler {
  struct Outcome {
    std::array<std::uint8_t, 8> occupation;  // modes in hom_output_state order
    double cumulative;
  };
  std::vector<Outcome> outcomes;
  std::array<fock::Energy, 8> energy;
  std::array<fock::TimeBin, 8> bin;
  std::array<int, 8> channel;

  explicit HomSampler(const protocol::Coefficients& c, double phi) {
    const fock::PureState out = protocol::hom_output_state(c, phi);
    const auto& reg = out.reg();
    for (std::size_t m = 0; m < 8; ++m) {
      energy[m] = reg.modes()[m].energy;
      bin[m] = reg.modes()[m].bin;
      channel[m] =
          reg.modes()[m].spatial == fock::Spatial::C ? kHomChannelC : kHomChannelD;
    }
    double cum = 0.0;
    for (std::size_t i = 0; i < out.amplitudes().size(); ++i) {
      const double p = std::norm(out.amplitudes()[i]);
      if (p < 1e-15) continue;
      Outcome o;
      for (std::size_t m = 0; m < 8; ++m)
        o.occupation[m] = static_cast<std::uint8_t>(reg.digit(i, m));
      cum += p;
      o.cumulative = cum;
      outcomes.push_back(o);
    }
    for (auto& o : outcomes) o.cumulative /= cum;
    outcomes.back().cumulative = 1.0;
  }

  const std::array<std::uint8_t, 8>& sample(double u) const {
    const auto it = std::lower_bound(
        outcomes.begin(), outcomes.end(), u,
        [](const Outcome& o, double v) { return o.cumulative < v; });
    return (it == outcomes.end() ? outcomes.back() : *it).occupation;
  }
};

}  // namespace

TagStream synth_hom_stream(const HomSynthConfig& config) {
  config.validate();
  const auto coeffs = protocol::coefficients(config.params);
  const std::int64_t n_cycles = static_cast<std::int64_t>(
      config.duration_s * 1e12 / static_cast<double>(config.rep_period_ps));
  const double stability_ps = config.phase.stability_interval_s * 1e12;

  TagStream stream;
  stream.rep_period_ps = config.rep_period_ps;
  stream.n_cycles = n_cycles;
  stream.seed = config.seed;
  stream.channel_map = {{kHomChannelC, "OUT_C"}, {kHomChannelD, "OUT_D"}};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", config.params.delta_t_ps);
  stream.extra_header.emplace_back("dt_ps", buf);

  std::optional<HomSampler> sampler;
  std::int64_t current_interval = -1;

  for (std::int64_t cycle = 0; cycle < n_cycles; ++cycle) {
    const std::int64_t cycle_start = cycle * config.rep_period_ps;
    const auto interval = static_cast<std::int64_t>(
        static_cast<double>(cycle_start) / stability_ps);
    if (interval != current_interval) {
      current_interval = interval;
      double phi = config.phase.phi;
      if (config.phase.mode == PhaseModel::Mode::RandomPerInterval) {
        Philox phase_rng(config.seed, Philox::kPhaseStream,
                         static_cast<std::uint64_t>(interval));
        phi = phase_rng.uniform01() * 6.283185307179586476925286766559;
      }
      sampler.emplace(coeffs, phi);
    }

    Philox rng(config.seed, Philox::kCycleStream, static_cast<std::uint64_t>(cycle));
    const auto& occupation = sampler->sample(rng.uniform01());
    for (std::size_t m = 0; m < 8; ++m) {
      for (int k = 0; k < occupation[m]; ++k) {
        const int channel = sampler->channel[m];
        if (rng.uniform01() >= config.detector.efficiency_for(channel)) continue;
        double t = sampler->bin[m] == fock::TimeBin::Late ? config.params.delta_t_ps : 0.0;
        t += rng.exponential(config.params.tau_b_ps);
        if (sampler->energy[m] == fock::Energy::X)
          t += rng.exponential(config.params.tau_x_ps);
        if (config.detector.jitter_sigma_ps > 0.0)
          t += rng.gaussian(config.detector.jitter_sigma_ps);
        stream.tags.push_back(
            {channel, std::max<std::int64_t>(
                          0, cycle_start + std::llround(t))});
      }
    }
    if (config.detector.dark_rate_hz > 0.0) {
      const double lambda =
          config.detector.dark_rate_hz * static_cast<double>(config.rep_period_ps) * 1e-12;
      for (const int channel : {kHomChannelC, kHomChannelD}) {
        const std::uint64_t nd = rng.poisson(lambda);
        for (std::uint64_t k = 0; k < nd; ++k) {
          const auto offset = static_cast<std::int64_t>(
              rng.uniform01() * static_cast<double>(config.rep_period_ps));
          stream.tags.push_back({channel, cycle_start + offset});
        }
      }
    }
  }

  std::sort(stream.tags.begin(), stream.tags.end(), tag_less);
  apply_deadtime(stream.tags, config.detector.deadtime_ps);
  return stream;
}

void write_tags(const TagStream& stream, std::ostream& out) {
  out << "# seqtpe-tags v1\n";
  out << "# rep_period_ps=" << stream.rep_period_ps << "\n";
  out << "# n_cycles=" << stream.n_cycles << "\n";
  out << "# channel_map=";
  for (std::size_t i = 0; i < stream.channel_map.size(); ++i) {
    if (i) out << ',';
    out << stream.channel_map[i].first << ':' << stream.channel_map[i].second;
  }
  out << "\n";
  if (stream.seed) out << "# seed=" << *stream.seed << "\n";
  for (const auto& [key, value] : stream.extra_header)
    out << "# " << key << '=' << value << "\n";
  out << "channel,time_ps\n";
  for (const TimeTag& tag : stream.tags)
    out << tag.channel << ',' << tag.time_ps << "\n";
}

void write_tags_file(const TagStream& stream, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_tags(stream, out);
  out.flush();
  if (!out) throw IoError("failed while writing " + path);
}

namespace {

bool parse_int64(const std::string& s, std::int64_t& value) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, value);
  return res.ec == std::errc{} && res.ptr == last;
}

}  // namespace

TagStream read_tags(std::istream& in) {
  TagStream stream;
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw ParseError("empty tag file", 1);
  ++line_no;
  if (line == "# seqtpe-tags v1\r") line.pop_back();
  if (line != "# seqtpe-tags v1") throw ParseError("missing tag-file signature", line_no);

  bool have_rep = false, have_cycles = false, have_map = false;
  // Header: '# key=value' lines until the column header row.
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("# ", 0) != 0) break;
    const std::string body = line.substr(2);
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError("malformed header line", line_no);
    const std::string key = body.substr(0, eq);
    const std::string value = body.substr(eq + 1);
    if (key == "rep_period_ps") {
      if (!parse_int64(value, stream.rep_period_ps) || stream.rep_period_ps <= 0)
        throw ParseError("bad rep_period_ps value", line_no);
      have_rep = true;
    } else if (key == "n_cycles") {
      if (!parse_int64(value, stream.n_cycles) || stream.n_cycles < 0)
        throw ParseError("bad n_cycles value", line_no);
      have_cycles = true;
    } else if (key == "channel_map") {
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        std::int64_t ch = 0;
        if (colon == std::string::npos || !parse_int64(item.substr(0, colon), ch))
          throw ParseError("bad channel_map entry '" + item + "'", line_no);
        stream.channel_map.emplace_back(static_cast<int>(ch), item.substr(colon + 1));
      }
      if (stream.channel_map.empty()) throw ParseError("empty channel_map", line_no);
      have_map = true;
    } else if (key == "seed") {
      std::int64_t seed = 0;
      if (!parse_int64(value, seed) || seed < 0)
        throw ParseError("bad seed value", line_no);
      stream.seed = static_cast<std::uint64_t>(seed);
    } else {
      stream.extra_header.emplace_back(key, value);
    }
  }
  if (!have_rep || !have_cycles || !have_map)
    throw ParseError("header is missing rep_period_ps, n_cycles or channel_map", line_no);
  if (line != "channel,time_ps")
    throw ParseError("expected 'channel,time_ps' column header", line_no);

  std::set<int> known_channels;
  for (const auto& [ch, role] : stream.channel_map) known_channels.insert(ch);

  std::int64_t prev_time = -1;
  int prev_channel = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    std::int64_t channel = 0, time = 0;
    if (comma == std::string::npos || !parse_int64(line.substr(0, comma), channel) ||
        !parse_int64(line.substr(comma + 1), time))
      throw ParseError("malformed record '" + line + "'", line_no);
    if (time < 0) throw ParseError("negative timestamp", line_no);
    if (!known_channels.count(static_cast<int>(channel)))
      throw ParseError("unknown channel " + std::to_string(channel), line_no);
    if (time < prev_time || (time == prev_time && channel < prev_channel))
      throw ParseError("records are not sorted by (time_ps, channel)", line_no);
    prev_time = time;
    prev_channel = static_cast<int>(channel);
    stream.tags.push_back({static_cast<int>(channel), time});
  }
  return stream;
}

TagStream read_tags_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_tags(in);
}

}  // namespace seqtpe::mc
