#pragma once

// Epoching of multichannel recordings, Hanning-tapered sliding Fourier power
// and band x ROI x time-segment feature extraction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "neurosdt/csv.hpp"
#include "neurosdt/error.hpp"
#include "neurosdt/npstats.hpp"
#include "neurosdt/observer.hpp"
#include "neurosdt/trials.hpp"
#include "neurosdt/types.hpp"

namespace neurosdt {

enum class EventKind { StimulusOnset, Response };

inline const char* to_string(EventKind k) { return k == EventKind::Response ? "response" : "stimulus"; }

inline EventKind parse_event_kind(const std::string& s) {
  const auto v = lower(s);
  if (v == "stimulus" || v == "stimulus_onset" || v == "stimulusonset" || v == "onset") return EventKind::StimulusOnset;
  if (v == "response") return EventKind::Response;
  throw InputError("unknown event kind '" + s + "' (expected stimulus or response)");
}

struct Event {
  std::int64_t sample_index = 0;
  EventKind kind = EventKind::StimulusOnset;
  std::string trial_id;
};

struct MultiSignal {
  double sample_rate = 250.0;
  std::vector<std::string> channels;
  std::vector<std::vector<double>> data;  // channels x samples, in microvolts
  std::vector<Event> events;

  std::size_t samples() const { return data.empty() ? 0 : data.front().size(); }

  std::optional<std::size_t> channel_index(const std::string& name) const {
    for (std::size_t i = 0; i < channels.size(); ++i) {
      if (channels[i] == name) return i;
    }
    return std::nullopt;
  }

  void validate() const {
    detail::require(sample_rate > 0.0 && std::isfinite(sample_rate), "signal: sample rate must be > 0");
    detail::require(!channels.empty() && channels.size() == data.size(), "signal: channel names and data disagree");
    for (const auto& row : data) detail::require(row.size() == samples(), "signal: channels differ in length");
    for (const auto& e : events) {
      detail::require(e.sample_index >= 0 && static_cast<std::size_t>(e.sample_index) < samples(),
                      "signal: event for trial " + e.trial_id + " lies outside the recording");
    }
  }
};

struct TimeWindow {
  double start_ms = 0.0;
  double end_ms = 0.0;
};

inline TimeWindow default_epoch_window(Locking l) {
  return l == Locking::Stimulus ? TimeWindow{-200.0, 1000.0} : TimeWindow{-1000.0, 200.0};
}

inline TimeWindow default_baseline(Locking l) {
  return l == Locking::Stimulus ? TimeWindow{-200.0, 0.0} : TimeWindow{-1000.0, -800.0};
}

struct EpochTrial {
  std::string trial_id;
  std::int64_t event_sample = 0;
  std::vector<std::vector<double>> data;  // channels x time
};

struct Rejection {
  std::string trial_id;
  std::string reason;
};

struct Epochs {
  Locking locking = Locking::Stimulus;
  TimeWindow window;
  std::optional<TimeWindow> baseline;
  double sample_rate = 250.0;
  std::int64_t first_offset = 0;  // first sample relative to the event
  std::size_t length = 0;
  std::vector<std::string> channels;
  std::vector<EpochTrial> trials;
  std::vector<Rejection> rejected;

  double time_ms(double sample) const { return (static_cast<double>(first_offset) + sample) * 1000.0 / sample_rate; }
};

namespace detail {

inline std::int64_t ms_to_samples(double ms, double fs) { return std::llround(ms * fs / 1000.0); }

}  // namespace detail

// Windows are half-open in samples: [event + start, event + end).
inline Epochs epoch(const MultiSignal& signal, Locking locking, TimeWindow window,
                    std::optional<TimeWindow> baseline) {
  signal.validate();
  detail::require(window.end_ms > window.start_ms, "epoch: window end must follow its start");
  const double fs = signal.sample_rate;
  Epochs e;
  e.locking = locking;
  e.window = window;
  e.baseline = baseline;
  e.sample_rate = fs;
  e.channels = signal.channels;
  e.first_offset = detail::ms_to_samples(window.start_ms, fs);
  const std::int64_t last = detail::ms_to_samples(window.end_ms, fs);
  e.length = static_cast<std::size_t>(last - e.first_offset);

  std::size_t b0 = 0, b1 = 0;
  if (baseline) {
    const auto s0 = detail::ms_to_samples(baseline->start_ms, fs) - e.first_offset;
    const auto s1 = detail::ms_to_samples(baseline->end_ms, fs) - e.first_offset;
    detail::require(s0 >= 0 && s1 <= static_cast<std::int64_t>(e.length) && s1 > s0,
                    "epoch: baseline must be a non-empty interval inside the epoch window");
    b0 = static_cast<std::size_t>(s0);
    b1 = static_cast<std::size_t>(s1);
  }

  const EventKind wanted = locking == Locking::Stimulus ? EventKind::StimulusOnset : EventKind::Response;
  bool any = false;
  const auto total = static_cast<std::int64_t>(signal.samples());
  for (const auto& ev : signal.events) {
    if (ev.kind != wanted) continue;
    any = true;
    const std::int64_t from = ev.sample_index + e.first_offset;
    if (from < 0 || from + static_cast<std::int64_t>(e.length) > total) {
      e.rejected.push_back({ev.trial_id, "bounds"});
      continue;
    }
    EpochTrial t;
    t.trial_id = ev.trial_id;
    t.event_sample = ev.sample_index;
    for (const auto& row : signal.data) {
      std::vector<double> seg(row.begin() + from, row.begin() + from + static_cast<std::int64_t>(e.length));
      if (baseline) {
        double mean = 0.0;
        for (std::size_t i = b0; i < b1; ++i) mean += seg[i];
        mean /= static_cast<double>(b1 - b0);
        for (auto& v : seg) v -= mean;
      }
      t.data.push_back(std::move(seg));
    }
    e.trials.push_back(std::move(t));
  }
  if (!any) throw InputError(std::string("epoch: no ") + to_string(wanted) + " events in the recording");
  return e;
}

// Rejects any trial with a sample whose magnitude exceeds the threshold.
inline Epochs reject_artifacts(const Epochs& e, double threshold_uv) {
  detail::require(threshold_uv > 0.0, "reject_artifacts: threshold must be > 0");
  Epochs out = e;
  out.trials.clear();
  for (const auto& t : e.trials) {
    bool bad = false;
    for (const auto& row : t.data) {
      for (double v : row) bad = bad || std::fabs(v) > threshold_uv;
    }
    if (bad) {
      out.rejected.push_back({t.trial_id, "amplitude"});
    } else {
      out.trials.push_back(t);
    }
  }
  return out;
}

// --- time-frequency power -------------------------------------------------------

namespace detail {

// Symmetric Hanning taper without zero end points.
inline std::vector<double> hanning(std::size_t n) {
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) {
    h[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i + 1) / static_cast<double>(n + 1));
  }
  return h;
}

// One-sided DFT power of a tapered segment, normalized by the taper energy so
// that the bins sum to sum((x h)^2) / sum(h^2).
class WindowSpectrum {
 public:
  explicit WindowSpectrum(std::size_t n) : n_(n), taper_(hanning(n)), cos_(n), sin_(n) {
    for (double v : taper_) energy_ += v * v;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
      cos_[i] = std::cos(a);
      sin_[i] = std::sin(a);
    }
  }

  std::size_t bins() const { return n_ / 2 + 1; }
  const std::vector<double>& taper() const { return taper_; }
  double taper_energy() const { return energy_; }

  std::vector<double> operator()(const double* x) const {
    std::vector<double> xt(n_);
    for (std::size_t i = 0; i < n_; ++i) xt[i] = x[i] * taper_[i];
    std::vector<double> p(bins());
    for (std::size_t k = 0; k < bins(); ++k) {
      double re = 0.0, im = 0.0;
      std::size_t idx = 0;
      for (std::size_t i = 0; i < n_; ++i) {
        re += xt[i] * cos_[idx];
        im -= xt[i] * sin_[idx];
        idx += k;
        if (idx >= n_) idx -= n_;
      }
      const bool unpaired = k == 0 || (n_ % 2 == 0 && k == n_ / 2);
      p[k] = (unpaired ? 1.0 : 2.0) * (re * re + im * im) / (static_cast<double>(n_) * energy_);
    }
    return p;
  }

 private:
  std::size_t n_;
  std::vector<double> taper_;
  std::vector<double> cos_, sin_;
  double energy_ = 0.0;
};

}  // namespace detail

struct PowerMap {
  std::vector<std::string> trial_ids;
  std::vector<std::string> channels;
  std::vector<double> freqs_hz;
  std::vector<double> times_ms;  // window centres
  std::vector<double> power;     // [trial][channel][freq][time]

  std::size_t index(std::size_t t, std::size_t c, std::size_t f, std::size_t w) const {
    return ((t * channels.size() + c) * freqs_hz.size() + f) * times_ms.size() + w;
  }
  double at(std::size_t t, std::size_t c, std::size_t f, std::size_t w) const { return power[index(t, c, f, w)]; }
};

// Window k starts at floor(k * step + 0.5) samples; windows are stamped with
// the time of their centre.
inline PowerMap tfr_power(const Epochs& e, double win_ms = 500.0, double step_ms = 50.0) {
  detail::require(win_ms > 0.0 && step_ms > 0.0, "tfr_power: window and step must be > 0");
  const double fs = e.sample_rate;
  const auto win = static_cast<std::size_t>(detail::ms_to_samples(win_ms, fs));
  detail::require(win >= 2, "tfr_power: window shorter than two samples");
  if (win > e.length) {
    throw InputError("tfr_power: window of " + csv::format_double(win_ms) + " ms is longer than the epoch");
  }
  const double step = step_ms * fs / 1000.0;
  std::vector<std::size_t> starts;
  for (std::size_t k = 0;; ++k) {
    const auto s = static_cast<std::size_t>(std::floor(static_cast<double>(k) * step + 0.5));
    if (s + win > e.length) break;
    starts.push_back(s);
  }

  const detail::WindowSpectrum spectrum(win);
  PowerMap p;
  p.channels = e.channels;
  for (std::size_t k = 0; k < spectrum.bins(); ++k) p.freqs_hz.push_back(static_cast<double>(k) * fs / static_cast<double>(win));
  for (auto s : starts) p.times_ms.push_back(e.time_ms(static_cast<double>(s) + 0.5 * static_cast<double>(win - 1)));
  for (const auto& t : e.trials) p.trial_ids.push_back(t.trial_id);
  p.power.assign(p.trial_ids.size() * p.channels.size() * p.freqs_hz.size() * p.times_ms.size(), 0.0);

  for (std::size_t t = 0; t < e.trials.size(); ++t) {
    for (std::size_t c = 0; c < e.channels.size(); ++c) {
      const auto& row = e.trials[t].data[c];
      for (std::size_t w = 0; w < starts.size(); ++w) {
        const auto bins = spectrum(row.data() + starts[w]);
        for (std::size_t f = 0; f < bins.size(); ++f) p.power[p.index(t, c, f, w)] = bins[f];
      }
    }
  }
  return p;
}

// --- band x ROI x segment features --------------------------------------------

struct Band {
  std::string name;
  double lo_hz = 0.0;
  double hi_hz = 0.0;
};

inline std::vector<Band> default_bands() {
  return {{"theta", 4.0, 7.0}, {"alpha", 8.0, 12.0}, {"beta", 13.0, 30.0}, {"gamma", 31.0, 40.0}};
}

struct Roi {
  std::string name;
  std::vector<std::string> channels;
};

inline std::vector<Roi> default_rois() {
  return {{"frontal", {"Fp1", "Fp2", "F7", "F3", "Fz", "F4", "F8"}},
          {"parietal", {"P7", "P3", "Pz", "P4", "P8"}},
          {"temporal", {"T7", "T8", "T3", "T4", "T5", "T6"}},
          {"occipital", {"O1", "Oz", "O2"}}};
}

// Keeps only the channels present in the montage and drops ROIs left empty.
inline std::vector<Roi> restrict_rois(const std::vector<Roi>& rois, const std::vector<std::string>& montage) {
  std::vector<Roi> out;
  for (const auto& r : rois) {
    Roi kept{r.name, {}};
    for (const auto& ch : r.channels) {
      if (std::find(montage.begin(), montage.end(), ch) != montage.end()) kept.channels.push_back(ch);
    }
    if (!kept.channels.empty()) out.push_back(std::move(kept));
  }
  return out;
}

struct Segment {
  double start_ms = 0.0;
  double end_ms = 0.0;
};

inline std::vector<Segment> default_segments() {
  std::vector<Segment> s;
  for (int a = 0; a < 900; a += 100) s.push_back({static_cast<double>(a), static_cast<double>(a + 100)});
  return s;
}

// Segments that contain at least one window centre.
inline std::vector<Segment> feasible_segments(const PowerMap& p, const std::vector<Segment>& segments) {
  std::vector<Segment> out;
  for (const auto& s : segments) {
    if (std::any_of(p.times_ms.begin(), p.times_ms.end(), [&](double t) { return t >= s.start_ms && t < s.end_ms; })) {
      out.push_back(s);
    }
  }
  return out;
}

inline std::string feature_name(const Roi& r, const Band& b, const Segment& s) {
  return "pow_" + r.name + "_" + b.name + "_" + csv::format_double(s.start_ms) + "_" + csv::format_double(s.end_ms);
}

struct FeatureTable {
  std::vector<std::string> trial_ids;
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;  // trials x features
};

// Mean power over the band's bins, the ROI's channels and the windows whose
// centres fall in [start, end) of each segment. Features are ordered ROI,
// then band, then segment.
inline FeatureTable band_roi_power(const PowerMap& p, const std::vector<Band>& bands, const std::vector<Roi>& rois,
                                   const std::vector<Segment>& segments) {
  std::vector<std::vector<std::size_t>> band_bins;
  for (const auto& b : bands) {
    std::vector<std::size_t> bins;
    for (std::size_t f = 0; f < p.freqs_hz.size(); ++f) {
      if (p.freqs_hz[f] >= b.lo_hz && p.freqs_hz[f] <= b.hi_hz) bins.push_back(f);
    }
    if (bins.empty()) throw InputError("band '" + b.name + "' contains no frequency bins at this resolution");
    band_bins.push_back(std::move(bins));
  }
  std::vector<std::vector<std::size_t>> roi_channels;
  for (const auto& r : rois) {
    detail::require(!r.channels.empty(), "ROI '" + r.name + "' lists no channels");
    std::vector<std::size_t> idx;
    for (const auto& ch : r.channels) {
      const auto it = std::find(p.channels.begin(), p.channels.end(), ch);
      if (it == p.channels.end()) throw InputError("ROI '" + r.name + "': channel '" + ch + "' is not in the montage");
      idx.push_back(static_cast<std::size_t>(it - p.channels.begin()));
    }
    roi_channels.push_back(std::move(idx));
  }
  std::vector<std::vector<std::size_t>> seg_windows;
  for (const auto& s : segments) {
    std::vector<std::size_t> idx;
    for (std::size_t w = 0; w < p.times_ms.size(); ++w) {
      if (p.times_ms[w] >= s.start_ms && p.times_ms[w] < s.end_ms) idx.push_back(w);
    }
    if (idx.empty()) {
      throw InputError("segment " + csv::format_double(s.start_ms) + "-" + csv::format_double(s.end_ms) +
                       " ms contains no window centres");
    }
    seg_windows.push_back(std::move(idx));
  }

  FeatureTable ft;
  ft.trial_ids = p.trial_ids;
  for (const auto& r : rois) {
    for (const auto& b : bands) {
      for (const auto& s : segments) ft.names.push_back(feature_name(r, b, s));
    }
  }
  ft.values.assign(p.trial_ids.size(), {});
  for (std::size_t t = 0; t < p.trial_ids.size(); ++t) {
    auto& row = ft.values[t];
    for (std::size_t r = 0; r < rois.size(); ++r) {
      for (std::size_t b = 0; b < bands.size(); ++b) {
        for (std::size_t s = 0; s < segments.size(); ++s) {
          double sum = 0.0;
          for (auto c : roi_channels[r]) {
            for (auto f : band_bins[b]) {
              for (auto w : seg_windows[s]) sum += p.at(t, c, f, w);
            }
          }
          row.push_back(sum / static_cast<double>(roi_channels[r].size() * band_bins[b].size() * seg_windows[s].size()));
        }
      }
    }
  }
  return ft;
}

// Joins features to trial labels by trial id, replaces outliers per feature
// column within each participant, and returns a trial set whose `feature`
// is the named column and whose extra columns hold every feature.
inline TrialSet features_to_trials(const FeatureTable& ft, const std::map<std::string, Trial>& labels,
                                   const std::string& primary) {
  detail::require(!ft.names.empty(), "feature table is empty");
  const auto primary_it = std::find(ft.names.begin(), ft.names.end(), primary);
  if (primary_it == ft.names.end()) throw InputError("no feature named '" + primary + "'");
  const auto primary_idx = static_cast<std::size_t>(primary_it - ft.names.begin());

  TrialSet ts;
  ts.extra_columns = ft.names;
  std::vector<std::vector<double>> values = ft.values;
  std::map<std::string, std::vector<std::size_t>> by_participant;
  for (std::size_t i = 0; i < ft.trial_ids.size(); ++i) {
    const auto it = labels.find(ft.trial_ids[i]);
    if (it == labels.end()) throw InputError("trial " + ft.trial_ids[i] + " has no condition/response labels");
    Trial t = it->second;
    t.extra.clear();
    by_participant[t.participant_id].push_back(i);
    ts.trials.push_back(std::move(t));
  }
  for (const auto& [pid, rows] : by_participant) {
    for (std::size_t f = 0; f < ft.names.size(); ++f) {
      std::vector<double> col;
      for (auto i : rows) col.push_back(values[i][f]);
      std::vector<double> fixed;
      try {
        fixed = replace_outliers(col);
      } catch (const InputError& e) {
        throw InputError("participant " + pid + ", feature " + ft.names[f] + ": " + e.what());
      }
      for (std::size_t j = 0; j < rows.size(); ++j) values[rows[j]][f] = fixed[j];
    }
  }
  for (std::size_t i = 0; i < ts.trials.size(); ++i) {
    ts.trials[i].feature = values[i][primary_idx];
    for (double v : values[i]) ts.trials[i].extra.push_back(csv::format_double(v));
  }
  ts.metadata["feature_column"] = primary;
  return ts;
}

// --- file formats ---------------------------------------------------------------

// `time_s,<ch1>,<ch2>,...`; the sample rate comes from the time column.
inline MultiSignal load_signal(const std::string& path) {
  const auto t = csv::read_file(path);
  detail::require(!t.header.empty() && t.header[0] == "time_s", path + ": first column must be time_s");
  detail::require(t.header.size() >= 2, path + ": no channel columns");
  detail::require(t.rows.size() >= 2, path + ": need at least two samples");
  MultiSignal s;
  s.channels.assign(t.header.begin() + 1, t.header.end());
  s.data.assign(s.channels.size(), {});
  std::vector<double> times;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      const auto v = csv::parse_double(t.rows[r][c]);
      if (!v) {
        throw InputError(path + ":" + std::to_string(t.line_numbers[r]) + ": column '" + t.header[c] +
                         "': not a number: '" + t.rows[r][c] + "'");
      }
      if (c == 0) {
        times.push_back(*v);
      } else {
        s.data[c - 1].push_back(*v);
      }
    }
  }
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  detail::require(dt > 0.0, path + ": time_s must increase");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::fabs((times[i] - times[i - 1]) - dt) > 1e-3 * dt) {
      throw InputError(path + ":" + std::to_string(t.line_numbers[i]) + ": irregular sampling in time_s");
    }
  }
  s.sample_rate = std::round(1.0 / dt * 1e6) / 1e6;
  return s;
}

struct EventFile {
  std::vector<Event> events;
  std::map<std::string, Trial> labels;  // by trial id; empty when the file carries no labels
};

// `sample_index,kind,trial_id` plus optional participant_id, condition,
// response, rating, rt_ms and scene_id columns. Labels are read from the rows
// that carry them.
inline EventFile load_events(const std::string& path) {
  const auto t = csv::read_file(path);
  for (const char* c : {"sample_index", "kind", "trial_id"}) {
    if (!t.column(c)) throw InputError(path + ": missing required column '" + c + "'");
  }
  const auto c_idx = *t.column("sample_index"), c_kind = *t.column("kind"), c_tid = *t.column("trial_id");
  const auto c_pid = t.column("participant_id"), c_cond = t.column("condition"), c_resp = t.column("response");
  const auto c_rating = t.column("rating"), c_rt = t.column("rt_ms"), c_scene = t.column("scene_id");
  const bool labelled = c_pid && c_cond && c_resp;
  EventFile ef;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto where = [&](const char* col) {
      return path + ":" + std::to_string(t.line_numbers[r]) + ": column '" + col + "'";
    };
    Event e;
    const auto idx = csv::parse_double(row[c_idx]);
    if (!idx || *idx < 0 || std::floor(*idx) != *idx) {
      throw InputError(where("sample_index") + ": expected a non-negative integer, got '" + row[c_idx] + "'");
    }
    e.sample_index = static_cast<std::int64_t>(*idx);
    try {
      e.kind = parse_event_kind(row[c_kind]);
    } catch (const InputError& err) {
      throw InputError(where("kind") + ": " + err.what());
    }
    e.trial_id = row[c_tid];
    if (e.trial_id.empty()) throw InputError(where("trial_id") + ": empty");
    ef.events.push_back(e);

    if (!labelled || row[*c_cond].empty()) continue;
    Trial tr;
    tr.participant_id = row[*c_pid];
    tr.trial_id = e.trial_id;
    if (c_scene) tr.scene_id = row[*c_scene];
    const auto cond = parse_condition(row[*c_cond]);
    if (!cond) throw InputError(where("condition") + ": unknown label '" + row[*c_cond] + "'");
    const auto resp = parse_condition(row[*c_resp]);
    if (!resp) throw InputError(where("response") + ": unknown label '" + row[*c_resp] + "'");
    tr.condition = *cond;
    tr.response = *resp;
    if (c_rating && !row[*c_rating].empty()) {
      const auto g = parse_grade(row[*c_rating]);
      if (!g) throw InputError(where("rating") + ": unknown rating '" + row[*c_rating] + "'");
      tr.rating = *g;
    }
    if (c_rt && !row[*c_rt].empty()) {
      const auto v = csv::parse_double(row[*c_rt]);
      if (!v || *v <= 0.0) throw InputError(where("rt_ms") + ": expected a positive number");
      tr.rt_ms = *v;
    }
    ef.labels[tr.trial_id] = std::move(tr);
  }
  return ef;
}

}  // namespace neurosdt
