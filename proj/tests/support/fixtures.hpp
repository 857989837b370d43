#pragma once

// Synthetic inputs shared by the unit tests and the acceptance run.

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "neurosdt/lpa.hpp"
#include "neurosdt/random.hpp"
#include "neurosdt/tfr.hpp"
#include "neurosdt/voting.hpp"

namespace fixture {

inline constexpr std::size_t kProfileRows = 70;
inline constexpr std::size_t kGoodRows = 52;  // 74.3% of 70
inline constexpr std::size_t kProfileCols = 5;

inline std::string row_id(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "P%02zu", i + 1);
  return buf;
}

// 52 "good" rows around 0.85 and 18 "bad" rows around 0.75 on five accuracy
// columns, within-class SD 0.05. Good rows come first.
inline neurosdt::AccuracyMatrix two_profiles(std::uint64_t seed, double separation_sd = 2.0, double sd = 0.05) {
  neurosdt::Rng rng(seed, 0);
  neurosdt::AccuracyMatrix m;
  for (std::size_t c = 0; c < kProfileCols; ++c) m.columns.push_back("type" + std::to_string(c + 1));
  for (std::size_t i = 0; i < kProfileRows; ++i) {
    const double centre = i < kGoodRows ? 0.75 + separation_sd * sd : 0.75;
    std::vector<double> row;
    for (std::size_t c = 0; c < kProfileCols; ++c) row.push_back(rng.normal(centre, sd));
    m.row_ids.push_back(row_id(i));
    m.values.push_back(row);
  }
  return m;
}

inline neurosdt::AccuracyMatrix one_profile(std::uint64_t seed, double sd = 0.05) {
  neurosdt::Rng rng(seed, 1);
  neurosdt::AccuracyMatrix m;
  for (std::size_t c = 0; c < kProfileCols; ++c) m.columns.push_back("type" + std::to_string(c + 1));
  for (std::size_t i = 0; i < kProfileRows; ++i) {
    std::vector<double> row;
    for (std::size_t c = 0; c < kProfileCols; ++c) row.push_back(rng.normal(0.8, sd));
    m.row_ids.push_back(row_id(i));
    m.values.push_back(row);
  }
  return m;
}

// A recording where `sine_channels` carry amplitude * sin(2 pi f t) and all
// other channels are zero. One stimulus event per trial, spaced 2 s apart,
// starting 1 s in.
inline neurosdt::MultiSignal sine_recording(const std::vector<std::string>& channels,
                                            const std::vector<std::string>& sine_channels, double freq_hz,
                                            double amplitude = 1.0, std::size_t n_trials = 3, double fs = 250.0) {
  neurosdt::MultiSignal s;
  s.sample_rate = fs;
  s.channels = channels;
  const auto total = static_cast<std::size_t>((2.0 * static_cast<double>(n_trials) + 1.0) * fs);
  for (const auto& ch : channels) {
    std::vector<double> data(total, 0.0);
    if (std::find(sine_channels.begin(), sine_channels.end(), ch) != sine_channels.end()) {
      for (std::size_t i = 0; i < total; ++i) {
        data[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / fs);
      }
    }
    s.data.push_back(std::move(data));
  }
  for (std::size_t t = 0; t < n_trials; ++t) {
    neurosdt::Event e;
    e.sample_index = static_cast<std::int64_t>((1.0 + 2.0 * static_cast<double>(t)) * fs);
    e.kind = neurosdt::EventKind::StimulusOnset;
    e.trial_id = std::to_string(t + 1);
    s.events.push_back(e);
  }
  return s;
}

inline std::vector<std::string> standard_montage() {
  std::vector<std::string> out;
  for (const auto& roi : neurosdt::default_rois()) out.insert(out.end(), roi.channels.begin(), roi.channels.end());
  return out;
}

inline std::vector<std::string> parietal_channels() {
  for (const auto& roi : neurosdt::default_rois()) {
    if (roi.name == "parietal") return roi.channels;
  }
  return {};
}

// Three identical observers with d' = 1 and a neutral criterion.
inline std::vector<neurosdt::Agent> iid_agents(std::size_t n = 3, bool with_criteria = false) {
  std::vector<neurosdt::Agent> out;
  for (std::size_t i = 0; i < n; ++i) {
    neurosdt::Agent a;
    a.id = "agent" + std::to_string(i + 1);
    a.model = neurosdt::make_model(1.0, 0.0, 1.0);
    if (with_criteria) a.criteria = neurosdt::CriteriaSet({-0.5, 0.0, 0.5, 1.0, 1.5});
    out.push_back(a);
  }
  return out;
}

}  // namespace fixture
