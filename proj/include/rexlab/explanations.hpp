#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "rexlab/pricing.hpp"

#include <json.hpp>

namespace rexlab {

enum class TransportMode { private_taxi = 0, public_transit = 1 };
enum class Criterion { cost = 0, time = 1 };
enum class Visualization { absolute = 0, relative = 1 };
enum class Anchor { shared_perspective = 0, alternative_perspective = 1 };

inline constexpr int kCo2Index = 16;
inline constexpr int kDescriptorCount = 17;

/// A point in the explanation taxonomy: 16 comparative combinations
/// (mode x criterion x visualization x anchor) plus the CO2 explanation.
struct ExplanationDescriptor {
  enum class Kind { comparative, co2 };

  Kind kind = Kind::comparative;
  TransportMode mode = TransportMode::private_taxi;
  Criterion criterion = Criterion::cost;
  Visualization visualization = Visualization::absolute;
  Anchor anchor = Anchor::shared_perspective;

  int index() const {
    if (kind == Kind::co2) return kCo2Index;
    return 8 * static_cast<int>(mode) + 4 * static_cast<int>(criterion) +
           2 * static_cast<int>(visualization) + static_cast<int>(anchor);
  }

  static ExplanationDescriptor from_index(int idx) {
    if (idx < 0 || idx >= kDescriptorCount) {
      throw input_error("descriptor index " + std::to_string(idx) + " outside [0, 16]");
    }
    ExplanationDescriptor d;
    if (idx == kCo2Index) {
      d.kind = Kind::co2;
      return d;
    }
    d.kind = Kind::comparative;
    d.mode = static_cast<TransportMode>((idx >> 3) & 1);
    d.criterion = static_cast<Criterion>((idx >> 2) & 1);
    d.visualization = static_cast<Visualization>((idx >> 1) & 1);
    d.anchor = static_cast<Anchor>(idx & 1);
    return d;
  }

  friend bool operator==(const ExplanationDescriptor& a, const ExplanationDescriptor& b) {
    return a.index() == b.index();
  }
};

/// True when the two descriptors form an anchoring pair: identical except for
/// the perspective they are phrased from.
inline bool anchor_only_difference(const ExplanationDescriptor& a,
                                   const ExplanationDescriptor& b) {
  if (a.kind != ExplanationDescriptor::Kind::comparative ||
      b.kind != ExplanationDescriptor::Kind::comparative) {
    return false;
  }
  return a.mode == b.mode && a.criterion == b.criterion && a.visualization == b.visualization &&
         a.anchor != b.anchor;
}

inline std::vector<ExplanationDescriptor> enumerate_descriptors() {
  std::vector<ExplanationDescriptor> all;
  all.reserve(kDescriptorCount);
  for (int i = 0; i < kDescriptorCount; ++i) all.push_back(ExplanationDescriptor::from_index(i));
  return all;
}

/// The unit of explanation selection: one passenger's quotes.
struct Scenario {
  int scenario_id = 0;
  TripQuote quote;
};

/// The six descriptors available to the trained selector, in label order.
struct SelectionSubset {
  std::array<int, 6> indices{};

  // Built from the reported selection procedure: the preferred presentation
  // per information setting, a second one for the most popular setting, plus
  // the CO2 explanation.
  static SelectionSubset default_subset() { return {{0, 3, 4, 12, 11, 16}}; }

  void validate() const {
    for (int idx : indices) {
      if (idx < 0 || idx >= kDescriptorCount) {
        throw input_error("selection subset: index " + std::to_string(idx) + " outside [0, 16]");
      }
    }
    auto sorted = indices;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw input_error("selection subset: duplicate descriptor index");
    }
  }

  ExplanationDescriptor descriptor(int slot) const {
    return ExplanationDescriptor::from_index(indices.at(static_cast<std::size_t>(slot)));
  }
};

struct RenderedExplanation {
  ExplanationDescriptor descriptor;
  double value = 0.0;  // signed; >= 0 means the shared ride is favourable
  std::string text;
};

/// The seven model inputs: shared cost/time, signed alternative-minus-shared
/// differences, and the CO2 saving.
struct FeatureVector {
  double shared_cost_usd = 0.0;
  double shared_time_min = 0.0;
  double private_cost_diff_usd = 0.0;
  double private_time_diff_min = 0.0;
  double public_cost_diff_usd = 0.0;
  double public_time_diff_min = 0.0;
  double co2_saved_kg = 0.0;

  std::array<double, 7> as_array() const {
    return {shared_cost_usd,      shared_time_min,      private_cost_diff_usd,
            private_time_diff_min, public_cost_diff_usd, public_time_diff_min,
            co2_saved_kg};
  }
};

inline FeatureVector extract_features(const Scenario& s) {
  const TripQuote& q = s.quote;
  FeatureVector f;
  f.shared_cost_usd = q.shared_cost_usd;
  f.shared_time_min = q.shared_time_min;
  f.private_cost_diff_usd = q.private_cost_usd - q.shared_cost_usd;
  f.private_time_diff_min = q.private_time_min - q.shared_time_min;
  f.public_cost_diff_usd = q.public_cost_usd - q.shared_cost_usd;
  f.public_time_diff_min = q.public_time_min - q.shared_time_min;
  f.co2_saved_kg = q.co2_saved_kg;
  return f;
}

/// Signed comparison value. Absolute: alternative - shared (USD or minutes).
/// Relative: (alternative - shared) / denominator * 100, where the denominator
/// is the shared value under alternative-perspective anchoring and the
/// alternative value under shared-perspective anchoring. CO2: kilograms saved.
inline double compute_value(const ExplanationDescriptor& d, const Scenario& s) {
  const TripQuote& q = s.quote;
  if (d.kind == ExplanationDescriptor::Kind::co2) return q.co2_saved_kg;

  double shared, alternative;
  if (d.criterion == Criterion::cost) {
    shared = q.shared_cost_usd;
    alternative =
        d.mode == TransportMode::private_taxi ? q.private_cost_usd : q.public_cost_usd;
  } else {
    shared = q.shared_time_min;
    alternative =
        d.mode == TransportMode::private_taxi ? q.private_time_min : q.public_time_min;
  }
  const double diff = alternative - shared;
  if (d.visualization == Visualization::absolute) return diff;

  const double denominator = d.anchor == Anchor::alternative_perspective ? shared : alternative;
  if (!(denominator > 0.0)) {
    throw value_error("relative explanation undefined: denominator is not positive (descriptor " +
                      std::to_string(d.index()) + ")");
  }
  return diff / denominator * 100.0;
}

// ---------------------------------------------------------------------------
// Fixed-template rendering.
//
// Money is printed with two decimals, trailing zeros trimmed ("6.30" -> "6.3",
// "5.03" stays). Percentages truncate toward zero to an integer; minutes round
// to the nearest integer; kilograms keep two decimals.

inline std::string format_money(double amount) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", std::abs(amount));
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  return s;
}

inline std::string format_percent(double value) {
  return std::to_string(static_cast<long long>(std::trunc(std::abs(value))));
}

inline std::string format_minutes(double value) {
  return std::to_string(std::llround(std::abs(value)));
}

inline std::string format_kg(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", std::abs(value));
  return buf;
}

/// Template strings per descriptor, one favourable and one unfavourable
/// wording. `{value}` is replaced by the formatted magnitude; the sign of the
/// computed value picks the wording.
struct TemplateTable {
  struct Entry {
    std::string favorable;
    std::string unfavorable;
  };
  std::array<Entry, kDescriptorCount> entries;
};

inline const TemplateTable& default_templates() {
  static const TemplateTable table = [] {
    TemplateTable t;
    auto set = [&](int idx, const char* fav, const char* unfav) {
      t.entries[static_cast<std::size_t>(idx)] = {fav, unfav};
    };
    set(0, "The shared ride saved you ${value} over a private taxi.",
        "The shared ride cost you only ${value} more than a private taxi.");
    set(1, "A private taxi would have cost ${value} more.",
        "A private taxi would have saved you only ${value}.");
    set(2, "The shared ride saved you {value}% of the private taxi price.",
        "The shared ride cost you only {value}% more than a private taxi.");
    set(3, "A private taxi would have cost {value}% more.",
        "A private taxi would have cost only {value}% less.");
    set(4, "The shared ride saved you {value} minutes over a private taxi.",
        "The shared ride took only {value} minutes longer than a private taxi.");
    set(5, "A private taxi would have taken {value} minutes longer.",
        "A private taxi would have saved you only {value} minutes.");
    set(6, "The shared ride saved you {value}% of the private taxi time.",
        "The shared ride took only {value}% longer than a private taxi.");
    set(7, "A private taxi would have taken {value}% longer.",
        "A private taxi would have taken only {value}% less time.");
    set(8, "The shared ride saved you ${value} over public transportation.",
        "The shared ride cost you only ${value} more than public transportation.");
    set(9, "A ride by public transportation would have cost ${value} more.",
        "A ride by public transportation would have saved you only ${value}.");
    set(10, "The shared ride saved you {value}% of the public transportation fare.",
        "The shared ride cost you only {value}% more than public transportation.");
    set(11, "Public transportation would have cost {value}% more.",
        "Public transportation would have cost only {value}% less.");
    set(12, "The shared ride saved you {value} minutes over public transportation.",
        "The shared ride took only {value} minutes longer than public transportation.");
    set(13, "Public transportation would have taken {value} minutes longer.",
        "Public transportation would have saved you only {value} minutes.");
    set(14, "The shared ride saved you {value}% of the public transportation time.",
        "The shared ride took only {value}% longer than public transportation.");
    set(15, "Public transportation would have taken {value}% longer.",
        "Public transportation would have taken only {value}% less time.");
    set(kCo2Index, "The shared ride saved you {value} kg of CO2 emissions.",
        "The shared ride saved you {value} kg of CO2 emissions.");
    return t;
  }();
  return table;
}

inline TemplateTable load_templates(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("template table: ") + e.what());
  }
  if (!doc.contains("version") || doc["version"] != 1) {
    throw version_error("template table: unsupported version");
  }
  TemplateTable t;
  const auto& entries = doc.at("templates");
  for (int i = 0; i < kDescriptorCount; ++i) {
    const std::string key = std::to_string(i);
    if (!entries.contains(key)) throw parse_error("template table: missing entry " + key);
    t.entries[static_cast<std::size_t>(i)] = {entries[key].at("favorable").get<std::string>(),
                                              entries[key].at("unfavorable").get<std::string>()};
  }
  return t;
}

inline void save_templates(const TemplateTable& t, std::ostream& out) {
  nlohmann::json entries;
  for (int i = 0; i < kDescriptorCount; ++i) {
    entries[std::to_string(i)] = {{"favorable", t.entries[static_cast<std::size_t>(i)].favorable},
                                  {"unfavorable", t.entries[static_cast<std::size_t>(i)].unfavorable}};
  }
  out << nlohmann::json{{"version", 1}, {"templates", entries}}.dump(2) << "\n";
}

inline std::string substitute_value(std::string text, const std::string& value) {
  const std::string placeholder = "{value}";
  const auto pos = text.find(placeholder);
  if (pos != std::string::npos) text.replace(pos, placeholder.size(), value);
  return text;
}

inline RenderedExplanation render(const ExplanationDescriptor& d, const Scenario& s,
                                  const TemplateTable& table = default_templates()) {
  const double value = compute_value(d, s);
  const auto& entry = table.entries[static_cast<std::size_t>(d.index())];
  const std::string& tmpl = value >= 0.0 ? entry.favorable : entry.unfavorable;

  std::string formatted;
  if (d.kind == ExplanationDescriptor::Kind::co2) {
    formatted = format_kg(value);
  } else if (d.visualization == Visualization::relative) {
    formatted = format_percent(value);
  } else if (d.criterion == Criterion::cost) {
    formatted = format_money(value);
  } else {
    formatted = format_minutes(value);
  }
  return {d, value, substitute_value(tmpl, formatted)};
}

// ---------------------------------------------------------------------------
// Scenario CSV.

inline constexpr const char* kScenariosCsvHeader =
    "scenario_id,shared_cost_usd,shared_time_min,private_cost_usd,private_time_min,"
    "public_cost_usd,public_time_min,co2_saved_kg";

inline std::vector<Scenario> load_scenarios(std::istream& in) {
  std::vector<Scenario> out;
  read_csv(in, kScenariosCsvHeader, "scenarios",
           [&](int line_no, const std::vector<std::string>& f) {
             const std::string where = "scenarios line " + std::to_string(line_no);
             if (f.size() != 8) {
               throw parse_error(where + ": expected 8 fields, got " + std::to_string(f.size()));
             }
             Scenario s;
             s.scenario_id = static_cast<int>(parse_int(f[0], where));
             s.quote.shared_cost_usd = parse_double(f[1], where);
             s.quote.shared_time_min = parse_double(f[2], where);
             s.quote.private_cost_usd = parse_double(f[3], where);
             s.quote.private_time_min = parse_double(f[4], where);
             s.quote.public_cost_usd = parse_double(f[5], where);
             s.quote.public_time_min = parse_double(f[6], where);
             s.quote.co2_saved_kg = parse_double(f[7], where);
             out.push_back(s);
           });
  return out;
}

inline void save_scenarios(const std::vector<Scenario>& scenarios, std::ostream& out) {
  out << kScenariosCsvHeader << "\n";
  for (const Scenario& s : scenarios) {
    const TripQuote& q = s.quote;
    out << s.scenario_id << ',' << double_to_string(q.shared_cost_usd) << ','
        << double_to_string(q.shared_time_min) << ',' << double_to_string(q.private_cost_usd)
        << ',' << double_to_string(q.private_time_min) << ','
        << double_to_string(q.public_cost_usd) << ',' << double_to_string(q.public_time_min)
        << ',' << double_to_string(q.co2_saved_kg) << "\n";
  }
}

}  // namespace rexlab
