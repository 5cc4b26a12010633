#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "persona/linalg.hpp"

namespace persona {

// Canonical order; used for every label-matrix column layout.
enum class Label : std::uint8_t {
  Experiences = 0,
  Characteristics = 1,
  RoutinesOrHabits = 2,
  GoalsOrPlans = 3,
  Relationship = 4,
};

inline constexpr std::size_t kLabelCount = 5;

inline constexpr std::array<Label, kLabelCount> kAllLabels = {
    Label::Experiences, Label::Characteristics, Label::RoutinesOrHabits,
    Label::GoalsOrPlans, Label::Relationship};

// External spelling, e.g. "Routines or Habits".
std::string_view label_name(Label label);
std::optional<Label> parse_label(std::string_view name);

class LabelSet {
 public:
  LabelSet() = default;
  LabelSet(std::initializer_list<Label> labels);

  void insert(Label label) { bits_ |= bit(label); }
  bool contains(Label label) const { return (bits_ & bit(label)) != 0; }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const;
  std::vector<Label> to_vector() const;  // canonical order
  std::uint8_t bits() const { return bits_; }

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  static std::uint8_t bit(Label label) {
    return static_cast<std::uint8_t>(1U << static_cast<unsigned>(label));
  }
  std::uint8_t bits_ = 0;
};

struct PersonaRecord {
  std::string id;
  std::string text;
  LabelSet labels;

  friend bool operator==(const PersonaRecord&, const PersonaRecord&) = default;
};

enum class SplitTag { Train, Test };

struct Dataset {
  std::vector<PersonaRecord> records;
  SplitTag split = SplitTag::Train;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  std::vector<std::string> ids() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct LabelStats {
  std::array<std::size_t, kLabelCount> per_label{};
  std::size_t overall = 0;

  std::size_t count(Label label) const { return per_label[static_cast<std::size_t>(label)]; }
};

// Throws DataError on malformed lines (with 1-based line numbers), unknown or
// duplicate labels, empty label sets, empty text, and duplicate ids.
Dataset load_jsonl(const std::filesystem::path& path, SplitTag split = SplitTag::Train);
Dataset parse_jsonl(std::istream& in, SplitTag split = SplitTag::Train);
void write_jsonl(std::ostream& out, const Dataset& ds);
void save_jsonl(const std::filesystem::path& path, const Dataset& ds);

// Checks record invariants and id uniqueness; throws DataError.
void validate(const Dataset& ds);

LabelStats label_stats(const Dataset& ds);

// ceil(fraction * n) distinct indices in ascending order, uniform under seed.
std::vector<NodeIndex> subsample_indices(std::size_t n, double fraction, std::uint64_t seed);

// Records keep their original relative order. fraction == 1 returns ds as is.
Dataset subsample_fraction(const Dataset& ds, double fraction, std::uint64_t seed);

LabelMatrix labels_to_matrix(const Dataset& ds);

struct HoldoutSplit {
  std::vector<NodeIndex> train;  // ascending
  std::vector<NodeIndex> test;   // ascending, ceil(test_fraction * n) rows
};

// Seeded uniform holdout; test_fraction in (0, 1).
HoldoutSplit holdout_split(std::size_t n, double test_fraction, std::uint64_t seed);

// Concatenates records (train first, then test) into one node set.
Dataset concat(const Dataset& first, const Dataset& second);

}  // namespace persona
