#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "noiseflood/flooding.hpp"

namespace nflood {

/// Adversarial is the positive class.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  /// Empty when tp + fp == 0.
  std::optional<double> precision() const noexcept;
  /// Empty when tp + fn == 0.
  std::optional<double> recall() const noexcept;
  /// 2PR/(P+R); 0 when either is undefined or P + R == 0.
  double f1() const noexcept;

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

using DetectorFn = std::function<bool(const ScoreVector&)>;

/// Source-by-target recall over adversarial rows.
struct RecallMatrix {
  std::vector<Label> labels;  ///< sorted union of sources and targets
  struct Cell {
    std::size_t detected = 0;
    std::size_t total = 0;
    std::optional<double> recall() const noexcept;
    /// Percentage rounded half up; empty when the cell has no examples.
    std::optional<int> percent() const noexcept;
  };
  /// cells[source][target]; the diagonal never has examples.
  std::vector<std::vector<Cell>> cells;

  const Cell& at(const Label& source, const Label& target) const;
};

struct EvalReport {
  std::string detector;
  std::string config_hash;
  ConfusionCounts counts;
  std::optional<double> precision;
  std::optional<double> recall;
  double f1 = 0.0;
  std::optional<RecallMatrix> matrix;
};

ConfusionCounts confusion(const DetectorFn& detector, std::span<const ScoreVector> test);

/// Throws DataError when `test` is empty or any row lacks ground truth.
EvalReport evaluate(const DetectorFn& detector, std::span<const ScoreVector> test,
                    const std::string& name = {});

/// Throws DataError when an adversarial row lacks source/target labels or
/// names the same label twice.
RecallMatrix recall_matrix(const DetectorFn& detector,
                           std::span<const ScoreVector> test);

/// Key/value text report.
void write_report(const EvalReport& report, std::ostream& out);
/// Rows are sources, columns are targets. Percent integers, or raw fractions
/// when `raw` is set. Empty cells (including the diagonal) are left blank.
void write_matrix_csv(const RecallMatrix& matrix, std::ostream& out, bool raw = false);
/// Table-style comparison: method,precision,recall,f1.
void write_comparison_csv(std::span<const EvalReport> reports, std::ostream& out);

}  // namespace nflood
