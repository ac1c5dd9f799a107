#include "noiseflood/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <set>

#include "noiseflood/csv.hpp"
#include "noiseflood/errors.hpp"

namespace nflood {
namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string fixed_or_undefined(const std::optional<double>& v, int digits) {
  return v ? fixed(*v, digits) : "undefined";
}

}  // namespace

std::optional<double> ConfusionCounts::precision() const noexcept {
  if (tp + fp == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

std::optional<double> ConfusionCounts::recall() const noexcept {
  if (tp + fn == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double ConfusionCounts::f1() const noexcept {
  // 2PR/(P+R) reduces to 2tp/(2tp+fp+fn); one division keeps equal ratios
  // bit-identical.
  if (tp == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

std::optional<double> RecallMatrix::Cell::recall() const noexcept {
  if (total == 0) return std::nullopt;
  return static_cast<double>(detected) / static_cast<double>(total);
}

std::optional<int> RecallMatrix::Cell::percent() const noexcept {
  if (total == 0) return std::nullopt;
  return static_cast<int>((200 * detected + total) / (2 * total));
}

const RecallMatrix::Cell& RecallMatrix::at(const Label& source, const Label& target) const {
  auto index = [&](const Label& l) {
    auto it = std::lower_bound(labels.begin(), labels.end(), l);
    if (it == labels.end() || *it != l) throw DataError("label '" + l + "' not in matrix");
    return static_cast<std::size_t>(it - labels.begin());
  };
  return cells[index(source)][index(target)];
}

ConfusionCounts confusion(const DetectorFn& detector, std::span<const ScoreVector> test) {
  ConfusionCounts c;
  for (const auto& v : test) {
    if (!v.is_adversarial) throw DataError("test row '" + v.id + "' has no ground truth");
    const bool declared = detector(v);
    if (*v.is_adversarial) {
      (declared ? c.tp : c.fn)++;
    } else {
      (declared ? c.fp : c.tn)++;
    }
  }
  return c;
}

EvalReport evaluate(const DetectorFn& detector, std::span<const ScoreVector> test,
                    const std::string& name) {
  if (test.empty()) throw DataError("evaluation needs a non-empty test set");
  EvalReport report;
  report.detector = name;
  report.counts = confusion(detector, test);
  report.precision = report.counts.precision();
  report.recall = report.counts.recall();
  report.f1 = report.counts.f1();

  const bool labelled = std::all_of(test.begin(), test.end(), [](const ScoreVector& v) {
    return !*v.is_adversarial || (v.source && v.target);
  });
  if (labelled && report.counts.tp + report.counts.fn > 0) report.matrix = recall_matrix(detector, test);
  return report;
}

RecallMatrix recall_matrix(const DetectorFn& detector, std::span<const ScoreVector> test) {
  std::set<Label> labels;
  for (const auto& v : test) {
    if (!v.is_adversarial) throw DataError("test row '" + v.id + "' has no ground truth");
    if (!*v.is_adversarial) continue;
    if (!v.source || !v.target) {
      throw DataError("adversarial row '" + v.id + "' lacks source/target labels");
    }
    if (*v.source == *v.target) {
      throw DataError("adversarial row '" + v.id + "' has source == target");
    }
    labels.insert(*v.source);
    labels.insert(*v.target);
  }
  RecallMatrix m;
  m.labels.assign(labels.begin(), labels.end());
  m.cells.assign(m.labels.size(), std::vector<RecallMatrix::Cell>(m.labels.size()));
  for (const auto& v : test) {
    if (!*v.is_adversarial) continue;
    const auto s = std::lower_bound(m.labels.begin(), m.labels.end(), *v.source) - m.labels.begin();
    const auto t = std::lower_bound(m.labels.begin(), m.labels.end(), *v.target) - m.labels.begin();
    auto& cell = m.cells[s][t];
    ++cell.total;
    if (detector(v)) ++cell.detected;
  }
  return m;
}

void write_report(const EvalReport& report, std::ostream& out) {
  out << "detector: " << report.detector << '\n';
  if (!report.config_hash.empty()) out << "config_hash: " << report.config_hash << '\n';
  out << "examples: " << report.counts.total() << '\n';
  out << "tp: " << report.counts.tp << '\n';
  out << "fp: " << report.counts.fp << '\n';
  out << "tn: " << report.counts.tn << '\n';
  out << "fn: " << report.counts.fn << '\n';
  out << "precision: " << fixed_or_undefined(report.precision, 6) << '\n';
  out << "recall: " << fixed_or_undefined(report.recall, 6) << '\n';
  out << "f1: " << fixed(report.f1, 6) << '\n';
}

void write_matrix_csv(const RecallMatrix& matrix, std::ostream& out, bool raw) {
  std::vector<std::string> header{"source\\target"};
  header.insert(header.end(), matrix.labels.begin(), matrix.labels.end());
  out << csv::join_record(header) << '\n';
  for (std::size_t s = 0; s < matrix.labels.size(); ++s) {
    std::vector<std::string> row{matrix.labels[s]};
    for (std::size_t t = 0; t < matrix.labels.size(); ++t) {
      const auto& cell = matrix.cells[s][t];
      if (cell.total == 0) {
        row.emplace_back();
      } else if (raw) {
        row.push_back(fixed(*cell.recall(), 6));
      } else {
        row.push_back(std::to_string(*cell.percent()));
      }
    }
    out << csv::join_record(row) << '\n';
  }
}

void write_comparison_csv(std::span<const EvalReport> reports, std::ostream& out) {
  out << "method,precision,recall,f1\n";
  auto percent = [](const std::optional<double>& v) {
    return v ? fixed(100.0 * *v, 1) : std::string("undefined");
  };
  for (const auto& r : reports) {
    out << csv::join_record({r.detector, percent(r.precision), percent(r.recall), fixed(r.f1, 3)})
        << '\n';
  }
}

}  // namespace nflood
