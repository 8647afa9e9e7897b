#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "synaudit/attacks.hpp"
#include "synaudit/common.hpp"

namespace synaudit {

// ---------------------------------------------------------------------------
// Labeled scores & reports
// ---------------------------------------------------------------------------

/// Attack scores with ground-truth membership bits (1 = training member).
struct LabeledScores {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;

  void check() const {
    if (scores.size() != labels.size())
      throw EvalError("labeled scores: length mismatch (" + std::to_string(scores.size()) +
                      " scores, " + std::to_string(labels.size()) + " labels)");
  }

  std::size_t positives() const {
    std::size_t p = 0;
    for (auto b : labels) p += b ? 1 : 0;
    return p;
  }
};

struct EvalReport {
  double auc = 0.0;
  std::map<double, double> tpr_at_fpr;
  double accuracy_median = 0.0;
  AttackId attack = AttackId::gen_lra;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["attack"] = std::string(attack_name(attack));
    j["params"] = params;
    j["seed"] = seed;
    j["auc"] = auc;
    nlohmann::json tpr = nlohmann::json::object();
    for (const auto& [level, value] : tpr_at_fpr) tpr[format_numeric(level)] = value;
    j["tpr_at_fpr"] = tpr;
    j["accuracy_median"] = accuracy_median;
    return j;
  }

  static EvalReport from_json(const nlohmann::json& j) {
    EvalReport r;
    auto id = attack_from_name(j.at("attack").get<std::string>());
    if (!id) throw Error("unknown attack id in report JSON");
    r.attack = *id;
    r.params = j.value("params", nlohmann::json::object());
    r.seed = j.value("seed", std::uint64_t{0});
    r.auc = j.at("auc").get<double>();
    for (const auto& [key, value] : j.at("tpr_at_fpr").items())
      r.tpr_at_fpr[std::stod(key)] = value.get<double>();
    r.accuracy_median = j.at("accuracy_median").get<double>();
    return r;
  }
};

namespace detail {

inline void require_both_classes(const LabeledScores& data, std::string_view what) {
  const std::size_t p = data.positives();
  if (p == 0 || p == data.labels.size())
    throw EvalError(std::string(what) + ": needs both classes present");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Mann-Whitney AUC with midrank tie handling:
///   (concordant pairs + 0.5 * tied pairs) / (m1 * m0),
/// computed via the rank-sum identity. Equals the trapezoidal area under
/// the empirical ROC, and satisfies auc(s) + auc(-s) = 1 exactly.
inline double auc_roc(const LabeledScores& data) {
  data.check();
  detail::require_both_classes(data, "auc_roc");

  const std::size_t m = data.scores.size();
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return data.scores[a] < data.scores[b]; });

  // Midranks (1-based); positive rank sum accumulated per tie block.
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    while (j < m && data.scores[order[j]] == data.scores[order[i]]) ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k)
      if (data.labels[order[k]]) positive_rank_sum += midrank;
    i = j;
  }

  const double m1 = static_cast<double>(data.positives());
  const double m0 = static_cast<double>(m) - m1;
  const double numerator = positive_rank_sum - m1 * (m1 + 1.0) / 2.0;
  return numerator / (m1 * m0);
}

/// Conservative fixed-FPR operating points: for each level a, the TPR at
/// the smallest threshold whose empirical FPR (strict > rule) is <= a.
/// Step-function ROC, no interpolation.
inline std::map<double, double> tpr_at_fpr(const LabeledScores& data,
                                           std::span<const double> fpr_levels) {
  data.check();
  detail::require_both_classes(data, "tpr_at_fpr");

  const std::size_t m = data.scores.size();
  const double m1 = static_cast<double>(data.positives());
  const double m0 = static_cast<double>(m) - m1;

  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return data.scores[a] < data.scores[b]; });

  // Candidate thresholds are the distinct score values, ascending. At
  // threshold t, predictions are score > t, so the counts above each tie
  // block give (FPR, TPR) directly.
  struct Point {
    double threshold;
    double fpr;
    double tpr;
  };
  std::vector<Point> curve;
  std::size_t pos_above = data.positives();
  std::size_t neg_above = m - pos_above;
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    std::size_t pos_block = 0, neg_block = 0;
    while (j < m && data.scores[order[j]] == data.scores[order[i]]) {
      if (data.labels[order[j]]) ++pos_block;
      else ++neg_block;
      ++j;
    }
    pos_above -= pos_block;
    neg_above -= neg_block;
    curve.push_back({data.scores[order[i]], static_cast<double>(neg_above) / m0,
                     static_cast<double>(pos_above) / m1});
    i = j;
  }

  std::map<double, double> out;
  for (double level : fpr_levels) {
    if (!(level > 0.0 && level < 1.0))
      throw EvalError("tpr_at_fpr: levels must lie in (0, 1)");
    double tpr = 0.0;  // threshold at the max score is always feasible (FPR 0)
    for (const Point& p : curve) {  // ascending thresholds: first feasible = smallest
      if (p.fpr <= level) {
        tpr = p.tpr;
        break;
      }
    }
    out[level] = tpr;
  }
  return out;
}

/// Accuracy of decide(scores, median(scores)) against the labels; even
/// counts take the mean of the two middle order statistics.
inline double accuracy_at_median(const LabeledScores& data) {
  data.check();
  if (data.scores.empty()) throw EvalError("accuracy_at_median: empty input");
  const double gamma = detail::median_of(data.scores);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.scores.size(); ++i) {
    const std::uint8_t bit = data.scores[i] > gamma ? 1 : 0;
    if (bit == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.scores.size());
}

inline EvalReport evaluate(const AttackScores& scores, const std::vector<std::uint8_t>& labels,
                           std::span<const double> fpr_levels, std::uint64_t seed = 0) {
  LabeledScores data{scores.scores, labels};
  EvalReport report;
  report.attack = scores.attack;
  report.params = scores.params;
  report.seed = seed;
  report.auc = auc_roc(data);
  report.tpr_at_fpr = tpr_at_fpr(data, fpr_levels);
  report.accuracy_median = accuracy_at_median(data);
  return report;
}

// ---------------------------------------------------------------------------
// Aggregation across seeds and configurations
// ---------------------------------------------------------------------------

/// A report tagged with its benchmark coordinates.
struct TaggedReport {
  std::string generator;
  std::string attack_label;
  std::size_t n = 0;
  EvalReport report;
};

struct MetricStats {
  double mean = 0.0;
  double stddev = 0.0;  // population

  static MetricStats of(const std::vector<double>& xs) {
    MetricStats s;
    if (xs.empty()) return s;
    for (double x : xs) s.mean += x;
    s.mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size()));
    return s;
  }
};

struct GroupSummary {
  std::string generator;
  std::string attack_label;
  std::size_t n = 0;
  std::size_t seed_count = 0;
  MetricStats auc;
  std::map<double, MetricStats> tpr;
  MetricStats accuracy;
};

struct AggregateSummary {
  std::vector<GroupSummary> groups;  // ordered by (generator, n, attack)
  // Per (generator, n) cell: attack -> rank by descending mean AUC,
  // ties sharing the average rank.
  std::map<std::string, std::map<std::string, double>> ranks;  // "generator/n" -> attack -> rank
  std::map<std::string, double> average_rank;                  // attack -> mean rank over cells

  nlohmann::json to_json() const {
    nlohmann::json j;
    nlohmann::json gs = nlohmann::json::array();
    for (const auto& g : groups) {
      nlohmann::json jg;
      jg["generator"] = g.generator;
      jg["attack"] = g.attack_label;
      jg["n"] = g.n;
      jg["seeds"] = g.seed_count;
      jg["auc_mean"] = g.auc.mean;
      jg["auc_std"] = g.auc.stddev;
      nlohmann::json tj = nlohmann::json::object();
      for (const auto& [level, st] : g.tpr)
        tj[format_numeric(level)] = {{"mean", st.mean}, {"std", st.stddev}};
      jg["tpr_at_fpr"] = tj;
      jg["accuracy_mean"] = g.accuracy.mean;
      jg["accuracy_std"] = g.accuracy.stddev;
      gs.push_back(jg);
    }
    j["groups"] = gs;
    j["ranks"] = ranks;
    j["average_rank"] = average_rank;
    return j;
  }

  std::string to_text_table() const;
};

/// Group reports by (generator, attack, n); mean and population std across
/// seeds; rank attacks within each (generator, n) cell by descending mean
/// AUC with average-rank tie handling; average the ranks per attack.
inline AggregateSummary aggregate(const std::vector<TaggedReport>& reports) {
  AggregateSummary out;

  std::map<std::tuple<std::string, std::size_t, std::string>, std::vector<const EvalReport*>> by_group;
  for (const auto& t : reports)
    by_group[{t.generator, t.n, t.attack_label}].push_back(&t.report);

  for (const auto& [key, group] : by_group) {
    GroupSummary g;
    g.generator = std::get<0>(key);
    g.n = std::get<1>(key);
    g.attack_label = std::get<2>(key);
    g.seed_count = group.size();
    std::vector<double> aucs, accs;
    std::map<double, std::vector<double>> tprs;
    for (const EvalReport* r : group) {
      aucs.push_back(r->auc);
      accs.push_back(r->accuracy_median);
      for (const auto& [level, v] : r->tpr_at_fpr) tprs[level].push_back(v);
    }
    g.auc = MetricStats::of(aucs);
    g.accuracy = MetricStats::of(accs);
    for (const auto& [level, vs] : tprs) g.tpr[level] = MetricStats::of(vs);
    out.groups.push_back(std::move(g));
  }

  // Ranks per (generator, n) cell.
  std::map<std::string, std::vector<const GroupSummary*>> cells;
  for (const auto& g : out.groups)
    cells[g.generator + "/n=" + std::to_string(g.n)].push_back(&g);

  std::map<std::string, std::vector<double>> rank_lists;
  for (const auto& [cell, groups] : cells) {
    std::vector<const GroupSummary*> sorted = groups;
    std::stable_sort(sorted.begin(), sorted.end(), [](const GroupSummary* a, const GroupSummary* b) {
      return a->auc.mean > b->auc.mean;
    });
    std::size_t i = 0;
    while (i < sorted.size()) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j]->auc.mean == sorted[i]->auc.mean) ++j;
      const double rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
      for (std::size_t k = i; k < j; ++k) {
        out.ranks[cell][sorted[k]->attack_label] = rank;
        rank_lists[sorted[k]->attack_label].push_back(rank);
      }
      i = j;
    }
  }
  for (const auto& [attack, rs] : rank_lists) out.average_rank[attack] = MetricStats::of(rs).mean;
  return out;
}

inline std::string AggregateSummary::to_text_table() const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);

  // AUC table: one row per (generator, n), one column per attack.
  std::vector<std::string> attacks;
  for (const auto& [attack, rank] : average_rank) attacks.push_back(attack);
  std::map<std::string, std::map<std::string, const GroupSummary*>> rows;
  for (const auto& g : groups)
    rows[g.generator + "/n=" + std::to_string(g.n)][g.attack_label] = &g;

  std::size_t label_width = 12;
  for (const auto& [row, cells] : rows) label_width = std::max(label_width, row.size() + 2);

  os << "AUC-ROC, mean (std) across seeds\n";
  os << std::left << std::setw(static_cast<int>(label_width)) << "cell";
  for (const auto& a : attacks) os << std::setw(16) << a;
  os << '\n';
  for (const auto& [row, cells] : rows) {
    os << std::setw(static_cast<int>(label_width)) << row;
    for (const auto& a : attacks) {
      auto it = cells.find(a);
      if (it == cells.end()) {
        os << std::setw(16) << "-";
      } else {
        std::ostringstream cell;
        cell << std::fixed << std::setprecision(3) << it->second->auc.mean << " ("
             << it->second->auc.stddev << ")";
        os << std::setw(16) << cell.str();
      }
    }
    os << '\n';
  }
  os << std::setw(static_cast<int>(label_width)) << "average rank";
  for (const auto& a : attacks) {
    std::ostringstream cell;
    cell << std::fixed << std::setprecision(2) << average_rank.at(a);
    os << std::setw(16) << cell.str();
  }
  os << "\n\n";

  // TPR@FPR + accuracy table: one row per attack, aggregated over cells.
  std::vector<double> levels;
  for (const auto& g : groups) {
    for (const auto& [level, st] : g.tpr)
      if (std::find(levels.begin(), levels.end(), level) == levels.end()) levels.push_back(level);
  }
  std::sort(levels.begin(), levels.end());

  os << "TPR at fixed FPR and accuracy at the median threshold, mean (std) across cells\n";
  os << std::left << std::setw(12) << "attack";
  for (double level : levels) os << std::setw(16) << ("tpr@" + format_numeric(level));
  os << std::setw(16) << "accuracy" << '\n';
  for (const auto& a : attacks) {
    os << std::setw(12) << a;
    for (double level : levels) {
      std::vector<double> vals;
      for (const auto& g : groups)
        if (g.attack_label == a && g.tpr.count(level)) vals.push_back(g.tpr.at(level).mean);
      const MetricStats st = MetricStats::of(vals);
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(3) << st.mean << " (" << st.stddev << ")";
      os << std::setw(16) << (vals.empty() ? "-" : cell.str());
    }
    std::vector<double> accs;
    for (const auto& g : groups)
      if (g.attack_label == a) accs.push_back(g.accuracy.mean);
    const MetricStats st = MetricStats::of(accs);
    std::ostringstream cell;
    cell << std::fixed << std::setprecision(3) << st.mean << " (" << st.stddev << ")";
    os << std::setw(16) << (accs.empty() ? "-" : cell.str()) << '\n';
  }
  return os.str();
}

}  // namespace synaudit
