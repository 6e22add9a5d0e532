#include "hdpmpm/data.hpp"

#include <string>
#include <vector>

namespace hdpmpm {

MaskMatrix mask_from_cells(const RowMatrixXi& cells) {
  MaskMatrix mask(cells.rows(), cells.cols());
  for (Eigen::Index i = 0; i < cells.rows(); ++i)
    for (Eigen::Index j = 0; j < cells.cols(); ++j)
      mask(i, j) = cells(i, j) == kMissingCell ? 1 : 0;
  return mask;
}

Dataset make_dataset(const RowMatrixXi& cells, const VectorXi& levels,
                     std::vector<std::string> names) {
  Dataset ds;
  ds.cells = cells;
  ds.levels = levels;
  ds.mask = mask_from_cells(cells);
  if (names.empty()) {
    for (Eigen::Index j = 0; j < cells.cols(); ++j) names.push_back("v" + std::to_string(j + 1));
  }
  ds.variable_names = std::move(names);
  return ds;
}

ValidationReport validate_dataset(const Dataset& ds) {
  ValidationReport report;
  const Eigen::Index n = ds.n();
  const Eigen::Index p = ds.p();
  auto add = [&](ValidationFinding f) {
    if (f.hard) ++report.hard_count;
    report.findings.push_back(std::move(f));
  };

  if (n < 1 || p < 1) {
    add({ValidationFinding::Code::kEmptyData, true, -1, -1,
         "dataset must have at least one row and one column"});
    report.ok = false;
    report.missing_rate = VectorXd::Zero(std::max<Eigen::Index>(p, 0));
    return report;
  }
  if (ds.levels.size() != p || ds.mask.rows() != n || ds.mask.cols() != p) {
    add({ValidationFinding::Code::kEmptyData, true, -1, -1,
         "levels/mask dimensions do not match the cell matrix"});
    report.ok = false;
    report.missing_rate = VectorXd::Zero(p);
    return report;
  }

  report.missing_rate = VectorXd::Zero(p);
  for (int j = 0; j < p; ++j) {
    if (ds.levels[j] < 2) {
      add({ValidationFinding::Code::kBadLevelCount, true, -1, j,
           "variable " + std::to_string(j + 1) + " has fewer than 2 levels"});
    }
    long missing = 0;
    std::vector<long> level_counts(std::max(ds.levels[j], 0), 0);
    for (long i = 0; i < n; ++i) {
      const int value = ds.cells(i, j);
      const bool masked = ds.mask(i, j) != 0;
      if (masked != (value == kMissingCell)) {
        add({ValidationFinding::Code::kMaskMismatch, true, i, j,
             "mask and sentinel disagree at row " + std::to_string(i + 1) + ", column " +
                 std::to_string(j + 1)});
      }
      if (masked) {
        ++missing;
        continue;
      }
      if (value < 1 || value > ds.levels[j]) {
        add({ValidationFinding::Code::kOutOfRange, true, i, j,
             "cell value " + std::to_string(value) + " outside 1.." +
                 std::to_string(ds.levels[j]) + " at row " + std::to_string(i + 1) +
                 ", column " + std::to_string(j + 1)});
      } else {
        ++level_counts[value - 1];
      }
    }
    report.missing_rate[j] = static_cast<double>(missing) / static_cast<double>(n);
    if (missing == n) {
      add({ValidationFinding::Code::kAllMissing, true, -1, j,
           "variable " + std::to_string(j + 1) + " has no observed values"});
    } else {
      int observed_levels = 0;
      for (long c : level_counts) observed_levels += c > 0 ? 1 : 0;
      if (observed_levels == 1) {
        add({ValidationFinding::Code::kSingleObservedLevel, false, -1, j,
             "variable " + std::to_string(j + 1) + " has a single observed level"});
      }
    }
  }
  report.ok = report.hard_count == 0;
  return report;
}

}  // namespace hdpmpm
