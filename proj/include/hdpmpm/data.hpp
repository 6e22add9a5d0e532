#pragma once

#include <string>
#include <vector>

#include "hdpmpm/types.hpp"

namespace hdpmpm {

/// Sentinel stored in cell matrices where a value is missing. Cell values are
/// 1-based level codes; the mask stays the source of truth.
constexpr int kMissingCell = 0;

/// Grouped categorical data: one row per observation group, one column per
/// variable, cell (i,j) in 1..levels[j] or kMissingCell.
struct Dataset {
  RowMatrixXi cells;
  MaskMatrix mask;  // 1 where the cell is missing
  VectorXi levels;
  std::vector<std::string> variable_names;
  std::vector<std::vector<std::string>> level_labels;  // empty, or one list per variable

  Eigen::Index n() const { return cells.rows(); }
  Eigen::Index p() const { return cells.cols(); }
};

/// Builds a complete (mask-free) dataset from a cell matrix; names default to v1..vp.
Dataset make_dataset(const RowMatrixXi& cells, const VectorXi& levels,
                     std::vector<std::string> names = {});

/// Derives the mask from sentinel positions in `cells`.
MaskMatrix mask_from_cells(const RowMatrixXi& cells);

struct ValidationFinding {
  enum class Code {
    kEmptyData,
    kBadLevelCount,
    kOutOfRange,
    kMaskMismatch,
    kSingleObservedLevel,
    kAllMissing,
  };
  Code code;
  bool hard;
  long row;  // -1 when not cell-specific
  int col;   // -1 when not variable-specific
  std::string message;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationFinding> findings;
  VectorXd missing_rate;  // per variable
  int hard_count = 0;
};

/// Checks range, mask/sentinel agreement and level usage. Soft findings
/// (single observed level, high missingness) do not clear `ok`.
ValidationReport validate_dataset(const Dataset& ds);

}  // namespace hdpmpm
