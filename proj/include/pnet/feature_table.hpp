#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pnet {

/// Named numeric feature columns plus an optional binary label per row.
///
/// Storage is column-major: growth and fitting read whole columns, while
/// evaluation copies out single rows.
class FeatureTable {
public:
  FeatureTable() = default;
  FeatureTable(std::vector<std::string> names, std::size_t rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  std::span<double> column(std::size_t c);
  std::span<const double> column(std::size_t c) const;
  double& at(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
  double at(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }
  std::vector<double> row(std::size_t r) const;

  std::optional<std::size_t> find(const std::string& name) const;

  bool has_labels() const noexcept { return labels_.has_value(); }
  const std::vector<int>& labels() const;
  void set_labels(std::vector<int> labels);
  void clear_labels() { labels_.reset(); }

  /// Copy of the table restricted to the given rows, in the given order.
  FeatureTable select_rows(std::span<const std::size_t> rows) const;
  /// Copy of the table without column `c`; its values are returned separately.
  FeatureTable drop_column(std::size_t c, std::vector<double>* removed = nullptr) const;

private:
  std::vector<std::string> names_;
  std::size_t rows_ = 0;
  std::vector<double> data_;
  std::optional<std::vector<int>> labels_;
};

/// Reads a CSV with a header row. A column named `label` (when present) must
/// hold 0/1 values and becomes the table's labels; all other cells must be reals.
FeatureTable read_csv(std::istream& in);
FeatureTable read_csv_file(const std::string& path);

/// Writes the header, then one row per table row; labels go last as `label`.
void write_csv(std::ostream& out, const FeatureTable& table);
void write_csv_file(const std::string& path, const FeatureTable& table);

}  // namespace pnet
