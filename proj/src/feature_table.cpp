#include "pnet/feature_table.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "pnet/error.hpp"
#include "pnet/model.hpp"

namespace pnet {

FeatureTable::FeatureTable(std::vector<std::string> names, std::size_t rows)
    : names_(std::move(names)), rows_(rows), data_(names_.size() * rows, 0.0) {}

std::span<double> FeatureTable::column(std::size_t c) {
  return {data_.data() + c * rows_, rows_};
}

std::span<const double> FeatureTable::column(std::size_t c) const {
  return {data_.data() + c * rows_, rows_};
}

std::vector<double> FeatureTable::row(std::size_t r) const {
  std::vector<double> out(cols());
  for (std::size_t c = 0; c < cols(); ++c) out[c] = at(r, c);
  return out;
}

std::optional<std::size_t> FeatureTable::find(const std::string& name) const {
  for (std::size_t c = 0; c < names_.size(); ++c)
    if (names_[c] == name) return c;
  return std::nullopt;
}

const std::vector<int>& FeatureTable::labels() const {
  if (!labels_) throw DataError("table has no label column");
  return *labels_;
}

void FeatureTable::set_labels(std::vector<int> labels) {
  if (labels.size() != rows_) throw InputShapeError("label count does not match row count");
  for (int l : labels)
    if (l != 0 && l != 1) throw DataError("labels must be 0 or 1");
  labels_ = std::move(labels);
}

FeatureTable FeatureTable::select_rows(std::span<const std::size_t> rows) const {
  FeatureTable out(names_, rows.size());
  for (std::size_t c = 0; c < cols(); ++c)
    for (std::size_t i = 0; i < rows.size(); ++i) out.at(i, c) = at(rows[i], c);
  if (labels_) {
    std::vector<int> l(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) l[i] = (*labels_)[rows[i]];
    out.labels_ = std::move(l);
  }
  return out;
}

FeatureTable FeatureTable::drop_column(std::size_t c, std::vector<double>* removed) const {
  if (c >= cols()) throw InputShapeError("column index out of range");
  std::vector<std::string> names;
  for (std::size_t k = 0; k < cols(); ++k)
    if (k != c) names.push_back(names_[k]);
  FeatureTable out(std::move(names), rows_);
  for (std::size_t k = 0, dst = 0; k < cols(); ++k) {
    if (k == c) continue;
    auto src = column(k);
    std::copy(src.begin(), src.end(), out.column(dst++).begin());
  }
  if (removed) {
    auto src = column(c);
    removed->assign(src.begin(), src.end());
  }
  out.labels_ = labels_;
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  for (auto& c : cells) {
    std::size_t b = c.find_first_not_of(" \t");
    std::size_t e = c.find_last_not_of(" \t");
    c = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
  }
  return cells;
}

double parse_cell(const std::string& s, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw DataError("line " + std::to_string(line) + ": bad numeric cell '" + s + "'");
  return v;
}

}  // namespace

FeatureTable read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) throw DataError("CSV has no header row");

  std::optional<std::size_t> label_col;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].empty()) throw DataError("CSV header has an empty column name");
    if (header[c] == "label") {
      if (label_col) throw DataError("CSV header has two label columns");
      label_col = c;
    } else {
      names.push_back(header[c]);
    }
  }

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
    std::vector<double> values;
    values.reserve(names.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (label_col && c == *label_col) {
        if (cells[c] != "0" && cells[c] != "1")
          throw DataError("line " + std::to_string(line_no) + ": label must be 0 or 1");
        labels.push_back(cells[c] == "1" ? 1 : 0);
      } else {
        values.push_back(parse_cell(cells[c], line_no));
      }
    }
    rows.push_back(std::move(values));
  }

  FeatureTable table(std::move(names), rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < table.cols(); ++c) table.at(r, c) = rows[r][c];
  if (label_col) table.set_labels(std::move(labels));
  return table;
}

FeatureTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_csv(in);
}

void write_csv(std::ostream& out, const FeatureTable& table) {
  const auto& names = table.names();
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (c) out << ',';
    out << names[c];
  }
  if (table.has_labels()) out << (names.empty() ? "" : ",") << "label";
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.cols(); ++c) {
      if (c) out << ',';
      out << format_real(table.at(r, c));
    }
    if (table.has_labels()) out << (table.cols() ? "," : "") << table.labels()[r];
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const FeatureTable& table) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_csv(out, table);
  if (!out) throw DataError("failed writing '" + path + "'");
}

}  // namespace pnet
