#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hct/harness.hpp"

namespace hct {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, const std::filesystem::path& path) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw DataError(path.string() + ": cannot parse number '" + cell + "'");
  }
  return v;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::size_t count_prefix(const std::vector<std::string>& header, const std::string& prefix) {
  std::size_t n = 0;
  for (const auto& h : header) {
    if (h.rfind(prefix, 0) == 0) {
      const auto rest = h.substr(prefix.size());
      if (!rest.empty() && rest.find_first_not_of("0123456789") == std::string::npos) ++n;
    }
  }
  return n;
}

}  // namespace

std::string trace_csv_header(std::size_t m, std::size_t groups) {
  std::string header = "wall_time,iteration";
  for (const auto& name : trace_statistic_names(m, groups)) header += "," + name;
  return header;
}

void emit_trace_csv(const std::vector<TraceRecord>& trace, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  const std::size_t m = trace.empty() ? 0 : static_cast<std::size_t>(trace.front().train_constraints.size());
  const std::size_t groups =
      trace.empty() ? 0 : static_cast<std::size_t>(trace.front().hard_gaps_train.size());
  out << trace_csv_header(m, groups) << '\n';
  for (const auto& r : trace) {
    out << format_double(r.wall_time) << ',' << r.iteration;
    for (double v : trace_statistics(r)) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

std::vector<TraceRecord> parse_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": missing header");
  const auto header = split_line(line);
  const std::size_t m = count_prefix(header, "train_c");
  const std::size_t groups = count_prefix(header, "train_gap");
  if (line != trace_csv_header(m, groups)) {
    throw DataError(path.string() + ": unexpected trace header");
  }

  std::vector<TraceRecord> trace;
  const auto mi = static_cast<Eigen::Index>(m);
  const auto gi = static_cast<Eigen::Index>(groups);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) throw DataError(path.string() + ": ragged row");
    TraceRecord r;
    std::size_t c = 0;
    r.wall_time = parse_cell(cells[c++], path);
    {
      const auto& cell = cells[c++];
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), r.iteration);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw DataError(path.string() + ": bad iteration '" + cell + "'");
      }
    }
    r.train_loss = parse_cell(cells[c++], path);
    r.test_loss = parse_cell(cells[c++], path);
    auto read = [&](Vector& v, Eigen::Index n) {
      v.resize(n);
      for (Eigen::Index i = 0; i < n; ++i) v[i] = parse_cell(cells[c++], path);
    };
    read(r.train_constraints, mi);
    read(r.test_constraints, mi);
    read(r.hard_gaps_train, gi);
    read(r.hard_gaps_test, gi);
    trace.push_back(std::move(r));
  }
  return trace;
}

void emit_csv(const AggregateSeries& series, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "time_bin";
  for (const auto& name : series.statistics) {
    out << ',' << name << "_mean," << name << "_min," << name << "_max";
  }
  out << '\n';
  for (const auto& row : series.rows) {
    out << format_double(row.time_bin);
    for (std::size_t j = 0; j < series.statistics.size(); ++j) {
      out << ',' << format_double(row.mean[j]) << ',' << format_double(row.min[j]) << ','
          << format_double(row.max[j]);
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

AggregateSeries parse_aggregate_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": missing header");
  const auto header = split_line(line);
  if (header.empty() || header[0] != "time_bin" || (header.size() - 1) % 3 != 0) {
    throw DataError(path.string() + ": unexpected aggregate header");
  }

  AggregateSeries series;
  for (std::size_t c = 1; c < header.size(); c += 3) {
    const auto& col = header[c];
    const std::string suffix = "_mean";
    if (col.size() <= suffix.size() || col.compare(col.size() - suffix.size(), suffix.size(), suffix) != 0) {
      throw DataError(path.string() + ": column '" + col + "' should end in _mean");
    }
    const std::string name = col.substr(0, col.size() - suffix.size());
    if (header[c + 1] != name + "_min" || header[c + 2] != name + "_max") {
      throw DataError(path.string() + ": malformed columns for statistic '" + name + "'");
    }
    series.statistics.push_back(name);
  }

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) throw DataError(path.string() + ": ragged row");
    AggregateRow row;
    row.time_bin = parse_cell(cells[0], path);
    for (std::size_t c = 1; c < cells.size(); c += 3) {
      row.mean.push_back(parse_cell(cells[c], path));
      row.min.push_back(parse_cell(cells[c + 1], path));
      row.max.push_back(parse_cell(cells[c + 2], path));
    }
    series.rows.push_back(std::move(row));
  }
  return series;
}

std::vector<std::filesystem::path> emit_plot_data(const AggregateSeries& series,
                                                  const std::filesystem::path& dir,
                                                  const std::string& prefix) {
  auto index_of = [&](const std::string& name) -> std::ptrdiff_t {
    for (std::size_t i = 0; i < series.statistics.size(); ++i) {
      if (series.statistics[i] == name) return static_cast<std::ptrdiff_t>(i);
    }
    return -1;
  };

  // Panels are the statistics that exist in both a train_ and a test_ form,
  // restricted to the loss and the constraint entries.
  std::vector<std::string> panels;
  for (const auto& name : series.statistics) {
    if (name.rfind("train_", 0) != 0) continue;
    const std::string panel = name.substr(6);
    if (panel != "loss" && panel.rfind('c', 0) != 0) continue;
    if (index_of("test_" + panel) >= 0) panels.push_back(panel);
  }

  std::vector<std::filesystem::path> written;
  for (const auto& panel : panels) {
    const auto train = static_cast<std::size_t>(index_of("train_" + panel));
    const auto test = static_cast<std::size_t>(index_of("test_" + panel));
    const auto path = dir / (prefix + "_" + panel + ".csv");
    auto out = open_for_write(path);
    out << "time_bin,train_mean,train_min,train_max,test_mean,test_min,test_max\n";
    for (const auto& row : series.rows) {
      out << format_double(row.time_bin) << ',' << format_double(row.mean[train]) << ','
          << format_double(row.min[train]) << ',' << format_double(row.max[train]) << ','
          << format_double(row.mean[test]) << ',' << format_double(row.min[test]) << ','
          << format_double(row.max[test]) << '\n';
    }
    if (!out) throw DataError("write failed for " + path.string());
    written.push_back(path);
  }
  return written;
}

}  // namespace hct
