#include "cscensor/batch_io.hpp"

#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cscensor {
namespace {

struct Row {
  bool hard = false;
  std::vector<std::size_t> support;
  std::vector<double> signs;
  double value = 0.0;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream stream(text);
  while (std::getline(stream, cur, sep)) parts.push_back(cur);
  return parts;
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  if (!text.empty() && text.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::runtime_error("batch: bad number '" + text + "'");
  }
  return v;
}

std::size_t parse_index(const std::string& text) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || v < 1) {
    throw std::runtime_error("batch: bad 1-based index '" + text + "'");
  }
  return v;
}

void write_row(std::ostream& out, const char* kind, std::size_t node, double value,
               const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  out << kind << ' ' << node + 1 << ' ' << to_text(value) << ' ';
  std::ostringstream support;
  std::ostringstream signs;
  bool first = true;
  for (Eigen::Index c = 0; c < row.size(); ++c) {
    if (row(c) == 0.0) continue;
    if (!first) {
      support << ',';
      signs << ',';
    }
    first = false;
    support << c + 1;
    signs << (row(c) > 0.0 ? "+1" : "-1");
  }
  out << support.str() << ' ' << signs.str() << '\n';
}

}  // namespace

std::string to_text(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_batch(std::ostream& out, const FusionBatch<double>& batch) {
  out << "# cscensor fusion batch v1\n";
  out << "N " << batch.N << '\n';
  out << "M " << batch.M << '\n';
  out << "kind node value support signs\n";
  std::size_t a = 0;
  std::size_t b = 0;
  while (a < batch.set_I.size() || b < batch.set_Ineg1.size()) {
    const bool take_value =
        b >= batch.set_Ineg1.size() || (a < batch.set_I.size() && batch.set_I[a] < batch.set_Ineg1[b]);
    if (take_value) {
      write_row(out, "value", batch.set_I[a], batch.u_I(static_cast<Eigen::Index>(a)),
                batch.Phi_I.row(static_cast<Eigen::Index>(a)));
      ++a;
    } else {
      write_row(out, "hard", batch.set_Ineg1[b], 0.0, batch.Phi_Ineg1.row(static_cast<Eigen::Index>(b)));
      ++b;
    }
  }
}

FusionBatch<double> read_batch(std::istream& in) {
  FusionBatch<double> batch;
  std::map<std::size_t, Row> rows;
  bool have_n = false;
  bool have_m = false;
  bool have_header = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    if (key == "N") {
      fields >> batch.N;
      have_n = static_cast<bool>(fields);
    } else if (key == "M") {
      fields >> batch.M;
      have_m = static_cast<bool>(fields);
    } else if (key == "kind") {
      have_header = true;
    } else if (key == "value" || key == "hard") {
      if (!have_n || !have_m || !have_header) throw std::runtime_error("batch: row before header");
      std::string node, value, support, signs;
      if (!(fields >> node >> value >> support >> signs)) throw std::runtime_error("batch: short row");
      Row row;
      row.hard = key == "hard";
      row.value = parse_double(value);
      for (const auto& s : split(support, ',')) row.support.push_back(parse_index(s) - 1);
      for (const auto& s : split(signs, ',')) row.signs.push_back(parse_double(s));
      if (row.support.size() != row.signs.size()) throw std::runtime_error("batch: support/sign count mismatch");
      const std::size_t idx = parse_index(node) - 1;
      if (idx >= batch.M || !rows.emplace(idx, std::move(row)).second) {
        throw std::runtime_error("batch: node index out of range or repeated");
      }
    } else {
      throw std::runtime_error("batch: unknown record '" + key + "'");
    }
  }
  if (!have_n || !have_m) throw std::runtime_error("batch: missing N or M");

  std::vector<double> values;
  for (const auto& [node, row] : rows) {
    if (row.hard) {
      batch.set_Ineg1.push_back(node);
    } else {
      batch.set_I.push_back(node);
      values.push_back(row.value);
    }
  }
  const auto n = static_cast<Eigen::Index>(batch.N);
  batch.Phi_I = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(batch.set_I.size()), n);
  batch.Phi_Ineg1 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(batch.set_Ineg1.size()), n);
  std::size_t a = 0;
  std::size_t b = 0;
  for (const auto& [node, row] : rows) {
    Eigen::MatrixXd& target = row.hard ? batch.Phi_Ineg1 : batch.Phi_I;
    const auto r = static_cast<Eigen::Index>(row.hard ? b++ : a++);
    for (std::size_t k = 0; k < row.support.size(); ++k) {
      if (row.support[k] >= batch.N) throw std::runtime_error("batch: support index exceeds N");
      target(r, static_cast<Eigen::Index>(row.support[k])) = row.signs[k];
    }
  }
  batch.u_I = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return batch;
}

}  // namespace cscensor
