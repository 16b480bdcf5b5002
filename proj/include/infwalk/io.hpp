#pragma once

#include <bit>
#include <charconv>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "embed.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "graph.hpp"
#include "json.hpp"
#include "pmi.hpp"

namespace infwalk {

static_assert(std::endian::native == std::endian::little, "binary dumps assume a little-endian host");

// ---- canonical graph directory -------------------------------------------

/// "u v w" per edge with dense ids, u < v, 17 significant digits.
inline void write_canonical_edges(std::ostream& out, const Graph& g) {
  out << std::setprecision(17);
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << ' ' << e.weight << '\n';
}

/// "id name" per node.
inline void write_node_names(std::ostream& out, const Graph& g) {
  for (NodeId i = 0; i < g.num_nodes(); ++i) out << i << ' ' << g.name(i) << '\n';
}

inline Graph read_canonical_graph(std::istream& edges, std::istream& names) {
  std::vector<std::string> name_list;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(names, line)) {
    ++line_no;
    if (detail::skip_line(line)) continue;
    auto tok = detail::split_ws(line);
    if (tok.size() != 2 || !detail::is_unsigned_integer(tok[0]) || std::stoull(tok[0]) != name_list.size())
      throw detail::parse_error("parse.names", line_no, "expected 'id name' with consecutive ids");
    name_list.push_back(tok[1]);
  }
  std::vector<Edge> list;
  line_no = 0;
  while (std::getline(edges, line)) {
    ++line_no;
    if (detail::skip_line(line)) continue;
    auto tok = detail::split_ws(line);
    if (tok.size() != 3 || !detail::is_unsigned_integer(tok[0]) || !detail::is_unsigned_integer(tok[1]))
      throw detail::parse_error("parse.token", line_no, "expected 'u v w' with dense ids");
    auto w = detail::parse_double(tok[2]);
    if (!w) throw detail::parse_error("parse.token", line_no, "malformed weight");
    list.push_back({std::stoull(tok[0]), std::stoull(tok[1]), *w});
  }
  const std::size_t n = name_list.size();
  return Graph::from_edges(n, std::move(list), std::move(name_list));
}

/// "node label ..." for every node with a non-empty label set, using original names.
inline void write_labels(std::ostream& out, const LabeledDataset& data) {
  for (NodeId i = 0; i < data.labels.size(); ++i) {
    if (data.labels[i].empty()) continue;
    out << data.graph.name(i);
    for (int l : data.labels[i]) out << ' ' << data.label_names[static_cast<std::size_t>(l)];
    out << '\n';
  }
}

// ---- PMI matrices -----------------------------------------------------------

/// Row-major little-endian float64 values.
inline void write_matrix_binary(std::ostream& out, const Eigen::MatrixXd& m) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
}

inline Eigen::MatrixXd read_matrix_binary(std::istream& in, std::size_t rows, std::size_t cols) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
  in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(rm.size() * sizeof(double)))
    throw Error(ErrorKind::Io, "io.truncated", "binary matrix dump is truncated");
  return rm;
}

/// Text sidecar "key=value" lines describing a PMI dump.
inline std::string pmi_sidecar(const PmiMatrix& m) {
  std::ostringstream s;
  s << std::setprecision(17) << "n=" << m.size() << "\nT=" << m.config.window << "\nb=" << m.config.negative_ratio
    << "\nepsilon=" << m.config.epsilon << "\nramp=" << ramp_name(m.config.ramp) << "\nkind=" << pmi_kind_name(m.kind)
    << "\nramped=" << m.ramped_count() << '\n';
  return s.str();
}

/// Debug CSV of the PMI values; refuses matrices larger than 100 x 100.
inline void write_pmi_csv(std::ostream& out, const PmiMatrix& m) {
  if (m.size() > 100) throw Error(ErrorKind::Usage, "io.csv_too_large", "CSV export is limited to n <= 100");
  out << std::setprecision(17);
  const auto n = static_cast<Eigen::Index>(m.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) out << (j ? "," : "") << m.values(i, j);
    out << '\n';
  }
}

inline nlohmann::json to_json(const ErrorReport& r) {
  return {{"relative_frobenius_error", r.relative_frobenius_error},
          {"ramped_disagreement_fraction", r.ramped_disagreement_fraction},
          {"T", r.window},
          {"ramp", ramp_name(r.ramp)}};
}

// ---- embeddings -------------------------------------------------------------

/// "node_name v1 ... vd" with 17 significant digits.
inline void write_embedding_text(std::ostream& out, const Embedding& e) {
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < e.vectors.rows(); ++i) {
    out << (e.node_names.empty() ? std::to_string(i) : e.node_names[static_cast<std::size_t>(i)]);
    for (Eigen::Index k = 0; k < e.vectors.cols(); ++k) out << ' ' << e.vectors(i, k);
    out << '\n';
  }
}

inline Embedding read_embedding_text(std::istream& in) {
  Embedding e;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::skip_line(line)) continue;
    auto tok = detail::split_ws(line);
    if (tok.size() < 2) throw detail::parse_error("parse.token", line_no, "expected 'name v1 ... vd'");
    std::vector<double> row;
    for (std::size_t k = 1; k < tok.size(); ++k) {
      auto v = detail::parse_double(tok[k]);
      if (!v) throw detail::parse_error("parse.token", line_no, "malformed value '" + tok[k] + "'");
      row.push_back(*v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw detail::parse_error("parse.token", line_no, "inconsistent embedding dimension");
    e.node_names.push_back(tok[0]);
    rows.push_back(std::move(row));
  }
  const auto d = rows.empty() ? 0 : rows.front().size();
  e.vectors.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < d; ++k) e.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  e.config.dimension = d;
  return e;
}

inline std::string embedding_sidecar(const Embedding& e) {
  std::ostringstream s;
  s << "n=" << e.num_nodes() << "\nd=" << e.dimension() << "\nmethod=" << method_name(e.config.method) << '\n';
  return s.str();
}

// ---- evaluation reports -----------------------------------------------------

// shortest text that parses back to the same double
inline std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void write_eval_csv(std::ostream& out, const EvalReport& r) {
  out << "method,ratio,repeat_count,micro_f1_mean,micro_f1_std,macro_f1_mean,macro_f1_std\n";
  for (const auto& row : r.rows)
    out << row.method << ',' << shortest(row.ratio) << ',' << row.repeat_count << ',' << shortest(row.micro_f1_mean)
        << ',' << shortest(row.micro_f1_std) << ',' << shortest(row.macro_f1_mean) << ',' << shortest(row.macro_f1_std)
        << '\n';
}

inline nlohmann::json to_json(const EvalReport& r) {
  auto rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"method", row.method},
                    {"ratio", row.ratio},
                    {"repeat_count", row.repeat_count},
                    {"micro_f1_mean", row.micro_f1_mean},
                    {"micro_f1_std", row.micro_f1_std},
                    {"macro_f1_mean", row.macro_f1_mean},
                    {"macro_f1_std", row.macro_f1_std}});
  return {{"rows", rows}};
}

}  // namespace infwalk
