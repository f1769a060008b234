#include "netrisk/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace netrisk {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  // shortest representation that round-trips
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = std::strtod(buf, nullptr);
    if (back == v) return buf;
  }
  return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

std::optional<double> parse_optional(const std::string& s, const char* what,
                                     const std::string& where) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw_error(ErrorCode::IoFailure,
                "cannot parse " + std::string(what) + " '" + s + "' at " + where);
  return v;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorCode::IoFailure, "cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw_error(ErrorCode::IoFailure, "cannot write " + path);
  return out;
}

int column(const std::vector<std::string>& header, const std::string& name,
           const std::string& path, bool required = true) {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  if (required)
    throw_error(ErrorCode::IoFailure, path + ": missing column " + name);
  return -1;
}

std::string cell(const std::vector<std::string>& row, int idx) {
  if (idx < 0 || static_cast<size_t>(idx) >= row.size()) return {};
  return row[static_cast<size_t>(idx)];
}

}  // namespace

namespace {

bool quotes_unbalanced(const std::string& s) {
  int q = 0;
  for (char c : s)
    if (c == '"') ++q;
  return (q % 2) != 0;
}

}  // namespace

CsvTable read_csv_table(const std::string& path) {
  auto in = open_in(path);
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    // a quoted field may span physical lines
    std::string more;
    while (quotes_unbalanced(line) && std::getline(in, more)) {
      line += '\n';
      line += more;
    }
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

void write_csv_table(const CsvTable& table, const std::string& path) {
  auto out = open_out(path);
  for (size_t i = 0; i < table.header.size(); ++i)
    out << (i ? "," : "") << csv_escape(table.header[i]);
  out << '\n';
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << csv_escape(row[i]);
    out << '\n';
  }
}

NetworkData read_csv_records(const std::string& nodes_path,
                             const std::string& edges_path) {
  NetworkData data;
  {
    auto t = read_csv_table(nodes_path);
    int c_id = column(t.header, "node_id", nodes_path);
    int c_r = column(t.header, "r", nodes_path);
    int c_alpha = column(t.header, "alpha", nodes_path);
    int c_beta = column(t.header, "beta", nodes_path);
    int c_rev = column(t.header, "revenue", nodes_path, false);
    int c_seg = column(t.header, "segment_type", nodes_path, false);
    for (const auto& row : t.rows) {
      NodeRecord nd;
      nd.node_id = cell(row, c_id);
      nd.r = parse_optional(cell(row, c_r), "r", nd.node_id).value_or(0.0);
      nd.alpha = parse_optional(cell(row, c_alpha), "alpha", nd.node_id);
      nd.beta = parse_optional(cell(row, c_beta), "beta", nd.node_id).value_or(0.0);
      if (c_rev >= 0) nd.revenue = parse_optional(cell(row, c_rev), "revenue", nd.node_id);
      if (c_seg >= 0) nd.segment_type = cell(row, c_seg);
      data.nodes.push_back(std::move(nd));
    }
  }
  {
    auto t = read_csv_table(edges_path);
    int c_o = column(t.header, "obligee_id", edges_path);
    int c_p = column(t.header, "principal_id", edges_path);
    int c_w = column(t.header, "weight", edges_path);
    int c_b = column(t.header, "bond_amount", edges_path, false);
    for (const auto& row : t.rows) {
      EdgeRecord ed;
      ed.obligee_id = cell(row, c_o);
      ed.principal_id = cell(row, c_p);
      std::string where = ed.obligee_id + "<-" + ed.principal_id;
      ed.weight = parse_optional(cell(row, c_w), "weight", where);
      if (c_b >= 0) ed.bond_amount = parse_optional(cell(row, c_b), "bond_amount", where);
      data.edges.push_back(std::move(ed));
    }
  }
  return data;
}

NetworkData read_json_records(const std::string& path) {
  auto in = open_in(path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw_error(ErrorCode::IoFailure, path + ": " + e.what());
  }
  NetworkData data;
  for (const auto& jn : doc.value("nodes", json::array())) {
    NodeRecord nd;
    nd.node_id = jn.value("node_id", std::string());
    nd.r = jn.value("r", 0.0);
    if (jn.contains("alpha") && !jn["alpha"].is_null())
      nd.alpha = jn["alpha"].get<double>();
    nd.beta = jn.value("beta", 0.0);
    if (jn.contains("revenue") && !jn["revenue"].is_null())
      nd.revenue = jn["revenue"].get<double>();
    nd.segment_type = jn.value("segment_type", std::string());
    data.nodes.push_back(std::move(nd));
  }
  for (const auto& je : doc.value("edges", json::array())) {
    EdgeRecord ed;
    ed.obligee_id = je.value("obligee_id", std::string());
    ed.principal_id = je.value("principal_id", std::string());
    if (je.contains("weight") && !je["weight"].is_null())
      ed.weight = je["weight"].get<double>();
    if (je.contains("bond_amount") && !je["bond_amount"].is_null())
      ed.bond_amount = je["bond_amount"].get<double>();
    data.edges.push_back(std::move(ed));
  }
  return data;
}

ContractorNetwork load_network_csv(const std::string& nodes_path,
                                   const std::string& edges_path,
                                   const ValidationOptions& options) {
  return build_network(read_csv_records(nodes_path, edges_path), options);
}

ContractorNetwork load_network_json(const std::string& path,
                                    const ValidationOptions& options) {
  return build_network(read_json_records(path), options);
}

void write_csv_records(const NetworkData& data, const std::string& nodes_path,
                       const std::string& edges_path) {
  {
    auto out = open_out(nodes_path);
    out << "node_id,r,alpha,beta,revenue,segment_type\n";
    for (const auto& nd : data.nodes) {
      out << csv_escape(nd.node_id) << ',' << format_double(nd.r) << ',';
      if (nd.alpha.has_value()) out << format_double(*nd.alpha);
      out << ',' << format_double(nd.beta) << ',';
      if (nd.revenue.has_value()) out << format_double(*nd.revenue);
      out << ',' << csv_escape(nd.segment_type) << '\n';
    }
  }
  {
    auto out = open_out(edges_path);
    out << "obligee_id,principal_id,weight,bond_amount\n";
    for (const auto& ed : data.edges) {
      out << csv_escape(ed.obligee_id) << ',' << csv_escape(ed.principal_id) << ',';
      if (ed.weight.has_value()) out << format_double(*ed.weight);
      out << ',';
      if (ed.bond_amount.has_value()) out << format_double(*ed.bond_amount);
      out << '\n';
    }
  }
}

void write_json_records(const NetworkData& data, const std::string& path) {
  json doc;
  doc["nodes"] = json::array();
  for (const auto& nd : data.nodes) {
    json jn;
    jn["node_id"] = nd.node_id;
    jn["r"] = nd.r;
    if (nd.alpha.has_value()) jn["alpha"] = *nd.alpha;
    jn["beta"] = nd.beta;
    if (nd.revenue.has_value()) jn["revenue"] = *nd.revenue;
    if (!nd.segment_type.empty()) jn["segment_type"] = nd.segment_type;
    doc["nodes"].push_back(std::move(jn));
  }
  doc["edges"] = json::array();
  for (const auto& ed : data.edges) {
    json je;
    je["obligee_id"] = ed.obligee_id;
    je["principal_id"] = ed.principal_id;
    if (ed.weight.has_value()) je["weight"] = *ed.weight;
    if (ed.bond_amount.has_value()) je["bond_amount"] = *ed.bond_amount;
    doc["edges"].push_back(std::move(je));
  }
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

}  // namespace netrisk
