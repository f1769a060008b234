#pragma once

#include <string>
#include <vector>

#include "netrisk/network.hpp"

namespace netrisk {

// CSV pair: nodes.csv (node_id,r,alpha,beta,revenue,segment_type) and
// edges.csv (obligee_id,principal_id,weight,bond_amount). Blank fields are
// absent optionals.
NetworkData read_csv_records(const std::string& nodes_path,
                             const std::string& edges_path);

// Single-file JSON: {"nodes":[...], "edges":[...]} with the same fields.
NetworkData read_json_records(const std::string& path);

ContractorNetwork load_network_csv(const std::string& nodes_path,
                                   const std::string& edges_path,
                                   const ValidationOptions& options = {});
ContractorNetwork load_network_json(const std::string& path,
                                    const ValidationOptions& options = {});

void write_csv_records(const NetworkData& data, const std::string& nodes_path,
                       const std::string& edges_path);
void write_json_records(const NetworkData& data, const std::string& path);

// Shortest-round-trip formatting used for every numeric field we emit, so
// re-ingesting an emitted network reproduces identical solver results.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv_table(const std::string& path);
void write_csv_table(const CsvTable& table, const std::string& path);

}  // namespace netrisk
