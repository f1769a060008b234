#include <cfloat>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "netrisk/errors.hpp"
#include "netrisk/io.hpp"
#include "netrisk/meanfield.hpp"
#include "netrisk/network.hpp"
#include "support/testnets.hpp"

using namespace netrisk;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("netrisk_io_" + std::to_string(std::rand()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
  std::string file(const char* name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
}

}  // namespace

TEST_CASE("format_double round-trips every value bit for bit") {
  const double values[] = {0.0,     1.0,      0.1,      1.0 / 3.0, 2.2,
                           1e-300,  5e-324,   DBL_MAX,  DBL_MIN,   0.08865225,
                           1e16,    -17.25,   0.2786885245901639};
  for (double v : values) {
    std::string s = format_double(v);
    double back = std::strtod(s.c_str(), nullptr);
    CHECK(back == v);
  }
  // negative zero keeps its sign
  std::string nz = format_double(-0.0);
  CHECK(std::signbit(std::strtod(nz.c_str(), nullptr)));
}

TEST_CASE("csv tables round-trip quoting, commas, and embedded newlines") {
  TempDir tmp;
  CsvTable table;
  table.header = {"id", "note"};
  table.rows = {{"a,b", "plain"},
                {"quote\"inside", "x"},
                {"multi\nline", "y"},
                {"", "empty-first"}};
  std::string path = tmp.file("t.csv");
  write_csv_table(table, path);
  CsvTable back = read_csv_table(path);
  CHECK(back.header == table.header);
  REQUIRE(back.rows.size() == table.rows.size());
  for (size_t i = 0; i < table.rows.size(); ++i) CHECK(back.rows[i] == table.rows[i]);
}

TEST_CASE("csv reader tolerates CRLF line endings") {
  TempDir tmp;
  std::string nodes = tmp.file("nodes.csv");
  std::string edges = tmp.file("edges.csv");
  write_text(nodes,
             "node_id,r,alpha,beta,revenue,segment_type\r\n"
             "P,0.2,,1,,gen\r\n"
             "O,0,,0,,\r\n");
  write_text(edges,
             "obligee_id,principal_id,weight,bond_amount\r\n"
             "O,P,1,\r\n");
  NetworkData data = read_csv_records(nodes, edges);
  REQUIRE(data.nodes.size() == 2);
  CHECK(data.nodes[0].node_id == "P");
  CHECK(data.nodes[0].r == 0.2);
  CHECK(data.nodes[0].segment_type == "gen");
  REQUIRE(data.edges.size() == 1);
  CHECK(data.edges[0].weight == 1.0);
  CHECK_FALSE(data.edges[0].bond_amount.has_value());
  CHECK_NOTHROW(build_network(data));
}

TEST_CASE("missing columns and unparsable numbers raise IoFailure") {
  TempDir tmp;
  std::string nodes = tmp.file("nodes.csv");
  std::string edges = tmp.file("edges.csv");
  write_text(edges, "obligee_id,principal_id,weight,bond_amount\n");

  write_text(nodes, "node_id,alpha,beta\nP,,1\n");  // no r column
  CHECK_THROWS_WITH_AS(read_csv_records(nodes, edges),
                       doctest::Contains("missing column r"), Error);

  write_text(nodes, "node_id,r,alpha,beta\nP,zero point two,,1\n");
  try {
    read_csv_records(nodes, edges);
    FAIL("expected IoFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoFailure);
  }

  CHECK_THROWS_AS(read_csv_records(tmp.file("absent.csv"), edges), Error);
}

TEST_CASE("csv records survive a write/read cycle with identical solutions") {
  ContractorNetwork toy = testnets::load_toy();
  NetworkData data = to_records(toy);
  TempDir tmp;
  write_csv_records(data, tmp.file("n.csv"), tmp.file("e.csv"));
  NetworkData back = read_csv_records(tmp.file("n.csv"), tmp.file("e.csv"));

  REQUIRE(back.nodes.size() == data.nodes.size());
  for (size_t i = 0; i < data.nodes.size(); ++i) {
    CHECK(back.nodes[i].node_id == data.nodes[i].node_id);
    CHECK(back.nodes[i].r == data.nodes[i].r);
    CHECK(back.nodes[i].alpha == data.nodes[i].alpha);
    CHECK(back.nodes[i].beta == data.nodes[i].beta);
    CHECK(back.nodes[i].segment_type == data.nodes[i].segment_type);
  }
  REQUIRE(back.edges.size() == data.edges.size());
  for (size_t i = 0; i < data.edges.size(); ++i) {
    CHECK(back.edges[i].obligee_id == data.edges[i].obligee_id);
    CHECK(back.edges[i].principal_id == data.edges[i].principal_id);
    CHECK(back.edges[i].weight == data.edges[i].weight);
  }

  // identical inputs imply bitwise-identical fixed points
  MeanFieldSolution a = solve_fixed_point(toy);
  MeanFieldSolution b = solve_fixed_point(build_network(back));
  REQUIRE(a.m.size() == b.m.size());
  for (size_t i = 0; i < a.m.size(); ++i) CHECK(a.m[i] == b.m[i]);
}

TEST_CASE("json records round-trip including bond amounts") {
  NetworkData data = read_csv_records(testnets::data_dir() + "/toy_nodes.csv",
                                      testnets::data_dir() + "/toy_bonds_edges.csv");
  bool has_bond = false;
  for (const auto& e : data.edges) has_bond |= e.bond_amount.has_value();
  REQUIRE(has_bond);

  TempDir tmp;
  write_json_records(data, tmp.file("net.json"));
  NetworkData back = read_json_records(tmp.file("net.json"));

  REQUIRE(back.nodes.size() == data.nodes.size());
  for (size_t i = 0; i < data.nodes.size(); ++i) {
    CHECK(back.nodes[i].node_id == data.nodes[i].node_id);
    CHECK(back.nodes[i].r == data.nodes[i].r);
    CHECK(back.nodes[i].alpha == data.nodes[i].alpha);
    CHECK(back.nodes[i].beta == data.nodes[i].beta);
    CHECK(back.nodes[i].revenue == data.nodes[i].revenue);
  }
  REQUIRE(back.edges.size() == data.edges.size());
  for (size_t i = 0; i < data.edges.size(); ++i) {
    CHECK(back.edges[i].weight == data.edges[i].weight);
    CHECK(back.edges[i].bond_amount == data.edges[i].bond_amount);
  }
}

TEST_CASE("json loader reports malformed documents as IoFailure") {
  TempDir tmp;
  std::string path = tmp.file("broken.json");
  write_text(path, "{\"nodes\": [");
  try {
    read_json_records(path);
    FAIL("expected IoFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoFailure);
  }
}

TEST_CASE("loaders hand diagnostics through unchanged") {
  TempDir tmp;
  std::string nodes = tmp.file("nodes.csv");
  std::string edges = tmp.file("edges.csv");
  write_text(nodes,
             "node_id,r,alpha,beta\n"
             "P,1.5,,1\n"  // r outside [0,1)
             "O,0,,0\n");
  write_text(edges, "obligee_id,principal_id,weight,bond_amount\nO,P,1,\n");
  try {
    load_network_csv(nodes, edges);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    REQUIRE_FALSE(e.diagnostics().empty());
    CHECK(e.diagnostics()[0].code == DiagCode::InvalidProbability);
  }
}
